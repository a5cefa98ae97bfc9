//! Ternary link-status classifier: a two-layer perceptron over pooled image
//! features with the rate feature joined before the output layer, trained
//! by mini-batch SGD on the mean cross-entropy.

mod gradcheck;
mod mlp;
mod model_io;
mod standardize;
mod tensor;
mod train;

pub use gradcheck::{compare_gradients, grad_check, random_grad_checks, GradCheckReport, RELATIVE_ERROR_FLOOR};
pub use mlp::{
    argmax_index, backward, cross_entropy, forward, objective, BatchGradient, Example, MlpParams, ProbVector,
    DEFAULT_HIDDEN, NUM_CLASSES, PROB_FLOOR,
};
pub use model_io::{history_csv, parse_history_csv, TrainedModel, MODEL_MAGIC, MODEL_VERSION};
pub use standardize::Standardizer;
pub use tensor::Tensor;
pub use train::{lr_schedule, sgd_step, train, train_from, HistoryRecord, TrainConfig, TrainOutcome};
