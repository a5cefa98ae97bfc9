//! The camera-then-RIS blockage predictor and the four-scenario
//! comparison: dataset split, rate-threshold calibration, cascade
//! prediction, per-scenario training and evaluation, and experiment runs.

mod cascade;
mod config;
mod evaluate;
mod experiment;
mod model;
mod scenario;
mod split;

pub use cascade::{
    calibrate_rate_threshold, cascade_predict, threshold_accuracy, Cascade, ThresholdFit, VisibilityDetector,
};
pub use config::{experiment_train_config, ExperimentConfig};
pub use evaluate::{
    accuracy_of, confusion_matrix, evaluate_scenario, training_curve, Confusion, CurvePoint, EvalReport,
};
pub use experiment::{
    confusion_file, curve_file, evaluate_models, history_file, load_models, model_file, report_file, run_experiment,
    run_experiment_file, run_on_dataset, sha256_hex, train_models, write_models, write_reports, CascadeRecord,
    ExperimentManifest, ExperimentSummary, SplitRecord, TrainArtifacts, CASCADE_FILE, EXPERIMENT_MANIFEST_FILE,
    MODELS_DIR, SPLIT_FILE, TIMING_FILE,
};
pub use model::{image_features, train_scenario, PipelineConfig, ScenarioModel};
pub use scenario::Scenario;
pub use split::{split_dataset, split_indices};
