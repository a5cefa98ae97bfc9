//! Workbench for blockage prediction in RIS-assisted downlinks.
//!
//! - [`channel`]: multipath gains with Doppler, RIS phase control, rates.
//! - [`scene`]: synthetic plan-view scenes, ground-truth link status,
//!   camera rasters, and on-disk datasets.
//! - [`learn`]: a small deterministic classifier trained with SGD.
//! - [`pipeline`]: the camera-then-RIS cascade and four-scenario evaluation.
//! - [`cli`]: the `risblock` command-line front end.
//!
//! Channel and learning code is generic over [`Scalar`] (`f32`/`f64`);
//! the aliases below fix the precision used by the dataset pipeline.

pub mod channel;
pub mod cli;
pub mod error;
pub mod learn;
pub mod pipeline;
pub mod scalar;
pub mod scene;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Complex64 = num_complex::Complex<f64>;
pub type ChannelMatrix64 = channel::ChannelMatrix<f64>;
pub type PropagationConfig64 = channel::PropagationConfig<f64>;
pub type ArrayGeometry64 = channel::ArrayGeometry<f64>;
pub type MultipathComponent64 = channel::MultipathComponent<f64>;
pub type BsRisPath64 = channel::BsRisPath<f64>;
pub type RisConfig64 = channel::RisConfig<f64>;
pub type MlpParams64 = learn::MlpParams<f64>;
pub type Tensor64 = learn::Tensor<f64>;
pub type ProbVector64 = learn::ProbVector<f64>;
