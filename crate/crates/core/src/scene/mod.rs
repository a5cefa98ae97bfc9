//! Synthetic plan-view scenes: a BS with a colocated camera, an RIS panel,
//! rectangular blockers and a mobile UE. Produces ground-truth link status,
//! geometry-consistent multipath parameters, camera rasters and labeled
//! datasets.

mod dataset;
mod geometry;
mod layout;
mod mpc;
mod render;
mod trajectory;

pub use dataset::{
    content_hash, generate_dataset, generate_sample, mix_seed, ClassCounts, Dataset, DatasetConfig, Manifest, Sample,
    SampleMeta, DATASET_FORMAT_VERSION, FEATURES_FILE, IMAGES_FILE, MANIFEST_FILE,
};
pub use geometry::{los_blocked, Point, Rect};
pub use layout::{generate_scene, link_status, LinkStatus, Scene, SceneConfig};
pub use mpc::{free_space_amplitude, synthesize_mpcs, LinkPaths, PathCounts, PathTiming};
pub use render::{
    render_image, world_to_pixel, ImageDims, RenderedImage, CHANNEL_ANCHORS, CHANNEL_BLOCKERS, CHANNEL_UE,
};
pub use trajectory::{generate_trajectory, Trajectory};
