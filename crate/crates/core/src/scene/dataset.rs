//! Labeled sample generation and the on-disk dataset format.
//!
//! A dataset directory holds `manifest.json` (generation parameters,
//! per-sample metadata, SHA-256 content hash), `images.bin` (little-endian
//! `f32`, `N×H×W×C`, row-major) and `features.csv`
//! (`index,direct_rate,ris_rate,label` with label codes −1/0/1). The hash
//! covers `images.bin` followed by `features.csv`.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::geometry::Point;
use super::layout::{generate_scene, link_status, LinkStatus, SceneConfig};
use super::mpc::{synthesize_mpcs, PathCounts, PathTiming};
use super::render::{render_image, ImageDims, RenderedImage};
use super::trajectory::generate_trajectory;
use crate::channel::{
    channel_bs_ris, channel_bs_ue, channel_ris_ue, data_rate, optimize_ris, ArrayGeometry, PropagationConfig, Pulse,
};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const IMAGES_FILE: &str = "images.bin";
pub const FEATURES_FILE: &str = "features.csv";
pub const DATASET_FORMAT_VERSION: u32 = 1;

const EPISODE_SALT: u64 = 0x4550_4953_4f44_4553;

/// SplitMix64 finalizer over `seed` and `index`; used to derive independent
/// per-episode and per-sample RNG seeds.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Trajectory length `U`; consecutive samples share an episode.
    pub locations_per_episode: usize,
    pub ue_speed_mps: f64,
    pub step_interval_s: f64,
    pub absent_probability: f64,
    pub carrier_frequency_hz: f64,
    pub snr_db: f64,
    pub num_bs_antennas: usize,
    pub num_ris_elements: usize,
    pub element_spacing_wavelengths: f64,
    pub paths_bs_ue: usize,
    pub paths_bs_ris: usize,
    pub paths_ris_ue: usize,
    pub sampling_time_s: f64,
    pub cyclic_prefix_count: usize,
    pub pulse: Pulse,
    pub ris_rounds: usize,
    pub image_height: usize,
    pub image_width: usize,
    pub scene: SceneConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        let counts = PathCounts::default();
        DatasetConfig {
            n_samples: 5000,
            seed: 0,
            locations_per_episode: 10,
            ue_speed_mps: 20.0,
            step_interval_s: 0.1,
            absent_probability: 1.0 / 3.0,
            carrier_frequency_hz: 28e9,
            snr_db: 100.0,
            num_bs_antennas: 4,
            num_ris_elements: 8192,
            element_spacing_wavelengths: 0.5,
            paths_bs_ue: counts.bs_ue,
            paths_bs_ris: counts.bs_ris,
            paths_ris_ue: counts.ris_ue,
            sampling_time_s: 1e-5,
            cyclic_prefix_count: 1,
            pulse: Pulse::Sinc,
            ris_rounds: 4,
            image_height: 64,
            image_width: 64,
            scene: SceneConfig::default(),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("dataset: {m}")));
        if self.n_samples == 0 {
            return bad("n_samples must be >= 1");
        }
        if self.locations_per_episode == 0 {
            return bad("locations_per_episode must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.absent_probability) {
            return bad("absent_probability must lie in [0, 1]");
        }
        if !(self.ue_speed_mps >= 0.0 && self.ue_speed_mps.is_finite()) {
            return bad("ue_speed_mps must be finite and >= 0");
        }
        if !(self.step_interval_s >= 0.0 && self.step_interval_s.is_finite()) {
            return bad("step_interval_s must be finite and >= 0");
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite");
        }
        if self.paths_bs_ue == 0 || self.paths_bs_ris == 0 || self.paths_ris_ue == 0 {
            return bad("every link needs at least one path");
        }
        if !(self.sampling_time_s > 0.0 && self.sampling_time_s.is_finite()) {
            return bad("sampling_time_s must be > 0");
        }
        if self.cyclic_prefix_count == 0 {
            return bad("cyclic_prefix_count must be >= 1");
        }
        if self.ris_rounds == 0 {
            return bad("ris_rounds must be >= 1");
        }
        self.image_dims().validate()?;
        self.geometry()?;
        self.propagation()?;
        self.scene.validate()
    }

    pub fn image_dims(&self) -> ImageDims {
        ImageDims {
            height: self.image_height,
            width: self.image_width,
            channels: 3,
        }
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn propagation(&self) -> Result<PropagationConfig<f64>> {
        Ok(
            PropagationConfig::new(self.carrier_frequency_hz, self.ue_speed_mps, self.snr_linear())?
                .with_pulse(self.pulse),
        )
    }

    pub fn geometry(&self) -> Result<ArrayGeometry<f64>> {
        ArrayGeometry::with_spacing(
            self.num_bs_antennas,
            self.num_ris_elements,
            self.element_spacing_wavelengths,
        )
    }

    pub fn path_counts(&self) -> PathCounts {
        PathCounts {
            bs_ue: self.paths_bs_ue,
            bs_ris: self.paths_bs_ris,
            ris_ue: self.paths_ris_ue,
        }
    }

    fn timing(&self) -> PathTiming {
        PathTiming {
            sampling_time_s: self.sampling_time_s,
            cyclic_prefix_count: self.cyclic_prefix_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub episode: usize,
    pub location_index: usize,
    pub seed_used: u64,
    pub ue_position: Option<Point>,
    pub label: LinkStatus,
    pub direct_rate: f64,
    pub ris_rate: f64,
    pub image: RenderedImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub absent: usize,
    pub unblocked: usize,
    pub blocked: usize,
}

impl ClassCounts {
    pub fn of<'a>(labels: impl IntoIterator<Item = &'a LinkStatus>) -> Self {
        let mut c = ClassCounts::default();
        for l in labels {
            match l {
                LinkStatus::Absent => c.absent += 1,
                LinkStatus::Unblocked => c.unblocked += 1,
                LinkStatus::Blocked => c.blocked += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.absent + self.unblocked + self.blocked
    }

    /// `[absent, unblocked, blocked]` fractions.
    pub fn frequencies(&self) -> [f64; 3] {
        let n = self.total().max(1) as f64;
        [
            self.absent as f64 / n,
            self.unblocked as f64 / n,
            self.blocked as f64 / n,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub index: usize,
    pub episode: usize,
    pub location_index: usize,
    pub seed: u64,
    pub label: LinkStatus,
    pub ue_position_m: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub generator: String,
    pub config: DatasetConfig,
    /// `[N, H, W, C]`.
    pub image_shape: [usize; 4],
    pub class_counts: ClassCounts,
    pub content_sha256: String,
    pub samples: Vec<SampleMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: Manifest,
    pub samples: Vec<Sample>,
}

/// Builds sample `index`. Everything random is drawn from seeds derived from
/// `(cfg.seed, episode)` and `(cfg.seed, index)`, so the result does not
/// depend on generation order.
pub fn generate_sample(cfg: &DatasetConfig, index: usize) -> Result<Sample> {
    let u = cfg.locations_per_episode;
    let (episode, location_index) = (index / u, index % u);
    let mut episode_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed ^ EPISODE_SALT, episode as u64));
    let scene = generate_scene(&cfg.scene, &mut episode_rng)?;
    let trajectory = generate_trajectory(
        &scene,
        u,
        cfg.ue_speed_mps,
        cfg.step_interval_s,
        cfg.absent_probability,
        &mut episode_rng,
    )?;
    let ue = trajectory.positions[location_index];
    let label = link_status(&scene, ue)?;

    let seed_used = mix_seed(cfg.seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_used);
    let prop = cfg.propagation()?;
    let geom = cfg.geometry()?;
    let paths = synthesize_mpcs(&scene, ue, label, &prop, cfg.path_counts(), cfg.timing(), &mut rng)?;
    let h_b = channel_bs_ue(&paths.bs_ue, &prop, &geom)?;
    let h_r = channel_bs_ris(&paths.bs_ris, &prop, &geom)?;
    let h_u = channel_ris_ue(&paths.ris_ue, &prop, &geom)?;
    let snr = prop.snr_linear();
    let direct_rate = data_rate(&h_b, snr);
    let ris_rate = data_rate(&optimize_ris(&h_b, &h_r, &h_u, cfg.ris_rounds)?.gain, snr);
    let image = render_image(&scene, ue, label, cfg.image_dims());
    Ok(Sample {
        index,
        episode,
        location_index,
        seed_used,
        ue_position: ue,
        label,
        direct_rate,
        ris_rate,
        image,
    })
}

/// Generates `cfg.n_samples` samples in parallel (results are identical to
/// sequential generation) and the manifest describing them.
pub fn generate_dataset(cfg: &DatasetConfig) -> Result<Dataset> {
    cfg.validate()?;
    let samples = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| generate_sample(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let (images, features) = encode(&samples);
    let manifest = build_manifest(cfg.clone(), &samples, &content_hash(&images, features.as_bytes()));
    Ok(Dataset { manifest, samples })
}

fn build_manifest(config: DatasetConfig, samples: &[Sample], hash: &str) -> Manifest {
    let dims = config.image_dims();
    Manifest {
        format_version: DATASET_FORMAT_VERSION,
        generator: format!("risblock {}", env!("CARGO_PKG_VERSION")),
        image_shape: [samples.len(), dims.height, dims.width, dims.channels],
        class_counts: ClassCounts::of(samples.iter().map(|s| &s.label)),
        content_sha256: hash.to_string(),
        samples: samples
            .iter()
            .map(|s| SampleMeta {
                index: s.index,
                episode: s.episode,
                location_index: s.location_index,
                seed: s.seed_used,
                label: s.label,
                ue_position_m: s.ue_position.map(|p| [p.x, p.y]),
            })
            .collect(),
        config,
    }
}

fn encode(samples: &[Sample]) -> (Vec<u8>, String) {
    let per = samples.first().map_or(0, |s| s.image.data().len());
    let mut images = Vec::with_capacity(samples.len() * per * 4);
    let mut features = String::from("index,direct_rate,ris_rate,label\n");
    for s in samples {
        for v in s.image.data() {
            images.extend_from_slice(&v.to_le_bytes());
        }
        let _ = writeln!(
            features,
            "{},{},{},{}",
            s.index,
            s.direct_rate,
            s.ris_rate,
            s.label.code()
        );
    }
    (images, features)
}

pub fn content_hash(images: &[u8], features: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(images);
    h.update(features);
    hex::encode(h.finalize())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    if !path.exists() {
        return Err(Error::Missing(path.to_path_buf()));
    }
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

impl Dataset {
    pub fn class_counts(&self) -> ClassCounts {
        self.manifest.class_counts
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let (images, features) = encode(&self.samples);
        write(&dir.join(IMAGES_FILE), &images)?;
        write(&dir.join(FEATURES_FILE), features.as_bytes())?;
        let mut manifest = serde_json::to_string_pretty(&self.manifest)?;
        manifest.push('\n');
        write(&dir.join(MANIFEST_FILE), manifest.as_bytes())
    }

    /// Reads and hash-verifies the manifest, reading every file once.
    pub fn read_manifest(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        let manifest: Manifest = serde_json::from_slice(&read(&path)?).map_err(|e| Error::Format {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        Ok(manifest)
    }

    /// Loads a dataset, refusing it if the files do not hash to the value
    /// recorded in the manifest.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = Self::read_manifest(dir)?;
        let images_path = dir.join(IMAGES_FILE);
        let features_path = dir.join(FEATURES_FILE);
        let images = read(&images_path)?;
        let features = read(&features_path)?;
        let actual = content_hash(&images, &features);
        if actual != manifest.content_sha256 {
            return Err(Error::HashMismatch {
                path: dir.to_path_buf(),
                expected: manifest.content_sha256.clone(),
                actual,
            });
        }
        let [n, h, w, c] = manifest.image_shape;
        let dims = ImageDims {
            height: h,
            width: w,
            channels: c,
        };
        let per = dims.len();
        let fail = |path: &Path, reason: String| Error::Format {
            path: path.to_path_buf(),
            reason,
        };
        if images.len() != n * per * 4 {
            return Err(fail(
                &images_path,
                format!("expected {} bytes, found {}", n * per * 4, images.len()),
            ));
        }
        if manifest.samples.len() != n {
            return Err(fail(
                &dir.join(MANIFEST_FILE),
                "sample metadata count disagrees with image_shape".into(),
            ));
        }
        let text = String::from_utf8(features).map_err(|_| fail(&features_path, "not UTF-8".into()))?;
        let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != n {
            return Err(fail(&features_path, format!("expected {n} rows, found {}", rows.len())));
        }
        let mut samples = Vec::with_capacity(n);
        for (i, (row, meta)) in rows.iter().zip(&manifest.samples).enumerate() {
            let cols: Vec<&str> = row.split(',').collect();
            let line_err = |what: &str| fail(&features_path, format!("line {}: {what}", i + 2));
            if cols.len() != 4 {
                return Err(line_err("expected 4 columns"));
            }
            let index: usize = cols[0].parse().map_err(|_| line_err("bad index"))?;
            let direct_rate: f64 = cols[1].parse().map_err(|_| line_err("bad direct_rate"))?;
            let ris_rate: f64 = cols[2].parse().map_err(|_| line_err("bad ris_rate"))?;
            let label = cols[3]
                .parse::<i8>()
                .ok()
                .and_then(LinkStatus::from_code)
                .ok_or_else(|| line_err("bad label"))?;
            if index != meta.index || label != meta.label {
                return Err(line_err("row disagrees with the manifest"));
            }
            let pixels = images[i * per * 4..(i + 1) * per * 4]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            samples.push(Sample {
                index,
                episode: meta.episode,
                location_index: meta.location_index,
                seed_used: meta.seed,
                ue_position: meta.ue_position_m.map(|p| Point::new(p[0], p[1])),
                label,
                direct_rate,
                ris_rate,
                image: RenderedImage::from_vec(dims, pixels).map_err(|e| fail(&images_path, e.to_string()))?,
            });
        }
        Ok(Dataset { manifest, samples })
    }
}
