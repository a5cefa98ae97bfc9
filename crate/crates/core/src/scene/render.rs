use serde::{Deserialize, Serialize};

use super::geometry::Point;
use super::layout::{LinkStatus, Scene};
use crate::error::{Error, Result};

pub const CHANNEL_BLOCKERS: usize = 0;
pub const CHANNEL_ANCHORS: usize = 1;
pub const CHANNEL_UE: usize = 2;

/// Marker half-size in pixels: a marker covers `(2r+1)²` pixels.
const MARKER_RADIUS_PX: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageDims {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl Default for ImageDims {
    fn default() -> Self {
        ImageDims {
            height: 64,
            width: 64,
            channels: 3,
        }
    }
}

impl ImageDims {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidParameter("image dimensions must be positive".into()));
        }
        if self.channels != 3 {
            return Err(Error::InvalidParameter(format!(
                "the renderer draws exactly 3 channels, got {}",
                self.channels
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Row-major `H×W×C` raster with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedImage {
    dims: ImageDims,
    data: Vec<f32>,
}

impl RenderedImage {
    pub fn zeros(dims: ImageDims) -> Self {
        RenderedImage {
            dims,
            data: vec![0.0; dims.len()],
        }
    }

    pub fn from_vec(dims: ImageDims, data: Vec<f32>) -> Result<Self> {
        if dims.height == 0 || dims.width == 0 || dims.channels == 0 {
            return Err(Error::InvalidParameter("image dimensions must be positive".into()));
        }
        if data.len() != dims.len() {
            return Err(Error::shape(
                "RenderedImage::from_vec",
                dims.len().to_string(),
                data.len().to_string(),
            ));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("pixel values must lie in [0, 1]".into()));
        }
        Ok(RenderedImage { dims, data })
    }

    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.data[(row * self.dims.width + col) * self.dims.channels + channel]
    }

    fn set(&mut self, row: usize, col: usize, channel: usize, v: f32) {
        let i = (row * self.dims.width + col) * self.dims.channels + channel;
        self.data[i] = v;
    }

    pub fn channel_max(&self, channel: usize) -> f32 {
        self.data
            .iter()
            .skip(channel)
            .step_by(self.dims.channels)
            .copied()
            .fold(0.0, f32::max)
    }

    /// Block-average downsampling to `out_h×out_w×C`, flattened row-major.
    /// Each output cell averages the source pixels whose index maps onto it.
    pub fn pooled(&self, out_h: usize, out_w: usize) -> Result<Vec<f64>> {
        let ImageDims {
            height,
            width,
            channels,
        } = self.dims;
        if out_h == 0 || out_w == 0 || out_h > height || out_w > width {
            return Err(Error::InvalidParameter(format!(
                "cannot pool {height}x{width} down to {out_h}x{out_w}"
            )));
        }
        let mut sums = vec![0.0f64; out_h * out_w * channels];
        let mut counts = vec![0u32; out_h * out_w];
        for r in 0..height {
            let orow = r * out_h / height;
            for c in 0..width {
                let ocol = c * out_w / width;
                let cell = orow * out_w + ocol;
                counts[cell] += 1;
                for ch in 0..channels {
                    sums[cell * channels + ch] += f64::from(self.get(r, c, ch));
                }
            }
        }
        for (cell, n) in counts.iter().enumerate() {
            for ch in 0..channels {
                sums[cell * channels + ch] /= f64::from(*n);
            }
        }
        Ok(sums)
    }
}

/// Affine map of the scene bounds onto pixel indices `(row, col)`, with
/// `x` along columns and `y` along rows; points on the far edge land in the
/// last pixel.
pub fn world_to_pixel(scene: &Scene, dims: ImageDims, p: Point) -> (usize, usize) {
    let index = |v: f64, extent: f64, n: usize| -> usize {
        let i = (v / extent * n as f64).floor();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(n - 1)
        }
    };
    (
        index(p.y, scene.bounds_m.1, dims.height),
        index(p.x, scene.bounds_m.0, dims.width),
    )
}

fn stamp(img: &mut RenderedImage, center: (usize, usize), channel: usize) {
    let d = img.dims;
    let (r0, c0) = (
        center.0.saturating_sub(MARKER_RADIUS_PX),
        center.1.saturating_sub(MARKER_RADIUS_PX),
    );
    let (r1, c1) = (
        (center.0 + MARKER_RADIUS_PX).min(d.height - 1),
        (center.1 + MARKER_RADIUS_PX).min(d.width - 1),
    );
    for r in r0..=r1 {
        for c in c0..=c1 {
            img.set(r, c, channel, 1.0);
        }
    }
}

/// Top-down view from the BS camera: blocker occupancy, BS and RIS markers,
/// and a UE marker only when the UE is visible (unblocked).
pub fn render_image(scene: &Scene, ue: Option<Point>, status: LinkStatus, dims: ImageDims) -> RenderedImage {
    let mut img = RenderedImage::zeros(dims);
    for b in &scene.blockers {
        let (r0, c0) = world_to_pixel(scene, dims, b.min());
        let (r1, c1) = world_to_pixel(scene, dims, b.max());
        for r in r0..=r1 {
            for c in c0..=c1 {
                img.set(r, c, CHANNEL_BLOCKERS, 1.0);
            }
        }
    }
    stamp(
        &mut img,
        world_to_pixel(scene, dims, scene.bs_position_m),
        CHANNEL_ANCHORS,
    );
    stamp(
        &mut img,
        world_to_pixel(scene, dims, scene.ris_position_m),
        CHANNEL_ANCHORS,
    );
    if let (LinkStatus::Unblocked, Some(p)) = (status, ue) {
        stamp(&mut img, world_to_pixel(scene, dims, p), CHANNEL_UE);
    }
    img
}
