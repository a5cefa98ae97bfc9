use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{LinkStatus, RenderedImage, CHANNEL_UE};

/// Result of [`calibrate_rate_threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub threshold: f64,
    pub train_accuracy: f64,
}

/// Fraction of `(rate, label)` pairs classified correctly by "Blocked iff
/// rate ≥ threshold".
pub fn threshold_accuracy(data: &[(f64, LinkStatus)], threshold: f64) -> f64 {
    let correct = data
        .iter()
        .filter(|(r, l)| (*r >= threshold) == (*l == LinkStatus::Blocked))
        .count();
    correct as f64 / data.len().max(1) as f64
}

/// Picks the ris-rate threshold separating Absent from Blocked with the best
/// training accuracy. Candidates are the midpoints between consecutive
/// distinct rates plus one threshold at the smallest rate (everything
/// Blocked) and one above the largest (everything Absent); ties go to the
/// smallest candidate. With a single distinct rate the threshold is that
/// rate. Samples with other labels are ignored.
pub fn calibrate_rate_threshold(data: &[(f64, LinkStatus)]) -> Result<ThresholdFit> {
    let mut pts: Vec<(f64, bool)> = data
        .iter()
        .filter(|(_, l)| *l != LinkStatus::Unblocked)
        .map(|(r, l)| (*r, *l == LinkStatus::Blocked))
        .collect();
    if pts.iter().any(|(r, _)| !r.is_finite()) {
        return Err(Error::InvalidParameter("rates must be finite".into()));
    }
    let blocked_total = pts.iter().filter(|p| p.1).count();
    if blocked_total == 0 || blocked_total == pts.len() {
        return Err(Error::InvalidParameter(
            "threshold calibration needs both absent and blocked samples".into(),
        ));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pts.len() as f64;
    let lo = pts[0].0;
    let hi = pts[pts.len() - 1].0;
    if lo == hi {
        return Ok(ThresholdFit {
            threshold: lo,
            train_accuracy: blocked_total as f64 / n,
        });
    }

    // Threshold at the smallest rate: every sample predicted Blocked.
    let mut best = ThresholdFit {
        threshold: lo,
        train_accuracy: blocked_total as f64 / n,
    };
    // Sweep: after consuming all samples with rate <= pts[i].0, those are
    // predicted Absent and the rest Blocked.
    let (mut absent_below, mut blocked_below) = (0usize, 0usize);
    let mut i = 0;
    while i < pts.len() {
        let v = pts[i].0;
        while i < pts.len() && pts[i].0 == v {
            if pts[i].1 {
                blocked_below += 1;
            } else {
                absent_below += 1;
            }
            i += 1;
        }
        let threshold = if i < pts.len() {
            0.5 * (v + pts[i].0)
        } else {
            hi + hi.abs().max(1.0)
        };
        let acc = (absent_below + blocked_total - blocked_below) as f64 / n;
        if acc > best.train_accuracy {
            best = ThresholdFit {
                threshold,
                train_accuracy: acc,
            };
        }
    }
    Ok(best)
}

/// Stage-1 rule: the UE is visible when any UE-channel pixel exceeds
/// `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityDetector {
    pub threshold: f32,
}

impl Default for VisibilityDetector {
    fn default() -> Self {
        VisibilityDetector { threshold: 0.5 }
    }
}

impl VisibilityDetector {
    pub fn detects(&self, image: &RenderedImage) -> bool {
        image.channel_max(CHANNEL_UE) > self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    pub detector: VisibilityDetector,
    pub rate_threshold: f64,
}

/// Camera first: a visible UE is Unblocked. Otherwise the RIS-assisted rate
/// decides between Blocked (rate at or above the threshold) and Absent.
pub fn cascade_predict(image: &RenderedImage, ris_rate: f64, cascade: &Cascade) -> LinkStatus {
    if cascade.detector.detects(image) {
        LinkStatus::Unblocked
    } else if ris_rate >= cascade.rate_threshold {
        LinkStatus::Blocked
    } else {
        LinkStatus::Absent
    }
}
