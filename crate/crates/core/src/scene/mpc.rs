use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_6, PI, TAU};

use super::geometry::Point;
use super::layout::{LinkStatus, Scene};
use crate::channel::{BsRisPath, MultipathComponent, PropagationConfig};
use crate::error::{Error, Result};

/// Number of paths per link (`K_b`, `K_r`, `K_u`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCounts {
    pub bs_ue: usize,
    pub bs_ris: usize,
    pub ris_ue: usize,
}

impl Default for PathCounts {
    fn default() -> Self {
        PathCounts {
            bs_ue: 5,
            bs_ris: 5,
            ris_ue: 5,
        }
    }
}

/// Sampling time and cyclic-prefix tap count shared by every path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTiming {
    pub sampling_time_s: f64,
    pub cyclic_prefix_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkPaths {
    pub bs_ue: Vec<MultipathComponent<f64>>,
    pub bs_ris: Vec<BsRisPath<f64>>,
    pub ris_ue: Vec<MultipathComponent<f64>>,
}

/// Free-space amplitude `λ/(4πd)`.
pub fn free_space_amplitude(wavelength_m: f64, distance_m: f64) -> f64 {
    wavelength_m / (4.0 * PI * distance_m)
}

struct LinkDraw<'a> {
    cfg: &'a PropagationConfig<f64>,
    timing: PathTiming,
}

impl LinkDraw<'_> {
    fn los(&self, from: Point, to: Point, scale: f64) -> MultipathComponent<f64> {
        let d = from.distance(to);
        MultipathComponent {
            amplitude: Complex::new(scale * free_space_amplitude(self.cfg.wavelength_m(), d), 0.0),
            delay_s: d / PropagationConfig::<f64>::speed_of_light(),
            sampling_time_s: self.timing.sampling_time_s,
            cyclic_prefix_count: self.timing.cyclic_prefix_count,
            azimuth_rad: from.bearing_to(to),
            elevation_rad: 0.0,
        }
    }

    /// Scatterer bounce relative to the link's LOS path.
    fn nlos<R: Rng + ?Sized>(&self, los: &MultipathComponent<f64>, rng: &mut R) -> MultipathComponent<f64> {
        let delay = los.delay_s * rng.random_range(1.1..3.0);
        let gain = rng.random_range(0.05..0.3);
        let phase = rng.random_range(0.0..TAU);
        MultipathComponent {
            amplitude: los.amplitude * Complex::from_polar(gain, phase),
            delay_s: delay,
            sampling_time_s: los.sampling_time_s,
            cyclic_prefix_count: los.cyclic_prefix_count,
            azimuth_rad: rng.random_range(0.0..TAU),
            elevation_rad: rng.random_range(-FRAC_PI_6..=FRAC_PI_6),
        }
    }

    fn link<R: Rng + ?Sized>(
        &self,
        from: Point,
        to: Point,
        scale: f64,
        k: usize,
        rng: &mut R,
    ) -> Vec<MultipathComponent<f64>> {
        let los = self.los(from, to, scale);
        let mut out = Vec::with_capacity(k);
        out.push(los);
        for _ in 1..k {
            out.push(self.nlos(&los, rng));
        }
        out
    }
}

/// Multipath parameters for the three links of one sample.
///
/// The first path of each link is the geometric line of sight. The other
/// paths are drawn relative to that (possibly attenuated) LOS path, so a
/// blocked UE sees every BS→UE path through the penetration loss. An absent
/// UE has no BS→UE or RIS→UE paths.
pub fn synthesize_mpcs<R: Rng + ?Sized>(
    scene: &Scene,
    ue: Option<Point>,
    status: LinkStatus,
    cfg: &PropagationConfig<f64>,
    counts: PathCounts,
    timing: PathTiming,
    rng: &mut R,
) -> Result<LinkPaths> {
    if counts.bs_ue == 0 || counts.bs_ris == 0 || counts.ris_ue == 0 {
        return Err(Error::InvalidParameter("every link needs at least one path".into()));
    }
    if timing.sampling_time_s.is_nan() || timing.sampling_time_s <= 0.0 || timing.cyclic_prefix_count == 0 {
        return Err(Error::InvalidParameter(
            "sampling time must be > 0 and the tap count >= 1".into(),
        ));
    }
    let draw = LinkDraw { cfg, timing };
    let (bs, ris) = (scene.bs_position_m, scene.ris_position_m);

    let arrival = draw.link(ris, bs, 1.0, counts.bs_ris, rng);
    let bs_ris = arrival
        .into_iter()
        .enumerate()
        .map(|(k, path)| {
            let departure_azimuth_rad = if k == 0 {
                bs.bearing_to(ris)
            } else {
                rng.random_range(0.0..TAU)
            };
            let departure_elevation_rad = if k == 0 {
                0.0
            } else {
                rng.random_range(-FRAC_PI_6..=FRAC_PI_6)
            };
            BsRisPath {
                path,
                departure_azimuth_rad,
                departure_elevation_rad,
            }
        })
        .collect();

    let (ue, status) = match (ue, status) {
        (Some(p), LinkStatus::Unblocked | LinkStatus::Blocked) => (p, status),
        _ => {
            return Ok(LinkPaths {
                bs_ue: Vec::new(),
                bs_ris,
                ris_ue: Vec::new(),
            })
        }
    };
    if ue == bs || ue == ris {
        return Err(Error::InvalidParameter("UE coincides with the BS or the RIS".into()));
    }
    let blockage = if status == LinkStatus::Blocked {
        10f64.powf(-scene.penetration_loss_db / 20.0)
    } else {
        1.0
    };
    let bs_ue = draw.link(bs, ue, blockage, counts.bs_ue, rng);
    let ris_ue = draw.link(ris, ue, 1.0, counts.ris_ue, rng);
    Ok(LinkPaths { bs_ue, bs_ris, ris_ue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SPEED_OF_LIGHT_MPS;
    use crate::scene::geometry::Rect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scene() -> Scene {
        Scene::new(
            (10.0, 10.0),
            Point::new(0.0, 0.0),
            Point::new(10.0, 10.0),
            vec![],
            30.0,
            Rect::from_corners(Point::new(0.0, 0.0), Point::new(10.0, 10.0)).unwrap(),
        )
        .unwrap()
    }

    fn timing() -> PathTiming {
        PathTiming {
            sampling_time_s: 1e-5,
            cyclic_prefix_count: 1,
        }
    }

    fn cfg() -> PropagationConfig<f64> {
        PropagationConfig::new(28e9, 20.0, 1.0).unwrap()
    }

    #[test]
    fn absent_ue_has_no_receive_paths() {
        let p = synthesize_mpcs(
            &scene(),
            None,
            LinkStatus::Absent,
            &cfg(),
            PathCounts::default(),
            timing(),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert!(p.bs_ue.is_empty() && p.ris_ue.is_empty());
        assert_eq!(p.bs_ris.len(), 5);
    }

    #[test]
    fn los_delay_is_distance_over_c() {
        let ue = Some(Point::new(3.0, 4.0));
        let p = synthesize_mpcs(
            &scene(),
            ue,
            LinkStatus::Unblocked,
            &cfg(),
            PathCounts::default(),
            timing(),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!(p.bs_ue[0].delay_s, 5.0 / SPEED_OF_LIGHT_MPS);
        assert!((p.bs_ue[0].delay_s - 1.6678e-8).abs() < 1e-12);
        let lambda = SPEED_OF_LIGHT_MPS / 28e9;
        assert!((p.bs_ue[0].amplitude.re - lambda / (4.0 * PI * 5.0)).abs() < 1e-18);
        for n in &p.bs_ue[1..] {
            assert!(n.delay_s > p.bs_ue[0].delay_s && n.amplitude.norm() < p.bs_ue[0].amplitude.norm());
        }
    }

    #[test]
    fn blocked_los_is_attenuated_by_penetration_loss() {
        let ue = Some(Point::new(3.0, 4.0));
        let run = |status| {
            synthesize_mpcs(
                &scene(),
                ue,
                status,
                &cfg(),
                PathCounts::default(),
                timing(),
                &mut ChaCha8Rng::seed_from_u64(9),
            )
            .unwrap()
        };
        let (open, blocked) = (run(LinkStatus::Unblocked), run(LinkStatus::Blocked));
        let ratio = blocked.bs_ue[0].amplitude.re / open.bs_ue[0].amplitude.re;
        assert!((ratio - 10f64.powf(-1.5)).abs() < 1e-15);
        assert_eq!(open.ris_ue, blocked.ris_ue);
    }

    #[test]
    fn all_paths_are_valid_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = synthesize_mpcs(
            &scene(),
            Some(Point::new(7.0, 2.0)),
            LinkStatus::Unblocked,
            &cfg(),
            PathCounts {
                bs_ue: 3,
                bs_ris: 4,
                ris_ue: 6,
            },
            timing(),
            &mut rng,
        )
        .unwrap();
        assert_eq!((p.bs_ue.len(), p.bs_ris.len(), p.ris_ue.len()), (3, 4, 6));
        for m in p.bs_ue.iter().chain(&p.ris_ue) {
            m.validate().unwrap();
        }
        for b in &p.bs_ris {
            b.validate().unwrap();
        }
    }
}
