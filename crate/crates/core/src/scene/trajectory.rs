use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{Point, Rect};
use super::layout::Scene;
use crate::error::{Error, Result};

/// UE positions at `U` consecutive steps; `None` marks an absent UE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub positions: Vec<Option<Point>>,
    pub speed_mps: f64,
    pub step_interval_s: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn uniform_in<R: Rng + ?Sized>(r: &Rect, rng: &mut R) -> Point {
    let (lo, hi) = (r.min(), r.max());
    Point::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y))
}

/// Random-waypoint walk inside the scene's UE region. The walker heads for a
/// uniformly drawn waypoint at `v·dt` per step and draws a new waypoint on
/// arrival. Each step is then independently marked absent with
/// `absent_probability`; the hidden walker keeps moving.
pub fn generate_trajectory<R: Rng + ?Sized>(
    scene: &Scene,
    steps: usize,
    speed_mps: f64,
    step_interval_s: f64,
    absent_probability: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidParameter("trajectory needs at least one location".into()));
    }
    if !(0.0..=1.0).contains(&absent_probability) {
        return Err(Error::InvalidParameter(format!(
            "absent probability must lie in [0, 1], got {absent_probability}"
        )));
    }
    if !(speed_mps >= 0.0 && speed_mps.is_finite() && step_interval_s >= 0.0 && step_interval_s.is_finite()) {
        return Err(Error::InvalidParameter(
            "speed and step interval must be finite and >= 0".into(),
        ));
    }
    let region = &scene.ue_region;
    let step = speed_mps * step_interval_s;
    let mut pos = uniform_in(region, rng);
    let mut target = uniform_in(region, rng);
    let mut positions = Vec::with_capacity(steps);
    for u in 0..steps {
        if u > 0 {
            let d = pos.distance(target);
            if d <= step {
                pos = target;
                target = uniform_in(region, rng);
            } else {
                let s = step / d;
                pos = Point::new(pos.x + s * (target.x - pos.x), pos.y + s * (target.y - pos.y));
            }
        }
        let absent = absent_probability > 0.0 && rng.random::<f64>() < absent_probability;
        positions.push(if absent { None } else { Some(pos) });
    }
    Ok(Trajectory {
        positions,
        speed_mps,
        step_interval_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::layout::{generate_scene, SceneConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scene() -> Scene {
        generate_scene(&SceneConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap()
    }

    #[test]
    fn stationary_walker() {
        let t = generate_trajectory(&scene(), 20, 0.0, 0.1, 0.0, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let first = t.positions[0].unwrap();
        assert!(t.positions.iter().all(|p| *p == Some(first)));
    }

    #[test]
    fn always_absent() {
        let t = generate_trajectory(&scene(), 15, 20.0, 0.1, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(t.positions.iter().all(Option::is_none));
    }

    #[test]
    fn bounded_steps() {
        let s = scene();
        let t = generate_trajectory(&s, 100, 20.0, 0.1, 0.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(t.len(), 100);
        let pts: Vec<Point> = t.positions.iter().map(|p| p.unwrap()).collect();
        for w in pts.windows(2) {
            assert!(w[0].distance(w[1]) <= 2.0 + 1e-9);
        }
        assert!(pts.iter().all(|p| s.ue_region.contains(*p)));
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = scene();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_trajectory(&s, 0, 1.0, 0.1, 0.0, &mut rng).is_err());
        assert!(generate_trajectory(&s, 3, 1.0, 0.1, 1.5, &mut rng).is_err());
    }
}
