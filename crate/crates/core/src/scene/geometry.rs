use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Direction from `self` towards `other`, in `[0, 2π)`.
    pub fn bearing_to(self, other: Point) -> f64 {
        crate::channel::wrap_phase((other.y - self.y).atan2(other.x - self.x))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned rectangle given by center and half-extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: Point,
    pub half_width: f64,
    pub half_depth: f64,
}

impl Rect {
    pub fn new(center: Point, half_width: f64, half_depth: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_depth > 0.0 && center.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "degenerate rectangle at ({}, {}) with half-extents {half_width} x {half_depth}",
                center.x, center.y
            )));
        }
        Ok(Rect {
            center,
            half_width,
            half_depth,
        })
    }

    pub fn from_corners(min: Point, max: Point) -> Result<Self> {
        Self::new(
            Point::new(0.5 * (min.x + max.x), 0.5 * (min.y + max.y)),
            0.5 * (max.x - min.x),
            0.5 * (max.y - min.y),
        )
    }

    pub fn min(&self) -> Point {
        Point::new(self.center.x - self.half_width, self.center.y - self.half_depth)
    }

    pub fn max(&self) -> Point {
        Point::new(self.center.x + self.half_width, self.center.y + self.half_depth)
    }

    pub fn contains(&self, p: Point) -> bool {
        (p.x - self.center.x).abs() <= self.half_width && (p.y - self.center.y).abs() <= self.half_depth
    }

    /// Parameter interval `[t0, t1]` of the line `a + t·(b − a)` inside the
    /// closed rectangle, or `None` if the line misses it.
    fn clip(&self, a: Point, b: Point) -> Option<(f64, f64)> {
        let (lo, hi) = (self.min(), self.max());
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for (start, delta, min, max) in [(a.x, b.x - a.x, lo.x, hi.x), (a.y, b.y - a.y, lo.y, hi.y)] {
            if delta == 0.0 {
                if start < min || start > max {
                    return None;
                }
                continue;
            }
            let (mut ta, mut tb) = ((min - start) / delta, (max - start) / delta);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Whether the open segment `(a, b)` meets any rectangle (slab clipping).
pub fn los_blocked(a: Point, b: Point, blockers: &[Rect]) -> bool {
    if a == b {
        return false;
    }
    blockers.iter().any(|r| match r.clip(a, b) {
        Some((t0, t1)) => t0.max(0.0) <= t1.min(1.0) && t0 < 1.0 && t1 > 0.0,
        None => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Rect {
        Rect::from_corners(Point::new(x0, y0), Point::new(x1, y1)).unwrap()
    }

    #[test]
    fn examples() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(10.0, 0.0);
        assert!(!los_blocked(a, b, &[]));
        assert!(los_blocked(a, b, &[rect(4.0, 6.0, -1.0, 1.0)]));
        assert!(!los_blocked(a, b, &[rect(4.0, 6.0, 1.0, 2.0)]));
    }

    #[test]
    fn endpoints_touching_do_not_count() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(10.0, 0.0);
        assert!(!los_blocked(a, b, &[rect(10.0, 12.0, -1.0, 1.0)]));
        assert!(!los_blocked(a, b, &[rect(-3.0, 0.0, -1.0, 1.0)]));
        assert!(!los_blocked(a, b, &[rect(11.0, 12.0, -1.0, 1.0)]));
    }

    #[test]
    fn vertical_and_diagonal_segments() {
        let r = rect(-1.0, 1.0, 4.0, 5.0);
        assert!(los_blocked(Point::new(0.0, 0.0), Point::new(0.0, 10.0), &[r]));
        assert!(!los_blocked(Point::new(2.0, 0.0), Point::new(2.0, 10.0), &[r]));
        assert!(los_blocked(Point::new(-5.0, -1.0), Point::new(5.0, 10.0), &[r]));
    }

    #[test]
    fn segment_inside_rectangle_is_blocked() {
        let r = rect(0.0, 10.0, 0.0, 10.0);
        assert!(los_blocked(Point::new(1.0, 1.0), Point::new(2.0, 3.0), &[r]));
    }

    #[test]
    fn degenerate_rect_rejected() {
        assert!(Rect::new(Point::new(0.0, 0.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn bearing_convention() {
        let o = Point::new(0.0, 0.0);
        assert_eq!(o.bearing_to(Point::new(1.0, 0.0)), 0.0);
        assert!((o.bearing_to(Point::new(0.0, -1.0)) - 1.5 * std::f64::consts::PI).abs() < 1e-15);
    }

    fn brute_force_blocked(a: Point, b: Point, r: &Rect) -> bool {
        // dense sampling of the open segment
        (1..4000).any(|i| {
            let t = i as f64 / 4000.0;
            r.contains(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
        })
    }

    proptest! {
        #[test]
        fn slab_test_agrees_with_sampling(
            ax in -10.0..10.0f64, ay in -10.0..10.0f64, bx in -10.0..10.0f64, by in -10.0..10.0f64,
            cx in -8.0..8.0f64, cy in -8.0..8.0f64, hw in 0.5..4.0f64, hd in 0.5..4.0f64,
        ) {
            let r = Rect::new(Point::new(cx, cy), hw, hd).unwrap();
            let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
            let fast = los_blocked(a, b, &[r]);
            let slow = brute_force_blocked(a, b, &r);
            // sampling can only miss grazing intersections
            if slow {
                prop_assert!(fast);
            }
            if fast && !slow {
                let (t0, t1) = r.clip(a, b).unwrap();
                prop_assert!((t1.min(1.0) - t0.max(0.0)) * a.distance(b) < 0.02);
            }
        }
    }
}
