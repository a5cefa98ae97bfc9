use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{los_blocked, Point, Rect};
use crate::error::{Error, Result};

/// Ground-truth state of the BS→UE link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkStatus {
    Absent,
    Unblocked,
    Blocked,
}

impl LinkStatus {
    pub const ALL: [LinkStatus; 3] = [LinkStatus::Absent, LinkStatus::Unblocked, LinkStatus::Blocked];

    /// `−1`, `0`, `1` for absent, unblocked, blocked.
    pub fn code(self) -> i8 {
        match self {
            LinkStatus::Absent => -1,
            LinkStatus::Unblocked => 0,
            LinkStatus::Blocked => 1,
        }
    }

    pub fn from_code(code: i8) -> Option<Self> {
        match code {
            -1 => Some(LinkStatus::Absent),
            0 => Some(LinkStatus::Unblocked),
            1 => Some(LinkStatus::Blocked),
            _ => None,
        }
    }

    /// Classifier output index: `code + 1`.
    pub fn class_index(self) -> usize {
        (self.code() + 1) as usize
    }

    pub fn from_class_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkStatus::Absent => "absent",
            LinkStatus::Unblocked => "unblocked",
            LinkStatus::Blocked => "blocked",
        }
    }
}

impl std::fmt::Display for LinkStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Static layout plus the distribution of blockers drawn per episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub width_m: f64,
    pub depth_m: f64,
    pub bs_position_m: [f64; 2],
    pub ris_position_m: [f64; 2],
    /// Region the UE walks in, `[x_min, y_min, x_max, y_max]`.
    pub ue_region_m: [f64; 4],
    pub blocker_count_min: usize,
    pub blocker_count_max: usize,
    pub blocker_half_extent_min_m: f64,
    pub blocker_half_extent_max_m: f64,
    pub penetration_loss_db: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            width_m: 40.0,
            depth_m: 40.0,
            bs_position_m: [1.0, 20.0],
            ris_position_m: [39.0, 39.0],
            ue_region_m: [6.0, 2.0, 36.0, 36.0],
            blocker_count_min: 0,
            blocker_count_max: 24,
            blocker_half_extent_min_m: 1.0,
            blocker_half_extent_max_m: 3.0,
            penetration_loss_db: 30.0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("scene: {m}")));
        if !(self.width_m > 0.0 && self.depth_m > 0.0 && self.width_m.is_finite() && self.depth_m.is_finite()) {
            return bad(format!(
                "bounds must be positive, got {} x {}",
                self.width_m, self.depth_m
            ));
        }
        let inside = |p: [f64; 2]| p[0] >= 0.0 && p[0] <= self.width_m && p[1] >= 0.0 && p[1] <= self.depth_m;
        if !inside(self.bs_position_m) {
            return bad("BS position lies outside the bounds".into());
        }
        if !inside(self.ris_position_m) {
            return bad("RIS position lies outside the bounds".into());
        }
        if self.bs_position_m == self.ris_position_m {
            return bad("BS and RIS positions coincide".into());
        }
        let [x0, y0, x1, y1] = self.ue_region_m;
        if !(x0 < x1 && y0 < y1 && inside([x0, y0]) && inside([x1, y1])) {
            return bad(format!(
                "UE region {:?} must be a non-empty rectangle inside the bounds",
                self.ue_region_m
            ));
        }
        if self.blocker_count_min > self.blocker_count_max {
            return bad("blocker_count_min exceeds blocker_count_max".into());
        }
        if !(self.blocker_half_extent_min_m > 0.0 && self.blocker_half_extent_min_m <= self.blocker_half_extent_max_m) {
            return bad("blocker half-extents must satisfy 0 < min <= max".into());
        }
        if !(self.penetration_loss_db >= 0.0 && self.penetration_loss_db.is_finite()) {
            return bad("penetration loss must be >= 0 dB".into());
        }
        Ok(())
    }

    fn ue_region(&self) -> Result<Rect> {
        let [x0, y0, x1, y1] = self.ue_region_m;
        Rect::from_corners(Point::new(x0, y0), Point::new(x1, y1))
    }
}

/// One scene instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub bounds_m: (f64, f64),
    pub bs_position_m: Point,
    pub ris_position_m: Point,
    pub blockers: Vec<Rect>,
    pub penetration_loss_db: f64,
    pub ue_region: Rect,
}

impl Scene {
    /// Checks the scene invariants, including a clear BS–RIS line of sight.
    pub fn new(
        bounds_m: (f64, f64),
        bs: Point,
        ris: Point,
        blockers: Vec<Rect>,
        penetration_loss_db: f64,
        ue_region: Rect,
    ) -> Result<Self> {
        let scene = Scene {
            bounds_m,
            bs_position_m: bs,
            ris_position_m: ris,
            blockers,
            penetration_loss_db,
            ue_region,
        };
        if !(bounds_m.0 > 0.0 && bounds_m.1 > 0.0) {
            return Err(Error::InvalidParameter("scene bounds must be positive".into()));
        }
        if !scene.contains(bs) || !scene.contains(ris) {
            return Err(Error::InvalidParameter("BS and RIS must lie inside the bounds".into()));
        }
        if los_blocked(bs, ris, &scene.blockers) {
            return Err(Error::InvalidParameter(
                "a blocker intersects the BS-RIS segment".into(),
            ));
        }
        Ok(scene)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.is_finite() && p.x >= 0.0 && p.x <= self.bounds_m.0 && p.y >= 0.0 && p.y <= self.bounds_m.1
    }
}

/// Draws a blocker count and places each blocker uniformly in the bounds,
/// rejecting placements that cut the BS–RIS line of sight or cover either
/// anchor. A blocker that cannot be placed in 100 tries is dropped.
pub fn generate_scene<R: Rng + ?Sized>(cfg: &SceneConfig, rng: &mut R) -> Result<Scene> {
    cfg.validate()?;
    let bs = Point::new(cfg.bs_position_m[0], cfg.bs_position_m[1]);
    let ris = Point::new(cfg.ris_position_m[0], cfg.ris_position_m[1]);
    let count = rng.random_range(cfg.blocker_count_min..=cfg.blocker_count_max);
    let mut blockers = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..100 {
            let center = Point::new(rng.random_range(0.0..cfg.width_m), rng.random_range(0.0..cfg.depth_m));
            let hw = rng.random_range(cfg.blocker_half_extent_min_m..=cfg.blocker_half_extent_max_m);
            let hd = rng.random_range(cfg.blocker_half_extent_min_m..=cfg.blocker_half_extent_max_m);
            let r = Rect::new(center, hw, hd)?;
            if !r.contains(bs) && !r.contains(ris) && !los_blocked(bs, ris, &[r]) {
                blockers.push(r);
                break;
            }
        }
    }
    Scene::new(
        (cfg.width_m, cfg.depth_m),
        bs,
        ris,
        blockers,
        cfg.penetration_loss_db,
        cfg.ue_region()?,
    )
}

pub fn link_status(scene: &Scene, ue: Option<Point>) -> Result<LinkStatus> {
    let Some(ue) = ue else {
        return Ok(LinkStatus::Absent);
    };
    if !scene.contains(ue) {
        return Err(Error::InvalidParameter(format!(
            "UE position ({}, {}) lies outside the scene bounds",
            ue.x, ue.y
        )));
    }
    Ok(if los_blocked(scene.bs_position_m, ue, &scene.blockers) {
        LinkStatus::Blocked
    } else {
        LinkStatus::Unblocked
    })
}
