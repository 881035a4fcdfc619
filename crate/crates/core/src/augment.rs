//! Spatial flips, amplitude scaling and frame-drop interpolation.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cube::{Augmentation, Dataset, RadarCube, Split, DEFAULT_FRAMES};
use crate::error::{invalid, Error, Result};
use crate::rng::{rng, Rng};

pub const DEFAULT_SCALE_RANGE: (f64, f64) = (0.95, 1.05);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlipAxis {
    Azimuth,
    Range,
    Both,
}

impl FlipAxis {
    pub const ALL: [FlipAxis; 3] = [FlipAxis::Azimuth, FlipAxis::Range, FlipAxis::Both];
}

/// When the random scale factor is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// A fresh factor for every sample in every training epoch.
    #[default]
    PerEpoch,
    /// One scaled copy per sample, drawn once and added to the training set.
    Once,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentSpec {
    pub flips: Vec<FlipAxis>,
    pub scale: bool,
    pub scale_range: (f64, f64),
    pub scale_mode: ScaleMode,
    pub frame_drop: bool,
    pub seed: u64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl AugmentSpec {
    pub fn none() -> Self {
        Self {
            flips: Vec::new(),
            scale: false,
            scale_range: DEFAULT_SCALE_RANGE,
            scale_mode: ScaleMode::PerEpoch,
            frame_drop: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.scale_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(invalid(format!(
                "scale range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.flips.is_empty() && !self.scale && !self.frame_drop
    }

    /// Scale range used by the training loop, if per-epoch scaling is active.
    pub fn epoch_scale(&self) -> Option<(f64, f64)> {
        (self.scale && self.scale_mode == ScaleMode::PerEpoch).then_some(self.scale_range)
    }
}

/// CLI-level augmentation choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentKind {
    None,
    Flips,
    Scale,
    Framedrop,
    All,
}

impl AugmentKind {
    pub fn name(self) -> &'static str {
        match self {
            AugmentKind::None => "none",
            AugmentKind::Flips => "flips",
            AugmentKind::Scale => "scale",
            AugmentKind::Framedrop => "framedrop",
            AugmentKind::All => "all",
        }
    }

    pub fn spec(self, scale_range: (f64, f64), seed: u64) -> AugmentSpec {
        let mut spec = AugmentSpec {
            scale_range,
            seed,
            ..AugmentSpec::none()
        };
        if matches!(self, AugmentKind::Flips | AugmentKind::All) {
            spec.flips = FlipAxis::ALL.to_vec();
        }
        spec.scale = matches!(self, AugmentKind::Scale | AugmentKind::All);
        spec.frame_drop = matches!(self, AugmentKind::Framedrop | AugmentKind::All);
        spec
    }
}

impl fmt::Display for AugmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            AugmentKind::None,
            AugmentKind::Flips,
            AugmentKind::Scale,
            AugmentKind::Framedrop,
            AugmentKind::All,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| invalid(format!("unknown augmentation `{s}`")))
    }
}

/// Spatial reversal along the chosen axis, identical for every frame.
pub fn flip(cube: &RadarCube, axis: FlipAxis) -> RadarCube {
    let (frames, rb, ab) = cube.dims();
    let (flip_r, flip_a) = match axis {
        FlipAxis::Azimuth => (false, true),
        FlipAxis::Range => (true, false),
        FlipAxis::Both => (true, true),
    };
    let mut out = cube.clone();
    for t in 0..frames {
        let src = cube.frame(t);
        let dst = out.frame_mut(t);
        for r in 0..rb {
            let sr = if flip_r { rb - 1 - r } else { r };
            for a in 0..ab {
                let sa = if flip_a { ab - 1 - a } else { a };
                dst[r * ab + a] = src[sr * ab + sa];
            }
        }
    }
    out.meta.augmentations.push(Augmentation::Flip(axis));
    out
}

pub fn draw_scale(rng: &mut Rng, range: (f64, f64)) -> f64 {
    let (lo, hi) = range;
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Multiply every amplitude by `k`, recording the factor.
pub fn scale_by(cube: &RadarCube, k: f64) -> RadarCube {
    let mut out = cube.clone();
    for v in out.data_mut() {
        *v = (*v as f64 * k) as f32;
    }
    out.meta.augmentations.push(Augmentation::Scale(k as f32));
    out
}

/// Scale by one factor drawn uniformly from `range`.
pub fn random_scale(cube: &RadarCube, range: (f64, f64), seed: u64) -> RadarCube {
    let k = draw_scale(&mut rng(seed), range);
    scale_by(cube, k)
}

/// First and last droppable frame in each temporal third of a 60-frame clip.
pub const DROP_WINDOWS: [(usize, usize); 3] = [(1, 19), (20, 39), (40, 58)];

/// Replace one frame per third by the mean of its original neighbors.
pub fn drop_and_interpolate(cube: &RadarCube, seed: u64) -> Result<RadarCube> {
    let mut g = rng(seed);
    let idx = DROP_WINDOWS.map(|(lo, hi)| g.random_range(lo..=hi));
    drop_frames(cube, idx)
}

/// Deterministic core of [`drop_and_interpolate`].
pub fn drop_frames(cube: &RadarCube, idx: [usize; 3]) -> Result<RadarCube> {
    if cube.frames() != DEFAULT_FRAMES {
        return Err(invalid(format!(
            "frame drop expects {DEFAULT_FRAMES} frames, cube has {}",
            cube.frames()
        )));
    }
    for (&t, &(lo, hi)) in idx.iter().zip(&DROP_WINDOWS) {
        if t < lo || t > hi {
            return Err(invalid(format!("drop index {t} outside window [{lo}, {hi}]")));
        }
    }
    let mut out = cube.clone();
    for &t in &idx {
        let (prev, next) = (cube.frame(t - 1), cube.frame(t + 1));
        for ((d, &p), &n) in out.frame_mut(t).iter_mut().zip(prev).zip(next) {
            *d = ((p as f64 + n as f64) / 2.0) as f32;
        }
    }
    out.meta.augmentations.push(Augmentation::FrameDrop(idx));
    Ok(out)
}

/// Expand the training split: originals first, then flipped copies, then
/// frame-drop copies, then one scaled copy per original in [`ScaleMode::Once`].
/// Non-train cubes pass through untouched. Per-cube seeds are `seed ^ index`.
pub fn augment_dataset(ds: &Dataset, spec: &AugmentSpec) -> Result<Dataset> {
    spec.validate()?;
    let train: Vec<usize> = match &ds.splits {
        Some(_) => ds.indices_of(Split::Train),
        None => (0..ds.len()).collect(),
    };
    let mut cubes = ds.cubes.clone();
    let mut splits = ds.splits.clone();
    let mut push = |c: RadarCube| {
        cubes.push(c);
        if let Some(s) = splits.as_mut() {
            s.push(Split::Train);
        }
    };
    for &axis in &spec.flips {
        for &i in &train {
            push(flip(&ds.cubes[i], axis));
        }
    }
    if spec.frame_drop {
        for &i in &train {
            push(drop_and_interpolate(&ds.cubes[i], spec.seed ^ i as u64)?);
        }
    }
    if spec.scale && spec.scale_mode == ScaleMode::Once {
        for &i in &train {
            push(random_scale(&ds.cubes[i], spec.scale_range, spec.seed ^ i as u64));
        }
    }
    Ok(Dataset { cubes, splits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{Activity, Environment, SampleMeta};

    fn cube(seed: u64, frames: usize) -> RadarCube {
        let mut g = rng(seed);
        let data = (0..frames * 3 * 4).map(|_| g.random::<f32>()).collect();
        RadarCube::new(
            frames,
            3,
            4,
            data,
            SampleMeta::new(1, Environment::A, Activity::Walking),
        )
        .unwrap()
    }

    #[test]
    fn flip_is_an_involution() {
        let c = cube(1, 5);
        for axis in FlipAxis::ALL {
            let back = flip(&flip(&c, axis), axis);
            assert_eq!(back.data(), c.data());
        }
    }

    #[test]
    fn both_is_azimuth_then_range() {
        let c = cube(2, 5);
        assert_eq!(
            flip(&c, FlipAxis::Both).data(),
            flip(&flip(&c, FlipAxis::Azimuth), FlipAxis::Range).data()
        );
    }

    #[test]
    fn flip_moves_corner() {
        let c = cube(3, 2);
        let f = flip(&c, FlipAxis::Range);
        assert_eq!(f.get(1, 0, 0), c.get(1, 2, 0));
        let f = flip(&c, FlipAxis::Azimuth);
        assert_eq!(f.get(1, 0, 0), c.get(1, 0, 3));
    }

    #[test]
    fn unit_scale_is_identity() {
        let c = cube(4, 5);
        assert_eq!(scale_by(&c, 1.0).data(), c.data());
        assert_eq!(random_scale(&c, (1.0, 1.0), 9).data(), c.data());
    }

    #[test]
    fn frame_drop_replaces_with_neighbor_mean() {
        let c = cube(5, 60);
        let out = drop_and_interpolate(&c, 17).unwrap();
        let Some(Augmentation::FrameDrop(idx)) = out.meta.augmentations.last().cloned() else {
            panic!("frame drop not recorded");
        };
        for t in 0..60 {
            if idx.contains(&t) {
                for i in 0..c.frame_len() {
                    let want = ((c.frame(t - 1)[i] as f64 + c.frame(t + 1)[i] as f64) / 2.0) as f32;
                    assert_eq!(out.frame(t)[i], want);
                }
            } else {
                assert_eq!(out.frame(t), c.frame(t));
            }
        }
    }

    #[test]
    fn frame_drop_needs_sixty_frames() {
        assert!(drop_and_interpolate(&cube(6, 59), 0).is_err());
        assert!(drop_frames(&cube(6, 60), [0, 20, 40]).is_err());
    }

    #[test]
    fn flips_quadruple_training_set() {
        let ds = Dataset::new(vec![cube(7, 5)]);
        let spec = AugmentKind::Flips.spec(DEFAULT_SCALE_RANGE, 0);
        let out = augment_dataset(&ds, &spec).unwrap();
        assert_eq!(out.len(), 4);
        assert_eq!(out.cubes[0], ds.cubes[0]);
    }

    #[test]
    fn kinds_parse() {
        for s in ["none", "flips", "scale", "framedrop", "all"] {
            assert_eq!(s.parse::<AugmentKind>().unwrap().name(), s);
        }
        assert!("rotate".parse::<AugmentKind>().is_err());
    }

    #[test]
    fn scale_range_validation() {
        let mut spec = AugmentSpec::none();
        spec.scale_range = (0.0, 1.0);
        assert!(spec.validate().is_err());
        spec.scale_range = (1.1, 1.0);
        assert!(spec.validate().is_err());
    }
}
