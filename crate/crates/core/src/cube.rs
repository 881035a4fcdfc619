//! Radar cube container, sample metadata, datasets and per-cube normalization.
//!
//! A cube stores `frames × range × azimuth` amplitudes in one frame-major
//! buffer: index `(t, r, a)` lives at `(t * range + r) * azimuth + a`, the
//! same order used by the on-disk payload.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::augment::FlipAxis;
use crate::error::{invalid, Error, Result};

pub const DEFAULT_FRAMES: usize = 60;
pub const DEFAULT_RANGE_BINS: usize = 12;
pub const DEFAULT_AZIMUTH_BINS: usize = 91;
/// Frame rate of the radar heatmap stream, Hz.
pub const DEFAULT_SAMPLE_RATE: f64 = 8.57;
/// Largest person count a sample may carry.
pub const MAX_LABEL: u8 = 3;
pub const NUM_CLASSES: usize = MAX_LABEL as usize + 1;

/// Where a sample was recorded (or which synthetic room produced it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Environment {
    A,
    B,
    C,
    /// Simulator-produced room, identified by a small numeric tag.
    Synthetic(u16),
}

impl Environment {
    const SYNTHETIC_BASE: u32 = 0x100;

    pub fn code(self) -> u32 {
        match self {
            Environment::A => 0,
            Environment::B => 1,
            Environment::C => 2,
            Environment::Synthetic(id) => Self::SYNTHETIC_BASE + id as u32,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Environment::A),
            1 => Some(Environment::B),
            2 => Some(Environment::C),
            c if (Self::SYNTHETIC_BASE..Self::SYNTHETIC_BASE + 0x1_0000).contains(&c) => {
                Some(Environment::Synthetic((c - Self::SYNTHETIC_BASE) as u16))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Environment::A => f.write_str("A"),
            Environment::B => f.write_str("B"),
            Environment::C => f.write_str("C"),
            Environment::Synthetic(id) => write!(f, "S{id}"),
        }
    }
}

impl std::str::FromStr for Environment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Environment::A),
            "B" => Ok(Environment::B),
            "C" => Ok(Environment::C),
            _ => s
                .strip_prefix('S')
                .and_then(|id| id.parse().ok())
                .map(Environment::Synthetic)
                .ok_or_else(|| invalid(format!("unknown environment `{s}`"))),
        }
    }
}

impl Serialize for Environment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Environment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activity {
    Standing,
    Walking,
    Mixed,
}

impl Activity {
    pub const ALL: [Activity; 3] = [Activity::Standing, Activity::Walking, Activity::Mixed];

    pub fn code(self) -> u32 {
        match self {
            Activity::Standing => 0,
            Activity::Walking => 1,
            Activity::Mixed => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

/// Record of an augmentation applied in memory. Not persisted to cube files.
#[derive(Debug, Clone, PartialEq)]
pub enum Augmentation {
    Flip(FlipAxis),
    Scale(f32),
    FrameDrop([usize; 3]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    /// Number of people in the scene.
    pub label: u8,
    pub environment: Environment,
    pub activity: Activity,
    /// Furniture layout index within the environment, when known.
    pub layout: Option<u16>,
    pub seed: Option<u64>,
    pub augmentations: Vec<Augmentation>,
}

impl SampleMeta {
    pub fn new(label: u8, environment: Environment, activity: Activity) -> Self {
        Self {
            label,
            environment,
            activity,
            layout: None,
            seed: None,
            augmentations: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.label > MAX_LABEL {
            return Err(invalid(format!("label {} outside 0..={MAX_LABEL}", self.label)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarCube {
    frames: usize,
    range_bins: usize,
    azimuth_bins: usize,
    data: Vec<f32>,
    pub meta: SampleMeta,
}

impl RadarCube {
    pub fn new(
        frames: usize,
        range_bins: usize,
        azimuth_bins: usize,
        data: Vec<f32>,
        meta: SampleMeta,
    ) -> Result<Self> {
        if frames == 0 || range_bins == 0 || azimuth_bins == 0 {
            return Err(invalid("cube dimensions must be non-zero"));
        }
        let expected = frames * range_bins * azimuth_bins;
        if data.len() != expected {
            return Err(Error::Shape {
                expected: format!("{expected} amplitudes ({frames}x{range_bins}x{azimuth_bins})"),
                got: format!("{} amplitudes", data.len()),
            });
        }
        meta.validate()?;
        Ok(Self {
            frames,
            range_bins,
            azimuth_bins,
            data,
            meta,
        })
    }

    pub fn zeros(frames: usize, range_bins: usize, azimuth_bins: usize, meta: SampleMeta) -> Self {
        Self::new(
            frames,
            range_bins,
            azimuth_bins,
            vec![0.0; frames * range_bins * azimuth_bins],
            meta,
        )
        .expect("zero cube with valid dims")
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn range_bins(&self) -> usize {
        self.range_bins
    }

    pub fn azimuth_bins(&self) -> usize {
        self.azimuth_bins
    }

    /// Cells per frame.
    pub fn frame_len(&self) -> usize {
        self.range_bins * self.azimuth_bins
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.frames, self.range_bins, self.azimuth_bins)
    }

    pub fn same_shape(&self, other: &RadarCube) -> bool {
        self.dims() == other.dims()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, t: usize, r: usize, a: usize) -> usize {
        (t * self.range_bins + r) * self.azimuth_bins + a
    }

    #[inline]
    pub fn get(&self, t: usize, r: usize, a: usize) -> f32 {
        self.data[self.index(t, r, a)]
    }

    #[inline]
    pub fn set(&mut self, t: usize, r: usize, a: usize, v: f32) {
        let i = self.index(t, r, a);
        self.data[i] = v;
    }

    pub fn frame(&self, t: usize) -> &[f32] {
        let n = self.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [f32] {
        let n = self.frame_len();
        &mut self.data[t * n..(t + 1) * n]
    }

    /// Time series of one cell, indexed by flat cell index `r * azimuth + a`.
    pub fn cell_series(&self, cell: usize) -> Vec<f64> {
        let n = self.frame_len();
        (0..self.frames).map(|t| self.data[t * n + cell] as f64).collect()
    }

    /// Same shape and metadata, new amplitudes.
    pub fn with_data(&self, data: Vec<f32>) -> Result<Self> {
        Self::new(self.frames, self.range_bins, self.azimuth_bins, data, self.meta.clone())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// Ordered collection of cubes with optional split tags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub cubes: Vec<RadarCube>,
    pub splits: Option<Vec<Split>>,
}

impl Dataset {
    pub fn new(cubes: Vec<RadarCube>) -> Self {
        Self { cubes, splits: None }
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.cubes.iter().map(|c| c.meta.label).collect()
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for c in &self.cubes {
            counts[c.meta.label as usize] += 1;
        }
        counts
    }

    pub fn split_of(&self, i: usize) -> Option<Split> {
        self.splits.as_ref().map(|s| s[i])
    }

    pub fn indices_of(&self, split: Split) -> Vec<usize> {
        match &self.splits {
            Some(s) => (0..s.len()).filter(|&i| s[i] == split).collect(),
            None => Vec::new(),
        }
    }

    /// Cubes tagged with `split`, cloned into a fresh untagged dataset.
    pub fn subset(&self, split: Split) -> Dataset {
        Dataset::new(
            self.indices_of(split)
                .into_iter()
                .map(|i| self.cubes[i].clone())
                .collect(),
        )
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            cubes: indices.iter().map(|&i| self.cubes[i].clone()).collect(),
            splits: self.splits.as_ref().map(|s| indices.iter().map(|&i| s[i]).collect()),
        }
    }

    /// Apply a fallible per-cube transform, keeping split tags.
    pub fn try_map<F>(&self, f: F) -> Result<Dataset>
    where
        F: Fn(&RadarCube) -> Result<RadarCube>,
    {
        Ok(Dataset {
            cubes: self.cubes.iter().map(f).collect::<Result<_>>()?,
            splits: self.splits.clone(),
        })
    }
}

/// Parameters used by [`clip_and_normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub clip_lo: f32,
    pub clip_hi: f32,
    pub min: f32,
    pub max: f32,
    /// Set when the clipped cube was constant and the output is all zeros.
    pub degenerate: bool,
}

pub const CLIP_LO_PERCENTILE: f64 = 0.1;
pub const CLIP_HI_PERCENTILE: f64 = 99.9;

/// Rank position of percentile `p` (0..=100) in a sorted sample of size `n`,
/// using nearest rank rounded away from the median so that the clip bounds
/// are always attained sample values.
fn percentile_rank(n: usize, p: f64, upper: bool) -> usize {
    let pos = p / 100.0 * (n - 1) as f64;
    let idx = if upper { pos.ceil() } else { pos.floor() };
    (idx as usize).min(n - 1)
}

/// Lower and upper clip bounds for one cube.
pub fn clip_bounds(values: &[f32]) -> (f32, f32) {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f32::total_cmp);
    let n = sorted.len();
    (
        sorted[percentile_rank(n, CLIP_LO_PERCENTILE, false)],
        sorted[percentile_rank(n, CLIP_HI_PERCENTILE, true)],
    )
}

/// Clip at the cube's 0.1st / 99.9th percentiles, then min-max scale to [0, 1].
pub fn clip_and_normalize(cube: &RadarCube) -> Result<(RadarCube, NormalizationParams)> {
    if !cube.all_finite() {
        return Err(invalid("cube contains non-finite amplitudes"));
    }
    let (clip_lo, clip_hi) = clip_bounds(cube.data());
    let clipped = cube.data().iter().map(|v| v.clamp(clip_lo, clip_hi));
    let (min, max) = clipped
        .clone()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let degenerate = max <= min;
    let data: Vec<f32> = if degenerate {
        vec![0.0; cube.data().len()]
    } else {
        let (lo, span) = (min as f64, (max - min) as f64);
        clipped
            .map(|v| (((v as f64) - lo) / span).clamp(0.0, 1.0) as f32)
            .collect()
    };
    let params = NormalizationParams {
        clip_lo,
        clip_hi,
        min,
        max,
        degenerate,
    };
    Ok((cube.with_data(data)?, params))
}

/// Plain min-max rescale of an amplitude buffer to [0, 1]; constant input maps to zeros.
pub fn minmax_rescale(values: &[f64]) -> Vec<f32> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    let span = hi - lo;
    values
        .iter()
        .map(|&v| ((v - lo) / span).clamp(0.0, 1.0) as f32)
        .collect()
}
