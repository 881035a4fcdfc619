//! Synthetic range-azimuth scenes: static clutter plus people whose
//! reflections fluctuate over time.
//!
//! Amplitude at cell `(r, a)` and frame `t` is
//! `|gain · (diffuse + clutter + Σ persons) + n|` with `n ~ N(0, noise_floor²)`.
//! A person is a separable (super-)Gaussian blob whose height is modulated by
//! a breathing sinusoid and a slow linear postural drift; walking people move
//! along a reflected random walk with slowly turning heading. The diffuse
//! return fluctuates per cell and frame at a layout-dependent level.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cube::{
    clip_and_normalize, Activity, Dataset, Environment, RadarCube, SampleMeta, DEFAULT_AZIMUTH_BINS, DEFAULT_FRAMES,
    DEFAULT_RANGE_BINS, DEFAULT_SAMPLE_RATE, MAX_LABEL,
};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng, Rng};

pub const BREATHING_BAND_HZ: (f64, f64) = (0.2, 0.5);
pub const MAX_PERSONS: usize = MAX_LABEL as usize;

/// A static point reflector occupying one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterCell {
    pub range_idx: usize,
    pub azimuth_idx: usize,
    pub mean_amplitude: f64,
}

impl ClutterCell {
    pub fn new(range_idx: usize, azimuth_idx: usize, mean_amplitude: f64) -> Self {
        Self {
            range_idx,
            azimuth_idx,
            mean_amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub name: String,
    pub clutter_cells: Vec<ClutterCell>,
    /// Per-frame clutter fluctuation, as a fraction of each cell's mean amplitude.
    pub clutter_jitter: f64,
    /// Std-dev of the additive Gaussian receiver noise.
    pub noise_floor: f64,
    pub gain: f64,
    /// Diffuse return added to every cell.
    #[serde(default)]
    pub diffuse: f64,
    /// Per-frame, per-cell fluctuation of the diffuse return, as a fraction of it.
    #[serde(default)]
    pub diffuse_jitter: f64,
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.clutter_cells.iter().any(|c| !(c.mean_amplitude >= 0.0)) {
            return Err(invalid(format!(
                "environment `{}`: clutter amplitudes must be >= 0",
                self.name
            )));
        }
        if !(self.clutter_jitter >= 0.0)
            || !(self.noise_floor >= 0.0)
            || !(self.diffuse >= 0.0)
            || !(self.diffuse_jitter >= 0.0)
        {
            return Err(invalid(format!(
                "environment `{}`: jitter, noise and diffuse terms must be >= 0",
                self.name
            )));
        }
        if !(self.gain > 0.0) {
            return Err(invalid(format!("environment `{}`: gain must be > 0", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonSpec {
    /// Blob center `(range, azimuth)` in fractional bins.
    pub center: (f64, f64),
    /// Blob std-dev `(range, azimuth)` in bins.
    pub extent: (f64, f64),
    pub peak_amplitude: f64,
    pub breathing_freq: f64,
    /// Breathing modulation depth as a fraction of the peak.
    pub breathing_depth: f64,
    /// Bins per frame; 0 for a standing person.
    pub walk_speed: f64,
    pub path_seed: u64,
    /// Slow postural settling: change of the blob height over the whole
    /// clip as a fraction of the peak, linear in time, random sign.
    #[serde(default)]
    pub drift_depth: f64,
    /// Super-Gaussian order of the blob profile; 1 is Gaussian, larger is
    /// flatter-topped.
    #[serde(default = "default_profile_order")]
    pub profile_order: f64,
}

fn default_profile_order() -> f64 {
    1.0
}

impl PersonSpec {
    pub fn standing(center: (f64, f64), path_seed: u64) -> Self {
        Self {
            center,
            extent: (0.8, 2.5),
            peak_amplitude: 0.5,
            breathing_freq: 0.3,
            breathing_depth: 0.05,
            walk_speed: 0.0,
            path_seed,
            drift_depth: 0.0,
            profile_order: 1.0,
        }
    }

    fn validate(&self, range_bins: usize, azimuth_bins: usize) -> Result<()> {
        let (r, a) = self.center;
        if !(r >= 0.0 && r <= (range_bins - 1) as f64 && a >= 0.0 && a <= (azimuth_bins - 1) as f64) {
            return Err(invalid(format!(
                "person center ({r}, {a}) outside the {range_bins}x{azimuth_bins} grid"
            )));
        }
        if !(self.extent.0 > 0.0 && self.extent.1 > 0.0) {
            return Err(invalid(format!("person extent {:?} must be > 0", self.extent)));
        }
        let (lo, hi) = BREATHING_BAND_HZ;
        if !(self.breathing_freq >= lo && self.breathing_freq <= hi) {
            return Err(invalid(format!(
                "breathing frequency {} Hz outside [{lo}, {hi}]",
                self.breathing_freq
            )));
        }
        if !(self.peak_amplitude >= 0.0)
            || !(self.breathing_depth >= 0.0)
            || !(self.walk_speed >= 0.0)
            || !(self.drift_depth >= 0.0)
            || !(self.profile_order >= 1.0)
        {
            return Err(invalid(
                "person amplitudes, depths and speeds must be >= 0 and profile order >= 1",
            ));
        }
        Ok(())
    }

    /// Multiplicative envelope of the blob height at frame `t` of `frames`.
    pub fn envelope(&self, t: usize, frames: usize, sample_rate: f64, phase: f64, drift_sign: f64) -> f64 {
        let time = t as f64 / sample_rate;
        let progress = t as f64 / (frames.max(2) - 1) as f64 - 0.5;
        1.0 + self.breathing_depth * (2.0 * PI * self.breathing_freq * time + phase).sin()
            + drift_sign * self.drift_depth * progress
    }

    /// Breathing phase and drift sign, drawn from the path seed.
    pub fn phases(&self) -> (f64, f64) {
        let mut g = rng(derive_seed(self.path_seed, 1));
        let phase = g.random_range(0.0..2.0 * PI);
        (phase, if g.random_bool(0.5) { 1.0 } else { -1.0 })
    }

    /// Blob weight along one axis at offset `d` bins for axis extent `sigma`.
    pub fn axis_weight(&self, d: f64, sigma: f64) -> f64 {
        (-0.5 * (d / sigma).abs().powf(2.0 * self.profile_order)).exp()
    }

    /// Blob center for every frame.
    pub fn path(&self, frames: usize, range_bins: usize, azimuth_bins: usize) -> Vec<(f64, f64)> {
        let mut pos = self.center;
        if self.walk_speed == 0.0 {
            return vec![pos; frames];
        }
        let mut g = rng(derive_seed(self.path_seed, 2));
        let mut heading: f64 = g.random_range(0.0..2.0 * PI);
        let (rmax, amax) = ((range_bins - 1) as f64, (azimuth_bins - 1) as f64);
        let mut out = Vec::with_capacity(frames);
        for _ in 0..frames {
            out.push(pos);
            let turn: f64 = StandardNormal.sample(&mut g);
            heading += 0.3 * turn;
            // Range bins are coarser than azimuth bins; move slower along range.
            pos.0 += 0.25 * self.walk_speed * heading.cos();
            pos.1 += self.walk_speed * heading.sin();
            pos.0 = reflect(pos.0, rmax);
            pos.1 = reflect(pos.1, amax);
        }
        out
    }
}

fn reflect(mut x: f64, max: f64) -> f64 {
    if max <= 0.0 {
        return 0.0;
    }
    let period = 2.0 * max;
    x = x.rem_euclid(period);
    if x > max {
        period - x
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub env: EnvironmentSpec,
    pub persons: Vec<PersonSpec>,
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    pub seed: u64,
}

fn default_frames() -> usize {
    DEFAULT_FRAMES
}

fn default_sample_rate() -> f64 {
    DEFAULT_SAMPLE_RATE
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.persons.len() > MAX_PERSONS {
            return Err(invalid(format!(
                "{} persons exceeds the maximum of {MAX_PERSONS}",
                self.persons.len()
            )));
        }
        if self.frames < 3 {
            return Err(invalid(format!("scene needs >= 3 frames, got {}", self.frames)));
        }
        for p in &self.persons {
            p.validate(DEFAULT_RANGE_BINS, DEFAULT_AZIMUTH_BINS)?;
            if !(self.sample_rate > 2.0 * p.breathing_freq) {
                return Err(invalid(format!(
                    "sample rate {} Hz does not exceed twice {} Hz",
                    self.sample_rate, p.breathing_freq
                )));
            }
        }
        for c in &self.env.clutter_cells {
            if c.range_idx >= DEFAULT_RANGE_BINS || c.azimuth_idx >= DEFAULT_AZIMUTH_BINS {
                return Err(invalid(format!(
                    "clutter cell ({}, {}) outside the grid",
                    c.range_idx, c.azimuth_idx
                )));
            }
        }
        Ok(())
    }
}

/// Render one raw (unnormalized) amplitude cube; label = number of persons.
pub fn generate_cube(cfg: &SceneConfig) -> Result<RadarCube> {
    cfg.validate()?;
    let (rb, ab, frames) = (DEFAULT_RANGE_BINS, DEFAULT_AZIMUTH_BINS, cfg.frames);
    let cells = rb * ab;
    let mut g = rng(cfg.seed);
    let noise = Normal::new(0.0, cfg.env.noise_floor).map_err(|e| invalid(e.to_string()))?;

    let persons: Vec<(Vec<(f64, f64)>, (f64, f64))> = cfg
        .persons
        .iter()
        .map(|p| (p.path(frames, rb, ab), p.phases()))
        .collect();

    let mut data = Vec::with_capacity(frames * cells);
    let mut frame = vec![0.0f64; cells];
    for t in 0..frames {
        for v in frame.iter_mut() {
            *v = cfg.env.diffuse;
            if cfg.env.diffuse_jitter > 0.0 {
                let j: f64 = StandardNormal.sample(&mut g);
                *v += cfg.env.diffuse * cfg.env.diffuse_jitter * j;
            }
        }
        for c in &cfg.env.clutter_cells {
            let jitter: f64 = StandardNormal.sample(&mut g);
            frame[c.range_idx * ab + c.azimuth_idx] += c.mean_amplitude * (1.0 + cfg.env.clutter_jitter * jitter);
        }
        for (p, (path, (phase, drift_sign))) in cfg.persons.iter().zip(&persons) {
            let (cr, ca) = path[t];
            let height = p.peak_amplitude * p.envelope(t, frames, cfg.sample_rate, *phase, *drift_sign);
            let wr: Vec<f64> = (0..rb).map(|r| p.axis_weight(r as f64 - cr, p.extent.0)).collect();
            let wa: Vec<f64> = (0..ab).map(|a| p.axis_weight(a as f64 - ca, p.extent.1)).collect();
            for (r, &fr) in wr.iter().enumerate() {
                for (a, &fa) in wa.iter().enumerate() {
                    frame[r * ab + a] += height * fr * fa;
                }
            }
        }
        for &v in &frame {
            let n = if cfg.env.noise_floor > 0.0 {
                noise.sample(&mut g)
            } else {
                0.0
            };
            data.push((cfg.env.gain * v + n).abs() as f32);
        }
    }
    let mut meta = SampleMeta::new(cfg.persons.len() as u8, Environment::Synthetic(0), Activity::Standing);
    meta.seed = Some(cfg.seed);
    RadarCube::new(frames, rb, ab, data, meta)
}

/// Environment ids used by the synthetic suite.
pub const ENV_A: u16 = 1;
pub const ENV_B: u16 = 2;
pub const ENV_C: u16 = 3;

/// Knobs of the three-environment suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub frames: usize,
    pub sample_rate: f64,
    /// Near-range antenna leakage present in every room.
    pub leakage_amplitude: f64,
    pub furniture_amplitude: f64,
    pub clutter_jitter: f64,
    pub noise_floor: f64,
    /// Diffuse return level in every room.
    pub diffuse: f64,
    pub diffuse_jitter: f64,
    /// Diffuse fluctuation multiplier of the four A layouts, then B, then C.
    pub fluctuation: [f64; 6],
    /// Furniture amplitude multiplier of the rearranged room.
    pub b_furniture_gain: f64,
    /// Gain and noise floor of the unseen room.
    pub c_gain: f64,
    pub c_noise_floor: f64,
    pub person_peak: (f64, f64),
    pub person_extent: (f64, f64),
    pub breathing_depth: (f64, f64),
    pub drift_depth: (f64, f64),
    pub profile_order: f64,
    /// Minimum azimuth distance between person centers, in azimuth extents.
    pub min_separation: f64,
    pub walk_speed: (f64, f64),
    /// Multipath coupling: each additional occupant deepens every person's
    /// slow fluctuation by this fraction.
    pub crowd_coupling: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            frames: DEFAULT_FRAMES,
            sample_rate: DEFAULT_SAMPLE_RATE,
            leakage_amplitude: 1.0,
            furniture_amplitude: 0.35,
            clutter_jitter: 0.002,
            noise_floor: 0.002,
            diffuse: 0.05,
            diffuse_jitter: 0.36,
            fluctuation: [0.1, 0.45, 0.75, 1.0, 0.2, 0.8],
            b_furniture_gain: 1.2,
            c_gain: 1.35,
            c_noise_floor: 0.05,
            person_peak: (0.33, 0.37),
            person_extent: (4.0, 12.0),
            breathing_depth: (0.002, 0.006),
            drift_depth: (0.34, 0.36),
            profile_order: 8.0,
            min_separation: 2.2,
            walk_speed: (0.005, 0.015),
            crowd_coupling: 0.1,
        }
    }
}

fn leakage(amp: f64) -> Vec<ClutterCell> {
    (35..=56)
        .map(|a| {
            let off = (a as f64 - 45.5) / 6.0;
            ClutterCell::new(0, a, amp * (-0.5 * off * off).exp())
        })
        .collect()
}

/// A furniture item spanning rows `r0..=r1` and `width` azimuth bins.
fn block(r0: usize, r1: usize, a0: usize, width: usize, amp: f64) -> Vec<ClutterCell> {
    (r0..=r1).flat_map(|r| patch(r, a0, width, amp)).collect()
}

/// A furniture item spanning a small patch of cells.
fn patch(r: usize, a0: usize, width: usize, amp: f64) -> Vec<ClutterCell> {
    (a0..a0 + width).map(|a| ClutterCell::new(r, a, amp)).collect()
}

impl SuiteConfig {
    fn env_spec(&self, name: &str, clutter: Vec<ClutterCell>, noise: f64, gain: f64, slot: usize) -> EnvironmentSpec {
        EnvironmentSpec {
            name: name.to_string(),
            clutter_cells: clutter,
            clutter_jitter: self.clutter_jitter,
            noise_floor: noise,
            gain,
            diffuse: self.diffuse,
            diffuse_jitter: self.diffuse_jitter * self.fluctuation[slot],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("person_peak", self.person_peak),
            ("person_extent", self.person_extent),
            ("breathing_depth", self.breathing_depth),
            ("drift_depth", self.drift_depth),
            ("walk_speed", self.walk_speed),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo >= 0.0 && lo <= hi) {
                return Err(invalid(format!("{name}: need 0 <= lo <= hi, got ({lo}, {hi})")));
            }
        }
        if !(self.profile_order >= 1.0) {
            return Err(invalid(format!(
                "profile_order must be >= 1, got {}",
                self.profile_order
            )));
        }
        if !(self.crowd_coupling >= 0.0) {
            return Err(invalid(format!(
                "crowd_coupling must be >= 0, got {}",
                self.crowd_coupling
            )));
        }
        if !(self.crowd_coupling >= 0.0) {
            return Err(invalid(format!(
                "crowd_coupling must be >= 0, got {}",
                self.crowd_coupling
            )));
        }
        if self.frames < 3 {
            return Err(invalid("frames must be >= 3"));
        }
        Ok(())
    }

    /// The four furniture layouts of the training room.
    pub fn layouts_a(&self) -> Vec<EnvironmentSpec> {
        let f = self.furniture_amplitude;
        let base = leakage(self.leakage_amplitude);
        let with = |name: &str, slot: usize, extra: Vec<ClutterCell>| {
            let mut c = base.clone();
            c.extend(extra);
            self.env_spec(name, c, self.noise_floor, 1.0, slot)
        };
        vec![
            with("A-empty", 0, Vec::new()),
            with(
                "A-chairs",
                1,
                [patch(3, 20, 2, f), patch(5, 60, 2, f), patch(8, 40, 2, f)].concat(),
            ),
            with("A-desks", 2, [patch(4, 10, 6, f), patch(7, 70, 6, f)].concat()),
            with("A-whiteboard", 3, patch(10, 30, 12, 1.2 * f)),
        ]
    }

    /// Same room, furniture rearranged and combined.
    pub fn layout_b(&self) -> EnvironmentSpec {
        let f = self.furniture_amplitude * self.b_furniture_gain;
        let mut c = leakage(self.leakage_amplitude);
        for extra in [
            patch(2, 70, 2, f),
            patch(6, 15, 2, f),
            patch(9, 55, 2, f),
            patch(10, 5, 12, 1.2 * f),
            // Sofa and shelving: large static objects.
            block(4, 6, 30, 16, f),
            block(7, 9, 66, 14, f),
        ] {
            c.extend(extra);
        }
        self.env_spec("B", c, self.noise_floor, 1.0, 4)
    }

    /// A different room: other gain and noise floor, denser clutter.
    pub fn layout_c(&self) -> EnvironmentSpec {
        let f = self.furniture_amplitude;
        let mut c = leakage(self.leakage_amplitude);
        for (i, &(r, a, w)) in [
            (1, 8, 3),
            (2, 25, 4),
            (3, 62, 3),
            (4, 45, 2),
            (5, 5, 5),
            (5, 84, 4),
            (6, 30, 3),
            (7, 52, 4),
            (8, 16, 3),
            (9, 70, 5),
            (10, 38, 3),
        ]
        .iter()
        .enumerate()
        {
            c.extend(patch(r, a, w, f * (0.8 + 0.05 * i as f64)));
        }
        // Back wall.
        c.extend(patch(11, 0, DEFAULT_AZIMUTH_BINS, 0.6 * f));
        self.env_spec("C", c, self.c_noise_floor, self.c_gain, 5)
    }

    /// Random persons for one sample.
    pub fn persons(&self, label: u8, activity: Activity, seed: u64) -> Vec<PersonSpec> {
        let mut g = rng(seed);
        let uni = |g: &mut Rng, (lo, hi): (f64, f64)| if lo == hi { lo } else { g.random_range(lo..hi) };
        let crowd = 1.0 + self.crowd_coupling * label.saturating_sub(1) as f64;
        let azimuths = spaced_positions(
            &mut g,
            label as usize,
            (8.0, 83.0),
            self.min_separation * self.person_extent.1,
        );
        (0..label as usize)
            .map(|i| {
                let walking = match activity {
                    Activity::Standing => false,
                    Activity::Walking => true,
                    Activity::Mixed => i % 2 == 1 || label == 1 && g.random_bool(0.5),
                };
                PersonSpec {
                    center: (g.random_range(1.5..10.5), azimuths[i]),
                    extent: self.person_extent,
                    peak_amplitude: uni(&mut g, self.person_peak),
                    breathing_freq: g.random_range(BREATHING_BAND_HZ.0..BREATHING_BAND_HZ.1),
                    breathing_depth: uni(&mut g, self.breathing_depth),
                    walk_speed: if walking { uni(&mut g, self.walk_speed) } else { 0.0 },
                    path_seed: g.random(),
                    drift_depth: crowd * uni(&mut g, self.drift_depth),
                    profile_order: self.profile_order,
                }
            })
            .collect()
    }
}

/// `n` positions in `[lo, hi]` with pairwise distance >= `gap` (shrunk to fit
/// when necessary), uniform over feasible configurations, in random order.
fn spaced_positions(g: &mut Rng, n: usize, (lo, hi): (f64, f64), gap: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let gap = if n > 1 {
        gap.min((hi - lo) / (n - 1) as f64)
    } else {
        0.0
    };
    let free = hi - lo - gap * (n - 1) as f64;
    let mut u: Vec<f64> = (0..n).map(|_| g.random_range(0.0..=free)).collect();
    u.sort_by(f64::total_cmp);
    let mut pos: Vec<f64> = u.iter().enumerate().map(|(i, v)| lo + v + gap * i as f64).collect();
    for i in (1..n).rev() {
        pos.swap(i, g.random_range(0..=i));
    }
    pos
}

/// Which synthetic room to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Room {
    A,
    B,
    C,
}

impl Room {
    pub fn env_id(self) -> u16 {
        match self {
            Room::A => ENV_A,
            Room::B => ENV_B,
            Room::C => ENV_C,
        }
    }
}

/// Generate `n_per_class` clip-and-normalized cubes per label for one room.
/// Activities and (for room A) layouts cycle within each class.
pub fn generate_room(cfg: &SuiteConfig, room: Room, n_per_class: usize, seed: u64) -> Result<Dataset> {
    generate_labels(cfg, room, &[0, 1, 2, 3], n_per_class, seed)
}

/// Like [`generate_room`] for a subset of labels.
pub fn generate_labels(cfg: &SuiteConfig, room: Room, labels: &[u8], n_per_class: usize, seed: u64) -> Result<Dataset> {
    use rayon::prelude::*;
    cfg.validate()?;
    let layouts = match room {
        Room::A => cfg.layouts_a(),
        Room::B => vec![cfg.layout_b()],
        Room::C => vec![cfg.layout_c()],
    };
    let jobs: Vec<(u8, usize)> = labels
        .iter()
        .flat_map(|&l| (0..n_per_class).map(move |i| (l, i)))
        .collect();
    let cubes = jobs
        .par_iter()
        .map(|&(label, i)| {
            let sample_seed = derive_seed(seed, ((room.env_id() as u64) << 40) | ((label as u64) << 32) | i as u64);
            let activity = Activity::ALL[i % Activity::ALL.len()];
            let layout = (i / Activity::ALL.len()) % layouts.len();
            let scene = SceneConfig {
                env: layouts[layout].clone(),
                persons: cfg.persons(label, activity, derive_seed(sample_seed, 0)),
                frames: cfg.frames,
                sample_rate: cfg.sample_rate,
                seed: derive_seed(sample_seed, 1),
            };
            let raw = generate_cube(&scene)?;
            let (mut cube, _) = clip_and_normalize(&raw)?;
            cube.meta.environment = Environment::Synthetic(room.env_id());
            cube.meta.activity = activity;
            cube.meta.layout = (room == Room::A).then_some(layout as u16);
            cube.meta.seed = Some(sample_seed);
            Ok(cube)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(cubes))
}

/// The three rooms: A′ (training, four layouts), B′ (same room, rearranged),
/// C′ (different room).
pub fn make_environment_suite(seed: u64, n_per_class: usize) -> Result<(Dataset, Dataset, Dataset)> {
    make_suite_with(&SuiteConfig::default(), seed, n_per_class)
}

pub fn make_suite_with(cfg: &SuiteConfig, seed: u64, n_per_class: usize) -> Result<(Dataset, Dataset, Dataset)> {
    if n_per_class == 0 {
        return Err(invalid("n_per_class must be >= 1"));
    }
    Ok((
        generate_room(cfg, Room::A, n_per_class, seed)?,
        generate_room(cfg, Room::B, n_per_class, seed)?,
        generate_room(cfg, Room::C, n_per_class, seed)?,
    ))
}

/// Extra 0-person room-A cubes for fitting a background model. Uses a seed
/// stream disjoint from [`generate_room`].
pub fn background_set(cfg: &SuiteConfig, n: usize, seed: u64) -> Result<Dataset> {
    generate_labels(cfg, Room::A, &[0], n, derive_seed(seed, 0xB6))
}
