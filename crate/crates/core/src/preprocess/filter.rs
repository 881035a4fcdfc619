//! Butterworth IIR design and zero-phase filtering of cell time series.
//!
//! Designs go analog prototype → frequency transform (high-pass or
//! band-pass) → bilinear transform with prewarped edges, all in
//! zero/pole/gain form, and are then grouped into second-order sections.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cube::{minmax_rescale, RadarCube};
use crate::error::{invalid, Result};

/// One second-order section, `a0` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// `H(z)` at `z = e^{jω}`.
    pub fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        (self.b0 + self.b1 * z1 + self.b2 * z2) / (1.0 + self.a1 * z1 + self.a2 * z2)
    }

    /// Roots of `z² + a1·z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let disc = Complex64::new(self.a1 * self.a1 - 4.0 * self.a2, 0.0).sqrt();
        [(-self.a1 + disc) / 2.0, (-self.a1 - disc) / 2.0]
    }

    /// Direct-form-II-transposed state that yields a constant output for a
    /// constant unit input.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b2 - self.a2 * g;
        let z1 = self.b1 - self.a1 * g + z2;
        [z1, z2]
    }

    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Highpass,
    Bandpass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterDesign {
    pub kind: FilterKind,
    /// Prototype order (a band-pass of order N has 2N poles).
    pub order: usize,
    pub cutoffs_hz: Vec<f64>,
    pub sample_rate_hz: f64,
}

/// Cascade of biquads plus the design that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct IirFilter {
    pub sections: Vec<Biquad>,
    pub design: FilterDesign,
}

impl IirFilter {
    pub fn response_at(&self, freq_hz: f64) -> Complex64 {
        let omega = 2.0 * PI * freq_hz / self.design.sample_rate_hz;
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(omega))
    }

    pub fn gain_at(&self, freq_hz: f64) -> f64 {
        self.response_at(freq_hz).norm()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.sections.iter().flat_map(|s| s.poles()).collect()
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }

    /// Edge padding used by [`IirFilter::filtfilt`]: the longest odd
    /// reflection the series allows, which keeps start-up transients of the
    /// low-cutoff stages out of short clips.
    pub fn pad_len(&self, n: usize) -> usize {
        n.saturating_sub(1)
    }

    /// Minimum series length accepted by [`IirFilter::filtfilt`].
    pub fn min_len(&self) -> usize {
        (3 * self.sections.len()).max(2)
    }

    /// Causal filtering with the initial state set to the steady state for a
    /// constant input equal to `x[0]`.
    pub fn lfilter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.pass_many(&mut y, 1, false);
        y
    }

    /// One causal pass over `cols` interleaved series stored time-major in
    /// `buf`, run backwards in time when `reverse` is set. Each series starts
    /// from the steady state for its first sample (in pass direction).
    fn pass_many(&self, buf: &mut [f64], cols: usize, reverse: bool) {
        let rows = buf.len() / cols;
        if rows == 0 {
            return;
        }
        let first = if reverse { rows - 1 } else { 0 };
        let mut scale: Vec<f64> = buf[first * cols..(first + 1) * cols].to_vec();
        let mut z1 = vec![0.0; cols];
        let mut z2 = vec![0.0; cols];
        for s in &self.sections {
            let [s1, s2] = s.step_state();
            for c in 0..cols {
                z1[c] = s1 * scale[c];
                z2[c] = s2 * scale[c];
            }
            for i in 0..rows {
                let t = if reverse { rows - 1 - i } else { i };
                let row = &mut buf[t * cols..(t + 1) * cols];
                for ((v, a), b) in row.iter_mut().zip(z1.iter_mut()).zip(z2.iter_mut()) {
                    let xin = *v;
                    let out = s.b0 * xin + *a;
                    *a = s.b1 * xin - s.a1 * out + *b;
                    *b = s.b2 * xin - s.a2 * out;
                    *v = out;
                }
            }
            let g = s.dc_gain();
            scale.iter_mut().for_each(|v| *v *= g);
        }
    }

    /// Zero-phase filtering of `cols` interleaved series of length `n`
    /// (time-major). See [`IirFilter::filtfilt`].
    pub fn filtfilt_many(&self, x: &[f64], cols: usize) -> Result<Vec<f64>> {
        let n = if cols == 0 { 0 } else { x.len() / cols };
        if n < self.min_len() {
            return Err(invalid(format!(
                "series of {n} samples too short for {} sections (need >= {})",
                self.sections.len(),
                self.min_len()
            )));
        }
        let pad = self.pad_len(n);
        let row = |t: usize| &x[t * cols..(t + 1) * cols];
        let mut ext = Vec::with_capacity((n + 2 * pad) * cols);
        for i in (1..=pad).rev() {
            ext.extend(row(0).iter().zip(row(i)).map(|(a, b)| 2.0 * a - b));
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.extend(row(n - 1).iter().zip(row(n - 1 - i)).map(|(a, b)| 2.0 * a - b));
        }
        // Forward-then-backward, and backward-then-forward (the same
        // operator applied to the time-reversed series, reversed back).
        let mut fb = ext.clone();
        self.pass_many(&mut fb, cols, false);
        self.pass_many(&mut fb, cols, true);
        let mut bf = ext;
        self.pass_many(&mut bf, cols, true);
        self.pass_many(&mut bf, cols, false);
        Ok(fb[pad * cols..(pad + n) * cols]
            .iter()
            .zip(&bf[pad * cols..(pad + n) * cols])
            .map(|(p, q)| 0.5 * (p + q))
            .collect())
    }

    /// Zero-phase filtering: forward-backward with odd reflective padding,
    /// averaged with the same pass run on the time-reversed series so the
    /// operator commutes exactly with time reversal.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.filtfilt_many(x, 1)
    }
}

struct Zpk {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    gain: f64,
}

/// Analog Butterworth prototype with unit cutoff.
fn butter_prototype(order: usize) -> Zpk {
    let n = order as i64;
    let poles = (0..n)
        .map(|k| {
            let m = (-n + 1 + 2 * k) as f64;
            -Complex64::from_polar(1.0, PI * m / (2.0 * order as f64))
        })
        .collect();
    Zpk {
        zeros: Vec::new(),
        poles,
        gain: 1.0,
    }
}

fn lp_to_hp(zpk: Zpk, wo: f64) -> Zpk {
    let degree = zpk.poles.len() - zpk.zeros.len();
    let num: Complex64 = zpk.zeros.iter().map(|z| -z).product();
    let den: Complex64 = zpk.poles.iter().map(|p| -p).product();
    let mut zeros: Vec<Complex64> = zpk.zeros.iter().map(|z| wo / z).collect();
    zeros.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), degree));
    Zpk {
        zeros,
        poles: zpk.poles.iter().map(|p| wo / p).collect(),
        gain: zpk.gain * (num / den).re,
    }
}

fn lp_to_bp(zpk: Zpk, wo: f64, bw: f64) -> Zpk {
    let degree = zpk.poles.len() - zpk.zeros.len();
    let split = |v: &[Complex64]| -> Vec<Complex64> {
        let scaled: Vec<Complex64> = v.iter().map(|x| x * bw / 2.0).collect();
        let plus = scaled.iter().map(|x| x + (x * x - wo * wo).sqrt());
        let minus = scaled.iter().map(|x| x - (x * x - wo * wo).sqrt());
        plus.chain(minus).collect()
    };
    let mut zeros = split(&zpk.zeros);
    zeros.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), degree));
    Zpk {
        zeros,
        poles: split(&zpk.poles),
        gain: zpk.gain * bw.powi(degree as i32),
    }
}

fn bilinear(zpk: Zpk, fs: f64) -> Zpk {
    let degree = zpk.poles.len() - zpk.zeros.len();
    let fs2 = Complex64::new(2.0 * fs, 0.0);
    let num: Complex64 = zpk.zeros.iter().map(|z| fs2 - z).product();
    let den: Complex64 = zpk.poles.iter().map(|p| fs2 - p).product();
    let mut zeros: Vec<Complex64> = zpk.zeros.iter().map(|z| (fs2 + z) / (fs2 - z)).collect();
    zeros.extend(std::iter::repeat_n(Complex64::new(-1.0, 0.0), degree));
    Zpk {
        zeros,
        poles: zpk.poles.iter().map(|p| (fs2 + p) / (fs2 - p)).collect(),
        gain: zpk.gain * (num / den).re,
    }
}

/// Group roots into conjugate pairs (upper-half-plane representative) and
/// pairs of real roots, returning real quadratic coefficients `[1, c1, c2]`.
fn quadratic_factors(roots: &[Complex64]) -> Vec<[f64; 2]> {
    const IMAG_TOL: f64 = 1e-10;
    let mut reals: Vec<f64> = roots.iter().filter(|r| r.im.abs() <= IMAG_TOL).map(|r| r.re).collect();
    reals.sort_by(f64::total_cmp);
    let mut out: Vec<[f64; 2]> = roots
        .iter()
        .filter(|r| r.im > IMAG_TOL)
        .map(|r| [-2.0 * r.re, r.norm_sqr()])
        .collect();
    // Pair smallest with largest so band-pass sections each get one zero at
    // z = -1 and one at z = +1.
    while reals.len() >= 2 {
        let lo = reals.remove(0);
        let hi = reals.pop().expect("len >= 2");
        out.push([-(lo + hi), lo * hi]);
    }
    if let Some(r) = reals.pop() {
        out.push([-r, 0.0]);
    }
    out
}

fn zpk_to_sections(zpk: &Zpk) -> Vec<Biquad> {
    let den = quadratic_factors(&zpk.poles);
    let mut num = quadratic_factors(&zpk.zeros);
    num.resize(den.len(), [0.0, 0.0]);
    den.iter()
        .zip(&num)
        .enumerate()
        .map(|(i, (a, b))| {
            let k = if i == 0 { zpk.gain } else { 1.0 };
            Biquad {
                b0: k,
                b1: k * b[0],
                b2: k * b[1],
                a1: a[0],
                a2: a[1],
            }
        })
        .collect()
}

fn prewarp(freq_hz: f64, fs: f64) -> f64 {
    2.0 * fs * (PI * freq_hz / fs).tan()
}

fn check_cutoff(freq_hz: f64, fs: f64) -> Result<()> {
    let nyquist = fs / 2.0;
    if !(freq_hz > 0.0 && freq_hz < nyquist) {
        return Err(invalid(format!(
            "cutoff {freq_hz} Hz outside (0, {nyquist:.2}) Hz (Nyquist limit at fs = {fs} Hz)"
        )));
    }
    Ok(())
}

pub fn butterworth_highpass(order: usize, cutoff_hz: f64, fs: f64) -> Result<IirFilter> {
    if order == 0 {
        return Err(invalid("filter order must be >= 1"));
    }
    check_cutoff(cutoff_hz, fs)?;
    let zpk = bilinear(lp_to_hp(butter_prototype(order), prewarp(cutoff_hz, fs)), fs);
    Ok(IirFilter {
        sections: zpk_to_sections(&zpk),
        design: FilterDesign {
            kind: FilterKind::Highpass,
            order,
            cutoffs_hz: vec![cutoff_hz],
            sample_rate_hz: fs,
        },
    })
}

/// Butterworth band-pass with prototype order `order` (2·order poles).
pub fn design_butterworth_bandpass(order: usize, lo_hz: f64, hi_hz: f64, fs: f64) -> Result<IirFilter> {
    if order == 0 {
        return Err(invalid("filter order must be >= 1"));
    }
    check_cutoff(lo_hz, fs)?;
    check_cutoff(hi_hz, fs)?;
    if lo_hz >= hi_hz {
        return Err(invalid(format!(
            "band edges must satisfy lo < hi, got {lo_hz} >= {hi_hz}"
        )));
    }
    let (w1, w2) = (prewarp(lo_hz, fs), prewarp(hi_hz, fs));
    let zpk = bilinear(lp_to_bp(butter_prototype(order), (w1 * w2).sqrt(), w2 - w1), fs);
    Ok(IirFilter {
        sections: zpk_to_sections(&zpk),
        design: FilterDesign {
            kind: FilterKind::Bandpass,
            order,
            cutoffs_hz: vec![lo_hz, hi_hz],
            sample_rate_hz: fs,
        },
    })
}

pub const BANDPASS_ORDER: usize = 4;
pub const BANDPASS_LO_HZ: f64 = 0.1;
pub const BANDPASS_HI_HZ: f64 = 0.5;
pub const DRIFT_STAGE_ORDER: usize = 8;
pub const DRIFT_STAGE_CUTOFF_HZ: f64 = 0.05;
pub const SMOOTH_STAGE_ORDER: usize = 2;
pub const SMOOTH_STAGE_CUTOFF_HZ: f64 = 0.1;
pub const TWO_STAGE_WEIGHTS: (f64, f64) = (0.7, 0.3);

/// How the two high-pass stages feed the weighted blend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlendWiring {
    /// `0.7·y1 + 0.3·stage2(y1)` with `y1 = stage1(x)`.
    #[default]
    Cascade,
    /// `0.7·stage1(x) + 0.3·stage2(x)`.
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageHighpass {
    pub stage1: IirFilter,
    pub stage2: IirFilter,
    pub weights: (f64, f64),
    pub wiring: BlendWiring,
}

impl TwoStageHighpass {
    pub fn min_len(&self) -> usize {
        self.stage1.min_len().max(self.stage2.min_len())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply_many(x, 1)
    }

    pub fn apply_many(&self, x: &[f64], cols: usize) -> Result<Vec<f64>> {
        let y1 = self.stage1.filtfilt_many(x, cols)?;
        let y2 = match self.wiring {
            BlendWiring::Cascade => self.stage2.filtfilt_many(&y1, cols)?,
            BlendWiring::Parallel => self.stage2.filtfilt_many(x, cols)?,
        };
        let (w1, w2) = self.weights;
        Ok(y1.iter().zip(&y2).map(|(a, b)| w1 * a + w2 * b).collect())
    }
}

/// 8th-order drift removal at 0.05 Hz followed by a 2nd-order stage at 0.1 Hz,
/// blended 0.7 : 0.3.
pub fn design_two_stage_highpass(fs: f64, wiring: BlendWiring) -> Result<TwoStageHighpass> {
    Ok(TwoStageHighpass {
        stage1: butterworth_highpass(DRIFT_STAGE_ORDER, DRIFT_STAGE_CUTOFF_HZ, fs)?,
        stage2: butterworth_highpass(SMOOTH_STAGE_ORDER, SMOOTH_STAGE_CUTOFF_HZ, fs)?,
        weights: TWO_STAGE_WEIGHTS,
        wiring,
    })
}

/// A temporal filter that can be run over every cell of a cube.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterSpec {
    Single(IirFilter),
    TwoStage(TwoStageHighpass),
}

impl FilterSpec {
    pub fn min_len(&self) -> usize {
        match self {
            FilterSpec::Single(f) => f.min_len(),
            FilterSpec::TwoStage(f) => f.min_len(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply_many(x, 1)
    }

    /// Filter `cols` interleaved time-major series at once.
    pub fn apply_many(&self, x: &[f64], cols: usize) -> Result<Vec<f64>> {
        match self {
            FilterSpec::Single(f) => f.filtfilt_many(x, cols),
            FilterSpec::TwoStage(f) => f.apply_many(x, cols),
        }
    }
}

/// Zero-phase filter every cell's time series; returns frame-major f64
/// amplitudes before any renormalization.
pub fn filter_cube_raw(cube: &RadarCube, spec: &FilterSpec) -> Result<Vec<f64>> {
    if cube.frames() < spec.min_len() {
        return Err(invalid(format!(
            "cube has {} frames, filter needs at least {}",
            cube.frames(),
            spec.min_len()
        )));
    }
    let x: Vec<f64> = cube.data().iter().map(|&v| v as f64).collect();
    spec.apply_many(&x, cube.frame_len())
}

/// Filter every cell, then min-max renormalize the whole cube to [0, 1].
pub fn filter_cube(cube: &RadarCube, spec: &FilterSpec) -> Result<RadarCube> {
    let raw = filter_cube_raw(cube, spec)?;
    cube.with_data(minmax_rescale(&raw))
}
