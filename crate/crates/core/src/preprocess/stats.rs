//! Per-cell temporal statistics and the amplitude-variance transforms built on them.

use serde::{Deserialize, Serialize};

use crate::cube::RadarCube;
use crate::error::{invalid, Error, Result};

/// Per-cell temporal standard deviation, `[range][azimuth]` flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StdMap {
    pub range_bins: usize,
    pub azimuth_bins: usize,
    pub values: Vec<f64>,
}

impl StdMap {
    pub fn get(&self, r: usize, a: usize) -> f64 {
        self.values[r * self.azimuth_bins + a]
    }

    pub fn median(&self) -> f64 {
        median(&self.values)
    }
}

/// Per-cell weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    pub range_bins: usize,
    pub azimuth_bins: usize,
    pub values: Vec<f64>,
}

impl WeightMap {
    pub fn uniform(range_bins: usize, azimuth_bins: usize, w: f64) -> Self {
        Self {
            range_bins,
            azimuth_bins,
            values: vec![w; range_bins * azimuth_bins],
        }
    }
}

/// Midpoint and steepness of the sigmoid weighting curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    pub tau: f64,
    pub s: f64,
}

pub const DEFAULT_TAU: f64 = 0.02;
pub const DEFAULT_STEEPNESS: f64 = 0.01;

impl Default for SigmoidParams {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            s: DEFAULT_STEEPNESS,
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Population standard deviation (divisor N) of each cell over all frames.
pub fn std_map(cube: &RadarCube) -> Result<StdMap> {
    if cube.frames() < 2 {
        return Err(invalid(format!(
            "std map needs at least 2 frames, cube has {}",
            cube.frames()
        )));
    }
    let cells = cube.frame_len();
    let mut mean = vec![0.0f64; cells];
    let mut m2 = vec![0.0f64; cells];
    // Welford, one frame at a time so the inner loop walks contiguous memory.
    for t in 0..cube.frames() {
        let k = (t + 1) as f64;
        for (c, &x) in cube.frame(t).iter().enumerate() {
            let x = x as f64;
            let delta = x - mean[c];
            mean[c] += delta / k;
            m2[c] += delta * (x - mean[c]);
        }
    }
    let n = cube.frames() as f64;
    Ok(StdMap {
        range_bins: cube.range_bins(),
        azimuth_bins: cube.azimuth_bins(),
        values: m2.into_iter().map(|v| (v.max(0.0) / n).sqrt()).collect(),
    })
}

/// Zero the whole time series of every cell whose temporal std is `<= tau`.
pub fn threshold_zero(cube: &RadarCube, tau: f64) -> Result<RadarCube> {
    if tau.is_nan() || tau < 0.0 {
        return Err(invalid(format!("threshold must be >= 0, got {tau}")));
    }
    let sm = std_map(cube)?;
    let mut out = cube.clone();
    let cells = cube.frame_len();
    for t in 0..cube.frames() {
        let frame = out.frame_mut(t);
        for c in 0..cells {
            if sm.values[c] <= tau {
                frame[c] = 0.0;
            }
        }
    }
    Ok(out)
}

/// Logistic function evaluated without overflow for any finite argument.
#[inline]
pub fn stable_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `w = 1 / (1 + exp(-(σ - τ) / s))` per cell.
///
/// The logistic is strictly inside (0, 1) mathematically; in f64 it saturates
/// to exactly 0 or 1 once `|σ - τ| / s` exceeds roughly 37 (upper side) or 745
/// (lower side).
pub fn sigmoid_weight_map(sm: &StdMap, p: SigmoidParams) -> Result<WeightMap> {
    if !(p.s > 0.0) {
        return Err(invalid(format!("sigmoid steepness must be > 0, got {}", p.s)));
    }
    Ok(WeightMap {
        range_bins: sm.range_bins,
        azimuth_bins: sm.azimuth_bins,
        values: sm
            .values
            .iter()
            .map(|&sigma| stable_sigmoid((sigma - p.tau) / p.s))
            .collect(),
    })
}

/// Multiply every frame by the per-cell weight map.
pub fn apply_weight(cube: &RadarCube, w: &WeightMap) -> Result<RadarCube> {
    if w.range_bins != cube.range_bins() || w.azimuth_bins != cube.azimuth_bins() {
        return Err(Error::Shape {
            expected: format!("{}x{}", cube.range_bins(), cube.azimuth_bins()),
            got: format!("{}x{}", w.range_bins, w.azimuth_bins),
        });
    }
    let mut out = cube.clone();
    for t in 0..cube.frames() {
        for (x, &wc) in out.frame_mut(t).iter_mut().zip(&w.values) {
            *x = (wc * *x as f64) as f32;
        }
    }
    Ok(out)
}

/// Sigmoid weighting end to end: std map, weight map, weighted cube.
pub fn sigmoid_weighting(cube: &RadarCube, p: SigmoidParams) -> Result<RadarCube> {
    let w = sigmoid_weight_map(&std_map(cube)?, p)?;
    apply_weight(cube, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{Activity, Environment, SampleMeta};
    use rand::{Rng, SeedableRng};

    fn meta() -> SampleMeta {
        SampleMeta::new(0, Environment::A, Activity::Standing)
    }

    fn random_cube(seed: u64, frames: usize) -> RadarCube {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..frames * 4 * 5).map(|_| rng.random::<f32>()).collect();
        RadarCube::new(frames, 4, 5, data, meta()).unwrap()
    }

    fn two_pass_std(series: &[f64]) -> f64 {
        let n = series.len() as f64;
        let mean = series.iter().sum::<f64>() / n;
        (series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
    }

    #[test]
    fn constant_cube_has_zero_std() {
        let cube = RadarCube::new(6, 2, 3, vec![0.7; 36], meta()).unwrap();
        assert!(std_map(&cube).unwrap().values.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn alternating_cell_has_half_std() {
        let data = (0..10).map(|t| (t % 2) as f32).collect();
        let cube = RadarCube::new(10, 1, 1, data, meta()).unwrap();
        assert_eq!(std_map(&cube).unwrap().values[0], 0.5);
    }

    #[test]
    fn matches_two_pass_oracle() {
        let cube = random_cube(11, 60);
        let sm = std_map(&cube).unwrap();
        for c in 0..cube.frame_len() {
            let want = two_pass_std(&cube.cell_series(c));
            assert!((sm.values[c] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn single_frame_is_rejected() {
        assert!(std_map(&random_cube(1, 1)).is_err());
    }

    #[test]
    fn threshold_zero_edge_cases() {
        let cube = random_cube(3, 8);
        assert_eq!(threshold_zero(&cube, 0.0).unwrap(), cube);
        let all = threshold_zero(&cube, f64::INFINITY).unwrap();
        assert!(all.data().iter().all(|&v| v == 0.0));
        assert!(threshold_zero(&cube, -1.0).is_err());
    }

    #[test]
    fn threshold_is_inclusive_at_equality() {
        // Cell 0 alternates 0/1 (std 0.5); cell 1 is constant.
        let data = (0..8).flat_map(|t| [(t % 2) as f32, 0.3]).collect();
        let cube = RadarCube::new(8, 1, 2, data, meta()).unwrap();
        let out = threshold_zero(&cube, 0.5).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
        let kept = threshold_zero(&cube, 0.49).unwrap();
        assert_eq!(kept.get(1, 0, 0), 1.0);
        assert_eq!(kept.get(1, 0, 1), 0.0);
    }

    #[test]
    fn sigmoid_reference_values() {
        let p = SigmoidParams::default();
        let sm = StdMap {
            range_bins: 1,
            azimuth_bins: 3,
            values: vec![0.02, 0.013, 0.046],
        };
        let w = sigmoid_weight_map(&sm, p).unwrap().values;
        assert_eq!(w[0], 0.5);
        assert!((w[1] - 1.0 / (1.0 + 0.7f64.exp())).abs() < 1e-12);
        assert!((w[1] - 0.3318).abs() < 1e-4);
        assert!((w[2] - 0.9309).abs() < 1e-4);
    }

    #[test]
    fn sigmoid_rejects_nonpositive_steepness() {
        let sm = StdMap {
            range_bins: 1,
            azimuth_bins: 1,
            values: vec![0.0],
        };
        assert!(sigmoid_weight_map(&sm, SigmoidParams { tau: 0.0, s: 0.0 }).is_err());
    }

    #[test]
    fn stable_sigmoid_does_not_overflow() {
        assert_eq!(stable_sigmoid(-1.0e6), 0.0);
        assert_eq!(stable_sigmoid(1.0e6), 1.0);
        assert!(stable_sigmoid(-700.0) > 0.0);
    }

    #[test]
    fn apply_weight_scalar_cases() {
        let cube = random_cube(5, 4);
        let ones = WeightMap::uniform(4, 5, 1.0);
        assert_eq!(apply_weight(&cube, &ones).unwrap(), cube);
        let zeros = WeightMap::uniform(4, 5, 0.0);
        assert!(apply_weight(&cube, &zeros).unwrap().data().iter().all(|&v| v == 0.0));
        let mut half = ones.clone();
        half.values[7] = 0.5;
        let out = apply_weight(&cube, &half).unwrap();
        for t in 0..4 {
            for c in 0..20 {
                let want = if c == 7 {
                    cube.frame(t)[c] * 0.5
                } else {
                    cube.frame(t)[c]
                };
                assert_eq!(out.frame(t)[c], want);
            }
        }
        assert!(apply_weight(&cube, &WeightMap::uniform(5, 4, 1.0)).is_err());
    }
}
