//! Pooled temporal statistics used as regressor inputs.

use serde::{Deserialize, Serialize};

use crate::cube::RadarCube;
use crate::error::{invalid, Result};

/// Average-pool each frame over a `rows × cols` grid of regions, then take the
/// temporal mean, std and max of every region. Output order: all means, all
/// stds, all maxes, each in row-major region order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub pool_grid: (usize, usize),
}

impl Default for FeatureExtractor {
    fn default() -> Self {
        Self { pool_grid: (3, 7) }
    }
}

/// `[start, end)` of region `i` when `n` bins are split into `parts`; the last
/// region absorbs the remainder.
pub fn region_bounds(n: usize, parts: usize, i: usize) -> (usize, usize) {
    let size = n / parts;
    let start = i * size;
    let end = if i + 1 == parts { n } else { start + size };
    (start, end)
}

impl FeatureExtractor {
    pub fn regions(&self) -> usize {
        self.pool_grid.0 * self.pool_grid.1
    }

    pub fn dim(&self) -> usize {
        3 * self.regions()
    }

    pub fn extract(&self, cube: &RadarCube) -> Result<Vec<f64>> {
        let (rows, cols) = self.pool_grid;
        if rows == 0 || cols == 0 || rows > cube.range_bins() || cols > cube.azimuth_bins() {
            return Err(invalid(format!(
                "pool grid {rows}x{cols} does not fit a {}x{} frame",
                cube.range_bins(),
                cube.azimuth_bins()
            )));
        }
        let ab = cube.azimuth_bins();
        let nreg = self.regions();
        let frames = cube.frames();
        let mut sum = vec![0.0f64; nreg];
        let mut sumsq = vec![0.0f64; nreg];
        let mut max = vec![f64::NEG_INFINITY; nreg];
        let bounds: Vec<((usize, usize), (usize, usize))> = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| (region_bounds(cube.range_bins(), rows, i), region_bounds(ab, cols, j)))
            .collect();
        for t in 0..frames {
            let frame = cube.frame(t);
            for (k, &((r0, r1), (a0, a1))) in bounds.iter().enumerate() {
                let mut s = 0.0;
                for r in r0..r1 {
                    s += frame[r * ab + a0..r * ab + a1].iter().map(|&v| v as f64).sum::<f64>();
                }
                let m = s / ((r1 - r0) * (a1 - a0)) as f64;
                sum[k] += m;
                sumsq[k] += m * m;
                max[k] = max[k].max(m);
            }
        }
        let n = frames as f64;
        let mut out = Vec::with_capacity(self.dim());
        let means: Vec<f64> = sum.iter().map(|s| s / n).collect();
        out.extend(&means);
        out.extend(sumsq.iter().zip(&means).map(|(sq, m)| (sq / n - m * m).max(0.0).sqrt()));
        out.extend(&max);
        Ok(out)
    }
}
