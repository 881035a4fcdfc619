//! Low-rank statistical background model fit on empty-room cubes.
//!
//! Every frame of every background cube is treated as one observation of a
//! `range·azimuth` vector. The model keeps the mean frame plus the top-`r`
//! principal directions of the centered frames, found by orthogonal
//! (subspace) power iteration on the frame covariance.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::cube::{minmax_rescale, Dataset, RadarCube};
use crate::error::{invalid, Error, Result};
use crate::rng::rng;

pub const DEFAULT_RANK: usize = 8;
const MAX_ITERS: usize = 500;
const TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    pub range_bins: usize,
    pub azimuth_bins: usize,
    /// Mean background frame, row-major `[range][azimuth]`.
    pub mean: Vec<f64>,
    /// Orthonormal basis frames, ordered by decreasing captured variance.
    pub basis: Vec<Vec<f64>>,
}

impl BackgroundModel {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    fn dim(&self) -> usize {
        self.range_bins * self.azimuth_bins
    }

    /// `frame - (mean + projection onto basis)`.
    pub fn residual(&self, frame: &[f64]) -> Vec<f64> {
        let mut centered: Vec<f64> = frame.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        for b in &self.basis {
            let c = dot(b, &centered);
            for (v, bi) in centered.iter_mut().zip(b) {
                *v -= c * bi;
            }
        }
        centered
    }

    /// Gram matrix of the basis; identity for a valid model.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.basis
            .iter()
            .map(|a| self.basis.iter().map(|b| dot(a, b)).collect())
            .collect()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Modified Gram-Schmidt, run twice for stability. Columns that collapse
/// (rank-deficient data) are replaced by fresh random directions.
fn orthonormalize(cols: &mut [Vec<f64>], rng: &mut crate::rng::Rng) {
    let dim = cols.first().map_or(0, Vec::len);
    for j in 0..cols.len() {
        let scale = dot(&cols[j], &cols[j]).sqrt();
        for attempt in 0..4 {
            for _ in 0..2 {
                for i in 0..j {
                    let (done, rest) = cols.split_at_mut(j);
                    let c = dot(&done[i], &rest[0]);
                    for (v, q) in rest[0].iter_mut().zip(&done[i]) {
                        *v -= c * q;
                    }
                }
            }
            let n = normalize(&mut cols[j]);
            if n > 1e-10 * scale.max(1e-300) && n > 1e-150 {
                break;
            }
            assert!(attempt < 3, "failed to complete orthonormal basis");
            cols[j] = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        }
    }
}

/// Symmetric eigen-decomposition of a small matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors as columns).
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// The centered frames, applied as the (unnormalized) covariance operator.
enum CovOperator {
    /// Few frames: apply `Σ_f x_f (x_fᵀ v)` directly.
    Frames(Vec<Vec<f64>>),
    /// Many frames: the dense `dim × dim` scatter matrix, formed once.
    Dense(Vec<Vec<f64>>),
}

impl CovOperator {
    fn new(frames: Vec<Vec<f64>>, dim: usize) -> Self {
        if frames.len() <= dim {
            return CovOperator::Frames(frames);
        }
        let cols: Vec<Vec<f64>> = (0..dim).map(|i| frames.iter().map(|f| f[i]).collect()).collect();
        let upper: Vec<Vec<f64>> = (0..dim)
            .into_par_iter()
            .map(|i| (i..dim).map(|j| dot(&cols[i], &cols[j])).collect())
            .collect();
        let mut dense = vec![vec![0.0; dim]; dim];
        for (i, row) in upper.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                dense[i][i + k] = v;
                dense[i + k][i] = v;
            }
        }
        CovOperator::Dense(dense)
    }

    fn apply(&self, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
        match self {
            CovOperator::Frames(frames) => {
                let dim = cols[0].len();
                let mut out = vec![vec![0.0; dim]; cols.len()];
                for x in frames {
                    for (k, col) in cols.iter().enumerate() {
                        let c = dot(x, col);
                        for (a, xi) in out[k].iter_mut().zip(x) {
                            *a += c * xi;
                        }
                    }
                }
                out
            }
            CovOperator::Dense(m) => cols
                .par_iter()
                .map(|col| m.iter().map(|row| dot(row, col)).collect())
                .collect(),
        }
    }
}

/// Fit mean + top-`rank` subspace on 0-person cubes.
pub fn fit_background(backgrounds: &Dataset, rank: usize, seed: u64) -> Result<BackgroundModel> {
    let first = backgrounds
        .cubes
        .first()
        .ok_or_else(|| invalid("background set is empty"))?;
    let (range_bins, azimuth_bins) = (first.range_bins(), first.azimuth_bins());
    let dim = range_bins * azimuth_bins;
    let mut frames: Vec<Vec<f64>> = Vec::new();
    for cube in &backgrounds.cubes {
        if cube.meta.label != 0 {
            return Err(invalid(format!(
                "background cubes must be 0-person, found label {}",
                cube.meta.label
            )));
        }
        if (cube.range_bins(), cube.azimuth_bins()) != (range_bins, azimuth_bins) {
            return Err(Error::Shape {
                expected: format!("{range_bins}x{azimuth_bins}"),
                got: format!("{}x{}", cube.range_bins(), cube.azimuth_bins()),
            });
        }
        for t in 0..cube.frames() {
            frames.push(cube.frame(t).iter().map(|&v| v as f64).collect());
        }
    }
    if frames.len() < rank + 1 {
        return Err(invalid(format!(
            "rank {rank} needs at least {} background frames, got {}",
            rank + 1,
            frames.len()
        )));
    }
    if rank > dim {
        return Err(invalid(format!("rank {rank} exceeds frame dimension {dim}")));
    }

    let n = frames.len() as f64;
    let mut mean = vec![0.0; dim];
    for f in &frames {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    for f in frames.iter_mut() {
        for (v, m) in f.iter_mut().zip(&mean) {
            *v -= m;
        }
    }

    let mut model = BackgroundModel {
        range_bins,
        azimuth_bins,
        mean,
        basis: Vec::new(),
    };
    if rank == 0 {
        return Ok(model);
    }

    let mut rng = rng(seed);
    let cov = CovOperator::new(frames, dim);
    let mut basis: Vec<Vec<f64>> = (0..rank)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    orthonormalize(&mut basis, &mut rng);
    for _ in 0..MAX_ITERS {
        let mut next = cov.apply(&basis);
        orthonormalize(&mut next, &mut rng);
        // Subspace distance ‖V_new - V_old V_oldᵀ V_new‖_F.
        let mut dist = 0.0;
        for col in &next {
            let mut resid = col.clone();
            for b in &basis {
                let c = dot(b, col);
                for (r, bi) in resid.iter_mut().zip(b) {
                    *r -= c * bi;
                }
            }
            dist += dot(&resid, &resid);
        }
        basis = next;
        if dist.sqrt() < TOL {
            break;
        }
    }

    // Rayleigh-Ritz: rotate within the subspace so columns are principal axes.
    let cv = cov.apply(&basis);
    let small: Vec<Vec<f64>> = basis.iter().map(|a| cv.iter().map(|b| dot(a, b)).collect()).collect();
    let (vals, vecs) = jacobi_eigen(small);
    let mut order: Vec<usize> = (0..rank).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let mut rotated: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| {
            let mut col = vec![0.0; dim];
            for (i, b) in basis.iter().enumerate() {
                let w = vecs[i][k];
                for (c, bi) in col.iter_mut().zip(b) {
                    *c += w * bi;
                }
            }
            col
        })
        .collect();
    orthonormalize(&mut rotated, &mut rng);
    model.basis = rotated;
    Ok(model)
}

/// Per-frame residual after removing the modeled background, as raw f64
/// values (frame-major) before magnitude and renormalization.
pub fn background_residual(cube: &RadarCube, m: &BackgroundModel) -> Result<Vec<f64>> {
    if cube.frame_len() != m.dim() || (cube.range_bins(), cube.azimuth_bins()) != (m.range_bins, m.azimuth_bins) {
        return Err(Error::Shape {
            expected: format!("{}x{}", m.range_bins, m.azimuth_bins),
            got: format!("{}x{}", cube.range_bins(), cube.azimuth_bins()),
        });
    }
    let mut out = Vec::with_capacity(cube.data().len());
    for t in 0..cube.frames() {
        let frame: Vec<f64> = cube.frame(t).iter().map(|&v| v as f64).collect();
        out.extend(m.residual(&frame));
    }
    Ok(out)
}

/// `|frame - background|`, renormalized to [0, 1] per cube.
pub fn suppress_background(cube: &RadarCube, m: &BackgroundModel) -> Result<RadarCube> {
    let resid: Vec<f64> = background_residual(cube, m)?.into_iter().map(f64::abs).collect();
    cube.with_data(minmax_rescale(&resid))
}
