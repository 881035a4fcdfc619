//! k-means with greedy k-means++ seeding and parallel restarts.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng, Rng};

pub const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after seeding and after every Lloyd iteration of the winning run.
    pub history: Vec<f64>,
    /// Number of non-empty clusters.
    pub effective_k: usize,
    /// Set when the data has fewer than `k` distinct points.
    pub degenerate: bool,
    /// Restart index that produced this result.
    pub restart: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Draw an index with probability proportional to `weights`; uniform when all are zero.
fn weighted_pick(weights: &[f64], g: &mut Rng) -> usize {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return g.random_range(0..weights.len());
    }
    let mut u = g.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Greedy k-means++: each new center is the best of `2 + ln k` weighted draws.
fn seed_centers(x: &[Vec<f64>], k: usize, g: &mut Rng) -> Vec<Vec<f64>> {
    let trials = 2 + (k as f64).ln().floor() as usize;
    let first = g.random_range(0..x.len());
    let mut centers = vec![x[first].clone()];
    let mut closest: Vec<f64> = x.iter().map(|p| sq_dist(p, &x[first])).collect();
    while centers.len() < k {
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let cand = weighted_pick(&closest, g);
            let updated: Vec<f64> = x
                .iter()
                .zip(&closest)
                .map(|(p, &d)| d.min(sq_dist(p, &x[cand])))
                .collect();
            let pot: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| pot < b.0) {
                best = Some((pot, cand, updated));
            }
        }
        let (_, cand, updated) = best.expect("at least one trial");
        centers.push(x[cand].clone());
        closest = updated;
    }
    centers
}

fn run_once(x: &[Vec<f64>], k: usize, seed: u64) -> (Vec<usize>, Vec<Vec<f64>>, Vec<f64>) {
    let mut g = rng(seed);
    let mut centroids = seed_centers(x, k, &mut g);
    let d = x[0].len();
    let assign = |centroids: &[Vec<f64>]| -> (Vec<usize>, f64) {
        let mut inertia = 0.0;
        let labels = x
            .iter()
            .map(|p| {
                let (j, dist) = nearest(p, centroids);
                inertia += dist;
                j
            })
            .collect();
        (labels, inertia)
    };
    let (mut labels, inertia) = assign(&centroids);
    let mut history = vec![inertia];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &j) in x.iter().zip(&labels) {
            counts[j] += 1;
            for (s, v) in sums[j].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            // An empty cluster keeps its previous centroid.
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
        let (next, inertia) = assign(&centroids);
        history.push(inertia);
        if next == labels {
            break;
        }
        labels = next;
    }
    (labels, centroids, history)
}

/// Best-inertia k-means over `restarts` seeded runs. Restart `i` uses
/// `derive_seed(seed, i)`; ties go to the lowest restart index.
pub fn kmeans(x: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 || restarts == 0 {
        return Err(invalid("k and restarts must be >= 1"));
    }
    if x.len() < k {
        return Err(invalid(format!("{} points cannot form {k} clusters", x.len())));
    }
    let d = x[0].len();
    if x.iter().any(|p| p.len() != d) {
        return Err(invalid("points have different dimensions"));
    }
    let runs: Vec<_> = (0..restarts)
        .into_par_iter()
        .map(|r| run_once(x, k, derive_seed(seed, r as u64)))
        .collect();
    let (restart, (labels, centroids, history)) = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            let ia = *a.2.last().unwrap_or(&f64::INFINITY);
            let ib = *b.2.last().unwrap_or(&f64::INFINITY);
            ia.total_cmp(&ib).then(i.cmp(j))
        })
        .expect("at least one restart");
    let mut used = vec![false; k];
    labels.iter().for_each(|&j| used[j] = true);
    let mut distinct: Vec<&Vec<f64>> = x.iter().collect();
    distinct.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    distinct.dedup();
    Ok(KMeansResult {
        inertia: *history.last().unwrap_or(&0.0),
        labels,
        centroids,
        history,
        effective_k: used.iter().filter(|&&u| u).count(),
        degenerate: distinct.len() < k,
        restart,
    })
}
