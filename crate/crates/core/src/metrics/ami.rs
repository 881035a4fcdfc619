//! Adjusted mutual information under the permutation model.

use std::collections::BTreeMap;

use crate::error::{invalid, Result};

/// Cluster-by-class count matrix with cached marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn new<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(invalid(format!("labelings have lengths {} and {}", a.len(), b.len())));
        }
        let ia = index_labels(a);
        let ib = index_labels(b);
        let rows = ia.iter().max().map_or(0, |m| m + 1);
        let cols = ib.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0usize; cols]; rows];
        for (&i, &j) in ia.iter().zip(&ib) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: a.len(),
        })
    }
}

fn index_labels<T: Ord + Copy>(labels: &[T]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    for &l in labels {
        let next = map.len();
        map.entry(l).or_insert(next);
    }
    labels.iter().map(|l| map[l]).collect()
}

fn entropy(sums: &[usize], n: usize) -> f64 {
    let n = n as f64;
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information in nats.
pub fn mutual_info(t: &ContingencyTable) -> f64 {
    let n = t.n as f64;
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            mi += nij / n * (n * nij / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln();
        }
    }
    mi.max(0.0)
}

/// `ln k!` for `k = 0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Expected mutual information of two labelings with the given marginals
/// when one is randomly permuted (hypergeometric cell counts).
pub fn expected_mutual_info(row_sums: &[usize], col_sums: &[usize], n: usize) -> f64 {
    let lf = log_factorials(n);
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in row_sums {
        for &b in col_sums {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            for nij in lo..=hi {
                let x = nij as f64;
                let term = x / nf * (nf * x / (a as f64 * b as f64)).ln();
                let log_p = lf[a] + lf[b] + lf[n - a] + lf[n - b]
                    - lf[n]
                    - lf[nij]
                    - lf[a - nij]
                    - lf[b - nij]
                    - lf[n + nij - a - b];
                emi += term * log_p.exp();
            }
        }
    }
    emi
}

fn same_partition(t: &ContingencyTable) -> bool {
    t.counts.len() == t.col_sums.len()
        && t.counts.iter().all(|row| row.iter().filter(|&&c| c > 0).count() == 1)
        && (0..t.col_sums.len()).all(|j| t.counts.iter().filter(|r| r[j] > 0).count() == 1)
}

/// `(MI − E[MI]) / (max(H(U), H(V)) − E[MI])`.
pub fn ami<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    if t.n < 2 {
        return Err(invalid("AMI needs at least 2 samples"));
    }
    if same_partition(&t) {
        return Ok(1.0);
    }
    let mi = mutual_info(&t);
    let emi = expected_mutual_info(&t.row_sums, &t.col_sums, t.n);
    let h = entropy(&t.row_sums, t.n).max(entropy(&t.col_sums, t.n));
    let mut denom = h - emi;
    if denom.abs() < f64::EPSILON {
        denom = f64::EPSILON.copysign(denom);
    }
    Ok((mi - emi) / denom)
}
