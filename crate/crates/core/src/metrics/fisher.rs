//! Fisher score: between-class over within-class scatter, per feature.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Features whose within-class scatter is below this are skipped.
pub const MIN_WITHIN_SCATTER: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherScore {
    /// Mean of the per-feature scores over the features that were kept.
    pub score: f64,
    /// Per-feature scores; `None` where the feature was skipped.
    pub per_feature: Vec<Option<f64>>,
    pub skipped: Vec<usize>,
}

/// `F_i = Σ_j n_j (μ_ji − μ_i)² / Σ_j n_j σ_ji²` with population variances,
/// averaged over features.
pub fn fisher_score<L: Copy + Ord>(features: &[Vec<f64>], labels: &[L]) -> Result<FisherScore> {
    if features.len() != labels.len() {
        return Err(invalid(format!(
            "{} feature rows for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let mut classes: Vec<L> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(invalid("fisher score needs at least 2 classes"));
    }
    let class_of: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).unwrap_or_default())
        .collect();
    let mut counts = vec![0usize; classes.len()];
    for &c in &class_of {
        counts[c] += 1;
    }
    if counts.iter().any(|&n| n < 2) {
        return Err(invalid("every class needs at least 2 samples"));
    }
    let d = features[0].len();
    if features.iter().any(|f| f.len() != d) {
        return Err(invalid("feature rows have different lengths"));
    }

    let n = features.len() as f64;
    let k = classes.len();
    let mut per_feature = Vec::with_capacity(d);
    let mut skipped = Vec::new();
    let mut sum = 0.0;
    let mut kept = 0usize;
    for i in 0..d {
        let mut class_sum = vec![0.0; k];
        let mut total = 0.0;
        for (row, &c) in features.iter().zip(&class_of) {
            class_sum[c] += row[i];
            total += row[i];
        }
        let mu = total / n;
        let class_mu: Vec<f64> = class_sum.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
        // Σ_j n_j σ_j² is the pooled within-class sum of squares.
        let mut within = 0.0;
        for (row, &c) in features.iter().zip(&class_of) {
            within += (row[i] - class_mu[c]).powi(2);
        }
        let between: f64 = class_mu
            .iter()
            .zip(&counts)
            .map(|(m, &c)| c as f64 * (m - mu).powi(2))
            .sum();
        if within < MIN_WITHIN_SCATTER {
            skipped.push(i);
            per_feature.push(None);
        } else {
            let f = between / within;
            sum += f;
            kept += 1;
            per_feature.push(Some(f));
        }
    }
    Ok(FisherScore {
        score: if kept == 0 { 0.0 } else { sum / kept as f64 },
        per_feature,
        skipped,
    })
}
