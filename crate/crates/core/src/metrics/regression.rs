//! Count-regression error metrics on raw (unrounded) predictions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub rmse: f64,
    pub mae: f64,
    pub n: usize,
    pub per_class_mae: BTreeMap<u8, f64>,
}

pub fn rmse_mae(preds: &[f64], labels: &[u8]) -> Result<RegressionReport> {
    if preds.len() != labels.len() {
        return Err(invalid(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(invalid("no predictions to score"));
    }
    let n = preds.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut per_class: BTreeMap<u8, (f64, usize)> = BTreeMap::new();
    for (&p, &y) in preds.iter().zip(labels) {
        let r = p - y as f64;
        sq += r * r;
        abs += r.abs();
        let e = per_class.entry(y).or_default();
        e.0 += r.abs();
        e.1 += 1;
    }
    Ok(RegressionReport {
        rmse: (sq / n).sqrt(),
        mae: abs / n,
        n: preds.len(),
        per_class_mae: per_class.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect(),
    })
}
