//! Before/after class separability of std-map features under a preprocessing method.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ami, fisher_score, kmeans};
use crate::cube::Dataset;
use crate::error::{invalid, Result};
use crate::preprocess::{std_map, Preprocessor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeling {
    PersonCount,
    LayoutType,
}

impl Labeling {
    pub fn name(self) -> &'static str {
        match self {
            Labeling::PersonCount => "person_count",
            Labeling::LayoutType => "layout_type",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityScores {
    pub ami: f64,
    pub fisher: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub labeling: Labeling,
    pub before: SeparabilityScores,
    pub after: SeparabilityScores,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { restarts: 10, seed: 0 }
    }
}

/// Flattened std-map of every cube.
pub fn std_features(ds: &Dataset) -> Result<Vec<Vec<f64>>> {
    ds.cubes.par_iter().map(|c| std_map(c).map(|m| m.values)).collect()
}

/// k-means AMI (k = number of distinct labels) and mean Fisher score.
pub fn separability<L: Ord + Copy>(
    features: &[Vec<f64>],
    labels: &[L],
    cfg: ClusterConfig,
) -> Result<SeparabilityScores> {
    let mut distinct = labels.to_vec();
    distinct.sort();
    distinct.dedup();
    let clusters = kmeans(features, distinct.len(), cfg.restarts, cfg.seed)?;
    Ok(SeparabilityScores {
        ami: ami(labels, &clusters.labels)?,
        fisher: fisher_score(features, labels)?.score,
    })
}

/// Person-count and layout-type separability, before and after `pre`.
pub fn separability_suite(ds: &Dataset, pre: &Preprocessor, cfg: ClusterConfig) -> Result<[SeparabilityReport; 2]> {
    separability_between(ds, &pre.apply_dataset(ds)?, cfg)
}

/// Person-count and layout-type separability of `before` against its
/// already-processed counterpart `after` (same cubes, same order).
pub fn separability_between(before: &Dataset, after: &Dataset, cfg: ClusterConfig) -> Result<[SeparabilityReport; 2]> {
    if before.len() != after.len() {
        return Err(invalid(format!(
            "separability needs matching datasets, got {} and {} cubes",
            before.len(),
            after.len()
        )));
    }
    let layouts = before
        .cubes
        .iter()
        .map(|c| c.meta.layout)
        .collect::<Option<Vec<u16>>>()
        .ok_or_else(|| invalid("every cube needs a layout label for separability"))?;
    let counts: Vec<u16> = before.labels().into_iter().map(u16::from).collect();
    let fb = std_features(before)?;
    let fa = std_features(after)?;
    let pair = |labeling, labels: &[u16]| -> Result<SeparabilityReport> {
        Ok(SeparabilityReport {
            labeling,
            before: separability(&fb, labels, cfg)?,
            after: separability(&fa, labels, cfg)?,
        })
    };
    Ok([
        pair(Labeling::PersonCount, &counts)?,
        pair(Labeling::LayoutType, &layouts)?,
    ])
}
