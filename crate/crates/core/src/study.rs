//! Multi-seed comparison studies: preprocessing methods, augmentation
//! variants and fine-tuning set sizes, each reported as a CSV table.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::augment::{augment_dataset, AugmentKind, DEFAULT_SCALE_RANGE};
use crate::countnet::{fine_tune_features, fit, CountModel, FeatureExtractor, FeatureSet, TrainConfig};
use crate::cube::{Dataset, Split};
use crate::error::{invalid, Result};
use crate::io::encode_cube;
use crate::metrics::{rmse_mae, separability_between, ClusterConfig, Labeling, RegressionReport};
use crate::preprocess::{Method, PreprocessParams, Preprocessor};
use crate::rng::derive_seed;
use crate::scene::{background_set, generate_room, Room, SuiteConfig};
use crate::split::{stratified_split, SplitFractions};

/// Everything a study needs; serializable as the CLI's `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: SuiteConfig,
    /// Cubes per class in the training room (split train/val/test).
    pub n_per_class_a: usize,
    /// Cubes per class in the rearranged room (all used for testing).
    pub n_per_class_b: usize,
    /// Cubes per class in the unseen room (split train/val/test).
    pub n_per_class_c: usize,
    /// 0-person cubes used to fit the background model.
    pub n_background: usize,
    pub split: (f64, f64, f64),
    pub preprocess: PreprocessParams,
    /// Method used to pretrain for the transfer study and under augmentation.
    pub transfer_method: Method,
    pub augment_method: Method,
    pub scale_range: (f64, f64),
    pub aug_seed: u64,
    pub train: TrainConfig,
    pub transfer_sizes: Vec<usize>,
    /// Multiplier applied to every transfer size.
    pub transfer_scale: f64,
    pub seeds: Vec<u64>,
    pub cluster_restarts: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: SuiteConfig::default(),
            n_per_class_a: 250,
            n_per_class_b: 100,
            n_per_class_c: 250,
            n_background: 50,
            split: (0.54, 0.06, 0.40),
            preprocess: PreprocessParams::default(),
            transfer_method: Method::SigmoidWeight,
            augment_method: Method::None,
            scale_range: DEFAULT_SCALE_RANGE,
            aug_seed: 0,
            train: TrainConfig::default(),
            transfer_sizes: vec![100, 200, 400, 540],
            transfer_scale: 1.0,
            seeds: vec![0, 1, 2, 3, 4],
            cluster_restarts: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required"));
        }
        let sizes = self.scaled_sizes();
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "transfer sizes must be strictly increasing, got {sizes:?}"
            )));
        }
        if self.n_per_class_a == 0 || self.n_per_class_b == 0 || self.n_per_class_c == 0 {
            return Err(invalid("per-class counts must be >= 1"));
        }
        if !(self.transfer_scale > 0.0) {
            return Err(invalid("transfer_scale must be > 0"));
        }
        self.suite.validate()?;
        self.train.validate()?;
        Ok(())
    }

    pub fn fractions(&self) -> SplitFractions {
        SplitFractions::new(self.split.0, self.split.1, self.split.2)
    }

    pub fn scaled_sizes(&self) -> Vec<usize> {
        self.transfer_sizes
            .iter()
            .map(|&s| (s as f64 * self.transfer_scale).round() as usize)
            .collect()
    }

    fn train_for(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed: derive_seed(self.train.seed, seed),
            ..self.train.clone()
        }
    }
}

/// `(1 − method / baseline) · 100`.
pub fn improvement_pct(baseline: f64, method: f64) -> f64 {
    (1.0 - method / baseline) * 100.0
}

/// Percentages are reported with one decimal.
pub fn format_pct(p: f64) -> String {
    format!("{p:.1}")
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Content hash of a set of cubes (encoded bytes, in order).
pub fn dataset_hash(ds: &Dataset) -> Result<String> {
    let mut h = Sha256::new();
    for c in &ds.cubes {
        h.update(encode_cube(c)?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub fn median(values: &[f64]) -> f64 {
    crate::preprocess::stats::median(values)
}

/// Median, min and max of one metric across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Self {
        Self {
            median: median(values),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Rows of `(name, rmse, mae)` with improvements against the first row.
pub fn improvement_csv(header_name: &str, rows: &[(String, f64, f64)]) -> String {
    let mut s = format!("{header_name},rmse,mae,rmse_improvement_pct,mae_improvement_pct\n");
    if let Some((_, b_rmse, b_mae)) = rows.first() {
        for (name, rmse, mae) in rows {
            let _ = writeln!(
                s,
                "{name},{},{},{},{}",
                fmt(*rmse),
                fmt(*mae),
                format_pct(improvement_pct(*b_rmse, *rmse)),
                format_pct(improvement_pct(*b_mae, *mae))
            );
        }
    }
    s
}

/// One training room split plus shifted evaluation data for one seed.
struct SeedData {
    a: Dataset,
    background: Dataset,
}

fn room_a(cfg: &ExperimentConfig, seed: u64) -> Result<SeedData> {
    let a = generate_room(&cfg.suite, Room::A, cfg.n_per_class_a, seed)?;
    let a = stratified_split(&a, cfg.fractions(), derive_seed(seed, 0x5A))?;
    let background = background_set(&cfg.suite, cfg.n_background, seed)?;
    Ok(SeedData { a, background })
}

fn eval(model: &CountModel, feats: &FeatureSet) -> Result<RegressionReport> {
    let labels: Vec<u8> = feats.y.iter().map(|&y| y as u8).collect();
    rmse_mae(&model.predict_batch(&feats.x), &labels)
}

fn train_split(ds: &Dataset, feats: &FeatureSet, cfg: &TrainConfig) -> Result<CountModel> {
    let tr = feats.select(&ds.indices_of(Split::Train));
    let va = feats.select(&ds.indices_of(Split::Val));
    let model = CountModel::init(feats.x[0].len(), cfg.hidden, derive_seed(cfg.seed, 0xC0DE));
    Ok(fit(model, &tr, &va, cfg)?.0)
}

// ---------------------------------------------------------------------------
// Preprocessing study

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub a_rmse: Spread,
    pub a_mae: Spread,
    pub b_rmse: Spread,
    pub b_mae: Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityRow {
    pub method: Method,
    pub labeling: Labeling,
    pub ami_before: f64,
    pub ami_after: f64,
    pub fisher_before: f64,
    pub fisher_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessStudy {
    pub methods: Vec<MethodResult>,
    /// Medians over seeds.
    pub separability: Vec<SeparabilityRow>,
    /// Hash of the shifted-room test set for every seed.
    pub b_test_hashes: Vec<String>,
}

struct PreprocessSeed {
    errors: Vec<[f64; 4]>,
    separability: Vec<[SeparabilityRow; 2]>,
    b_hash: String,
}

fn preprocess_seed(cfg: &ExperimentConfig, seed: u64) -> Result<PreprocessSeed> {
    let SeedData { a, background } = room_a(cfg, seed)?;
    let b = generate_room(&cfg.suite, Room::B, cfg.n_per_class_b, seed)?;
    let a_test = a.subset(Split::Test);
    let fx = FeatureExtractor::default();
    let tc = cfg.train_for(seed);
    let cluster = ClusterConfig {
        restarts: cfg.cluster_restarts,
        seed: derive_seed(seed, 0xC1),
    };
    let mut errors = Vec::new();
    let mut separability = Vec::new();
    for method in Method::ALL {
        let pre = Preprocessor::build(method, &cfg.preprocess, Some(&background), derive_seed(seed, 0xB9))?;
        let pa = pre.apply_dataset(&a)?;
        let pb = pre.apply_dataset(&b)?;
        let fa = FeatureSet::from_dataset(&pa, &fx)?;
        let fb = FeatureSet::from_dataset(&pb, &fx)?;
        let model = train_split(&pa, &fa, &tc)?;
        let ra = eval(&model, &fa.select(&pa.indices_of(Split::Test)))?;
        let rb = eval(&model, &fb)?;
        errors.push([ra.rmse, ra.mae, rb.rmse, rb.mae]);
        let [p, l] = separability_between(&a_test, &pa.subset(Split::Test), cluster)?;
        let row = |r: crate::metrics::SeparabilityReport| SeparabilityRow {
            method,
            labeling: r.labeling,
            ami_before: r.before.ami,
            ami_after: r.after.ami,
            fisher_before: r.before.fisher,
            fisher_after: r.after.fisher,
        };
        separability.push([row(p), row(l)]);
    }
    Ok(PreprocessSeed {
        errors,
        separability,
        b_hash: dataset_hash(&b)?,
    })
}

pub fn study_preprocess(cfg: &ExperimentConfig) -> Result<PreprocessStudy> {
    cfg.validate()?;
    let per_seed: Vec<PreprocessSeed> = cfg
        .seeds
        .par_iter()
        .map(|&s| preprocess_seed(cfg, s))
        .collect::<Result<_>>()?;
    let col = |m: usize, k: usize| -> Vec<f64> { per_seed.iter().map(|s| s.errors[m][k]).collect() };
    let methods = Method::ALL
        .iter()
        .enumerate()
        .map(|(m, &method)| MethodResult {
            method,
            a_rmse: Spread::of(&col(m, 0)),
            a_mae: Spread::of(&col(m, 1)),
            b_rmse: Spread::of(&col(m, 2)),
            b_mae: Spread::of(&col(m, 3)),
        })
        .collect();
    let mut separability = Vec::new();
    for (m, &method) in Method::ALL.iter().enumerate() {
        for l in 0..2 {
            let pick = |f: fn(&SeparabilityRow) -> f64| -> f64 {
                median(&per_seed.iter().map(|s| f(&s.separability[m][l])).collect::<Vec<_>>())
            };
            separability.push(SeparabilityRow {
                method,
                labeling: per_seed[0].separability[m][l].labeling,
                ami_before: pick(|r| r.ami_before),
                ami_after: pick(|r| r.ami_after),
                fisher_before: pick(|r| r.fisher_before),
                fisher_after: pick(|r| r.fisher_after),
            });
        }
    }
    Ok(PreprocessStudy {
        methods,
        separability,
        b_test_hashes: per_seed.into_iter().map(|s| s.b_hash).collect(),
    })
}

impl PreprocessStudy {
    pub fn baseline(&self) -> &MethodResult {
        &self.methods[0]
    }

    pub fn method(&self, m: Method) -> Option<&MethodResult> {
        self.methods.iter().find(|r| r.method == m)
    }

    /// Median errors per method on both rooms, with improvement on the
    /// shifted room relative to the baseline row.
    pub fn errors_csv(&self) -> String {
        let base = self.baseline();
        let mut s = String::from(
            "method,label,a_rmse,a_mae,b_rmse,b_mae,b_rmse_min,b_rmse_max,rmse_improvement_pct,mae_improvement_pct\n",
        );
        for r in &self.methods {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.method.name(),
                r.method.label(),
                fmt(r.a_rmse.median),
                fmt(r.a_mae.median),
                fmt(r.b_rmse.median),
                fmt(r.b_mae.median),
                fmt(r.b_rmse.min),
                fmt(r.b_rmse.max),
                format_pct(improvement_pct(base.b_rmse.median, r.b_rmse.median)),
                format_pct(improvement_pct(base.b_mae.median, r.b_mae.median)),
            );
        }
        s
    }

    pub fn separability_csv(&self) -> String {
        let mut s = String::from("method,labeling,metric,before,after\n");
        for r in &self.separability {
            for (metric, before, after) in [
                ("ami", r.ami_before, r.ami_after),
                ("fisher", r.fisher_before, r.fisher_after),
            ] {
                let _ = writeln!(
                    s,
                    "{},{},{metric},{},{}",
                    r.method.name(),
                    r.labeling.name(),
                    fmt(before),
                    fmt(after)
                );
            }
        }
        s
    }

    pub fn separability_for(&self, m: Method, l: Labeling) -> Option<&SeparabilityRow> {
        self.separability.iter().find(|r| r.method == m && r.labeling == l)
    }
}

// ---------------------------------------------------------------------------
// Augmentation study

pub const AUGMENT_VARIANTS: [AugmentKind; 4] = [
    AugmentKind::None,
    AugmentKind::Flips,
    AugmentKind::Scale,
    AugmentKind::Framedrop,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentResult {
    pub variant: AugmentKind,
    pub train_size: usize,
    pub b_rmse: Spread,
    pub b_mae: Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentStudy {
    pub variants: Vec<AugmentResult>,
    pub b_test_hashes: Vec<String>,
}

fn augment_seed(cfg: &ExperimentConfig, seed: u64) -> Result<(Vec<(usize, f64, f64)>, String)> {
    let SeedData { a, background } = room_a(cfg, seed)?;
    let b = generate_room(&cfg.suite, Room::B, cfg.n_per_class_b, seed)?;
    let pre = Preprocessor::build(
        cfg.augment_method,
        &cfg.preprocess,
        Some(&background),
        derive_seed(seed, 0xB9),
    )?;
    let pa = pre.apply_dataset(&a)?;
    let fb = FeatureSet::from_dataset(&pre.apply_dataset(&b)?, &FeatureExtractor::default())?;
    let base_tc = cfg.train_for(seed);
    let mut out = Vec::new();
    for kind in AUGMENT_VARIANTS {
        let spec = kind.spec(cfg.scale_range, cfg.aug_seed ^ seed);
        let aug = augment_dataset(&pa, &spec)?;
        let tc = TrainConfig {
            epoch_scale: spec.epoch_scale(),
            ..base_tc.clone()
        };
        let fa = FeatureSet::from_dataset(&aug, &FeatureExtractor::default())?;
        let model = train_split(&aug, &fa, &tc)?;
        let r = eval(&model, &fb)?;
        out.push((aug.indices_of(Split::Train).len(), r.rmse, r.mae));
    }
    Ok((out, dataset_hash(&b)?))
}

pub fn study_augment(cfg: &ExperimentConfig) -> Result<AugmentStudy> {
    cfg.validate()?;
    let per_seed: Vec<_> = cfg
        .seeds
        .par_iter()
        .map(|&s| augment_seed(cfg, s))
        .collect::<Result<_>>()?;
    let variants = AUGMENT_VARIANTS
        .iter()
        .enumerate()
        .map(|(k, &variant)| AugmentResult {
            variant,
            train_size: per_seed[0].0[k].0,
            b_rmse: Spread::of(&per_seed.iter().map(|s| s.0[k].1).collect::<Vec<_>>()),
            b_mae: Spread::of(&per_seed.iter().map(|s| s.0[k].2).collect::<Vec<_>>()),
        })
        .collect();
    Ok(AugmentStudy {
        variants,
        b_test_hashes: per_seed.into_iter().map(|s| s.1).collect(),
    })
}

impl AugmentStudy {
    pub fn to_csv(&self) -> String {
        let base = &self.variants[0];
        let mut s = String::from(
            "augmentation,train_size,b_rmse,b_mae,b_rmse_min,b_rmse_max,rmse_improvement_pct,mae_improvement_pct\n",
        );
        for r in &self.variants {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.variant.name(),
                r.train_size,
                fmt(r.b_rmse.median),
                fmt(r.b_mae.median),
                fmt(r.b_rmse.min),
                fmt(r.b_rmse.max),
                format_pct(improvement_pct(base.b_rmse.median, r.b_rmse.median)),
                format_pct(improvement_pct(base.b_mae.median, r.b_mae.median)),
            );
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Transfer study

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    /// `None` for the no-transfer row.
    pub size: Option<usize>,
    pub a_rmse: Option<Spread>,
    pub a_mae: Option<Spread>,
    pub c_rmse: Spread,
    pub c_mae: Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferStudy {
    pub rows: Vec<TransferRow>,
    pub c_test_hashes: Vec<String>,
    /// Whether the median target RMSE is non-increasing across sizes.
    pub monotone: bool,
}

struct TransferSeed {
    a: (f64, f64),
    c: Vec<(f64, f64)>,
    hash: String,
}

fn transfer_seed(cfg: &ExperimentConfig, seed: u64) -> Result<TransferSeed> {
    let SeedData { a, background } = room_a(cfg, seed)?;
    let c = generate_room(&cfg.suite, Room::C, cfg.n_per_class_c, seed)?;
    let c = stratified_split(&c, cfg.fractions(), derive_seed(seed, 0x5C))?;
    let pre = Preprocessor::build(
        cfg.transfer_method,
        &cfg.preprocess,
        Some(&background),
        derive_seed(seed, 0xB9),
    )?;
    let fx = FeatureExtractor::default();
    let pa = pre.apply_dataset(&a)?;
    let pc = pre.apply_dataset(&c)?;
    let fa = FeatureSet::from_dataset(&pa, &fx)?;
    let fc = FeatureSet::from_dataset(&pc, &fx)?;
    let tc = cfg.train_for(seed);
    let model = train_split(&pa, &fa, &tc)?;
    let ra = eval(&model, &fa.select(&pa.indices_of(Split::Test)))?;
    let c_test = fc.select(&pc.indices_of(Split::Test));
    let r0 = eval(&model, &c_test)?;
    let mut cs = vec![(r0.rmse, r0.mae)];
    let ft = tc.fine_tune();
    for n in cfg.scaled_sizes() {
        let (tuned, _) = fine_tune_features(&model, &pc, &fc, n, &ft)?;
        let r = eval(&tuned, &c_test)?;
        cs.push((r.rmse, r.mae));
    }
    Ok(TransferSeed {
        a: (ra.rmse, ra.mae),
        c: cs,
        hash: dataset_hash(&c.subset(Split::Test))?,
    })
}

pub fn study_transfer(cfg: &ExperimentConfig) -> Result<TransferStudy> {
    cfg.validate()?;
    let per_seed: Vec<TransferSeed> = cfg
        .seeds
        .par_iter()
        .map(|&s| transfer_seed(cfg, s))
        .collect::<Result<_>>()?;
    let sizes = cfg.scaled_sizes();
    let mut rows = Vec::new();
    for k in 0..=sizes.len() {
        let c_rmse: Vec<f64> = per_seed.iter().map(|s| s.c[k].0).collect();
        let c_mae: Vec<f64> = per_seed.iter().map(|s| s.c[k].1).collect();
        let (a_rmse, a_mae) = if k == 0 {
            (
                Some(Spread::of(&per_seed.iter().map(|s| s.a.0).collect::<Vec<_>>())),
                Some(Spread::of(&per_seed.iter().map(|s| s.a.1).collect::<Vec<_>>())),
            )
        } else {
            (None, None)
        };
        rows.push(TransferRow {
            size: (k > 0).then(|| sizes[k - 1]),
            a_rmse,
            a_mae,
            c_rmse: Spread::of(&c_rmse),
            c_mae: Spread::of(&c_mae),
        });
    }
    let monotone = rows[1..].windows(2).all(|w| w[1].c_rmse.median <= w[0].c_rmse.median);
    Ok(TransferStudy {
        rows,
        c_test_hashes: per_seed.into_iter().map(|s| s.hash).collect(),
        monotone,
    })
}

impl TransferStudy {
    pub fn to_csv(&self) -> String {
        let base = &self.rows[0];
        let mut s = String::from(
            "train_size,a_rmse,a_mae,c_rmse,c_mae,c_rmse_min,c_rmse_max,rmse_improvement_pct,mae_improvement_pct\n",
        );
        for r in &self.rows {
            let opt = |v: Option<Spread>| v.map_or_else(|| "-".to_string(), |s| fmt(s.median));
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.size.map_or_else(|| "no_transfer".to_string(), |n| n.to_string()),
                opt(r.a_rmse),
                opt(r.a_mae),
                fmt(r.c_rmse.median),
                fmt(r.c_mae.median),
                fmt(r.c_rmse.min),
                fmt(r.c_rmse.max),
                format_pct(improvement_pct(base.c_rmse.median, r.c_rmse.median)),
                format_pct(improvement_pct(base.c_mae.median, r.c_mae.median)),
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improvement_formula() {
        assert_eq!(format_pct(improvement_pct(1.2474, 0.6219)), "50.1");
        assert_eq!(format_pct(improvement_pct(0.8678, 0.3888)), "55.2");
        assert_eq!(format_pct(improvement_pct(0.7, 0.7)), "0.0");
    }

    #[test]
    fn improvement_csv_baseline_row_is_zero() {
        let csv = improvement_csv(
            "method",
            &[("baseline".into(), 1.2474, 0.8678), ("sigmoid".into(), 0.6219, 0.3888)],
        );
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "baseline,1.247400,0.867800,0.0,0.0");
        assert_eq!(lines[2], "sigmoid,0.621900,0.388800,50.1,55.2");
    }

    #[test]
    fn sizes_must_increase() {
        let cfg = ExperimentConfig {
            transfer_sizes: vec![100, 100],
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            seeds: vec![],
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn spread_of_values() {
        let s = Spread::of(&[3.0, 1.0, 2.0]);
        assert_eq!((s.median, s.min, s.max), (2.0, 1.0, 3.0));
    }
}
