//! Mini-batch training with early stopping, and target-domain fine-tuning.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::features::FeatureExtractor;
use super::model::{CountModel, Standardizer, DEFAULT_HIDDEN};
use crate::augment::draw_scale;
use crate::cube::{Dataset, Split};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng};
use crate::split::stratified_subset;

pub const BASE_LR: f64 = 1e-3;
pub const FINE_TUNE_LR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch: usize,
    pub seed: u64,
    pub hidden: usize,
    /// Per-sample, per-epoch amplitude scaling range, if enabled.
    pub epoch_scale: Option<(f64, f64)>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: BASE_LR,
            max_epochs: 100,
            patience: 10,
            batch: 32,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
            epoch_scale: None,
        }
    }
}

impl TrainConfig {
    /// Same regimen at the reduced fine-tuning learning rate.
    pub fn fine_tune(&self) -> Self {
        Self {
            lr: FINE_TUNE_LR,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(invalid(format!("learning rate must be > 0, got {}", self.lr)));
        }
        if self.batch == 0 || self.hidden == 0 {
            return Err(invalid("batch and hidden size must be >= 1"));
        }
        if self.patience >= self.max_epochs {
            return Err(invalid(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if let Some((lo, hi)) = self.epoch_scale {
            if !(lo > 0.0 && lo <= hi) {
                return Err(invalid(format!("scale range ({lo}, {hi}) invalid")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose weights were returned; 0 when no training ran.
    pub best_epoch: usize,
}

impl History {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_mse,val_mse\n");
        for e in &self.epochs {
            s.push_str(&format!("{},{:.10},{:.10}\n", e.epoch, e.train_mse, e.val_mse));
        }
        s
    }

    pub fn best_val(&self) -> Option<f64> {
        self.epochs.get(self.best_epoch.checked_sub(1)?).map(|e| e.val_mse)
    }
}

/// Feature rows with regression targets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureSet {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl FeatureSet {
    pub fn from_dataset(ds: &Dataset, fx: &FeatureExtractor) -> Result<Self> {
        let x = ds.cubes.par_iter().map(|c| fx.extract(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x,
            y: ds.cubes.iter().map(|c| c.meta.label as f64).collect(),
        })
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Train `model` in place from its current parameters. The standardizer is
/// fit on `train` only if the model does not have one yet.
pub fn fit(
    mut model: CountModel,
    train: &FeatureSet,
    val: &FeatureSet,
    cfg: &TrainConfig,
) -> Result<(CountModel, History)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptySplit("train"));
    }
    if val.is_empty() {
        return Err(Error::EmptySplit("val"));
    }
    for x in train.x.iter().chain(&val.x) {
        model.check_input(x)?;
    }
    if model.standardizer.is_none() {
        model.standardizer = Some(Standardizer::fit(&train.x));
    }
    let mut opt = Adam::new(model.params.len(), cfg.lr);
    let mut history = History::default();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut since_best = 0;
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        let mut g = rng(derive_seed(cfg.seed, epoch as u64));
        order.shuffle(&mut g);
        let scales: Option<Vec<f64>> = cfg
            .epoch_scale
            .map(|range| (0..train.len()).map(|_| draw_scale(&mut g, range)).collect());
        for chunk in order.chunks(cfg.batch) {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| train.x[i].as_slice()).collect();
            let ys: Vec<f64> = chunk.iter().map(|&i| train.y[i]).collect();
            let ks: Option<Vec<f64>> = scales.as_ref().map(|s| chunk.iter().map(|&i| s[i]).collect());
            let (_, grad) = model.loss_and_grad(&xs, &ys, ks.as_deref());
            opt.update(&mut model.params, &grad);
        }
        let train_mse = model.mse(&train.x, &train.y);
        let val_mse = model.mse(&val.x, &val.y);
        history.epochs.push(EpochRecord {
            epoch,
            train_mse,
            val_mse,
        });
        if !train_mse.is_finite() || !val_mse.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                train_mse,
                val_mse,
            });
        }
        if best.as_ref().is_none_or(|(b, _)| val_mse < *b) {
            best = Some((val_mse, model.params.clone()));
            history.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    if let Some((_, params)) = best {
        model.params = params;
    }
    Ok((model, history))
}

/// Fresh model trained on the dataset's train split, early-stopped on its val split.
pub fn train(ds: &Dataset, fx: &FeatureExtractor, cfg: &TrainConfig) -> Result<(CountModel, History)> {
    let feats = FeatureSet::from_dataset(ds, fx)?;
    let tr = feats.select(&ds.indices_of(Split::Train));
    let va = feats.select(&ds.indices_of(Split::Val));
    let model = CountModel::init(fx.dim(), cfg.hidden, derive_seed(cfg.seed, 0xC0DE));
    fit(model, &tr, &va, cfg)
}

/// Fine-tune all parameters on a class-balanced subset of `n_train` cubes
/// from the target train split, early-stopped on the target val split.
/// `feats` must be aligned with `target.cubes`.
pub fn fine_tune_features(
    model: &CountModel,
    target: &Dataset,
    feats: &FeatureSet,
    n_train: usize,
    cfg: &TrainConfig,
) -> Result<(CountModel, History)> {
    let pool = target.indices_of(Split::Train);
    if n_train > pool.len() {
        return Err(Error::InsufficientTarget {
            requested: n_train,
            available: pool.len(),
        });
    }
    if n_train == 0 {
        return Ok((model.clone(), History::default()));
    }
    let chosen = stratified_subset(target, &pool, n_train, cfg.seed)?;
    let tr = feats.select(&chosen);
    let va = feats.select(&target.indices_of(Split::Val));
    fit(model.clone(), &tr, &va, cfg)
}

pub fn fine_tune(
    model: &CountModel,
    target: &Dataset,
    fx: &FeatureExtractor,
    n_train: usize,
    cfg: &TrainConfig,
) -> Result<(CountModel, History)> {
    let feats = FeatureSet::from_dataset(target, fx)?;
    fine_tune_features(model, target, &feats, n_train, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(x: &[[f64; 2]], y: &[f64]) -> FeatureSet {
        FeatureSet {
            x: x.iter().map(|r| r.to_vec()).collect(),
            y: y.to_vec(),
        }
    }

    #[test]
    fn memorizes_one_sample() {
        let tr = set(&[[0.3, 0.7]], &[2.0]);
        let cfg = TrainConfig {
            lr: 1e-2,
            max_epochs: 2000,
            patience: 1999,
            hidden: 8,
            ..TrainConfig::default()
        };
        let (m, h) = fit(CountModel::init(2, 8, 1), &tr, &tr, &cfg).unwrap();
        assert!(m.mse(&tr.x, &tr.y) <= 1e-4);
        assert!(h.epochs.len() <= 2000);
    }

    #[test]
    fn empty_splits_are_rejected() {
        let tr = set(&[[0.3, 0.7]], &[2.0]);
        let empty = FeatureSet::default();
        let cfg = TrainConfig::default();
        assert!(matches!(
            fit(CountModel::init(2, 4, 1), &empty, &tr, &cfg),
            Err(Error::EmptySplit("train"))
        ));
        assert!(matches!(
            fit(CountModel::init(2, 4, 1), &tr, &empty, &cfg),
            Err(Error::EmptySplit("val"))
        ));
    }

    #[test]
    fn non_finite_loss_aborts() {
        let tr = set(&[[0.3, 0.7], [0.1, 0.2]], &[f64::NAN, 1.0]);
        let err = fit(CountModel::init(2, 4, 1), &tr, &tr, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { epoch: 1, .. }));
    }

    #[test]
    fn history_csv_header() {
        let h = History {
            epochs: vec![EpochRecord {
                epoch: 1,
                train_mse: 0.5,
                val_mse: 0.25,
            }],
            best_epoch: 1,
        };
        assert_eq!(h.to_csv(), "epoch,train_mse,val_mse\n1,0.5000000000,0.2500000000\n");
        assert_eq!(h.best_val(), Some(0.25));
    }

    #[test]
    fn patience_must_be_below_max_epochs() {
        let cfg = TrainConfig {
            patience: 5,
            max_epochs: 5,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
