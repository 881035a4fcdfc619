//! Signal-level transforms applied to normalized cubes before feature extraction.

pub mod background;
pub mod filter;
pub mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use background::{background_residual, fit_background, suppress_background, BackgroundModel, DEFAULT_RANK};
pub use filter::{
    butterworth_highpass, design_butterworth_bandpass, design_two_stage_highpass, filter_cube, filter_cube_raw, Biquad,
    BlendWiring, FilterDesign, FilterKind, FilterSpec, IirFilter, TwoStageHighpass,
};
pub use stats::{
    apply_weight, sigmoid_weight_map, sigmoid_weighting, std_map, threshold_zero, SigmoidParams, StdMap, WeightMap,
};

use crate::cube::{Dataset, RadarCube, DEFAULT_SAMPLE_RATE};
use crate::error::{invalid, Result};

/// Preprocessing method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    None,
    ThresholdZero,
    SigmoidWeight,
    ButterworthBandpass,
    TwoStageHighpass,
    BackgroundSuppress,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::None,
        Method::ThresholdZero,
        Method::SigmoidWeight,
        Method::ButterworthBandpass,
        Method::TwoStageHighpass,
        Method::BackgroundSuppress,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::ThresholdZero => "threshold_zero",
            Method::SigmoidWeight => "sigmoid_weight",
            Method::ButterworthBandpass => "butterworth_bandpass",
            Method::TwoStageHighpass => "two_stage_highpass",
            Method::BackgroundSuppress => "background_suppress",
        }
    }

    /// Row label used in study reports.
    pub fn label(self) -> &'static str {
        match self {
            Method::None => "Baseline",
            Method::ThresholdZero => "Threshold zeroing",
            Method::SigmoidWeight => "Sigmoid weighting",
            Method::ButterworthBandpass => "Butterworth band-pass",
            Method::TwoStageHighpass => "Two-stage high-pass",
            Method::BackgroundSuppress => "Background suppression (low-rank)",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown preprocessing method `{s}`")))
    }
}

/// Tunable parameters shared by all methods; each method reads what it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessParams {
    pub tau: f64,
    pub s: f64,
    pub rank: usize,
    pub wiring: BlendWiring,
    pub sample_rate: f64,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            tau: stats::DEFAULT_TAU,
            s: stats::DEFAULT_STEEPNESS,
            rank: DEFAULT_RANK,
            wiring: BlendWiring::default(),
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }
}

/// A ready-to-apply preprocessing stage. Filters and background models are
/// designed / fit once at construction.
#[derive(Debug, Clone)]
pub enum Preprocessor {
    Identity,
    ThresholdZero(f64),
    SigmoidWeight(SigmoidParams),
    Filter(FilterSpec),
    Background(BackgroundModel),
}

impl Preprocessor {
    /// Build a stage. `backgrounds` (0-person cubes) is required only for
    /// [`Method::BackgroundSuppress`].
    pub fn build(method: Method, params: &PreprocessParams, backgrounds: Option<&Dataset>, seed: u64) -> Result<Self> {
        Ok(match method {
            Method::None => Preprocessor::Identity,
            Method::ThresholdZero => {
                if params.tau.is_nan() || params.tau < 0.0 {
                    return Err(invalid(format!("tau must be >= 0, got {}", params.tau)));
                }
                Preprocessor::ThresholdZero(params.tau)
            }
            Method::SigmoidWeight => {
                if !(params.s > 0.0) {
                    return Err(invalid(format!("s must be > 0, got {}", params.s)));
                }
                Preprocessor::SigmoidWeight(SigmoidParams {
                    tau: params.tau,
                    s: params.s,
                })
            }
            Method::ButterworthBandpass => Preprocessor::Filter(FilterSpec::Single(design_butterworth_bandpass(
                filter::BANDPASS_ORDER,
                filter::BANDPASS_LO_HZ,
                filter::BANDPASS_HI_HZ,
                params.sample_rate,
            )?)),
            Method::TwoStageHighpass => Preprocessor::Filter(FilterSpec::TwoStage(design_two_stage_highpass(
                params.sample_rate,
                params.wiring,
            )?)),
            Method::BackgroundSuppress => {
                let bg = backgrounds.ok_or_else(|| invalid("background suppression needs 0-person cubes"))?;
                Preprocessor::Background(fit_background(bg, params.rank, seed)?)
            }
        })
    }

    pub fn apply(&self, cube: &RadarCube) -> Result<RadarCube> {
        match self {
            Preprocessor::Identity => Ok(cube.clone()),
            Preprocessor::ThresholdZero(tau) => threshold_zero(cube, *tau),
            Preprocessor::SigmoidWeight(p) => sigmoid_weighting(cube, *p),
            Preprocessor::Filter(spec) => filter_cube(cube, spec),
            Preprocessor::Background(m) => suppress_background(cube, m),
        }
    }

    pub fn apply_dataset(&self, ds: &Dataset) -> Result<Dataset> {
        use rayon::prelude::*;
        let cubes = ds.cubes.par_iter().map(|c| self.apply(c)).collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            cubes,
            splits: ds.splits.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
        }
        assert!("median".parse::<Method>().is_err());
    }

    #[test]
    fn background_requires_cubes() {
        let p = PreprocessParams::default();
        assert!(Preprocessor::build(Method::BackgroundSuppress, &p, None, 0).is_err());
        assert!(Preprocessor::build(Method::ButterworthBandpass, &p, None, 0).is_ok());
    }
}
