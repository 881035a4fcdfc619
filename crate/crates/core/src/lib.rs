//! Radar people counting under spatial domain shift.
//!
//! Range-azimuth amplitude cubes, the preprocessing and augmentation
//! operators used to make a counting model robust to layout and room
//! changes, a small trainable count regressor, separability metrics and
//! a synthetic scene generator for reproducible studies.

pub mod augment;
pub mod countnet;
pub mod cube;
pub mod error;
pub mod io;
pub mod metrics;
pub mod preprocess;
pub mod rng;
pub mod scene;
pub mod split;
pub mod study;

pub use cube::{Activity, Dataset, Environment, NormalizationParams, RadarCube, SampleMeta, Split};
pub use error::{Error, Result};
