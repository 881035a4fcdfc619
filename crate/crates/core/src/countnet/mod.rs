//! Feature-pooling count regressor, its training loop and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod features;
pub mod model;
pub mod train;

pub use adam::Adam;
pub use checkpoint::{decode_model, encode_model, load_model, save_model};
pub use features::FeatureExtractor;
pub use model::{CountModel, Standardizer};
pub use train::{fine_tune, fine_tune_features, fit, train, FeatureSet, History, TrainConfig};
