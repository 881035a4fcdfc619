//! Regression error, class separability and clustering agreement.

pub mod ami;
pub mod fisher;
pub mod kmeans;
pub mod regression;
pub mod separability;

pub use ami::{ami, expected_mutual_info, mutual_info, ContingencyTable};
pub use fisher::{fisher_score, FisherScore};
pub use kmeans::{kmeans, KMeansResult};
pub use regression::{rmse_mae, RegressionReport};
pub use separability::{
    separability, separability_between, separability_suite, std_features, ClusterConfig, Labeling, SeparabilityReport,
    SeparabilityScores,
};
