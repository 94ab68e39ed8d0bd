//! Graph classification with graph convolutions and pooling by
//! non-negative factorization of the adjacency matrix.
//!
//! Modules build on each other bottom-up: [`linalg`] (dense matrices),
//! [`graph`] (adjacency and node features), [`dataset`] (TU benchmarks and
//! folds), [`nmf`] (multiplicative-update factorization), [`layers`]
//! (forward and backward passes), [`model`] and [`train`] (assembly and
//! optimization) and [`cli`].

pub mod cli;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod layers;
pub mod linalg;
pub mod model;
pub mod nmf;
pub mod report;
pub mod synthetic;
pub mod train;

pub use dataset::{parse_tu_dataset, pool_sizes, stratified_folds, DatasetBundle, FoldPlan};
pub use error::{Error, Result};
pub use graph::{normalize_adjacency, FeatureSpec, Graph};
pub use linalg::DenseMatrix;
pub use model::{build_model, ConvKind, LayerStack, ModelConfig};
pub use nmf::{factorize, NmfConfig, NmfFactors};
pub use train::{cross_validate, TrainReport};
