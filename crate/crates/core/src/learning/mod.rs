//! Joint-offset regression: datasets, the MLP, Adam training and grid search.

pub mod dataset;
pub mod mlp;
pub mod normalize;
pub mod search;
pub mod train;

pub use dataset::{build_dataset, encode_features, Encoding, ErrorDataset, Role};
pub use mlp::{grad_check, mlp_forward, MlpModel, Params};
pub use normalize::Normalizer;
pub use search::{hyperparameter_search, GridCell, SearchGrid, SearchResult};
pub use train::{mlp_train, EpochLoss, History, TrainConfig, DEFAULT_HIDDEN};
