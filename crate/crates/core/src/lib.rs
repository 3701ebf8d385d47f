//! Dense binary hyperdimensional computing.
//!
//! Bit-packed hypervectors with XOR binding, cyclic permutation and
//! majority bundling; item memories under orthogonal, linear, local linear
//! and concatenation mappings; POI-based binary image encoding; a
//! centroid classifier with iterative retraining; and IDX / NPY loaders.

pub mod bundle;
pub mod classifier;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod hv;
pub mod mapping;
pub mod model_io;
pub mod rng;

pub use bundle::{binarize, bundle_add, bundle_all, bundle_init, bundle_remove, Bundle};
pub use classifier::{
    evaluate, retrain, train_initial, ClassifierModel, RetrainConfig, TrainingReport,
};
pub use error::{HdcError, Result};
pub use hv::{bind, hamming, permute, random_hv, similarity, Hypervector, DEFAULT_DIM};
pub use mapping::{
    build_concatenation, build_linear, build_local_linear, build_orthogonal, similarity_profile,
    ItemMemory, MappingKind,
};
pub use model_io::{load_model, save_model, ModelFileError};
pub use rng::{derive_seed, RandomSource};
