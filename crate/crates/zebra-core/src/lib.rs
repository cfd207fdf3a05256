//! Zero-annotation preference binarization from model behavior knowledge.
//!
//! The pipeline turns published benchmark scores into per-model ability
//! profiles (min-max normalized vectors, their MB-SUP mean, and a cosine
//! MB-SIM matrix), then uses those profiles to convert a multi-model
//! response pool into chosen/rejected preference pairs without scoring a
//! single response. Companion modules provide the behavior-space
//! diagnostics (PCA, hierarchical clustering, TF-IDF response audits,
//! selection frequencies) and paired significance tests for comparing
//! downstream evaluation runs.
//!
//! Everything is deterministic given fixed inputs, configuration, and seed.

pub mod analysis;
pub mod dataset;
pub mod error;
mod linalg;
pub mod profile;
pub mod select;
pub mod stats;

pub use error::{Error, Result};
pub use profile::{
    cosine, normalize, similarity_matrix, AbilityProfile, Benchmark, BenchmarkTable, Category,
    ProfileSet, SimilarityMatrix,
};
pub use select::{
    binarize_pool, select_pair, CandidateSet, NoPairReason, PairCounts, SelectedPair, Selection,
    SelectionReport, Strategy, StrategyConfig, TieBreak,
};
pub use dataset::{
    convert_ultrafeedback, read_pairs, read_pool, write_pairs, InstructionRecord, ModelResponse,
    PairSide, PairWriter, PreferencePair,
};
pub use linalg::symmetric_eigen;
