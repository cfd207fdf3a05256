//! Behavior-space diagnostics over profiles, pools, and emitted pairs.

mod cluster;
mod freq;
mod pca;
mod tfidf;

pub use cluster::{cluster, Dendrogram, Linkage, MergeStep};
pub use freq::frequency_report;
pub use pca::{pca_decompose, pca_project, PcaDecomposition, Projection2D};
pub use tfidf::{tfidf_audit, TfidfAuditResult};
