//! Unsupervised node clustering with message-passing networks.
//!
//! The engine trains a stack of propagation layers followed by a softmax
//! assignment head. Three objectives are available: the balance-only trace
//! objective `-Tr(sqrt(SᵀS))` ([`losses::jb_loss`]), and the MinCutPool and
//! DMoN losses as comparators. Everything needed to run it lives here:
//! sparse graph storage, a dense eigensolver, a small reverse-mode tape, the
//! Adam optimizer, clustering metrics and the on-disk dataset format.
//!
//! With the default `parallel` feature, row-wise kernels run on rayon.
//! Without it every kernel falls back to a sequential loop with the same
//! per-row arithmetic, so results are bitwise identical either way.

pub mod autodiff;
pub mod data;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod par;

pub use error::{Error, Result};
pub use graph::{CsrMatrix, PropagationOperator, SparseGraph};
pub use linalg::DenseMatrix;
pub use losses::{AssignmentMatrix, LossKind, LossValueGrad};
pub use metrics::LabelVector;
pub use model::{ModelConfig, TrainReport};
