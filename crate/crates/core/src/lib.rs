//! Edge-private, motif-preserving graph synthesis and cross-modal hash
//! distillation.
//!
//! The pipeline has two phases separated by a post-processing boundary:
//!
//! 1. **Sanitize** — build a degree-clipped cosine kNN graph over the
//!    training items ([`graph`]), then release a synthetic weighted graph
//!    produced by noisy entropic mirror descent on a triangle-motif
//!    objective ([`synthesis`]), together with a privacy receipt.
//! 2. **Distill** — train image and text hash encoders against the released
//!    graph only ([`hashing`]) and evaluate Hamming-ranking retrieval
//!    ([`eval`]).
//!
//! [`data`] provides the synthetic multimodal generator and inductive split,
//! [`io`] the file formats, and [`pipeline`] the orchestration used by the CLI.

pub mod audit;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod hashing;
pub mod io;
pub mod matrix;
pub mod pipeline;
pub mod seed;
pub mod synthesis;

pub use error::{Error, Result};
