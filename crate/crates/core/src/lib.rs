//! Johnson-Lindenstrauss embeddings built from matrices with the restricted
//! isometry property, made into embeddings by randomizing column signs.
//!
//! The crate is organized bottom-up:
//!
//! * [`primitives`]: decreasing arrangement, block partitions and sign patterns.
//! * [`transforms`]: fast Walsh-Hadamard, DFT and circular convolution, each
//!   paired with a naive reference implementation.
//! * [`constructions`]: the embedding operator families (dense subgaussian,
//!   partial Hadamard, partial Fourier, partial circulant) and `Φ·D_ξ`.
//! * [`analysis`]: restricted isometry constants, the block-coherence and
//!   chaos-matrix norm estimates, the three-term energy expansion, tail bounds
//!   and the sparsity/level parameter formulas.
//! * [`harness`]: seeded embedding trials, failure rates, minimal embedding
//!   dimension search and scaling-exponent fits.

pub mod analysis;
pub mod constructions;
pub mod error;
pub mod harness;
pub mod primitives;
pub mod seed;
pub mod transforms;

pub use error::{Error, Result};

/// Absolute slack used when checking inequalities that hold exactly in
/// real arithmetic.
pub const DETERMINISTIC_SLACK: f64 = 1e-10;
