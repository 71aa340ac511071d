//! Tree tensor network operators (TTNOs) for Hamiltonians with pairwise
//! long-range interactions.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`] and [`linalg`]: dense complex tensors, matricizations,
//!   Kronecker products and a truncated SVD.
//! - [`dimtree`]: dimension trees (balanced, degenerate/TT, custom m-ary).
//! - [`ttn`]: tree tensor networks and operators, dense contraction, operator
//!   application and rank accounting.
//! - [`hss`]: HSS compression of strictly upper-triangular interaction
//!   matrices with shared nested bases.
//! - [`build`]: the exact (rank `2 + d_τ`) and HSS-compressed (rank
//!   `2 + k_τ`) TTNO constructions, plus the dense brute-force oracles.
//! - [`models`]: the spin-chain Hamiltonians used in the experiments.
//!
//! Mode and site indices are 0-based in the API. The textual tree format and
//! every CSV/diagnostic output use 1-based site labels.

pub mod build;
pub mod dimtree;
mod error;
pub mod hss;
pub mod io;
pub mod linalg;
pub mod models;
pub mod tensor;
pub mod ttn;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

/// Column-major complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Default cap on the number of entries any dense oracle may materialise.
pub const DEFAULT_DENSE_CAP: usize = 1 << 24;
