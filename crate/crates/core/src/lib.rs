//! Convergence-rate bounds for quantum dynamical semigroups, quantum speed limits,
//! and energy-constrained entropy and capacity continuity bounds, evaluated on
//! finite truncations of infinite-dimensional systems.
//!
//! Conventions: natural logarithms everywhere; superoperators act on
//! column-stacked vectors (`vec[i + j·n] = X[i, j]`); bipartite indices are
//! system-major (`index = i·d_B + b`).

pub mod bounds;
pub mod campaign;
pub mod capacity;
pub mod channels;
pub mod entropy;
pub mod error;
pub mod gibbs;
pub mod linalg;
pub mod metrics;
pub mod operators;
pub mod registry;
pub mod sampling;
pub mod state;

pub use error::{Error, Result};
pub use linalg::CMat;
pub use operators::{HermitianOperator, StateVector};
pub use state::DensityMatrix;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance on certification margins.
pub const MARGIN_TOL: f64 = 1e-9;
