//! Second-order descent ascent solvers for nonconvex-strongly-concave
//! minimax problems `min_x max_y f(x, y)`.
//!
//! The solvers minimize the value function `F(x) = max_y f(x, y)` by
//! combining an accelerated inner ascent on `y` with a homogenized
//! eigenvalue subproblem built from the Schur-complement Hessian surrogate
//! `H(x, y) = f_xx - f_xy f_yy^{-1} f_yx`:
//!
//! - [`hsda`] solves the subproblem exactly with a dense eigendecomposition.
//! - [`ihsda`] solves it matrix-free with Lanczos and certifies termination
//!   through the Ritz residual, escalating the regularization when needed.
//! - [`baselines`] provides plain gradient descent ascent for comparisons.
//!
//! Problems are exposed through the [`oracle::MinimaxOracle`] trait; the
//! [`problems`] module ships a W-shaped synthetic problem, a quadratic family
//! and a smooth robust-regression problem. [`harness`] drives experiments
//! from flat `key=value` configs and writes CSV/JSON traces.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
mod driver;
pub mod error;
pub mod harness;
pub mod homogeneous;
pub mod hsda;
pub mod ihsda;
pub mod inner_ascent;
pub mod linalg;
pub mod oracle;
pub mod problems;
pub mod trace;

pub use error::{Error, Result};
pub use oracle::{MinimaxOracle, SmoothnessConstants, ValueFunction};
pub use trace::{IterateTrace, LanczosCall, StepRecord, TerminationReason};

/// Dense column vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
