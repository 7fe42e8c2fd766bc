//! Numerical laboratory for the doubly nonlinear diffusion equation
//!
//! ```text
//! u_t = div(|grad u^m|^{p-2} grad u^m),   u = 0 on the boundary,
//! ```
//!
//! posed on 1D intervals and radially symmetric balls, for `m > 0`, `p > 1`.
//! The crate provides:
//!
//! * [`grid`] — interval/ball discretizations, quadrature and the distance
//!   to the boundary;
//! * [`operators`] — the conservative discrete p-Laplacian in Cartesian and
//!   radial form plus the vector monotonicity inequalities;
//! * [`evolution`] — an implicit (backward Euler) solver for the Dirichlet
//!   problem with comparison-preserving inner iterations, rescalings and the
//!   a-priori estimate checks;
//! * [`stationary`] — the degenerate asymptotic profile `f` (solution of
//!   `Δ_p f^m + μ f = 0`) and the first Dirichlet p-Laplacian eigenpair;
//! * [`selfsimilar`] — closed-form Barenblatt solutions, the self-similar
//!   profile ODE and the scaling identities;
//! * [`asymptotics`] — convergence-rate reports, positivity and sandwich
//!   experiments, quasilinear envelopes, the relative error function and the
//!   barrier constructions;
//! * [`report`] — deterministic CSV/JSON export (17 significant digits).

// NaN-rejecting validations use the `!(x > 0.0)` form on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod operators;
pub mod params;
pub mod report;
pub mod selfsimilar;
pub mod stationary;

mod linalg;

pub use error::DnleError;
pub use grid::{Domain, DomainKind, Field};
pub use params::{classify_regime, Parameters, Regime};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, DnleError>;
