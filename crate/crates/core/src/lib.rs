//! Storage capacity of the spherical perceptron.
//!
//! - [`gaussian`]: standard-normal functions and the Gardner integral `f_gar`,
//!   each with an independent quadrature route.
//! - [`capacity`]: analytic `α_c(κ)` for uncorrelated and biased patterns,
//!   `v_opt`, `κ_adj` and the exactness threshold `κ^(c)`.
//! - [`margin`]: certified max-margin solver (minimum-norm point in the hull
//!   of the constraint rows) and a sphere search for negative margins.
//! - [`montecarlo`]: random pattern ensembles, coupled feasibility sweeps and
//!   empirical capacity estimates.
//! - [`dynamics`]: building an interaction matrix that stores patterns as
//!   fixed points of synchronous sign dynamics.

pub mod capacity;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod margin;
pub mod montecarlo;
mod quadrature;

pub use error::{Error, Result};
