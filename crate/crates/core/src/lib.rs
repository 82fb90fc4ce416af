//! Income dynamics under multiplicative growth with stochastic resets.
//!
//! A worker's income follows geometric Brownian motion between career
//! interruptions; at the jumps of a Poisson clock with rate `r` the income
//! restarts from a common re-entry level. In log space the model is drifted
//! Brownian motion with resetting, and the stationary law of log income is a
//! two-sided exponential whose tail exponents are the roots of the
//! characteristic equation `D k^2 + v k - r = 0` (up to sign).
//!
//! The crate provides:
//!
//! - the parameterization and stationary distribution ([`model`]),
//! - yearly calibration from an observed top income share and job
//!   separation rates ([`calibration`]),
//! - mean first-passage times to upper income levels or percentiles
//!   ([`mfpt`]),
//! - total-variation convergence to stationarity and mixing times
//!   ([`mixing`]),
//! - Monte Carlo cross-checks of all closed forms ([`montecarlo`]),
//! - panel CSV ingestion and adaptation of raw distributional-series
//!   exports ([`ingest`]).
//!
//! All estimators are deterministic: simulation draws randomness from
//! counter-based per-path streams, so results are byte-identical across
//! runs and thread counts for a fixed seed.

pub mod calibration;
pub mod error;
pub mod ingest;
pub mod mfpt;
pub mod mixing;
pub mod model;
pub mod montecarlo;
mod numeric;

pub use error::{Error, Result};
pub use model::{DerivedCoeffs, ModelParams, StationaryDistribution};
