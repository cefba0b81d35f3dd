//! Bayesian quantile regression for large macroeconomic panels.
//!
//! The crate estimates conditional quantiles of a scalar time series from
//! high-dimensional predictor sets by variational Bayes under an asymmetric
//! Laplace working likelihood, with a family of global-local shrinkage
//! priors and optional nonlinear basis expansions (polynomials, B-splines,
//! Gaussian-process weight-space bases). A recursive forecasting harness,
//! proper-scoring evaluation, a Gibbs-sampling reference implementation, and
//! posterior-summary tooling sit on top of the estimator.

pub mod basis;
pub mod error;
pub mod gig;
pub mod ingest;
pub mod linalg;
pub mod priors;
pub mod mcmc;
pub mod quarter;
pub mod synthetic;
pub mod vb;

pub use error::{CoreError, Result};
pub use quarter::Quarter;
