//! Markov chain Monte Carlo on rough multiscale energy landscapes.
//!
//! The crate is organised as a small laboratory:
//!
//! - [`potentials`]: landscapes `V = V0 + V1(x/eps)` with analytic gradients.
//! - [`samplers`]: RWM, MALA, tamed MALA, modified MALA and independence
//!   proposals with Metropolis or Barker acceptance, and the chain driver.
//! - [`analytic`]: closed-form scaling results and quadrature references.
//! - [`spectral`]: grid discretisations of one-dimensional kernels and their
//!   spectral gaps.
//! - [`smoothing`]: tabulated inverse-CDF samplers and local-entropy
//!   estimators.
//! - [`experiments`]: step-size sweeps, scaling fits, amplification tables
//!   and file output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod potentials;
pub mod quadrature;
pub mod rng;
pub mod samplers;
pub mod smoothing;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use potentials::{PotentialSpec, SmoothKind};
pub use samplers::{AcceptanceRule, ChainReport, ChainState, Method, SamplerConfig, StepRecord};
