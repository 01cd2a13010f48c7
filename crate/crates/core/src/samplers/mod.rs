//! Proposal kernels, acceptance rules and the Metropolis-Hastings driver.
//!
//! Five proposal families share one acceptance step. With inverse
//! temperature `beta` and `s = sigma / sqrt(beta)`:
//!
//! | method        | proposal                                        |
//! |---------------|-------------------------------------------------|
//! | RWM           | `y = x + s xi`                                  |
//! | MALA          | `y = x - sigma^2/2 grad V(x) + s xi`            |
//! | tamed MALA    | drift divided by `max(1, delta |grad V(x)|)`    |
//! | modified MALA | drift uses `grad U` of an auxiliary potential   |
//! | independence  | `y ~ e^{-beta U}` drawn by an auxiliary sampler |
//!
//! The log acceptance ratio is always `beta (V(x) - V(y)) + log q(y,x)/q(x,y)`.

mod chain;
mod kernel;

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;

pub use chain::{run_chain, run_chain_observed, Chain, ChainReport, RunOptions};
pub use kernel::{accept_prob, log_accept_ratio, propose, step, Kernel, Proposal};

/// Exponents are clamped to this magnitude before `exp`.
pub const LOG_RATIO_CLAMP: f64 = 700.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcceptanceRule {
    /// `F(r) = min(1, e^r)`
    #[default]
    Metropolis,
    /// `F(r) = 1 / (1 + e^{-r})`
    Barker,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rwm,
    Mala,
    TamedMala,
    ModifiedMala,
    Independence,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Rwm,
        Method::Mala,
        Method::TamedMala,
        Method::ModifiedMala,
        Method::Independence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rwm => "rwm",
            Method::Mala => "mala",
            Method::TamedMala => "tamed-mala",
            Method::ModifiedMala => "modified-mala",
            Method::Independence => "independence",
        }
    }

    /// Whether the method has a step size at all.
    pub fn uses_sigma(self) -> bool {
        self != Method::Independence
    }

    pub fn needs_auxiliary(self) -> bool {
        matches!(self, Method::ModifiedMala | Method::Independence)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Draws exact samples from the auxiliary density `prop. e^{-beta U}`.
pub trait AuxiliarySampler: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]);
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub method: Method,
    /// Step parameter; ignored by the independence sampler.
    pub sigma: f64,
    pub beta: f64,
    pub rule: AcceptanceRule,
    /// Taming parameter, tamed MALA only.
    pub tame_delta: Option<f64>,
    /// Auxiliary potential `U` for modified MALA and independence sampling.
    pub auxiliary: Option<PotentialSpec>,
    /// Exact sampler for `e^{-beta U}`, independence sampling only.
    pub auxiliary_sampler: Option<Arc<dyn AuxiliarySampler>>,
}

impl SamplerConfig {
    pub fn new(method: Method, sigma: f64, beta: f64) -> Self {
        Self {
            method,
            sigma,
            beta,
            rule: AcceptanceRule::Metropolis,
            tame_delta: None,
            auxiliary: None,
            auxiliary_sampler: None,
        }
    }

    pub fn rwm(sigma: f64, beta: f64) -> Self {
        Self::new(Method::Rwm, sigma, beta)
    }

    pub fn mala(sigma: f64, beta: f64) -> Self {
        Self::new(Method::Mala, sigma, beta)
    }

    pub fn tamed_mala(sigma: f64, beta: f64, delta: f64) -> Self {
        Self {
            tame_delta: Some(delta),
            ..Self::new(Method::TamedMala, sigma, beta)
        }
    }

    pub fn modified_mala(sigma: f64, beta: f64, auxiliary: PotentialSpec) -> Self {
        Self {
            auxiliary: Some(auxiliary),
            ..Self::new(Method::ModifiedMala, sigma, beta)
        }
    }

    pub fn independence(
        beta: f64,
        auxiliary: PotentialSpec,
        sampler: Option<Arc<dyn AuxiliarySampler>>,
    ) -> Self {
        Self {
            auxiliary: Some(auxiliary),
            auxiliary_sampler: sampler,
            ..Self::new(Method::Independence, f64::NAN, beta)
        }
    }

    pub fn with_rule(mut self, rule: AcceptanceRule) -> Self {
        self.rule = rule;
        self
    }

    /// Checks the parameters that define the proposal density. Running a
    /// chain additionally needs the auxiliary sampler, see
    /// [`SamplerConfig::validate_for_chain`].
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.method.uses_sigma() && !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "{} needs a positive sigma, got {}",
                self.method, self.sigma
            )));
        }
        match (self.method, self.tame_delta) {
            (Method::TamedMala, Some(d)) if d > 0.0 && d.is_finite() => {}
            (Method::TamedMala, _) => {
                return Err(Error::Config(
                    "tamed-mala needs a positive tame_delta".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(Error::Config(format!(
                    "tame_delta given for {}",
                    self.method
                )))
            }
            _ => {}
        }
        match (&self.auxiliary, self.method.needs_auxiliary()) {
            (None, true) => {
                return Err(Error::Config(format!(
                    "{} needs an auxiliary potential",
                    self.method
                )))
            }
            (Some(_), false) => {
                return Err(Error::Config(format!(
                    "auxiliary potential given for {}",
                    self.method
                )))
            }
            (Some(u), true) if u.dim() != dim => {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: u.dim(),
                })
            }
            _ => {}
        }
        if self.auxiliary_sampler.is_some() && self.method != Method::Independence {
            return Err(Error::Config(format!(
                "auxiliary sampler given for {}",
                self.method
            )));
        }
        Ok(())
    }

    pub fn validate_for_chain(&self, dim: usize) -> Result<()> {
        self.validate(dim)?;
        if self.method == Method::Independence {
            match &self.auxiliary_sampler {
                None => {
                    return Err(Error::Config(
                        "independence sampling needs an auxiliary sampler".into(),
                    ))
                }
                Some(s) if s.dim() != dim => {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: s.dim(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Proposal noise standard deviation `sigma / sqrt(beta)`.
    pub fn noise_scale(&self) -> f64 {
        self.sigma / self.beta.sqrt()
    }
}

/// Current position with the quantities cached for the next proposal.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    /// `V(x)`
    pub energy: f64,
    /// `grad V(x)` for (tamed) MALA, `grad U(x)` for modified MALA, empty
    /// otherwise.
    pub drift_gradient: Vec<f64>,
    /// `U(x)` for the independence sampler, zero otherwise.
    pub aux_energy: f64,
    pub step: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepRecord {
    pub accepted: bool,
    pub log_ratio: f64,
    /// `|X_{k+1} - X_k|^2`, zero on rejection.
    pub sq_disp: f64,
    /// `|Y - X_k|^2` of the proposal.
    pub proposal_sq_disp: f64,
    /// The proposal had a non-finite energy and was rejected outright.
    pub nonfinite: bool,
}
