use rand::Rng;
use rand_distr::StandardNormal;

use super::{AcceptanceRule, ChainState, Method, SamplerConfig, StepRecord, LOG_RATIO_CLAMP};
use crate::error::{check_dim, Error, Result};
use crate::potentials::PotentialSpec;

impl AcceptanceRule {
    /// Acceptance probability `F(r)`.
    #[inline]
    pub fn prob(self, r: f64) -> f64 {
        let r = r.clamp(-LOG_RATIO_CLAMP, LOG_RATIO_CLAMP);
        match self {
            AcceptanceRule::Metropolis => {
                if r >= 0.0 {
                    1.0
                } else {
                    r.exp()
                }
            }
            AcceptanceRule::Barker => 1.0 / (1.0 + (-r).exp()),
        }
    }

    /// Draws one uniform and decides. Metropolis compares in log space, so
    /// the clamp never changes its decision.
    #[inline]
    pub fn accepts<R: Rng + ?Sized>(self, r: f64, rng: &mut R) -> bool {
        // (0, 1]
        let u: f64 = 1.0 - rng.random::<f64>();
        match self {
            AcceptanceRule::Metropolis => u.ln() < r,
            AcceptanceRule::Barker => u < self.prob(r),
        }
    }
}

/// `F(R)` for the given rule.
pub fn accept_prob(r: f64, rule: AcceptanceRule) -> f64 {
    rule.prob(r)
}

/// Scratch space for one proposal and everything evaluated at it.
#[derive(Clone, Debug, Default)]
pub struct Proposal {
    pub y: Vec<f64>,
    pub energy: f64,
    pub drift_gradient: Vec<f64>,
    pub aux_energy: f64,
    /// `log q(y -> x) - log q(x -> y)`
    pub log_q_ratio: f64,
}

impl Proposal {
    pub fn with_dim(dim: usize) -> Self {
        Self {
            y: vec![0.0; dim],
            drift_gradient: vec![0.0; dim],
            ..Self::default()
        }
    }
}

/// A validated (potential, configuration) pair: the Markov kernel itself.
#[derive(Clone, Debug)]
pub struct Kernel {
    potential: PotentialSpec,
    cfg: SamplerConfig,
    dim: usize,
    noise: f64,
    half_sigma2: f64,
}

impl Kernel {
    /// Kernel whose proposal density can be evaluated. Use
    /// [`Kernel::for_chain`] when proposals will also be drawn.
    pub fn new(potential: &PotentialSpec, cfg: &SamplerConfig) -> Result<Self> {
        potential.validate()?;
        let dim = potential.dim();
        cfg.validate(dim)?;
        Ok(Self {
            potential: potential.clone(),
            cfg: cfg.clone(),
            dim,
            noise: cfg.noise_scale(),
            half_sigma2: 0.5 * cfg.sigma * cfg.sigma,
        })
    }

    pub fn for_chain(potential: &PotentialSpec, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate_for_chain(potential.dim())?;
        Self::new(potential, cfg)
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn gradient_drift(&self) -> bool {
        matches!(
            self.cfg.method,
            Method::Mala | Method::TamedMala | Method::ModifiedMala
        )
    }

    fn aux(&self) -> &PotentialSpec {
        self.cfg
            .auxiliary
            .as_ref()
            .expect("validated auxiliary potential")
    }

    /// Evaluates `V(y)` and the method's cached quantities at `y`; returns
    /// `(V(y), U(y))` with `U(y) = 0` unless the method is independence.
    fn evaluate(&self, y: &[f64], grad: &mut Vec<f64>) -> (f64, f64) {
        match self.cfg.method {
            Method::Rwm => {
                grad.clear();
                (self.potential.energy(y), 0.0)
            }
            Method::Mala | Method::TamedMala => {
                grad.resize(self.dim, 0.0);
                (self.potential.energy_and_gradient(y, grad), 0.0)
            }
            Method::ModifiedMala => {
                grad.resize(self.dim, 0.0);
                self.aux().energy_and_gradient(y, grad);
                (self.potential.energy(y), 0.0)
            }
            Method::Independence => {
                grad.clear();
                (self.potential.energy(y), self.aux().energy(y))
            }
        }
    }

    pub fn init_state(&self, x0: &[f64]) -> Result<ChainState> {
        check_dim(self.dim, x0.len())?;
        let mut grad = Vec::new();
        let (energy, aux_energy) = self.evaluate(x0, &mut grad);
        if !energy.is_finite() {
            return Err(Error::InvalidParameter(
                "initial point has non-finite energy".into(),
            ));
        }
        Ok(ChainState {
            x: x0.to_vec(),
            energy,
            drift_gradient: grad,
            aux_energy,
            step: 0,
        })
    }

    /// Multiplier `c` such that the drift is `c * grad`.
    #[inline]
    fn drift_factor(&self, grad: &[f64]) -> f64 {
        match self.cfg.method {
            Method::TamedMala => {
                let delta = self.cfg.tame_delta.expect("validated tame_delta");
                let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                -self.half_sigma2 / (delta * norm).max(1.0)
            }
            _ => -self.half_sigma2,
        }
    }

    /// Deterministic part `d(x)` of a Gaussian proposal.
    pub fn drift(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        if !self.gradient_drift() {
            return Ok(vec![0.0; self.dim]);
        }
        let mut g = Vec::new();
        self.evaluate(x, &mut g);
        let c = self.drift_factor(&g);
        Ok(g.iter().map(|gi| c * gi).collect())
    }

    /// `sum_i (b_i - a_i - c g_i)^2`
    #[inline]
    fn residual_sq(a: &[f64], b: &[f64], c: f64, g: &[f64]) -> f64 {
        if g.is_empty() {
            a.iter().zip(b).map(|(ai, bi)| (bi - ai) * (bi - ai)).sum()
        } else {
            a.iter()
                .zip(b)
                .zip(g)
                .map(|((ai, bi), gi)| {
                    let r = bi - ai - c * gi;
                    r * r
                })
                .sum()
        }
    }

    /// Normalized `log q(x -> y)` for the Gaussian methods. For the
    /// independence sampler returns the unnormalized `-beta U(y)`.
    pub fn log_proposal_density(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        if self.cfg.method == Method::Independence {
            return Ok(-self.cfg.beta * self.aux().energy(y));
        }
        let mut g = Vec::new();
        self.evaluate(x, &mut g);
        let c = if g.is_empty() {
            0.0
        } else {
            self.drift_factor(&g)
        };
        let s2 = self.noise * self.noise;
        let r2 = Self::residual_sq(x, y, c, &g);
        Ok(-r2 / (2.0 * s2) - 0.5 * self.dim as f64 * (2.0 * std::f64::consts::PI * s2).ln())
    }

    /// `beta (V(x) - V(y)) + log q(y -> x) - log q(x -> y)`, from scratch.
    pub fn log_accept_ratio(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        let mut gx = Vec::new();
        let mut gy = Vec::new();
        let (vx, ux) = self.evaluate(x, &mut gx);
        let (vy, uy) = self.evaluate(y, &mut gy);
        Ok(self.cfg.beta * (vx - vy) + self.log_q_ratio(x, y, &gx, &gy, ux, uy))
    }

    #[inline]
    fn log_q_ratio(&self, x: &[f64], y: &[f64], gx: &[f64], gy: &[f64], ux: f64, uy: f64) -> f64 {
        match self.cfg.method {
            Method::Rwm => 0.0,
            Method::Independence => self.cfg.beta * (uy - ux),
            _ => {
                let cx = self.drift_factor(gx);
                let cy = self.drift_factor(gy);
                let fwd = Self::residual_sq(x, y, cx, gx);
                let rev = Self::residual_sq(y, x, cy, gy);
                (fwd - rev) / (2.0 * self.noise * self.noise)
            }
        }
    }

    /// Draws a proposal from `state` into `out`, evaluating everything the
    /// acceptance step needs.
    pub fn propose_into<R: Rng + ?Sized>(
        &self,
        state: &ChainState,
        rng: &mut R,
        out: &mut Proposal,
    ) {
        out.y.resize(self.dim, 0.0);
        match self.cfg.method {
            Method::Independence => {
                let sampler = self
                    .cfg
                    .auxiliary_sampler
                    .as_ref()
                    .expect("validated auxiliary sampler");
                sampler.sample_into(&mut RngRef(rng), &mut out.y);
            }
            _ => {
                let c = if state.drift_gradient.is_empty() {
                    0.0
                } else {
                    self.drift_factor(&state.drift_gradient)
                };
                for (i, yi) in out.y.iter_mut().enumerate() {
                    let xi: f64 = rng.sample(StandardNormal);
                    let d = if state.drift_gradient.is_empty() {
                        0.0
                    } else {
                        c * state.drift_gradient[i]
                    };
                    *yi = state.x[i] + d + self.noise * xi;
                }
            }
        }
        let (energy, aux_energy) = self.evaluate(&out.y, &mut out.drift_gradient);
        out.energy = energy;
        out.aux_energy = aux_energy;
        out.log_q_ratio = if energy.is_finite() {
            self.log_q_ratio(
                &state.x,
                &out.y,
                &state.drift_gradient,
                &out.drift_gradient,
                state.aux_energy,
                aux_energy,
            )
        } else {
            f64::NAN
        };
    }

    /// One Metropolis-Hastings transition in place, reusing `scratch`.
    pub fn step_in_place<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
        scratch: &mut Proposal,
    ) -> StepRecord {
        self.propose_into(state, rng, scratch);
        let proposal_sq_disp = Self::residual_sq(&state.x, &scratch.y, 0.0, &[]);
        let log_ratio = self.cfg.beta * (state.energy - scratch.energy) + scratch.log_q_ratio;
        state.step += 1;
        let finite = scratch.energy.is_finite()
            && !log_ratio.is_nan()
            && scratch.drift_gradient.iter().all(|g| g.is_finite());
        if !finite {
            return StepRecord {
                accepted: false,
                log_ratio,
                sq_disp: 0.0,
                proposal_sq_disp,
                nonfinite: true,
            };
        }
        let accepted = self.cfg.rule.accepts(log_ratio, rng);
        if accepted {
            std::mem::swap(&mut state.x, &mut scratch.y);
            std::mem::swap(&mut state.drift_gradient, &mut scratch.drift_gradient);
            state.energy = scratch.energy;
            state.aux_energy = scratch.aux_energy;
        }
        StepRecord {
            accepted,
            log_ratio,
            sq_disp: if accepted { proposal_sq_disp } else { 0.0 },
            proposal_sq_disp,
            nonfinite: false,
        }
    }

    /// Recomputes the cached quantities and compares.
    pub fn check_cache(&self, state: &ChainState) -> bool {
        let mut g = Vec::new();
        let (v, u) = self.evaluate(&state.x, &mut g);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs());
        close(v, state.energy)
            && close(u, state.aux_energy)
            && g.len() == state.drift_gradient.len()
            && g.iter()
                .zip(&state.drift_gradient)
                .all(|(a, b)| close(*a, *b))
    }
}

/// Adapter so generic RNGs can be handed to `dyn RngCore` consumers.
struct RngRef<'a, R: ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> rand::RngCore for RngRef<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Draws one proposal from `state`; returns `(y, log q(y,x) - log q(x,y))`.
pub fn propose<R: Rng + ?Sized>(
    state: &ChainState,
    potential: &PotentialSpec,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    let k = Kernel::for_chain(potential, cfg)?;
    check_dim(k.dim, state.x.len())?;
    let mut p = Proposal::with_dim(k.dim);
    k.propose_into(state, rng, &mut p);
    Ok((p.y, p.log_q_ratio))
}

/// Log acceptance ratio `R(x, y)`.
pub fn log_accept_ratio(
    potential: &PotentialSpec,
    cfg: &SamplerConfig,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    Kernel::new(potential, cfg)?.log_accept_ratio(x, y)
}

/// One transition from `state`, returning the new state.
pub fn step<R: Rng + ?Sized>(
    state: &ChainState,
    potential: &PotentialSpec,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(ChainState, StepRecord)> {
    let k = Kernel::for_chain(potential, cfg)?;
    check_dim(k.dim, state.x.len())?;
    let mut next = state.clone();
    let mut p = Proposal::with_dim(k.dim);
    let rec = k.step_in_place(&mut next, rng, &mut p);
    Ok((next, rec))
}
