//! Auxiliary densities for proposal generation.
//!
//! [`TabulatedInverseCdf`] draws exact (up to tabulation) samples from a
//! one-dimensional `e^{-beta v}`; [`ProductInverseCdf`] applies it
//! coordinatewise and serves as the independence sampler's proposal.
//!
//! The local-entropy landscape `V_gamma(x) = -beta^{-1} log E[e^{-beta
//! V(x + Y)}]`, `Y ~ N(0, gamma / beta)`, and its gradient
//! `gamma^{-1} (x - E_rho[Y])`, with `rho(y | x) prop. e^{-beta U_gamma(y|x)}`
//! and `U_gamma(y|x) = V(y) + |x - y|^2 / (2 gamma)`, are estimated by Monte
//! Carlo; `rho` is sampled with short Metropolis-adjusted
//! exponential-integrator chains.

use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::potentials::PotentialSpec;
use crate::quadrature::{energy_shift, QuadratureConfig, LAPLACE_WIDTHS};
use crate::rng::{chain_rng, derive_seed};
use crate::samplers::AuxiliarySampler;

/// Number of uniform quantile levels in a table.
pub const DEFAULT_LEVELS: usize = 4096;

/// Smallest tail probability resolved by the geometric tail levels.
const TAIL_FLOOR: f64 = 1e-12;

/// Fine cells per quantile level used for the cumulative quadrature.
const FINE_PER_LEVEL: usize = 32;

/// Inverse CDF of `prop. e^{-beta v}` on an interval, tabulated on quantile
/// levels and interpolated linearly between them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TabulatedInverseCdf {
    pub beta: f64,
    pub source: PotentialSpec,
    /// Strictly increasing quantile levels from 0 to 1.
    pub levels: Vec<f64>,
    /// Positions at `levels`, strictly increasing.
    pub positions: Vec<f64>,
    fine_x: Vec<f64>,
    fine_cdf: Vec<f64>,
}

/// Tabulates the inverse CDF of the one-coordinate density
/// `prop. e^{-beta v}` where `v` is the coordinate energy of `v0`.
///
/// `domain` defaults to [`LAPLACE_WIDTHS`] Laplace standard deviations
/// around the outermost minima.
pub fn build_inverse_cdf(
    v0: &PotentialSpec,
    beta: f64,
    domain: Option<(f64, f64)>,
    levels: usize,
) -> Result<TabulatedInverseCdf> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    if levels < 2 {
        return Err(Error::InvalidParameter(
            "need at least two quantile levels".into(),
        ));
    }
    let (a, b) = domain.unwrap_or_else(|| {
        let (c, hw) = crate::quadrature::boltzmann_domain(v0, beta);
        (c - hw, c + hw)
    });
    if !(b > a) {
        return Err(Error::InvalidParameter(format!("bad domain [{a}, {b}]")));
    }
    let mut cells = levels * FINE_PER_LEVEL;
    if let Some(s) = crate::quadrature::roughness_scale(v0) {
        cells = cells.max(((b - a) / (s / 16.0)).ceil() as usize);
    }
    let h = (b - a) / cells as f64;
    let shift = energy_shift(v0);
    let fine_x: Vec<f64> = (0..=cells).map(|i| a + i as f64 * h).collect();
    let dens: Vec<f64> = fine_x
        .iter()
        .map(|&x| (-beta * (v0.coordinate_energy(x) - shift)).exp())
        .collect();
    // cumulative Simpson on half cells: midpoint evaluations
    let mut fine_cdf = Vec::with_capacity(cells + 1);
    fine_cdf.push(0.0);
    let mut acc = 0.0;
    for i in 0..cells {
        let m = (-beta * (v0.coordinate_energy(fine_x[i] + 0.5 * h) - shift)).exp();
        acc += h / 6.0 * (dens[i] + 4.0 * m + dens[i + 1]);
        fine_cdf.push(acc);
    }
    let total = acc;
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Quadrature(
            "density does not integrate on the domain".into(),
        ));
    }
    for f in fine_cdf.iter_mut() {
        *f /= total;
    }
    // far tails may saturate in floating point, but never decrease
    if fine_cdf.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Quadrature(
            "cumulative distribution is not monotone".into(),
        ));
    }

    let mut us: Vec<f64> = (0..=levels).map(|k| k as f64 / levels as f64).collect();
    let mut t = 1.0 / levels as f64 / 2.0;
    while t > TAIL_FLOOR {
        us.push(t);
        us.push(1.0 - t);
        t /= 2.0;
    }
    us.sort_by(f64::total_cmp);
    us.dedup();
    let positions: Vec<f64> = us
        .iter()
        .map(|&u| invert_piecewise(&fine_x, &fine_cdf, u))
        .collect();
    // Levels closer than the fine resolution map to the same cell; keep
    // strictly increasing positions only.
    let mut levels_out = Vec::with_capacity(us.len());
    let mut pos_out: Vec<f64> = Vec::with_capacity(us.len());
    for (u, x) in us.into_iter().zip(positions) {
        if pos_out.last().is_none_or(|&p| x > p) {
            levels_out.push(u);
            pos_out.push(x);
        }
    }
    *levels_out.last_mut().expect("non-empty") = 1.0;
    *pos_out.last_mut().expect("non-empty") = b;
    Ok(TabulatedInverseCdf {
        beta,
        source: v0.clone(),
        levels: levels_out,
        positions: pos_out,
        fine_x,
        fine_cdf,
    })
}

/// Inverse of a piecewise-linear increasing function through `(xs, fs)`.
fn invert_piecewise(xs: &[f64], fs: &[f64], u: f64) -> f64 {
    let k = fs.partition_point(|&f| f < u);
    if k == 0 {
        return xs[0];
    }
    if k >= fs.len() {
        return xs[xs.len() - 1];
    }
    let (f0, f1) = (fs[k - 1], fs[k]);
    xs[k - 1] + (u - f0) / (f1 - f0) * (xs[k] - xs[k - 1])
}

impl TabulatedInverseCdf {
    /// `F^{-1}(u)` by linear interpolation between quantile levels.
    #[inline]
    pub fn inverse(&self, u: f64) -> f64 {
        invert_piecewise(&self.positions, &self.levels, u.clamp(0.0, 1.0))
    }

    /// `F(x)` from the fine cumulative quadrature.
    pub fn cdf(&self, x: f64) -> f64 {
        invert_piecewise(&self.fine_cdf, &self.fine_x, x)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.fine_x[0], self.fine_x[self.fine_x.len() - 1])
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse(rng.random::<f64>())
    }
}

/// `sample_inverse_cdf`: one draw from the table.
pub fn sample_inverse_cdf<R: Rng + ?Sized>(table: &TabulatedInverseCdf, rng: &mut R) -> f64 {
    table.sample(rng)
}

/// Independent draws from one table in every coordinate.
#[derive(Clone, Debug)]
pub struct ProductInverseCdf {
    pub table: Arc<TabulatedInverseCdf>,
    pub dim: usize,
}

impl ProductInverseCdf {
    pub fn new(table: TabulatedInverseCdf, dim: usize) -> Self {
        Self {
            table: Arc::new(table),
            dim,
        }
    }

    /// Sampler for `e^{-beta V0}` of a separable landscape.
    pub fn for_smooth_part(spec: &PotentialSpec, beta: f64) -> Result<Self> {
        let table = build_inverse_cdf(&spec.smooth_part(), beta, None, DEFAULT_LEVELS)?;
        Ok(Self::new(table, spec.dim()))
    }

    /// Sampler for `e^{-beta V}` itself (exact target, rough part included).
    pub fn for_target(spec: &PotentialSpec, beta: f64) -> Result<Self> {
        let table = build_inverse_cdf(&spec.with_dim(1)?, beta, None, DEFAULT_LEVELS)?;
        Ok(Self::new(table, spec.dim()))
    }

    pub fn into_aux(self) -> Arc<dyn AuxiliarySampler> {
        Arc::new(self)
    }
}

impl AuxiliarySampler for ProductInverseCdf {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        for o in out.iter_mut() {
            *o = self.table.sample(rng);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalEntropyConfig {
    pub gamma: f64,
    pub beta: f64,
    /// Monte Carlo sample count `N_s`.
    pub samples: usize,
    /// Inner integrator step.
    pub dt: f64,
    /// Inner steps per sample.
    pub inner_steps: usize,
}

impl LocalEntropyConfig {
    pub fn new(gamma: f64, beta: f64, samples: usize) -> Self {
        Self {
            gamma,
            beta,
            samples,
            dt: 1.0,
            inner_steps: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter("gamma must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter("beta must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("need at least one sample".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueEstimate {
    pub value: f64,
    /// Delta-method standard error.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub gradient: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean acceptance of the inner chains.
    pub acceptance: f64,
    /// Inner acceptance fell below one percent.
    pub collapsed: bool,
}

/// Inner-chain acceptance below which a gradient estimate is flagged.
pub const COLLAPSE_THRESHOLD: f64 = 0.01;

/// `-beta^{-1} log (1/N) sum_j e^{-beta V(x + Y_j)}`, evaluated with the
/// minimum energy factored out.
pub fn local_entropy_value<R: Rng + ?Sized>(
    v: &PotentialSpec,
    x: &[f64],
    cfg: &LocalEntropyConfig,
    rng: &mut R,
) -> Result<ValueEstimate> {
    cfg.validate()?;
    check_dim(v.dim(), x.len())?;
    let sd = (cfg.gamma / cfg.beta).sqrt();
    let mut y = vec![0.0; x.len()];
    let energies: Vec<f64> = (0..cfg.samples)
        .map(|_| {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = xi + sd * rng.sample::<f64, _>(StandardNormal);
            }
            v.energy(&y)
        })
        .collect();
    let vmin = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies
        .iter()
        .map(|e| (-cfg.beta * (e - vmin)).exp())
        .collect();
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    assert!(
        mean >= 1.0 / n,
        "log-sum-exp keeps the largest weight at one"
    );
    let var = if w.len() > 1 {
        w.iter().map(|wi| (wi - mean) * (wi - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(ValueEstimate {
        value: vmin - mean.ln() / cfg.beta,
        stderr: (var / n).sqrt() / (cfg.beta * mean),
    })
}

/// One step of the auxiliary diffusion targeting `e^{-beta U_gamma(.|x)}`:
/// exact Ornstein-Uhlenbeck flow about `x - gamma grad V(y)` with the force
/// frozen at `y`, then a Metropolis correction. Returns whether the move was
/// accepted.
pub fn auxiliary_diffusion_step<R: Rng + ?Sized>(
    y: &mut [f64],
    x: &[f64],
    v: &PotentialSpec,
    gamma: f64,
    beta: f64,
    dt: f64,
    rng: &mut R,
) -> bool {
    let n = y.len();
    let a = (-dt / gamma).exp();
    let s2 = gamma / beta * (1.0 - a * a);
    let s = s2.sqrt();
    let mut gy = vec![0.0; n];
    let vy = v.energy_and_gradient(y, &mut gy);
    let mut prop = vec![0.0; n];
    let mut fwd = 0.0;
    for i in 0..n {
        let c = x[i] - gamma * gy[i];
        let mean = c + (y[i] - c) * a;
        let xi: f64 = rng.sample(StandardNormal);
        prop[i] = mean + s * xi;
        fwd += (s * xi) * (s * xi);
    }
    let mut gp = vec![0.0; n];
    let vp = v.energy_and_gradient(&prop, &mut gp);
    if !vp.is_finite() {
        return false;
    }
    let mut rev = 0.0;
    let (mut qy, mut qp) = (0.0, 0.0);
    for i in 0..n {
        let c = x[i] - gamma * gp[i];
        let mean = c + (prop[i] - c) * a;
        rev += (y[i] - mean) * (y[i] - mean);
        qy += (x[i] - y[i]) * (x[i] - y[i]);
        qp += (x[i] - prop[i]) * (x[i] - prop[i]);
    }
    let u_y = vy + qy / (2.0 * gamma);
    let u_p = vp + qp / (2.0 * gamma);
    let log_ratio = -beta * (u_p - u_y) + (fwd - rev) / (2.0 * s2);
    let u: f64 = 1.0 - rng.random::<f64>();
    if u.ln() < log_ratio {
        y.copy_from_slice(&prop);
        true
    } else {
        false
    }
}

/// `(1/N) sum_j gamma^{-1} (x - Y_j)` with `Y_j` the endpoints of `N`
/// independent inner chains started at `x`.
pub fn local_entropy_gradient<R: Rng + ?Sized>(
    v: &PotentialSpec,
    x: &[f64],
    cfg: &LocalEntropyConfig,
    rng: &mut R,
) -> Result<GradientEstimate> {
    cfg.validate()?;
    check_dim(v.dim(), x.len())?;
    let master: u64 = rng.random();
    let n = x.len();
    let runs: Vec<(Vec<f64>, usize)> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|j| {
            let mut r = chain_rng(derive_seed(master, j));
            let mut y = x.to_vec();
            let mut acc = 0;
            for _ in 0..cfg.inner_steps {
                acc += auxiliary_diffusion_step(&mut y, x, v, cfg.gamma, cfg.beta, cfg.dt, &mut r)
                    as usize;
            }
            (y, acc)
        })
        .collect();
    let m = runs.len() as f64;
    let mut gradient = vec![0.0; n];
    let mut sq = vec![0.0; n];
    let mut accepted = 0usize;
    for (y, acc) in &runs {
        accepted += acc;
        for i in 0..n {
            let g = (x[i] - y[i]) / cfg.gamma;
            gradient[i] += g;
            sq[i] += g * g;
        }
    }
    let stderr = (0..n)
        .map(|i| {
            gradient[i] /= m;
            if runs.len() > 1 {
                ((sq[i] / m - gradient[i] * gradient[i]).max(0.0) * m / (m - 1.0) / m).sqrt()
            } else {
                f64::NAN
            }
        })
        .collect();
    let total = (cfg.samples * cfg.inner_steps).max(1) as f64;
    let acceptance = if cfg.inner_steps == 0 {
        1.0
    } else {
        accepted as f64 / total
    };
    Ok(GradientEstimate {
        gradient,
        stderr,
        acceptance,
        collapsed: acceptance < COLLAPSE_THRESHOLD,
    })
}

/// Quadrature values of `V_gamma(x)` and `dV_gamma/dx` for a
/// one-dimensional landscape.
pub fn local_entropy_reference(
    v: &PotentialSpec,
    x: f64,
    gamma: f64,
    beta: f64,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let sd = (gamma / beta).sqrt();
    let q = QuadratureConfig {
        center: x,
        half_width: quad.half_width.max(LAPLACE_WIDTHS * sd) + (x - quad.center).abs(),
        ..quad.clone()
    };
    let shift = energy_shift(v);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * sd * sd).sqrt();
    let mut out = [0.0; 2];
    q.integrate_many(
        2,
        |y, o| {
            let d = y - x;
            let w = (-beta * (v.coordinate_energy(y) - shift)).exp()
                * norm
                * (-d * d / (2.0 * sd * sd)).exp();
            o[0] = w;
            o[1] = w * y;
        },
        &mut out,
    )?;
    let value = shift - out[0].ln() / beta;
    let mean_y = out[1] / out[0];
    Ok((value, (x - mean_y) / gamma))
}

/// Total variation `sum |f_{k+1} - f_k|` of a sequence.
pub fn total_variation(f: &[f64]) -> f64 {
    f.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
