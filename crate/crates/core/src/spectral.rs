//! Grid discretizations of one-dimensional Metropolis-Hastings kernels.
//!
//! A kernel with proposal density `q` and acceptance function `F` becomes
//! the matrix `T_ij = q(x_i -> x_j) h F(R(x_i, x_j))` for `i != j`, with the
//! remaining mass of each row on the diagonal. Because `w_i q_ij F(R_ij)` is
//! symmetric whenever `F(r) = e^r F(-r)`, the matrix is reversible with
//! respect to the grid weights `w_i prop. e^{-beta V(x_i)}`, and its
//! spectrum is that of the symmetric `D^{1/2} T D^{-1/2}`.
//!
//! Independence proposals use the discretely normalized weights of
//! `e^{-beta U}` on the grid, so `U = V` yields an exact rank-one matrix.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::quadrature::roughness_scale;
use crate::samplers::{Kernel, Method, SamplerConfig};

/// Tolerance for row sums and detailed balance at construction.
pub const MATRIX_TOLERANCE: f64 = 1e-10;

/// Tolerance on the leading eigenvalue.
pub const LEADING_TOLERANCE: f64 = 1e-8;

/// Number of Laplace standard deviations covered by [`Grid1D::covering`].
pub const GRID_WIDTHS: f64 = 8.0;

/// Uniform grid of cell centres on `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub points: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, points: usize) -> Result<Self> {
        if points < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 8 points, got {points}"
            )));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bad grid domain [{a}, {b}]"
            )));
        }
        Ok(Self { a, b, points })
    }

    /// Grid covering [`GRID_WIDTHS`] Laplace standard deviations of
    /// `e^{-beta V0}` beyond the outermost minima.
    pub fn covering(spec: &PotentialSpec, beta: f64, points: usize) -> Result<Self> {
        let minima = spec.smooth_minima();
        let lo = minima.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = minima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sd = 1.0 / (beta * spec.smooth_curvature_at_minimum()).sqrt();
        Self::new(lo - GRID_WIDTHS * sd, hi + GRID_WIDTHS * sd, points)
    }

    /// Smallest power of two (at least `min_points`) whose spacing resolves
    /// the roughness of `spec` to a quarter of its length scale.
    pub fn resolving(spec: &PotentialSpec, beta: f64, min_points: usize) -> Result<Self> {
        let mut g = Self::covering(spec, beta, min_points.max(8))?;
        if let Some(s) = roughness_scale(spec) {
            while g.spacing() > s / 4.0 {
                g.points *= 2;
            }
        }
        Ok(g)
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Whether the spacing is at most a quarter of the roughness scale.
    pub fn resolves(&self, spec: &PotentialSpec) -> bool {
        roughness_scale(spec).is_none_or(|s| self.spacing() <= s / 4.0 * (1.0 + 1e-12))
    }

    pub fn refined(&self) -> Self {
        Self {
            points: self.points * 2,
            ..*self
        }
    }
}

/// Row-stochastic, reversible discretization of a one-dimensional kernel.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    pub grid: Grid1D,
    /// Row-major `G x G` entries.
    pub t: Vec<f64>,
    /// Stationary grid weights, summing to one.
    pub w: Vec<f64>,
    pub log_w: Vec<f64>,
    pub method: Method,
    pub sigma: f64,
    pub epsilon: Option<f64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.grid.points
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let g = self.size();
        &self.t[i * g..(i + 1) * g]
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_error(&self) -> f64 {
        (0..self.size())
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|w_i T_ij - w_j T_ji|`.
    pub fn reversibility_error(&self) -> f64 {
        let g = self.size();
        (0..g)
            .into_par_iter()
            .map(|i| {
                (i + 1..g)
                    .map(|j| (self.w[i] * self.get(i, j) - self.w[j] * self.get(j, i)).abs())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Weight of an index set.
    pub fn mass(&self, set: &[bool]) -> f64 {
        self.w
            .iter()
            .zip(set)
            .filter(|(_, &k)| k)
            .map(|(w, _)| w)
            .sum()
    }

    /// `S = D^{1/2} T D^{-1/2}`, averaged with its transpose.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let g = self.size();
        let half: Vec<f64> = self.log_w.iter().map(|l| 0.5 * l).collect();
        let mut s = DMatrix::<f64>::zeros(g, g);
        for i in 0..g {
            for j in i..g {
                let a = self.get(i, j) * (half[i] - half[j]).exp();
                let b = self.get(j, i) * (half[j] - half[i]).exp();
                let v = 0.5 * (a + b);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }
}

/// Builds the transition matrix of `cfg` on `spec` (one-dimensional).
pub fn discretize_kernel(
    cfg: &SamplerConfig,
    spec: &PotentialSpec,
    grid: &Grid1D,
) -> Result<TransitionMatrix> {
    if spec.dim() != 1 {
        return Err(Error::InvalidParameter(format!(
            "spectral discretization is one-dimensional, got n = {}",
            spec.dim()
        )));
    }
    let kernel = Kernel::new(spec, cfg)?;
    let g = grid.points;
    let h = grid.spacing();
    let xs = grid.nodes();
    let beta = cfg.beta;
    let energy: Vec<f64> = xs.iter().map(|&x| spec.energy(&[x])).collect();
    let vmin = energy.iter().copied().fold(f64::INFINITY, f64::min);
    let log_w = log_normalize(energy.iter().map(|v| -beta * (v - vmin)).collect());
    let w: Vec<f64> = log_w.iter().map(|l| l.exp()).collect();

    // Log proposal "mass" from i to j, including the cell width.
    let log_q: Box<dyn Fn(usize, usize) -> f64 + Sync> = match cfg.method {
        Method::Independence => {
            let aux = cfg.auxiliary.as_ref().expect("validated auxiliary");
            let u: Vec<f64> = xs.iter().map(|&x| aux.energy(&[x])).collect();
            let umin = u.iter().copied().fold(f64::INFINITY, f64::min);
            let log_wu = log_normalize(u.iter().map(|v| -beta * (v - umin)).collect());
            Box::new(move |_, j| log_wu[j])
        }
        _ => {
            let drift: Vec<f64> = xs
                .iter()
                .map(|&x| kernel.drift(&[x]).map(|d| d[0]))
                .collect::<Result<_>>()?;
            let s2 = cfg.noise_scale().powi(2);
            let log_norm = h.ln() - 0.5 * (2.0 * std::f64::consts::PI * s2).ln();
            let xs = xs.clone();
            Box::new(move |i, j| {
                let r = xs[j] - xs[i] - drift[i];
                log_norm - r * r / (2.0 * s2)
            })
        }
    };

    let rule = cfg.rule;
    let rows: Vec<Vec<f64>> = (0..g)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; g];
            let mut off = 0.0;
            for j in 0..g {
                if j == i {
                    continue;
                }
                let fwd = log_q(i, j);
                let r = beta * (energy[i] - energy[j]) + log_q(j, i) - fwd;
                let v = fwd.exp() * rule.prob(r);
                row[j] = v;
                off += v;
            }
            row[i] = 1.0 - off;
            row
        })
        .collect();
    let mut t = Vec::with_capacity(g * g);
    for row in rows {
        t.extend(row);
    }
    let m = TransitionMatrix {
        grid: *grid,
        t,
        w,
        log_w,
        method: cfg.method,
        sigma: cfg.sigma,
        epsilon: spec.epsilon(),
    };
    let neg = (0..g).map(|i| m.get(i, i)).fold(f64::INFINITY, f64::min);
    if neg < -MATRIX_TOLERANCE {
        return Err(Error::Discretization(format!(
            "negative diagonal {neg:e}: proposal narrower than the grid spacing"
        )));
    }
    let rs = m.row_sum_error();
    if rs > MATRIX_TOLERANCE {
        return Err(Error::Discretization(format!(
            "row sums off by {rs:e} > {MATRIX_TOLERANCE:e}"
        )));
    }
    let rev = m.reversibility_error();
    if rev > MATRIX_TOLERANCE {
        return Err(Error::Discretization(format!(
            "detailed balance violated by {rev:e} > {MATRIX_TOLERANCE:e}"
        )));
    }
    Ok(m)
}

fn log_normalize(mut l: Vec<f64>) -> Vec<f64> {
    let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + l.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    for v in l.iter_mut() {
        *v -= lse;
    }
    l
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub lambda1: f64,
    /// Second-largest eigenvalue.
    pub lambda2: f64,
    pub gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
}

fn check_spectrum(mut ev: Vec<f64>) -> Result<(Vec<f64>, f64, f64)> {
    if ev.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    ev.sort_by(|a, b| b.total_cmp(a));
    let (l1, l2) = (ev[0], ev[1]);
    if (l1 - 1.0).abs() > LEADING_TOLERANCE {
        return Err(Error::Eigen(format!("leading eigenvalue {l1} is not 1")));
    }
    Ok((ev, l1, l2))
}

/// `1 - lambda_2` of the symmetrized matrix.
pub fn spectral_gap(t: &TransitionMatrix) -> Result<GapResult> {
    spectral_gap_with(t, false)
}

pub fn spectral_gap_with(t: &TransitionMatrix, keep_spectrum: bool) -> Result<GapResult> {
    let ev = t.symmetrized().symmetric_eigenvalues();
    let (ev, lambda1, lambda2) = check_spectrum(ev.iter().copied().collect())?;
    Ok(GapResult {
        lambda1,
        lambda2,
        gap: 1.0 - lambda2,
        spectrum: keep_spectrum.then_some(ev),
    })
}

/// `(lambda_2, f)` with `f = D^{-1/2} v_2` the second eigenfunction as a
/// grid function. Full eigendecomposition; intended for small grids.
pub fn second_eigenvector(t: &TransitionMatrix) -> Result<(f64, Vec<f64>)> {
    let g = t.size();
    let eig = nalgebra::SymmetricEigen::try_new(t.symmetrized(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let (_, _, l2) = check_spectrum(eig.eigenvalues.iter().copied().collect())?;
    let k = (0..g)
        .find(|&k| eig.eigenvalues[k] == l2)
        .ok_or_else(|| Error::Eigen("second eigenvalue not found".into()))?;
    let v = eig.eigenvectors.column(k);
    let f = (0..g).map(|i| v[i] * (-0.5 * t.log_w[i]).exp()).collect();
    Ok((l2, f))
}

/// `sum_ij w_i T_ij (f_j - f_i)^2 / (2 Var_w f)`, an upper bound on the gap.
pub fn dirichlet_upper_bound(t: &TransitionMatrix, f: &[f64]) -> Result<f64> {
    let g = t.size();
    if f.len() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: f.len(),
        });
    }
    let mean: f64 = t.w.iter().zip(f).map(|(w, v)| w * v).sum();
    let var: f64 =
        t.w.iter()
            .zip(f)
            .map(|(w, v)| w * (v - mean) * (v - mean))
            .sum();
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(var > 1e-24 * scale * scale) {
        return Err(Error::InvalidParameter(
            "observable is constant under the grid weights".into(),
        ));
    }
    let form: f64 = (0..g)
        .into_par_iter()
        .map(|i| {
            let row = t.row(i);
            t.w[i]
                * row
                    .iter()
                    .zip(f)
                    .map(|(tij, fj)| tij * (fj - f[i]) * (fj - f[i]))
                    .sum::<f64>()
        })
        .sum();
    Ok(form / (2.0 * var))
}

/// `2 P(X_1 in K^c | X_0 in K)` in stationarity, an upper bound on the gap.
pub fn conductance_bound(t: &TransitionMatrix, set: &[bool]) -> Result<f64> {
    let g = t.size();
    if set.len() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: set.len(),
        });
    }
    let mu_k = t.mass(set);
    if !(mu_k > 0.0 && mu_k < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "conductance set must have mass in (0, 1/2), got {mu_k}"
        )));
    }
    let flow: f64 = (0..g)
        .filter(|&i| set[i])
        .map(|i| {
            t.w[i]
                * t.row(i)
                    .iter()
                    .zip(set)
                    .filter(|(_, &k)| !k)
                    .map(|(v, _)| v)
                    .sum::<f64>()
        })
        .sum();
    Ok(2.0 * flow / mu_k)
}

/// Indicator of `{|x| > r}` on the grid.
pub fn outside_set(grid: &Grid1D, r: f64) -> Vec<bool> {
    grid.nodes().iter().map(|x| x.abs() > r).collect()
}

/// Standardized indicator `(1_K - mu(K)) / sqrt(mu(K) (1 - mu(K)))`.
pub fn conductance_observable(t: &TransitionMatrix, set: &[bool]) -> Vec<f64> {
    let m = t.mass(set);
    let s = (m * (1.0 - m)).sqrt();
    set.iter().map(|&k| ((k as u8 as f64) - m) / s).collect()
}

/// Relative change of the gap when the grid is refined once.
pub fn refinement_change(cfg: &SamplerConfig, spec: &PotentialSpec, grid: &Grid1D) -> Result<f64> {
    let a = spectral_gap(&discretize_kernel(cfg, spec, grid)?)?.gap;
    let b = spectral_gap(&discretize_kernel(cfg, spec, &grid.refined())?)?.gap;
    Ok((b - a).abs() / a.abs().max(f64::MIN_POSITIVE))
}
