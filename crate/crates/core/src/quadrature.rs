//! One-dimensional quadrature against Boltzmann weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;

/// Number of Laplace standard deviations the automatic domain extends past
/// the outermost minimum.
pub const LAPLACE_WIDTHS: f64 = 10.0;

const MAX_INTERVALS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureScheme {
    /// Composite Simpson with node doubling until two successive results agree.
    Adaptive,
    /// A single composite Simpson pass at the configured node count.
    FixedGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub center: f64,
    pub half_width: f64,
    /// Initial number of Simpson intervals (even, at least 64).
    pub nodes: usize,
    pub scheme: QuadratureScheme,
    /// Relative agreement required between successive doublings.
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            center: 0.0,
            half_width: 10.0,
            nodes: 1024,
            scheme: QuadratureScheme::Adaptive,
            tolerance: 1e-8,
        }
    }
}

impl QuadratureConfig {
    pub fn new(center: f64, half_width: f64, nodes: usize) -> Self {
        Self {
            center,
            half_width,
            nodes,
            ..Self::default()
        }
    }

    /// Domain sized from a Laplace approximation of `e^{-beta V0}` at the
    /// outermost minima, with initial spacing fine enough to resolve the
    /// rough part (at most a quarter of its shortest length scale).
    pub fn for_potential(spec: &PotentialSpec, beta: f64) -> Self {
        let (center, half_width) = boltzmann_domain(spec, beta);
        let scale = roughness_scale(spec);
        let mut nodes = 1024usize;
        if let Some(s) = scale {
            let needed = (2.0 * half_width / (s / 4.0)).ceil() as usize;
            nodes = nodes.max(needed);
        }
        nodes += nodes % 2;
        Self {
            center,
            half_width,
            nodes,
            ..Self::default()
        }
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 64 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least 64 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidParameter(
                "quadrature half-width must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Integrates `f` over `[center - half_width, center + half_width]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut out = [0.0];
        self.integrate_many(1, |x, v| v[0] = f(x), &mut out)?;
        Ok(out[0])
    }

    /// Integrates `k` functions at once; `f(x, values)` writes all `k`
    /// integrands at `x`. Convergence is required of every component.
    pub fn integrate_many<F>(&self, k: usize, f: F, out: &mut [f64]) -> Result<()>
    where
        F: Fn(f64, &mut [f64]),
    {
        self.validate()?;
        assert_eq!(out.len(), k);
        let a = self.lower();
        let b = self.upper();
        let mut n = self.nodes + self.nodes % 2;
        let mut buf = vec![0.0; k];

        // Simpson = h/3 (ends + 4 odd + 2 even); after doubling all old
        // nodes become even nodes.
        let mut ends = vec![0.0; k];
        // running sum of |f| over all nodes, for an absolute error floor
        let mut abs_sum = vec![0.0; k];
        f(a, &mut buf);
        add(&mut ends, &buf);
        add_abs(&mut abs_sum, &buf);
        f(b, &mut buf);
        add(&mut ends, &buf);
        add_abs(&mut abs_sum, &buf);
        let mut even = vec![0.0; k];
        let mut odd = vec![0.0; k];
        let mut h = (b - a) / n as f64;
        for i in 1..n {
            f(a + i as f64 * h, &mut buf);
            add_abs(&mut abs_sum, &buf);
            if i % 2 == 0 {
                add(&mut even, &buf);
            } else {
                add(&mut odd, &buf);
            }
        }
        let simpson = |ends: &[f64], even: &[f64], odd: &[f64], h: f64, out: &mut [f64]| {
            for j in 0..ends.len() {
                out[j] = h / 3.0 * (ends[j] + 4.0 * odd[j] + 2.0 * even[j]);
            }
        };
        simpson(&ends, &even, &odd, h, out);
        if self.scheme == QuadratureScheme::FixedGrid {
            return check_finite(out);
        }
        let mut prev = out.to_vec();
        loop {
            if n * 2 > MAX_INTERVALS {
                return Err(Error::Quadrature(format!(
                    "no agreement to {:e} relative after {} intervals",
                    self.tolerance, n
                )));
            }
            for j in 0..k {
                even[j] += odd[j];
                odd[j] = 0.0;
            }
            h *= 0.5;
            n *= 2;
            for i in (1..n).step_by(2) {
                f(a + i as f64 * h, &mut buf);
                add(&mut odd, &buf);
                add_abs(&mut abs_sum, &buf);
            }
            simpson(&ends, &even, &odd, h, out);
            check_finite(out)?;
            let converged = out.iter().zip(&prev).zip(&abs_sum).all(|((v, p), s)| {
                let floor = 1e-4 * s * h;
                (v - p).abs() <= self.tolerance * v.abs().max(floor)
            });
            if converged {
                return Ok(());
            }
            prev.copy_from_slice(out);
        }
    }
}

fn add(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

fn add_abs(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b.abs();
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Quadrature("non-finite integral".into()))
    }
}

/// Shortest oscillation length of the rough part, if any.
pub(crate) fn roughness_scale(spec: &PotentialSpec) -> Option<f64> {
    match spec {
        PotentialSpec::SeparableRough(p) if p.amplitude != 0.0 => Some(p.epsilon),
        PotentialSpec::RandomMultiscale(p) => p
            .wavenumbers
            .iter()
            .copied()
            .fold(None, |m: Option<f64>, k| Some(m.map_or(k, |m| m.max(k))))
            .map(|k| 1.0 / k),
        _ => None,
    }
}

/// `(center, half_width)` covering the Boltzmann density of one coordinate.
pub fn boltzmann_domain(spec: &PotentialSpec, beta: f64) -> (f64, f64) {
    let minima = spec.smooth_minima();
    let lo = minima.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = minima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let curvature = spec.smooth_curvature_at_minimum();
    let sd = 1.0 / (beta * curvature).sqrt();
    let center = 0.5 * (lo + hi);
    (center, 0.5 * (hi - lo) + LAPLACE_WIDTHS * sd)
}

/// Reference energy used to shift exponents so `e^{-beta (v - shift)}`
/// neither overflows nor underflows near the minima.
pub(crate) fn energy_shift(spec: &PotentialSpec) -> f64 {
    spec.smooth_minima()
        .iter()
        .map(|&m| spec.coordinate_smooth(m))
        .fold(f64::INFINITY, f64::min)
        - 0.5 * spec.osc_bound() / spec.dim() as f64
}

/// Expectations of `g_1..g_k` under the one-coordinate density
/// `prop. e^{-beta v(x)}` where `v` is the coordinate energy of `spec`.
pub fn boltzmann_expectations<G>(
    spec: &PotentialSpec,
    beta: f64,
    quad: &QuadratureConfig,
    k: usize,
    g: G,
) -> Result<Vec<f64>>
where
    G: Fn(f64, &mut [f64]),
{
    let shift = energy_shift(spec);
    let mut out = vec![0.0; k + 1];
    quad.integrate_many(
        k + 1,
        |x, v| {
            let w = (-beta * (spec.coordinate_energy(x) - shift)).exp();
            g(x, &mut v[1..]);
            for vi in v[1..].iter_mut() {
                *vi *= w;
            }
            v[0] = w;
        },
        &mut out,
    )?;
    let z = out[0];
    if !(z > 0.0) {
        return Err(Error::Quadrature("vanishing normalizer".into()));
    }
    Ok(out[1..].iter().map(|v| v / z).collect())
}
