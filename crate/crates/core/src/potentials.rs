//! Rough multiscale energy landscapes `V = V0 + V1(x, x/eps)`.
//!
//! Every landscape here is a sum of identical (or, for the random kind,
//! one-dimensional) coordinate terms, so the analytic value, gradient and
//! the first three coordinate derivatives are all available in closed form.
//! The inverse temperature is deliberately not part of a potential.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Default amplitude of the cosine roughness term.
pub const DEFAULT_AMPLITUDE: f64 = 0.125;

/// Smooth, trapping part `v0` of a separable landscape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothKind {
    /// `v0(x) = x^2 / 2`
    Harmonic,
    /// `v0(x) = (x^2 - 1)^2`
    DoubleWell,
}

impl SmoothKind {
    #[inline]
    pub fn value(self, x: f64) -> f64 {
        match self {
            SmoothKind::Harmonic => 0.5 * x * x,
            SmoothKind::DoubleWell => {
                let s = x * x - 1.0;
                s * s
            }
        }
    }

    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            SmoothKind::Harmonic => x,
            SmoothKind::DoubleWell => 4.0 * x * (x * x - 1.0),
        }
    }

    /// `[v0, v0', v0'', v0''']`
    pub fn derivatives(self, x: f64) -> [f64; 4] {
        match self {
            SmoothKind::Harmonic => [0.5 * x * x, x, 1.0, 0.0],
            SmoothKind::DoubleWell => {
                let s = x * x - 1.0;
                [s * s, 4.0 * x * s, 12.0 * x * x - 4.0, 24.0 * x]
            }
        }
    }

    /// Positions of the global minima.
    pub fn minima(self) -> &'static [f64] {
        match self {
            SmoothKind::Harmonic => &[0.0],
            SmoothKind::DoubleWell => &[-1.0, 1.0],
        }
    }
}

/// `V(x) = sum_i v0(x_i) + A cos(x_i / eps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableRoughPotential {
    pub smooth: SmoothKind,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    pub epsilon: f64,
    pub dim: usize,
}

fn default_amplitude() -> f64 {
    DEFAULT_AMPLITUDE
}

/// One-dimensional `V(x) = (x^2 - 1)^2 + sum_j c_j cos(k_j x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomMultiscalePotential {
    pub coefficients: Vec<f64>,
    pub wavenumbers: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// `V(x) = curvature * |x|^2 / 2`, no rough part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPotential {
    pub curvature: f64,
    pub dim: usize,
}

/// A decomposed landscape with analytic value and gradient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    SeparableRough(SeparableRoughPotential),
    RandomMultiscale(RandomMultiscalePotential),
    CustomQuadratic(QuadraticPotential),
}

impl SeparableRoughPotential {
    pub fn new(smooth: SmoothKind, amplitude: f64, epsilon: f64, dim: usize) -> Result<Self> {
        let p = Self {
            smooth,
            amplitude,
            epsilon,
            dim,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter("amplitude must be finite".into()));
        }
        Ok(())
    }
}

impl RandomMultiscalePotential {
    /// Draws `modes` cosine modes with `c_j ~ U(-0.1, 0.1)` and
    /// `log10 k_j ~ U(1, 3)`.
    pub fn draw(modes: usize, seed: u64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("mode count must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coefficients = Vec::with_capacity(modes);
        let mut wavenumbers = Vec::with_capacity(modes);
        for _ in 0..modes {
            coefficients.push(rng.random_range(-0.1..0.1));
            let log_k: f64 = rng.random_range(1.0..=3.0);
            wavenumbers.push(10f64.powf(log_k));
        }
        Ok(Self {
            coefficients,
            wavenumbers,
            seed: Some(seed),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() || self.coefficients.len() != self.wavenumbers.len() {
            return Err(Error::InvalidParameter(
                "need equally many (>= 1) coefficients and wavenumbers".into(),
            ));
        }
        if self
            .wavenumbers
            .iter()
            .any(|&k| !(k > 0.0 && k.is_finite()))
        {
            return Err(Error::InvalidParameter(
                "wavenumbers must be positive".into(),
            ));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "coefficients must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Draws a random multiscale double well; see [`RandomMultiscalePotential::draw`].
pub fn draw_random_multiscale(modes: usize, seed: u64) -> Result<RandomMultiscalePotential> {
    RandomMultiscalePotential::draw(modes, seed)
}

impl PotentialSpec {
    pub fn separable(smooth: SmoothKind, amplitude: f64, epsilon: f64, dim: usize) -> Result<Self> {
        SeparableRoughPotential::new(smooth, amplitude, epsilon, dim).map(Self::SeparableRough)
    }

    pub fn rough_harmonic(epsilon: f64, dim: usize) -> Result<Self> {
        Self::separable(SmoothKind::Harmonic, DEFAULT_AMPLITUDE, epsilon, dim)
    }

    pub fn rough_double_well(epsilon: f64, dim: usize) -> Result<Self> {
        Self::separable(SmoothKind::DoubleWell, DEFAULT_AMPLITUDE, epsilon, dim)
    }

    pub fn quadratic(curvature: f64, dim: usize) -> Result<Self> {
        let spec = Self::CustomQuadratic(QuadraticPotential { curvature, dim });
        spec.validate()?;
        Ok(spec)
    }

    pub fn random_multiscale(coefficients: Vec<f64>, wavenumbers: Vec<f64>) -> Result<Self> {
        let p = RandomMultiscalePotential {
            coefficients,
            wavenumbers,
            seed: None,
        };
        p.validate()?;
        Ok(Self::RandomMultiscale(p))
    }

    /// Checks the construction invariants (positive dimension and epsilon,
    /// trapping smooth part).
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::SeparableRough(p) => p.validate(),
            Self::RandomMultiscale(p) => p.validate(),
            Self::CustomQuadratic(p) => {
                if p.dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be >= 1".into()));
                }
                if !(p.curvature > 0.0 && p.curvature.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "quadratic curvature must be positive (trapping)".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::SeparableRough(p) => p.dim,
            Self::RandomMultiscale(_) => 1,
            Self::CustomQuadratic(p) => p.dim,
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Self::SeparableRough(p) => Some(p.epsilon),
            _ => None,
        }
    }

    /// Same landscape in another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        let spec = match self {
            Self::SeparableRough(p) => {
                Self::SeparableRough(SeparableRoughPotential { dim, ..p.clone() })
            }
            Self::CustomQuadratic(p) => {
                Self::CustomQuadratic(QuadraticPotential { dim, ..p.clone() })
            }
            Self::RandomMultiscale(_) if dim == 1 => self.clone(),
            Self::RandomMultiscale(_) => {
                return Err(Error::InvalidParameter(
                    "random multiscale potentials are one-dimensional".into(),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same landscape at another roughness scale (separable kinds only).
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        match self {
            Self::SeparableRough(p) => Self::separable(p.smooth, p.amplitude, epsilon, p.dim),
            _ => Err(Error::InvalidParameter(
                "only separable rough potentials carry an epsilon".into(),
            )),
        }
    }

    /// The smooth part `V0` as a potential of its own.
    pub fn smooth_part(&self) -> PotentialSpec {
        match self {
            Self::SeparableRough(p) => Self::SeparableRough(SeparableRoughPotential {
                amplitude: 0.0,
                ..p.clone()
            }),
            Self::RandomMultiscale(_) => Self::SeparableRough(SeparableRoughPotential {
                smooth: SmoothKind::DoubleWell,
                amplitude: 0.0,
                epsilon: 1.0,
                dim: 1,
            }),
            Self::CustomQuadratic(_) => self.clone(),
        }
    }

    /// Kind of the smooth part, when it is one of the named kinds.
    pub fn smooth_kind(&self) -> Option<SmoothKind> {
        match self {
            Self::SeparableRough(p) => Some(p.smooth),
            Self::RandomMultiscale(_) => Some(SmoothKind::DoubleWell),
            Self::CustomQuadratic(_) => None,
        }
    }

    /// Exact oscillation `sup V1 - inf V1` for the cosine forms; independent
    /// of epsilon.
    pub fn osc_bound(&self) -> f64 {
        match self {
            Self::SeparableRough(p) => 2.0 * p.dim as f64 * p.amplitude.abs(),
            Self::RandomMultiscale(p) => 2.0 * p.coefficients.iter().map(|c| c.abs()).sum::<f64>(),
            Self::CustomQuadratic(_) => 0.0,
        }
    }

    /// Per-coordinate `[v, v', v'', v''']` of the full landscape.
    pub fn coordinate_derivatives(&self, x: f64) -> [f64; 4] {
        match self {
            Self::SeparableRough(p) => {
                let mut d = p.smooth.derivatives(x);
                if p.amplitude != 0.0 {
                    let (s, c) = (x / p.epsilon).sin_cos();
                    let a = p.amplitude;
                    let k = 1.0 / p.epsilon;
                    d[0] += a * c;
                    d[1] -= a * k * s;
                    d[2] -= a * k * k * c;
                    d[3] += a * k * k * k * s;
                }
                d
            }
            Self::RandomMultiscale(p) => {
                let mut d = SmoothKind::DoubleWell.derivatives(x);
                for (&c, &k) in p.coefficients.iter().zip(&p.wavenumbers) {
                    let (s, co) = (k * x).sin_cos();
                    d[0] += c * co;
                    d[1] -= c * k * s;
                    d[2] -= c * k * k * co;
                    d[3] += c * k * k * k * s;
                }
                d
            }
            Self::CustomQuadratic(p) => {
                [0.5 * p.curvature * x * x, p.curvature * x, p.curvature, 0.0]
            }
        }
    }

    /// Per-coordinate rough part `v1`.
    pub fn coordinate_rough(&self, x: f64) -> f64 {
        match self {
            Self::SeparableRough(p) => p.amplitude * (x / p.epsilon).cos(),
            Self::RandomMultiscale(p) => p
                .coefficients
                .iter()
                .zip(&p.wavenumbers)
                .map(|(&c, &k)| c * (k * x).cos())
                .sum(),
            Self::CustomQuadratic(_) => 0.0,
        }
    }

    /// Per-coordinate smooth part `v0`.
    pub fn coordinate_smooth(&self, x: f64) -> f64 {
        match self {
            Self::SeparableRough(p) => p.smooth.value(x),
            Self::RandomMultiscale(_) => SmoothKind::DoubleWell.value(x),
            Self::CustomQuadratic(p) => 0.5 * p.curvature * x * x,
        }
    }

    /// Per-coordinate full energy `v0 + v1`.
    #[inline]
    pub fn coordinate_energy(&self, x: f64) -> f64 {
        match self {
            Self::SeparableRough(p) => p.smooth.value(x) + p.amplitude * (x / p.epsilon).cos(),
            _ => self.coordinate_smooth(x) + self.coordinate_rough(x),
        }
    }

    pub fn eval_energy(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.energy(x))
    }

    pub fn eval_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut g = vec![0.0; x.len()];
        self.energy_and_gradient(x, &mut g);
        Ok(g)
    }

    pub fn eval_smooth_part(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.smooth_energy(x))
    }

    pub fn eval_smooth_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut g = vec![0.0; x.len()];
        self.smooth_energy_and_gradient(x, &mut g);
        Ok(g)
    }

    /// Unchecked energy; callers guarantee `x.len() == self.dim()`.
    #[inline]
    pub fn energy(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            Self::SeparableRough(p) => {
                let smooth: f64 = match p.smooth {
                    SmoothKind::Harmonic => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
                    SmoothKind::DoubleWell => x
                        .iter()
                        .map(|&xi| {
                            let s = xi * xi - 1.0;
                            s * s
                        })
                        .sum(),
                };
                if p.amplitude == 0.0 {
                    return smooth;
                }
                let inv = 1.0 / p.epsilon;
                smooth + p.amplitude * x.iter().map(|&xi| (xi * inv).cos()).sum::<f64>()
            }
            Self::CustomQuadratic(p) => 0.5 * p.curvature * x.iter().map(|v| v * v).sum::<f64>(),
            Self::RandomMultiscale(_) => x.iter().map(|&xi| self.coordinate_energy(xi)).sum(),
        }
    }

    /// Unchecked energy, writing the gradient into `grad`.
    #[inline]
    pub fn energy_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(grad.len(), x.len());
        match self {
            Self::SeparableRough(p) if p.amplitude == 0.0 => {
                self.smooth_energy_and_gradient(x, grad)
            }
            Self::SeparableRough(p) => {
                let inv = 1.0 / p.epsilon;
                let a = p.amplitude;
                let mut e = 0.0;
                for (g, &xi) in grad.iter_mut().zip(x) {
                    let (s, c) = (xi * inv).sin_cos();
                    e += p.smooth.value(xi) + a * c;
                    *g = p.smooth.derivative(xi) - a * inv * s;
                }
                e
            }
            Self::CustomQuadratic(p) => {
                let mut e = 0.0;
                for (g, &xi) in grad.iter_mut().zip(x) {
                    e += 0.5 * p.curvature * xi * xi;
                    *g = p.curvature * xi;
                }
                e
            }
            Self::RandomMultiscale(_) => {
                let d = self.coordinate_derivatives(x[0]);
                grad[0] = d[1];
                d[0]
            }
        }
    }

    /// Unchecked smooth-part energy.
    #[inline]
    pub fn smooth_energy(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| self.coordinate_smooth(xi)).sum()
    }

    /// Unchecked smooth-part energy and gradient.
    #[inline]
    pub fn smooth_energy_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut e = 0.0;
        match self {
            Self::SeparableRough(SeparableRoughPotential { smooth, .. }) => {
                for (g, &xi) in grad.iter_mut().zip(x) {
                    e += smooth.value(xi);
                    *g = smooth.derivative(xi);
                }
            }
            Self::RandomMultiscale(_) => {
                for (g, &xi) in grad.iter_mut().zip(x) {
                    e += SmoothKind::DoubleWell.value(xi);
                    *g = SmoothKind::DoubleWell.derivative(xi);
                }
            }
            Self::CustomQuadratic(p) => {
                for (g, &xi) in grad.iter_mut().zip(x) {
                    e += 0.5 * p.curvature * xi * xi;
                    *g = p.curvature * xi;
                }
            }
        }
        e
    }

    /// Global minima of the smooth part in one coordinate.
    pub fn smooth_minima(&self) -> Vec<f64> {
        match self.smooth_kind() {
            Some(k) => k.minima().to_vec(),
            None => vec![0.0],
        }
    }

    /// Curvature of the smooth part at its deepest minimum, per coordinate.
    pub fn smooth_curvature_at_minimum(&self) -> f64 {
        match self {
            Self::CustomQuadratic(p) => p.curvature,
            _ => {
                let kind = self.smooth_kind().unwrap_or(SmoothKind::Harmonic);
                kind.derivatives(kind.minima()[0])[2]
            }
        }
    }
}
