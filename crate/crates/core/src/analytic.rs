//! Closed-form scaling results and quadrature-based references.
//!
//! Scalar MALA on `V = x^2 / (2 eps)` with `sigma^2 = 2 delta eps` has
//! mean squared jump `eps * m(delta)` and mean Metropolis acceptance
//! `A1(delta)`; both are closed forms. For product targets in high
//! dimension the mean acceptance is `a(l) = 2 Phi(-l^{1/I} sqrt(K) / 2)`
//! with `I = 1` for RWM and `I = 1/3` for MALA.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{PotentialSpec, SmoothKind};
use crate::quadrature::{boltzmann_expectations, energy_shift, QuadratureConfig};
use crate::samplers::{AcceptanceRule, Kernel, Method, Proposal, SamplerConfig};

/// Golden-section search bracket for the optimal `delta`.
pub const DELTA_BRACKET: (f64, f64) = (1e-4, 1e2);

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// `m(delta) = 2 delta / (pi (4 + delta (delta - 2)))
///   * ((8 + delta^3) atan(sqrt(8 / delta^3)) - 2 sqrt(2) delta^{3/2})`
pub fn m_delta(delta: f64) -> Result<f64> {
    check_positive("delta", delta)?;
    let d3 = delta * delta * delta;
    let pre = 2.0 * delta / (PI * (4.0 + delta * (delta - 2.0)));
    let body = (8.0 + d3) * (8.0 / d3).sqrt().atan() - 2.0 * SQRT_2 * delta.powf(1.5);
    Ok(pre * body)
}

/// `A1(delta) = (2 / pi) atan((2 / delta)^{3/2})`
pub fn a1_delta(delta: f64) -> Result<f64> {
    check_positive("delta", delta)?;
    Ok(2.0 / PI * (2.0 / delta).powf(1.5).atan())
}

/// Maximizer of a unimodal `f` on `[a, b]` to absolute tolerance `tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// `(delta*, m(delta*))` by golden-section maximization of `m`.
pub fn optimal_delta() -> (f64, f64) {
    let m = |d: f64| m_delta(d).unwrap_or(f64::NEG_INFINITY);
    let d = golden_section_max(m, DELTA_BRACKET.0, DELTA_BRACKET.1, 1e-7);
    (d, m(d))
}

/// `sigma = sqrt(2 delta eps)`
pub fn sigma_from_delta(delta: f64, epsilon: f64) -> f64 {
    (2.0 * delta * epsilon).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Dimension exponent `I` of the high-dimensional scaling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingExponent {
    /// `I = 1`
    Rwm,
    /// `I = 1/3`
    Mala,
}

impl ScalingExponent {
    pub fn value(self) -> f64 {
        match self {
            ScalingExponent::Rwm => 1.0,
            ScalingExponent::Mala => 1.0 / 3.0,
        }
    }

    pub fn for_method(method: Method) -> Result<Self> {
        match method {
            Method::Rwm => Ok(ScalingExponent::Rwm),
            Method::Mala => Ok(ScalingExponent::Mala),
            m => Err(Error::InvalidParameter(format!(
                "no diffusion-limit exponent for {m}"
            ))),
        }
    }
}

/// `a(l; K) = 2 Phi(-l^{1/I} sqrt(K) / 2)`
pub fn limiting_acceptance(ell: f64, k: f64, exponent: ScalingExponent) -> Result<f64> {
    check_positive("ell", ell)?;
    check_positive("K", k)?;
    Ok(2.0 * normal_cdf(-ell.powf(1.0 / exponent.value()) * k.sqrt() / 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub exponent: ScalingExponent,
    pub k: f64,
    /// Maximizer of `l^2 a(l)`.
    pub ell_sq: f64,
    /// `a` at the maximizer.
    pub acceptance: f64,
}

/// Maximizes the per-coordinate efficiency `l^2 a(l; K)`.
pub fn optimal_scaling(k: f64, exponent: ScalingExponent) -> Result<ScalingConstants> {
    check_positive("K", k)?;
    // search in log l; the optimum sits near l ~ K^{-I/2}
    let centre = -0.5 * exponent.value() * k.ln();
    let eff = |t: f64| {
        let l = t.exp();
        l * l * limiting_acceptance(l, k, exponent).unwrap_or(0.0)
    };
    let t = golden_section_max(eff, centre - 10.0, centre + 10.0, 1e-12);
    let ell = t.exp();
    Ok(ScalingConstants {
        exponent,
        k,
        ell_sq: ell * ell,
        acceptance: limiting_acceptance(ell, k, exponent)?,
    })
}

/// Signed K-functional with a flag for negative values, which fall outside
/// the validity of the diffusion limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KFunctional {
    pub value: f64,
    pub negative: bool,
}

/// `E[(v')^2]` (RWM) or `E[5 (v''')^2 + 3 (v'')^3] / 48` (MALA) under the
/// one-coordinate density `prop. e^{-beta v}`.
pub fn k_functional(
    spec: &PotentialSpec,
    beta: f64,
    method: Method,
    quad: &QuadratureConfig,
) -> Result<KFunctional> {
    check_positive("beta", beta)?;
    let exponent = ScalingExponent::for_method(method)?;
    let m = boltzmann_expectations(spec, beta, quad, 1, |x, out| {
        let d = spec.coordinate_derivatives(x);
        out[0] = match exponent {
            ScalingExponent::Rwm => d[1] * d[1],
            ScalingExponent::Mala => (5.0 * d[3] * d[3] + 3.0 * d[2] * d[2] * d[2]) / 48.0,
        };
    })?;
    Ok(KFunctional {
        value: m[0],
        negative: m[0] < 0.0,
    })
}

/// Positive root `sigma^2` of `(sigma^4 / 2) A + sigma^2 n M - C = 0`.
pub fn sigma_first_order_root(a: f64, m: f64, c: f64, n: usize) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "C must be positive, got {c}"
        )));
    }
    if a < 0.0 || m < 0.0 || (a == 0.0 && m == 0.0) || n == 0 {
        return Err(Error::InvalidParameter(
            "A and M must be non-negative and not both zero; n >= 1".into(),
        ));
    }
    let r = n as f64 * m / c;
    Ok(2.0 / (r + (r * r + 2.0 * a / c).sqrt()))
}

/// Stationary moments entering the first-order condition for `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderMoments {
    /// `E[|x - y|^2 F^2 |grad V(x)|^2]`
    pub a: f64,
    /// `E[|x - y|^2 F]`
    pub m: f64,
    /// `E[|x - y|^4 F]`
    pub c: f64,
}

/// Estimates the first-order moments along a Barker-rule MALA chain at
/// unit inverse temperature, `x` stationary and `y` the proposal.
pub fn first_order_moments(
    spec: &PotentialSpec,
    sigma: f64,
    x0: &[f64],
    steps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<FirstOrderMoments> {
    if steps <= burn_in {
        return Err(Error::InvalidParameter("steps must exceed burn_in".into()));
    }
    let cfg = SamplerConfig::mala(sigma, 1.0).with_rule(AcceptanceRule::Barker);
    let kernel = Kernel::for_chain(spec, &cfg)?;
    let mut state = kernel.init_state(x0)?;
    let mut rng = crate::rng::chain_rng(seed);
    let mut scratch = Proposal::with_dim(kernel.dim());
    let (mut sa, mut sm, mut sc) = (0.0, 0.0, 0.0);
    for k in 0..steps {
        let g2: f64 = state.drift_gradient.iter().map(|g| g * g).sum();
        let rec = kernel.step_in_place(&mut state, &mut rng, &mut scratch);
        if k < burn_in || rec.nonfinite {
            continue;
        }
        let f = AcceptanceRule::Barker.prob(rec.log_ratio);
        let d2 = rec.proposal_sq_disp;
        sa += d2 * f * f * g2;
        sm += d2 * f;
        sc += d2 * d2 * f;
    }
    let n = (steps - burn_in) as f64;
    Ok(FirstOrderMoments {
        a: sa / n,
        m: sm / n,
        c: sc / n,
    })
}

/// Extremes of `d mu / d mu0` on one coordinate, `mu prop. e^{-beta v}`
/// and `mu0 prop. e^{-beta v0}`.
pub fn density_ratio_bounds(
    spec: &PotentialSpec,
    beta: f64,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    check_positive("beta", beta)?;
    let shift = energy_shift(spec);
    let mut z = [0.0; 2];
    quad.integrate_many(
        2,
        |x, out| {
            out[0] = (-beta * (spec.coordinate_energy(x) - shift)).exp();
            out[1] = (-beta * (spec.coordinate_smooth(x) - shift)).exp();
        },
        &mut z,
    )?;
    let log_norm = (z[1] / z[0]).ln();
    // ratio(x) = e^{-beta v1(x)} z0 / z, scanned on the quadrature nodes
    // refined to a quarter of the roughness scale
    let nodes = quad.nodes.max(64) * 4;
    let h = 2.0 * quad.half_width / nodes as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=nodes {
        let x = quad.lower() + i as f64 * h;
        let r = (-beta * spec.coordinate_rough(x) + log_norm).exp();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// `v1(x1) - E_{mu0}[v1]` with `v0 = beta (x^2 - 1)^2` and
/// `v1 = beta A cos(x / eps)`: the mean per-coordinate change of the rough
/// energy when an independence proposal leaves `x1`.
pub fn mu_r(x1: f64, beta: f64, epsilon: f64, quad: &QuadratureConfig) -> Result<f64> {
    let spec = PotentialSpec::rough_double_well(epsilon, 1)?;
    mu_r_for(&spec, x1, beta, quad)
}

/// [`mu_r`] for an arbitrary one-coordinate landscape.
pub fn mu_r_for(spec: &PotentialSpec, x1: f64, beta: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_positive("beta", beta)?;
    if spec.osc_bound() == 0.0 {
        return Ok(0.0);
    }
    let smooth = spec.smooth_part();
    let shift = energy_shift(&smooth);
    let mut out = [0.0; 2];
    quad.integrate_many(
        2,
        |x, o| {
            let w = (-beta * (spec.coordinate_smooth(x) - shift)).exp();
            o[0] = w;
            o[1] = w * spec.coordinate_rough(x);
        },
        &mut out,
    )?;
    Ok(beta * (spec.coordinate_rough(x1) - out[1] / out[0]))
}

/// `e^{-n |mu_r| / 2} + exp(-(n / 8) mu_r^2 / osc^2)`, valid for `mu_r < 0`.
pub fn hoeffding_acceptance_bound(n: usize, mu_r: f64, osc: f64) -> Result<f64> {
    if !(mu_r < 0.0) {
        return Err(Error::BoundInapplicable(format!(
            "needs a negative mean rough increment, got {mu_r}"
        )));
    }
    check_positive("osc", osc)?;
    let n = n as f64;
    Ok((-n * mu_r.abs() / 2.0).exp() + (-(n / 8.0) * mu_r * mu_r / (osc * osc)).exp())
}

/// Quadrature defaults for the double well at the given `beta` and `eps`.
pub fn double_well_quadrature(beta: f64, epsilon: f64) -> Result<QuadratureConfig> {
    let spec = PotentialSpec::separable(SmoothKind::DoubleWell, 0.125, epsilon, 1)?;
    Ok(QuadratureConfig::for_potential(&spec, beta))
}

/// The deterministic constants, collected for the `analytic` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSummary {
    pub delta_star: f64,
    pub m_star: f64,
    pub a1_star: f64,
    /// `sigma* / sqrt(eps) = sqrt(2 delta*)`
    pub sigma_coefficient: f64,
    pub rwm: ScalingConstants,
    pub mala: ScalingConstants,
    /// `mu_r(-1)` and `mu_r(0)` for the double well at `beta = 5`,
    /// `eps = 2^-9`.
    pub mu_r_minus_one: f64,
    pub mu_r_zero: f64,
    /// Hoeffding bound on the independence acceptance from `(-1, ..., -1)`
    /// in dimension 50.
    pub hoeffding_n50: f64,
}

pub fn analytic_summary() -> Result<AnalyticSummary> {
    let (delta_star, m_star) = optimal_delta();
    let (beta, eps) = (5.0, 2f64.powi(-9));
    let quad = double_well_quadrature(beta, eps)?;
    let mu_m1 = mu_r(-1.0, beta, eps, &quad)?;
    Ok(AnalyticSummary {
        delta_star,
        m_star,
        a1_star: a1_delta(delta_star)?,
        sigma_coefficient: (2.0 * delta_star).sqrt(),
        rwm: optimal_scaling(1.0, ScalingExponent::Rwm)?,
        mala: optimal_scaling(1.0, ScalingExponent::Mala)?,
        mu_r_minus_one: mu_m1,
        mu_r_zero: mu_r(0.0, beta, eps, &quad)?,
        hoeffding_n50: hoeffding_acceptance_bound(50, mu_m1, beta * 0.25)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_delta_limit() {
        let d = 1e-6;
        assert!((m_delta(d).unwrap() / (2.0 * d) - 1.0).abs() < 1e-4);
        assert!((a1_delta(1e-9).unwrap() - 1.0).abs() < 1e-9);
        assert!(a1_delta(1e9).unwrap() < 1e-9);
        assert!(m_delta(0.0).is_err() && a1_delta(-1.0).is_err());
    }

    #[test]
    fn optimal_delta_values() {
        let (d, m) = optimal_delta();
        assert!((d - 1.27797).abs() < 1e-4, "{d}");
        assert!((m - 1.8494).abs() < 1e-4, "{m}");
        assert!((a1_delta(d).unwrap() - 0.70).abs() < 0.005);
        assert!((sigma_from_delta(d, 1.0) - 1.59873).abs() < 1e-4);
    }

    #[test]
    fn m_has_single_turning_point() {
        let n = 10_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / (n - 1) as f64))
            .collect();
        let ms: Vec<f64> = xs.iter().map(|&d| m_delta(d).unwrap()).collect();
        let signs: Vec<bool> = ms.windows(2).map(|w| w[1] > w[0]).collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-14);
    }

    #[test]
    fn optimal_acceptance_rates() {
        let r = optimal_scaling(1.0, ScalingExponent::Rwm).unwrap();
        assert!((r.acceptance - 0.234).abs() < 0.002, "{}", r.acceptance);
        let m = optimal_scaling(1.0, ScalingExponent::Mala).unwrap();
        assert!((m.acceptance - 0.574).abs() < 0.005, "{}", m.acceptance);
        for e in [ScalingExponent::Rwm, ScalingExponent::Mala] {
            let base = optimal_scaling(1.0, e).unwrap().acceptance;
            for k in [0.1, 10.0] {
                assert!((optimal_scaling(k, e).unwrap().acceptance - base).abs() < 1e-6);
            }
        }
        assert!(
            (limiting_acceptance(1e-12, 1.0, ScalingExponent::Rwm).unwrap() - 1.0).abs() < 1e-9
        );
    }

    #[test]
    fn k_functional_harmonic() {
        let v = PotentialSpec::quadratic(1.0, 1).unwrap();
        let q = QuadratureConfig::for_potential(&v, 1.0);
        let r = k_functional(&v, 1.0, Method::Rwm, &q).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
        let m = k_functional(&v, 1.0, Method::Mala, &q).unwrap();
        assert!((m.value - 1.0 / 16.0).abs() < 1e-12);
        assert!(k_functional(&v, 1.0, Method::Independence, &q).is_err());
    }

    #[test]
    fn k_functional_rough_scaling() {
        let a = PotentialSpec::rough_harmonic(2f64.powi(-5), 1).unwrap();
        let b = PotentialSpec::rough_harmonic(2f64.powi(-6), 1).unwrap();
        let ka = k_functional(
            &a,
            1.0,
            Method::Rwm,
            &QuadratureConfig::for_potential(&a, 1.0),
        )
        .unwrap();
        let kb = k_functional(
            &b,
            1.0,
            Method::Rwm,
            &QuadratureConfig::for_potential(&b, 1.0),
        )
        .unwrap();
        let ratio = kb.value / ka.value;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn k_functional_can_be_negative() {
        // double well without roughness: v'' < 0 near the barrier, small beta
        let v = PotentialSpec::separable(SmoothKind::DoubleWell, 0.0, 1.0, 1).unwrap();
        let k = k_functional(
            &v,
            0.05,
            Method::Mala,
            &QuadratureConfig::for_potential(&v, 0.05),
        )
        .unwrap();
        assert_eq!(k.negative, k.value < 0.0);
    }

    #[test]
    fn first_order_root_cases() {
        assert!((sigma_first_order_root(0.0, 2.0, 3.0, 1).unwrap() - 1.5).abs() < 1e-15);
        assert!(
            (sigma_first_order_root(1.0, 1.0, 1.0, 1).unwrap() - 2.0 / (1.0 + 3f64.sqrt())).abs()
                < 1e-15
        );
        assert!(sigma_first_order_root(1.0, 1.0, 0.0, 1).is_err());
        assert!(sigma_first_order_root(0.0, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn density_ratio_flat_and_rough() {
        let smooth = PotentialSpec::separable(SmoothKind::Harmonic, 0.0, 0.1, 1).unwrap();
        let (lo, hi) =
            density_ratio_bounds(&smooth, 5.0, &QuadratureConfig::for_potential(&smooth, 5.0))
                .unwrap();
        assert!((lo - 1.0).abs() < 1e-8 && (hi - 1.0).abs() < 1e-8);
        let b = 1.25f64;
        for k in [6, 7] {
            let v = PotentialSpec::rough_harmonic(2f64.powi(-k), 1).unwrap();
            let (lo, hi) =
                density_ratio_bounds(&v, 5.0, &QuadratureConfig::for_potential(&v, 5.0)).unwrap();
            assert!(lo >= (-b).exp() && hi <= b.exp(), "{lo} {hi}");
            assert!(lo < 1.0 && hi > 1.0);
        }
    }

    #[test]
    fn mu_r_values() {
        let eps = 2f64.powi(-9);
        let q = double_well_quadrature(5.0, eps).unwrap();
        let a = mu_r(-1.0, 5.0, eps, &q).unwrap();
        let b = mu_r(0.0, 5.0, eps, &q).unwrap();
        assert!((a + 0.623).abs() < 0.002, "{a}");
        assert!((b - 0.625).abs() < 0.002, "{b}");
        let flat = PotentialSpec::separable(SmoothKind::DoubleWell, 0.0, eps, 1).unwrap();
        assert_eq!(mu_r_for(&flat, -1.0, 5.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn hoeffding_values() {
        let b = hoeffding_acceptance_bound(50, -0.623, 1.25).unwrap();
        let expect = (-15.575f64).exp() + (-50.0 / 8.0 * 0.623f64 * 0.623 / 1.5625).exp();
        assert!((b - expect).abs() < 1e-15);
        assert!((b - 0.212).abs() < 0.001);
        let seq: Vec<f64> = [10, 50, 100]
            .iter()
            .map(|&n| hoeffding_acceptance_bound(n, -0.623, 1.25).unwrap())
            .collect();
        assert!(seq[0] > seq[1] && seq[1] > seq[2]);
        assert!(matches!(
            hoeffding_acceptance_bound(50, 0.625, 1.25),
            Err(Error::BoundInapplicable(_))
        ));
    }

    proptest! {
        #[test]
        fn first_order_root_solves_quadratic(a in 0.0f64..10.0, m in 1e-3f64..10.0, c in 1e-3f64..10.0, n in 1usize..100) {
            let s2 = sigma_first_order_root(a, m, c, n).unwrap();
            let resid = 0.5 * s2 * s2 * a + s2 * n as f64 * m - c;
            prop_assert!(resid.abs() <= 1e-12 * c);
        }

        #[test]
        fn density_ratio_within_oscillation(k in 4i32..9, beta in 0.5f64..8.0, dw in any::<bool>()) {
            let kind = if dw { SmoothKind::DoubleWell } else { SmoothKind::Harmonic };
            let v = PotentialSpec::separable(kind, 0.125, 2f64.powi(-k), 1).unwrap();
            let (lo, hi) = density_ratio_bounds(&v, beta, &QuadratureConfig::for_potential(&v, beta)).unwrap();
            let b = beta * v.osc_bound();
            prop_assert!(lo >= (-b).exp() * (1.0 - 1e-12) && hi <= b.exp() * (1.0 + 1e-12));
        }
    }
}
