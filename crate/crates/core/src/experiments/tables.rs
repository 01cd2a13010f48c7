use serde::{Deserialize, Serialize};

use super::io::nullable;
use super::sweep::{merge_replicas, SweepRecord};
use crate::error::{Error, Result};
use crate::samplers::Method;
use crate::stats::linear_fit;

/// Grid argmax of the MSD for one `(method, n, eps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalSigma {
    pub method: Method,
    pub n: usize,
    pub epsilon: f64,
    #[serde(with = "nullable")]
    pub sigma: f64,
    pub msd: f64,
    #[serde(with = "nullable")]
    pub msd_stderr: f64,
    #[serde(with = "nullable")]
    pub accept_rate: f64,
    pub grid_points: usize,
    /// The maximum sits on the first or last grid point.
    pub endpoint: bool,
    /// Every MSD on the grid is zero.
    pub stagnant: bool,
}

/// Picks the largest MSD; ties go to the smaller sigma. Records must share
/// `(method, n, eps)`; unmerged replicas are merged first and failed cells
/// are ignored. The independence sampler has no grid and its single record
/// passes through.
pub fn optimal_sigma(records: &[SweepRecord]) -> Result<OptimalSigma> {
    let first = records
        .first()
        .ok_or_else(|| Error::InsufficientData("no records".into()))?;
    if records.iter().any(|r| {
        r.method != first.method || r.n != first.n || r.epsilon.to_bits() != first.epsilon.to_bits()
    }) {
        return Err(Error::InvalidParameter(
            "records span several (method, n, epsilon) cells".into(),
        ));
    }
    let mut ok: Vec<SweepRecord> = merge_replicas(records)
        .into_iter()
        .filter(|r| r.is_ok())
        .collect();
    if ok.is_empty() {
        return Err(Error::InsufficientData("every cell failed".into()));
    }
    let needed = if first.method.uses_sigma() { 3 } else { 1 };
    if ok.len() < needed {
        return Err(Error::InsufficientData(format!(
            "{} needs >= {needed} grid points, got {}",
            first.method,
            ok.len()
        )));
    }
    ok.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    let mut best = 0;
    for (i, r) in ok.iter().enumerate() {
        if r.msd > ok[best].msd {
            best = i;
        }
    }
    let b = &ok[best];
    Ok(OptimalSigma {
        method: b.method,
        n: b.n,
        epsilon: b.epsilon,
        sigma: b.sigma,
        msd: b.msd,
        msd_stderr: b.msd_stderr,
        accept_rate: b.accept_rate,
        grid_points: ok.len(),
        endpoint: first.method.uses_sigma() && (best == 0 || best + 1 == ok.len()),
        stagnant: ok.iter().all(|r| r.msd == 0.0),
    })
}

/// [`optimal_sigma`] for every `(method, n, eps)` in order of first
/// appearance.
pub fn optima_by_cell(records: &[SweepRecord]) -> Result<Vec<OptimalSigma>> {
    let mut keys: Vec<(Method, usize, u64)> = Vec::new();
    for r in records {
        let k = (r.method, r.n, r.epsilon.to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(m, n, e)| {
            let group: Vec<SweepRecord> = records
                .iter()
                .filter(|r| r.method == m && r.n == n && r.epsilon.to_bits() == e)
                .cloned()
                .collect();
            optimal_sigma(&group)
        })
        .collect()
}

/// Least-squares line through `(log eps, log sigma)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn scaling_fit(epsilons: &[f64], sigmas: &[f64]) -> Result<ScalingFit> {
    if epsilons.len() != sigmas.len() {
        return Err(Error::DimensionMismatch {
            expected: epsilons.len(),
            got: sigmas.len(),
        });
    }
    if epsilons.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs >= 4 points, got {}",
            epsilons.len()
        )));
    }
    if epsilons
        .iter()
        .chain(sigmas)
        .any(|v| !(*v > 0.0 && v.is_finite()))
    {
        return Err(Error::InvalidParameter(
            "scaling fit needs positive values".into(),
        ));
    }
    let lx: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = sigmas.iter().map(|s| s.ln()).collect();
    let (slope, stderr, intercept) = linear_fit(&lx, &ly);
    Ok(ScalingFit {
        slope,
        stderr,
        intercept,
        points: lx.len(),
    })
}

/// Slope of the optimal sigma against eps for one method and dimension.
pub fn scaling_fit_records(
    records: &[SweepRecord],
    method: Method,
    n: usize,
) -> Result<ScalingFit> {
    let subset: Vec<SweepRecord> = records
        .iter()
        .filter(|r| r.method == method && r.n == n)
        .cloned()
        .collect();
    let optima = optima_by_cell(&subset)?;
    let eps: Vec<f64> = optima.iter().map(|o| o.epsilon).collect();
    let sig: Vec<f64> = optima.iter().map(|o| o.sigma).collect();
    scaling_fit(&eps, &sig)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplificationRow {
    pub epsilon: f64,
    pub n: usize,
    pub method: Method,
    #[serde(with = "nullable")]
    pub sigma_opt: f64,
    pub msd_opt: f64,
    /// Optimal MSD over the RWM optimal MSD at the same `(n, eps)`.
    pub ratio: f64,
    pub endpoint: bool,
    pub stagnant: bool,
}

/// Ratio of each method's optimal MSD to the RWM optimum, sorted by `n`,
/// then decreasing `eps`, then method.
pub fn amplification_table(records: &[SweepRecord]) -> Result<Vec<AmplificationRow>> {
    let optima = optima_by_cell(records)?;
    let mut rows = Vec::with_capacity(optima.len());
    for o in &optima {
        let base = optima
            .iter()
            .find(|b| {
                b.method == Method::Rwm && b.n == o.n && b.epsilon.to_bits() == o.epsilon.to_bits()
            })
            .ok_or_else(|| {
                Error::MissingBaseline(format!(
                    "no rwm records for n = {}, eps = {}",
                    o.n, o.epsilon
                ))
            })?;
        let ratio = if o.method == Method::Rwm {
            1.0
        } else {
            o.msd / base.msd
        };
        rows.push(AmplificationRow {
            epsilon: o.epsilon,
            n: o.n,
            method: o.method,
            sigma_opt: o.sigma,
            msd_opt: o.msd,
            ratio,
            endpoint: o.endpoint,
            stagnant: o.stagnant,
        });
    }
    let order = |m: Method| {
        Method::ALL
            .iter()
            .position(|&x| x == m)
            .unwrap_or(usize::MAX)
    };
    rows.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(b.epsilon.total_cmp(&a.epsilon))
            .then(order(a.method).cmp(&order(b.method)))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: Method, eps: f64, sigma: f64, msd: f64) -> SweepRecord {
        SweepRecord {
            method,
            n: 1,
            epsilon: eps,
            sigma,
            msd,
            msd_stderr: 0.0,
            accept_rate: 0.5,
            nonfinite: 0,
            seed: 0,
            walltime_s: 0.0,
            replicas: 1,
            error: None,
        }
    }

    #[test]
    fn argmax_with_ties_toward_smaller_sigma() {
        let r = vec![
            rec(Method::Rwm, 0.1, 3.0, 0.5),
            rec(Method::Rwm, 0.1, 1.0, 0.2),
            rec(Method::Rwm, 0.1, 2.0, 0.5),
            rec(Method::Rwm, 0.1, 4.0, 0.1),
        ];
        let o = optimal_sigma(&r).unwrap();
        assert_eq!(o.sigma, 2.0);
        assert!(!o.endpoint && !o.stagnant);
    }

    #[test]
    fn monotone_records_raise_endpoint_flag() {
        let r: Vec<_> = (1..6)
            .map(|k| rec(Method::Mala, 0.1, k as f64, k as f64))
            .collect();
        let o = optimal_sigma(&r).unwrap();
        assert!(o.endpoint);
        assert_eq!(o.sigma, 5.0);
    }

    #[test]
    fn all_zero_is_stagnant() {
        let r: Vec<_> = (1..4)
            .map(|k| rec(Method::Mala, 0.1, k as f64, 0.0))
            .collect();
        let o = optimal_sigma(&r).unwrap();
        assert!(o.stagnant);
        assert_eq!(o.sigma, 1.0);
    }

    #[test]
    fn independence_passes_through() {
        let r = rec(Method::Independence, 0.1, f64::NAN, 1.7);
        let o = optimal_sigma(std::slice::from_ref(&r)).unwrap();
        assert_eq!(o.msd, 1.7);
        assert!(o.sigma.is_nan());
        assert!(!o.endpoint);
    }

    #[test]
    fn too_few_points() {
        let r = vec![
            rec(Method::Rwm, 0.1, 1.0, 0.1),
            rec(Method::Rwm, 0.1, 2.0, 0.2),
        ];
        assert!(matches!(optimal_sigma(&r), Err(Error::InsufficientData(_))));
        assert!(matches!(
            scaling_fit(&[0.1, 0.2, 0.3], &[1.0, 2.0, 3.0]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn mixed_cells_are_rejected() {
        let r = vec![
            rec(Method::Rwm, 0.1, 1.0, 0.1),
            rec(Method::Rwm, 0.2, 2.0, 0.2),
            rec(Method::Rwm, 0.1, 3.0, 0.2),
        ];
        assert!(optimal_sigma(&r).is_err());
    }

    #[test]
    fn exact_power_law_slope() {
        let eps: Vec<f64> = (5..=10).map(|k| 2f64.powi(-k)).collect();
        let sig: Vec<f64> = eps.iter().map(|e| 1.6 * e.sqrt()).collect();
        let f = scaling_fit(&eps, &sig).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.intercept - 1.6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn slope_from_records() {
        let mut r = Vec::new();
        for k in 4..9 {
            let e = 2f64.powi(-k);
            for (s, m) in [(0.5 * e, 0.1), (e, 0.3), (2.0 * e, 0.2)] {
                r.push(rec(Method::Mala, e, s, m));
            }
        }
        let f = scaling_fit_records(&r, Method::Mala, 1).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!(scaling_fit_records(&r, Method::Rwm, 1).is_err());
    }

    #[test]
    fn amplification_ratios() {
        let mut r = Vec::new();
        for (s, m) in [(1.0, 0.1), (2.0, 0.2), (3.0, 0.15)] {
            r.push(rec(Method::Rwm, 0.1, s, m));
            r.push(rec(Method::ModifiedMala, 0.1, s, 3.0 * m));
        }
        r.push(rec(Method::Independence, 0.1, f64::NAN, 1.0));
        let t = amplification_table(&r).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].method, Method::Rwm);
        assert_eq!(t[0].ratio, 1.0);
        assert!((t[1].ratio - 3.0).abs() < 1e-12);
        assert!((t[2].ratio - 5.0).abs() < 1e-12);
        assert!(t.iter().all(|row| row.ratio > 0.0));
    }

    #[test]
    fn missing_baseline() {
        let r = vec![rec(Method::Independence, 0.1, f64::NAN, 1.0)];
        assert!(matches!(
            amplification_table(&r),
            Err(Error::MissingBaseline(_))
        ));
    }
}
