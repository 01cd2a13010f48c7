//! Acceptance suite. Every criterion runs at its stated tolerance with a
//! seed fixed up front and prints one PASS/FAIL line; the process exits
//! non-zero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roughsampler::analytic::{
    a1_delta, density_ratio_bounds, double_well_quadrature, hoeffding_acceptance_bound, m_delta,
    mu_r, optimal_delta, optimal_scaling, sigma_first_order_root, sigma_from_delta,
    ScalingExponent,
};
use roughsampler::experiments::{
    amplification_table, optima_by_cell, run_sigma_sweep, sampler_for, scaling_fit_records,
    SigmaGrid, StartPoint, SweepConfig,
};
use roughsampler::quadrature::QuadratureConfig;
use roughsampler::rng::derive_seed;
use roughsampler::samplers::{
    run_chain, run_chain_observed, Kernel, Method, Proposal, RunOptions, SamplerConfig,
};
use roughsampler::smoothing::{local_entropy_gradient, local_entropy_value, LocalEntropyConfig};
use roughsampler::spectral::{
    dirichlet_upper_bound, discretize_kernel, second_eigenvector, spectral_gap, Grid1D,
    TransitionMatrix,
};
use roughsampler::{AcceptanceRule, PotentialSpec};

const MASTER_SEED: u64 = 0x5EED_0A11;
const BETA: f64 = 5.0;

fn seed(criterion: u64) -> u64 {
    derive_seed(MASTER_SEED, criterion)
}

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn c01_optimal_delta() -> Outcome {
    let (d, m) = optimal_delta();
    Ok((
        within(d, 1.27797, 1e-4) && within(m, 1.8494, 1e-4),
        format!("delta* = {d:.6}, m(delta*) = {m:.6}"),
    ))
}

fn c02_acceptance_at_optimum() -> Outcome {
    let a = a1_delta(optimal_delta().0).map_err(|e| e.to_string())?;
    Ok((within(a, 0.70, 0.005), format!("A1(delta*) = {a:.5}")))
}

fn c03_limiting_acceptance() -> Outcome {
    let mut pass = true;
    let mut acc = [[0.0; 3]; 2];
    for (i, (exp, target, tol)) in [
        (ScalingExponent::Rwm, 0.234, 0.002),
        (ScalingExponent::Mala, 0.574, 0.005),
    ]
    .into_iter()
    .enumerate()
    {
        for (j, k) in [0.1, 1.0, 10.0].into_iter().enumerate() {
            acc[i][j] = optimal_scaling(k, exp)
                .map_err(|e| e.to_string())?
                .acceptance;
        }
        pass &= within(acc[i][1], target, tol);
        pass &= acc[i].iter().all(|a| (a - acc[i][1]).abs() <= 1e-6);
    }
    Ok((
        pass,
        format!(
            "I=1: {:.5} (K spread {:.1e}), I=1/3: {:.5} (K spread {:.1e})",
            acc[0][1],
            spread(&acc[0]),
            acc[1][1],
            spread(&acc[1])
        ),
    ))
}

fn spread(v: &[f64]) -> f64 {
    v.iter().fold(f64::MIN, |a, &b| a.max(b)) - v.iter().fold(f64::MAX, |a, &b| a.min(b))
}

fn c04_first_order_root() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed(4));
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a: f64 = rng.random_range(0.0..10.0);
        let m: f64 = rng.random_range(1e-6..10.0);
        let c: f64 = rng.random_range(1e-6..10.0);
        let n: usize = rng.random_range(1..200);
        let s = sigma_first_order_root(a, m, c, n).map_err(|e| e.to_string())?;
        let lhs = 0.5 * s * s * a + s * n as f64 * m;
        worst = worst.max((lhs - c).abs() / c);
    }
    Ok((
        worst <= 1e-12,
        format!("max relative residual {worst:.2e} over 1000 draws"),
    ))
}

fn c05_mu_r() -> Outcome {
    let eps = 2f64.powi(-9);
    let quad = double_well_quadrature(BETA, eps).map_err(|e| e.to_string())?;
    let m1 = mu_r(-1.0, BETA, eps, &quad).map_err(|e| e.to_string())?;
    let m0 = mu_r(0.0, BETA, eps, &quad).map_err(|e| e.to_string())?;
    Ok((
        within(m1, -0.623, 0.002) && within(m0, 0.625, 0.002),
        format!("mu_r(-1) = {m1:.5}, mu_r(0) = {m0:.5}"),
    ))
}

fn c06_density_ratio() -> Outcome {
    let (lo_b, hi_b) = ((-1.25f64).exp(), 1.25f64.exp());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 4..=8 {
        let v = PotentialSpec::rough_harmonic(2f64.powi(-k), 1).map_err(|e| e.to_string())?;
        let quad = QuadratureConfig::for_potential(&v, BETA);
        let (l, h) = density_ratio_bounds(&v, BETA, &quad).map_err(|e| e.to_string())?;
        lo = lo.min(l);
        hi = hi.max(h);
    }
    Ok((
        lo >= lo_b && hi <= hi_b,
        format!("ratio range [{lo:.4}, {hi:.4}] within [{lo_b:.4}, {hi_b:.4}]"),
    ))
}

fn matrix(
    method: Method,
    sigma: f64,
    v: &PotentialSpec,
    grid: &Grid1D,
) -> Result<TransitionMatrix, String> {
    let cfg = sampler_for(method, sigma, BETA, v, None).map_err(|e| e.to_string())?;
    discretize_kernel(&cfg, v, grid).map_err(|e| e.to_string())
}

fn gap_of(t: &TransitionMatrix) -> Result<f64, String> {
    Ok(spectral_gap(t).map_err(|e| e.to_string())?.gap)
}

fn c07_rank_one_gap() -> Outcome {
    let v = PotentialSpec::rough_harmonic(2f64.powi(-5), 1).map_err(|e| e.to_string())?;
    let grid = Grid1D::resolving(&v, BETA, 256).map_err(|e| e.to_string())?;
    let cfg = SamplerConfig::independence(BETA, v.clone(), None);
    let t = discretize_kernel(&cfg, &v, &grid).map_err(|e| e.to_string())?;
    let g = gap_of(&t)?;
    Ok((
        within(g, 1.0, 1e-8),
        format!("gap = {g:.12} (G = {})", grid.points),
    ))
}

fn c08_gap_sandwich() -> Outcome {
    let osc = PotentialSpec::rough_harmonic(0.1, 1)
        .map_err(|e| e.to_string())?
        .osc_bound();
    let bound = (3.0 * BETA * osc).exp();
    let mut pass = true;
    let mut parts = Vec::new();
    for method in [Method::Rwm, Method::ModifiedMala, Method::Independence] {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 4..=6 {
            let v = PotentialSpec::rough_harmonic(2f64.powi(-k), 1).map_err(|e| e.to_string())?;
            let v0 = v.smooth_part();
            let grid = Grid1D::resolving(&v, BETA, 256).map_err(|e| e.to_string())?;
            let r = gap_of(&matrix(method, 1.0, &v, &grid)?)?
                / gap_of(&matrix(method, 1.0, &v0, &grid)?)?;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        pass &= lo >= 1.0 / bound && hi <= bound;
        parts.push(format!("{method} [{lo:.3}, {hi:.3}]"));
    }
    Ok((
        pass,
        format!(
            "gap ratios {} within [{:.4}, {:.2}]",
            parts.join(", "),
            1.0 / bound,
            bound
        ),
    ))
}

fn c09_mala_gap_decreases() -> Outcome {
    let mut gaps = Vec::new();
    let mut sizes = Vec::new();
    for k in 4..=7 {
        let eps = 2f64.powi(-k);
        let v = PotentialSpec::rough_harmonic(eps, 1).map_err(|e| e.to_string())?;
        let grid = Grid1D::resolving(&v, BETA, 256).map_err(|e| e.to_string())?;
        let t = discretize_kernel(&SamplerConfig::mala(eps.powf(0.3), BETA), &v, &grid)
            .map_err(|e| e.to_string())?;
        gaps.push(gap_of(&t)?);
        sizes.push(grid.points);
    }
    let pass = gaps.windows(2).all(|w| w[1] < w[0]);
    let list: Vec<String> = gaps.iter().map(|g| format!("{g:.3e}")).collect();
    Ok((pass, format!("gaps {} (G = {:?})", list.join(" > "), sizes)))
}

fn c10_dirichlet_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed(10));
    let v = PotentialSpec::rough_harmonic(2f64.powi(-4), 1).map_err(|e| e.to_string())?;
    let grid = Grid1D::resolving(&v, BETA, 256).map_err(|e| e.to_string())?;
    let (mut min_excess, mut worst_eig): (f64, f64) = (f64::INFINITY, 0.0);
    for method in [
        Method::Rwm,
        Method::Mala,
        Method::ModifiedMala,
        Method::Independence,
    ] {
        let t = matrix(method, 0.8, &v, &grid)?;
        let gap = gap_of(&t)?;
        for _ in 0..20 {
            let f: Vec<f64> = (0..t.size()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = dirichlet_upper_bound(&t, &f).map_err(|e| e.to_string())?;
            min_excess = min_excess.min(d - gap);
        }
        let (_, f2) = second_eigenvector(&t).map_err(|e| e.to_string())?;
        let d = dirichlet_upper_bound(&t, &f2).map_err(|e| e.to_string())?;
        worst_eig = worst_eig.max((d - gap).abs());
    }
    Ok((
        min_excess >= 0.0 && worst_eig <= 1e-8,
        format!("min(bound - gap) = {min_excess:.3e} over 80 observables, |bound - gap| at eigenvector {worst_eig:.1e}"),
    ))
}

fn c11_mala_quadratic() -> Outcome {
    let eps = 0.01;
    let v = PotentialSpec::quadratic(1.0 / eps, 1).map_err(|e| e.to_string())?;
    let (d_star, _) = optimal_delta();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut acc_star = f64::NAN;
    for (i, delta) in [0.5, d_star, 2.0].into_iter().enumerate() {
        let cfg = SamplerConfig::mala(sigma_from_delta(delta, eps), 1.0);
        let r = run_chain(
            &cfg,
            &v,
            &[0.0],
            10_000_000,
            100_000,
            derive_seed(seed(11), i as u64),
        )
        .map_err(|e| e.to_string())?;
        let m = m_delta(delta).map_err(|e| e.to_string())?;
        let z = (r.msd / eps - m) / (r.msd_stderr / eps);
        pass &= z.abs() <= 3.0;
        parts.push(format!(
            "d={delta:.3}: {:.4} vs {m:.4} ({z:+.1} se)",
            r.msd / eps
        ));
        if i == 1 {
            acc_star = r.accept_rate;
        }
    }
    pass &= within(acc_star, 0.70, 0.01);
    Ok((
        pass,
        format!("{}; acceptance at delta* {acc_star:.4}", parts.join(", ")),
    ))
}

fn mala_slope(
    n: usize,
    grid: SigmaGrid,
    steps: u64,
    seed: u64,
) -> Result<(f64, f64, bool), String> {
    let cfg = SweepConfig::new(
        vec![Method::Mala],
        PotentialSpec::rough_harmonic(0.1, 1).map_err(|e| e.to_string())?,
        BETA,
        vec![n],
        (5..=10).map(|k| 2f64.powi(-k)).collect(),
        grid,
        steps,
        seed,
    );
    let recs = run_sigma_sweep(&cfg).map_err(|e| e.to_string())?;
    let optima = optima_by_cell(&recs).map_err(|e| e.to_string())?;
    let endpoint = optima.iter().any(|o| o.endpoint);
    let fit = scaling_fit_records(&recs, Method::Mala, n).map_err(|e| e.to_string())?;
    Ok((fit.slope, fit.stderr, endpoint))
}

fn c12_scaling_slopes() -> Outcome {
    let (s1, e1, end1) = mala_slope(
        1,
        SigmaGrid::Centered {
            center: 3.0,
            alpha: 0.5,
            decades: 1.5,
        },
        1_000_000,
        derive_seed(seed(12), 1),
    )?;
    let (s50, e50, end50) = mala_slope(
        50,
        SigmaGrid::Centered {
            center: 2.5,
            alpha: 1.0,
            decades: 1.0,
        },
        200_000,
        derive_seed(seed(12), 50),
    )?;
    Ok((
        within(s1, 0.5, 0.1) && within(s50, 1.0, 0.15) && !end1 && !end50,
        format!(
            "n=1 slope {s1:.3} +- {e1:.3}, n=50 slope {s50:.3} +- {e50:.3}, endpoint optima: {}",
            end1 || end50
        ),
    ))
}

fn amplification(
    v: PotentialSpec,
    x0: StartPoint,
    grid: SigmaGrid,
    steps: u64,
    seed: u64,
) -> Result<Vec<roughsampler::experiments::AmplificationRow>, String> {
    let eps = v.epsilon().unwrap_or(1.0);
    let mut cfg = SweepConfig::new(
        vec![Method::Rwm, Method::ModifiedMala, Method::Independence],
        v,
        BETA,
        vec![10],
        vec![eps],
        grid,
        steps,
        seed,
    );
    cfg.x0 = x0;
    let recs = run_sigma_sweep(&cfg).map_err(|e| e.to_string())?;
    amplification_table(&recs).map_err(|e| e.to_string())
}

fn ratio(rows: &[roughsampler::experiments::AmplificationRow], m: Method) -> f64 {
    rows.iter()
        .find(|r| r.method == m)
        .map(|r| r.ratio)
        .unwrap_or(f64::NAN)
}

fn c13_harmonic_amplification() -> Outcome {
    let v = PotentialSpec::rough_harmonic(2f64.powi(-6), 10).map_err(|e| e.to_string())?;
    let grid = SigmaGrid::Centered {
        center: 1.0,
        alpha: 0.0,
        decades: 0.75,
    };
    let rows = amplification(v, StartPoint::Zero, grid, 10_000_000, seed(13))?;
    let (mm, ind) = (
        ratio(&rows, Method::ModifiedMala),
        ratio(&rows, Method::Independence),
    );
    let endpoint = rows.iter().any(|r| r.endpoint);
    Ok((
        within(mm, 6.74, 0.15 * 6.74) && within(ind, 10.17, 0.15 * 10.17) && !endpoint,
        format!("modified MALA {mm:.3} (6.74), independence {ind:.3} (10.17), endpoint optima: {endpoint}"),
    ))
}

fn c14_double_well_amplification() -> Outcome {
    let v = PotentialSpec::rough_double_well(2f64.powi(-6), 10).map_err(|e| e.to_string())?;
    let grid = SigmaGrid::Centered {
        center: 0.4,
        alpha: 0.0,
        decades: 1.0,
    };
    let rows = amplification(v, StartPoint::Value(-1.0), grid, 4_000_000, seed(14))?;
    let ind = ratio(&rows, Method::Independence);
    let rwm_endpoint = rows.iter().any(|r| r.method == Method::Rwm && r.endpoint);
    Ok((
        within(ind, 330.0, 0.2 * 330.0) && !rwm_endpoint,
        format!(
            "independence {ind:.1} (330), modified MALA {:.2}, rwm endpoint optimum: {rwm_endpoint}",
            ratio(&rows, Method::ModifiedMala)
        ),
    ))
}

fn c15_stagnation() -> Outcome {
    let v = PotentialSpec::rough_double_well(0.01, 1).map_err(|e| e.to_string())?;
    let steps = 100_000;
    let mut out = Vec::new();
    for (i, m) in [Method::Mala, Method::ModifiedMala, Method::Independence]
        .into_iter()
        .enumerate()
    {
        let cfg = sampler_for(m, 1.0, BETA, &v, None).map_err(|e| e.to_string())?;
        let r = run_chain(&cfg, &v, &[-1.0], steps, 0, derive_seed(seed(15), i as u64))
            .map_err(|e| e.to_string())?;
        out.push((m, r.accept_rate, r.msd));
    }
    let pass = out[0].1 < 0.01 && out[1..].iter().all(|&(_, a, msd)| a > 0.2 && msd > 0.0);
    let desc: Vec<String> = out
        .iter()
        .map(|(m, a, msd)| format!("{m} acc {a:.4} msd {msd:.3e}"))
        .collect();
    Ok((pass, desc.join(", ")))
}

fn c16_hoeffding_collapse() -> Outcome {
    let (n, eps) = (50, 2f64.powi(-9));
    let v = PotentialSpec::rough_double_well(eps, n).map_err(|e| e.to_string())?;
    let cfg =
        sampler_for(Method::Independence, f64::NAN, BETA, &v, None).map_err(|e| e.to_string())?;
    let kernel = Kernel::for_chain(&v, &cfg).map_err(|e| e.to_string())?;
    let x0 = kernel
        .init_state(&vec![-1.0; n])
        .map_err(|e| e.to_string())?;
    let mut rng = roughsampler::rng::chain_rng(seed(16));
    let mut scratch = Proposal::with_dim(n);
    let draws = 100_000;
    let mut prob = 0.0;
    for _ in 0..draws {
        let mut s = x0.clone();
        let rec = kernel.step_in_place(&mut s, &mut rng, &mut scratch);
        prob += AcceptanceRule::Metropolis.prob(rec.log_ratio);
    }
    let empirical = prob / draws as f64;
    let bound = hoeffding_acceptance_bound(n, -0.623, 1.25).map_err(|e| e.to_string())?;
    Ok((
        empirical < bound,
        format!("mean acceptance probability from x0 {empirical:.3e} < bound {bound:.4}"),
    ))
}

fn c17_local_entropy() -> Outcome {
    let (gamma, kappa) = (0.05, 1.0);
    let v = PotentialSpec::quadratic(kappa, 1).map_err(|e| e.to_string())?;
    let value = |x: f64| {
        kappa * x * x / (2.0 * (1.0 + gamma * kappa)) + (1.0 + gamma * kappa).ln() / (2.0 * BETA)
    };
    let grad = |x: f64| kappa * x / (1.0 + gamma * kappa);
    let mut rng = ChaCha8Rng::seed_from_u64(seed(17));
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for x in [-1.0, 0.3, 1.2] {
        let cfg = LocalEntropyConfig::new(gamma, BETA, 20_000);
        let ve = local_entropy_value(&v, &[x], &cfg, &mut rng).map_err(|e| e.to_string())?;
        let ge = local_entropy_gradient(&v, &[x], &cfg, &mut rng).map_err(|e| e.to_string())?;
        let zv = (ve.value - value(x)) / ve.stderr;
        let zg = (ge.gradient[0] - grad(x)) / ge.stderr[0];
        pass &= zv.abs() <= 3.0 && zg.abs() <= 3.0;
        worst = worst.max(zv.abs()).max(zg.abs());
    }
    // stderr scaling per doubling of N_s, mean over 50 replicas
    let mean_stderr = |samples: usize, rng: &mut ChaCha8Rng| -> Result<(f64, f64), String> {
        let cfg = LocalEntropyConfig::new(gamma, BETA, samples);
        let (mut sv, mut sg) = (0.0, 0.0);
        for _ in 0..50 {
            sv += local_entropy_value(&v, &[0.7], &cfg, rng)
                .map_err(|e| e.to_string())?
                .stderr;
            sg += local_entropy_gradient(&v, &[0.7], &cfg, rng)
                .map_err(|e| e.to_string())?
                .stderr[0];
        }
        Ok((sv / 50.0, sg / 50.0))
    };
    let mut ratios = Vec::new();
    let mut prev = mean_stderr(500, &mut rng)?;
    for samples in [1000, 2000] {
        let cur = mean_stderr(samples, &mut rng)?;
        ratios.push(prev.0 / cur.0);
        ratios.push(prev.1 / cur.1);
        prev = cur;
    }
    pass &= ratios.iter().all(|r| (1.25..=1.6).contains(r));
    let list: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Ok((
        pass,
        format!(
            "worst |z| {worst:.2}; stderr ratios per doubling {}",
            list.join(" ")
        ),
    ))
}

fn c18_stationarity() -> Outcome {
    let v = PotentialSpec::rough_double_well(2f64.powi(-4), 1).map_err(|e| e.to_string())?;
    let (lo, hi, bins) = (-2.0, 2.0, 80usize);
    let width = (hi - lo) / bins as f64;
    // bin masses by quadrature; the last entry collects the tails
    let density = |x: f64| (-BETA * v.energy(&[x])).exp();
    let total = QuadratureConfig::new(0.0, 4.0, 8192)
        .integrate(density)
        .map_err(|e| e.to_string())?;
    let mut exact: Vec<f64> = (0..bins)
        .map(|b| {
            QuadratureConfig::new(lo + (b as f64 + 0.5) * width, 0.5 * width, 256)
                .integrate(density)
                .map(|z| z / total)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    exact.push(1.0 - exact.iter().sum::<f64>());

    let samplers: Vec<(&str, SamplerConfig)> = vec![
        ("rwm", SamplerConfig::rwm(1.0, BETA)),
        (
            "rwm-barker",
            SamplerConfig::rwm(1.0, BETA).with_rule(AcceptanceRule::Barker),
        ),
        ("mala", SamplerConfig::mala(0.3, BETA)),
        ("tamed-mala", SamplerConfig::tamed_mala(0.5, BETA, 0.05)),
        (
            "modified-mala",
            SamplerConfig::modified_mala(0.8, BETA, v.smooth_part()),
        ),
        (
            "independence",
            sampler_for(Method::Independence, f64::NAN, BETA, &v, None)
                .map_err(|e| e.to_string())?,
        ),
    ];
    let steps = 10_000_000u64;
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, cfg)) in samplers.iter().enumerate() {
        let mut counts = vec![0u64; bins + 1];
        let opts = RunOptions::new(steps, steps / 10);
        let mut k = 0u64;
        run_chain_observed(
            cfg,
            &v,
            &[-1.0],
            &opts,
            derive_seed(seed(18), i as u64),
            |s, _| {
                k += 1;
                if k > opts.burn_in {
                    let b = ((s.x[0] - lo) / width).floor();
                    let idx = if b >= 0.0 && (b as usize) < bins {
                        b as usize
                    } else {
                        bins
                    };
                    counts[idx] += 1;
                }
            },
        )
        .map_err(|e| e.to_string())?;
        let kept = (steps - opts.burn_in) as f64;
        let tv = 0.5
            * counts
                .iter()
                .zip(&exact)
                .map(|(&c, &p)| (c as f64 / kept - p).abs())
                .sum::<f64>();
        pass &= tv < 0.02;
        parts.push(format!("{name} {tv:.4}"));
    }
    Ok((pass, format!("TV: {}", parts.join(", "))))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("optimal delta and m(delta*)", c01_optimal_delta),
        ("acceptance A1 at delta*", c02_acceptance_at_optimum),
        ("optimal limiting acceptance", c03_limiting_acceptance),
        ("first-order sigma root", c04_first_order_root),
        ("mean rough increment mu_r", c05_mu_r),
        ("density ratio bounds", c06_density_ratio),
        ("rank-one independence gap", c07_rank_one_gap),
        ("gap sandwich", c08_gap_sandwich),
        ("MALA gap decreases with eps", c09_mala_gap_decreases),
        ("Dirichlet upper bound", c10_dirichlet_bound),
        ("MALA on a stiff quadratic", c11_mala_quadratic),
        ("optimal sigma scaling slopes", c12_scaling_slopes),
        ("rough harmonic amplification", c13_harmonic_amplification),
        (
            "rough double well amplification",
            c14_double_well_amplification,
        ),
        ("MALA stagnation", c15_stagnation),
        ("independence collapse bound", c16_hoeffding_collapse),
        ("local entropy estimators", c17_local_entropy),
        ("stationarity of every sampler", c18_stationarity),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "[{}] {id:02} {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    println!(
        "acceptance: {}/{ran} passed in {:.1}s",
        ran - failed.len(),
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
