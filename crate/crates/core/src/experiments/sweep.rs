use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::nullable;
use super::SweepConfig;
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::rng::derive_seed;
use crate::samplers::{run_chain, Method, SamplerConfig};
use crate::smoothing::ProductInverseCdf;

/// One cell of a sweep: a chain (or a merged set of replica chains) at one
/// `(method, n, eps, sigma)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub method: Method,
    pub n: usize,
    pub epsilon: f64,
    /// NaN for the independence sampler.
    #[serde(with = "nullable")]
    pub sigma: f64,
    #[serde(with = "nullable")]
    pub msd: f64,
    #[serde(with = "nullable")]
    pub msd_stderr: f64,
    #[serde(with = "nullable")]
    pub accept_rate: f64,
    pub nonfinite: u64,
    pub seed: u64,
    pub walltime_s: f64,
    #[serde(default = "one")]
    pub replicas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn one() -> usize {
    1
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.msd.is_finite()
    }

    fn same_cell(&self, other: &SweepRecord) -> bool {
        self.method == other.method
            && self.n == other.n
            && self.epsilon.to_bits() == other.epsilon.to_bits()
            && self.sigma.to_bits() == other.sigma.to_bits()
    }
}

/// Builds the sampler a sweep uses for `method` on `spec`: modified MALA and
/// independence sampling take the smooth part of the landscape as auxiliary
/// potential.
pub fn sampler_for(
    method: Method,
    sigma: f64,
    beta: f64,
    spec: &PotentialSpec,
    tame_delta: Option<f64>,
) -> Result<SamplerConfig> {
    Ok(match method {
        Method::Rwm | Method::Mala => SamplerConfig::new(method, sigma, beta),
        Method::TamedMala => {
            let d =
                tame_delta.ok_or_else(|| Error::Config("tamed-mala needs tame_delta".into()))?;
            SamplerConfig::tamed_mala(sigma, beta, d)
        }
        Method::ModifiedMala => SamplerConfig::modified_mala(sigma, beta, spec.smooth_part()),
        Method::Independence => {
            let aux = ProductInverseCdf::for_smooth_part(spec, beta)?.into_aux();
            SamplerConfig::independence(beta, spec.smooth_part(), Some(aux))
        }
    })
}

struct Cell {
    method: Method,
    n: usize,
    epsilon: f64,
    sigma: f64,
    seed: u64,
}

fn cells(cfg: &SweepConfig) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for &n in &cfg.dims {
            for &epsilon in &cfg.epsilons {
                let sigmas = if method.uses_sigma() {
                    cfg.sigma.values(epsilon)?
                } else {
                    vec![f64::NAN]
                };
                for sigma in sigmas {
                    for _ in 0..cfg.replicas {
                        let seed = derive_seed(cfg.master_seed, out.len() as u64);
                        out.push(Cell {
                            method,
                            n,
                            epsilon,
                            sigma,
                            seed,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn run_cell(cfg: &SweepConfig, cell: &Cell) -> SweepRecord {
    let start = Instant::now();
    let outcome = cfg.cell_potential(cell.n, cell.epsilon).and_then(|spec| {
        let sampler = sampler_for(cell.method, cell.sigma, cfg.beta, &spec, cfg.tame_delta)?
            .with_rule(cfg.rule);
        let x0 = cfg.x0.resolve(&spec);
        run_chain(&sampler, &spec, &x0, cfg.steps, cfg.burn_in, cell.seed)
    });
    let walltime_s = if cfg.record_walltime {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    let mut rec = SweepRecord {
        method: cell.method,
        n: cell.n,
        epsilon: cell.epsilon,
        sigma: cell.sigma,
        msd: f64::NAN,
        msd_stderr: f64::NAN,
        accept_rate: f64::NAN,
        nonfinite: 0,
        seed: cell.seed,
        walltime_s,
        replicas: 1,
        error: None,
    };
    match outcome {
        Ok(r) => {
            rec.msd = r.msd;
            rec.msd_stderr = r.msd_stderr;
            rec.accept_rate = r.accept_rate;
            rec.nonfinite = r.nonfinite;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Runs every `(method, n, eps, sigma, replica)` cell in parallel. Cell
/// seeds depend only on the master seed and the cell's position, so the
/// output does not depend on scheduling. A failing chain is recorded in its
/// cell and does not stop the sweep.
pub fn run_sigma_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let cells = cells(cfg)?;
    let records: Vec<SweepRecord> = cells.par_iter().map(|c| run_cell(cfg, c)).collect();
    Ok(if cfg.merge_replicas {
        merge_replicas(&records)
    } else {
        records
    })
}

/// Averages adjacent records of the same cell; standard errors are pooled
/// as `sqrt(sum se^2) / R`. Failed replicas are dropped unless all fail.
pub fn merge_replicas(records: &[SweepRecord]) -> Vec<SweepRecord> {
    let mut out: Vec<SweepRecord> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let mut j = i + 1;
        while j < records.len() && records[j].same_cell(&records[i]) {
            j += 1;
        }
        out.push(merge_group(&records[i..j]));
        i = j;
    }
    out
}

fn merge_group(group: &[SweepRecord]) -> SweepRecord {
    if group.len() == 1 {
        return group[0].clone();
    }
    let ok: Vec<&SweepRecord> = group.iter().filter(|r| r.is_ok()).collect();
    let mut rec = group[0].clone();
    rec.walltime_s = group.iter().map(|r| r.walltime_s).sum();
    rec.nonfinite = group.iter().map(|r| r.nonfinite).sum();
    if ok.is_empty() {
        rec.replicas = group.len();
        return rec;
    }
    let r = ok.len() as f64;
    rec.msd = ok.iter().map(|x| x.msd).sum::<f64>() / r;
    rec.msd_stderr = ok
        .iter()
        .map(|x| x.msd_stderr * x.msd_stderr)
        .sum::<f64>()
        .sqrt()
        / r;
    rec.accept_rate = ok.iter().map(|x| x.accept_rate).sum::<f64>() / r;
    rec.replicas = ok.len();
    rec.error = None;
    rec
}
