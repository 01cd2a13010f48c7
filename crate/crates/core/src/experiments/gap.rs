use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::nullable;
use super::sweep::sampler_for;
use super::{check_schema, potential_or_draw, SigmaGrid};
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::samplers::Method;
use crate::spectral::{conductance_bound, discretize_kernel, outside_set, spectral_gap, Grid1D};

pub const GAP_CSV_HEADER: [&str; 7] = [
    "method",
    "epsilon",
    "sigma",
    "G",
    "gap",
    "lambda2",
    "conductance_bound",
];

/// Spectral gaps of discretized one-dimensional kernels over a grid of
/// roughness scales and step sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub schema_version: u32,
    pub methods: Vec<Method>,
    #[serde(deserialize_with = "potential_or_draw")]
    pub potential: PotentialSpec,
    pub beta: f64,
    pub epsilons: Vec<f64>,
    pub sigma: SigmaGrid,
    /// Minimum grid size; doubled until the roughness is resolved.
    pub grid_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tame_delta: Option<f64>,
    /// The conductance set is `{|x| > radius}`.
    #[serde(default = "unit")]
    pub conductance_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub method: Method,
    pub epsilon: f64,
    #[serde(with = "nullable")]
    pub sigma: f64,
    pub grid_points: usize,
    #[serde(with = "nullable")]
    pub gap: f64,
    #[serde(with = "nullable")]
    pub lambda2: f64,
    #[serde(with = "nullable")]
    pub conductance_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl GapConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.methods.is_empty() || self.epsilons.is_empty() {
            return Err(Error::Config(
                "methods and epsilons must be non-empty".into(),
            ));
        }
        if self.potential.dim() != 1 {
            return Err(Error::Config(
                "gap studies need a one-dimensional potential".into(),
            ));
        }
        for &e in &self.epsilons {
            self.sigma.values(e)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn cell_potential(&self, epsilon: f64) -> Result<PotentialSpec> {
        match self.potential.epsilon() {
            Some(_) => self.potential.with_epsilon(epsilon),
            None => Ok(self.potential.clone()),
        }
    }
}

fn gap_cell(
    cfg: &GapConfig,
    method: Method,
    epsilon: f64,
    sigma: f64,
) -> Result<(usize, f64, f64, f64)> {
    let spec = cfg.cell_potential(epsilon)?;
    let grid = Grid1D::resolving(&spec, cfg.beta, cfg.grid_points)?;
    let sampler = sampler_for(method, sigma, cfg.beta, &spec, cfg.tame_delta)?;
    let t = discretize_kernel(&sampler, &spec, &grid)?;
    let g = spectral_gap(&t)?;
    let set = outside_set(&grid, cfg.conductance_radius);
    let c = conductance_bound(&t, &set).unwrap_or(f64::NAN);
    Ok((grid.points, g.gap, g.lambda2, c))
}

/// One record per `(method, eps, sigma)`; the independence sampler gets a
/// single record per eps. Failures are recorded per cell.
pub fn run_gap_study(cfg: &GapConfig) -> Result<Vec<GapRecord>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for &epsilon in &cfg.epsilons {
            let sigmas = if method.uses_sigma() {
                cfg.sigma.values(epsilon)?
            } else {
                vec![f64::NAN]
            };
            for sigma in sigmas {
                let mut rec = GapRecord {
                    method,
                    epsilon,
                    sigma,
                    grid_points: 0,
                    gap: f64::NAN,
                    lambda2: f64::NAN,
                    conductance_bound: f64::NAN,
                    error: None,
                };
                match gap_cell(cfg, method, epsilon, sigma) {
                    Ok((g, gap, l2, c)) => {
                        rec.grid_points = g;
                        rec.gap = gap;
                        rec.lambda2 = l2;
                        rec.conductance_bound = c;
                    }
                    Err(e) => rec.error = Some(e.to_string()),
                }
                out.push(rec);
            }
        }
    }
    Ok(out)
}

pub fn write_gap_csv<W: Write>(records: &[GapRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(GAP_CSV_HEADER)?;
    for r in records {
        out.write_record([
            r.method.name().to_string(),
            r.epsilon.to_string(),
            r.sigma.to_string(),
            r.grid_points.to_string(),
            r.gap.to_string(),
            r.lambda2.to_string(),
            r.conductance_bound.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
