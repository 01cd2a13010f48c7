use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_schema, potential_or_draw};
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::rng::{chain_rng, derive_seed};
use crate::smoothing::{local_entropy_gradient, local_entropy_value, LocalEntropyConfig};

pub const SMOOTH_CSV_HEADER: [&str; 7] = [
    "x",
    "v_gamma",
    "grad_v_gamma",
    "v_stderr",
    "grad_stderr",
    "inner_acceptance",
    "v",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Local-entropy estimates along a one-dimensional grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothConfig {
    pub schema_version: u32,
    #[serde(deserialize_with = "potential_or_draw")]
    pub potential: PotentialSpec,
    pub gamma: f64,
    pub beta: f64,
    pub samples: usize,
    #[serde(default = "unit")]
    pub dt: f64,
    #[serde(default = "four")]
    pub inner_steps: usize,
    pub grid: SmoothGrid,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn unit() -> f64 {
    1.0
}

fn four() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothRecord {
    pub x: f64,
    pub value: f64,
    pub gradient: f64,
    pub value_stderr: f64,
    pub gradient_stderr: f64,
    pub acceptance: f64,
    /// The unsmoothed landscape at `x`.
    pub energy: f64,
}

impl SmoothConfig {
    pub fn local_entropy(&self) -> LocalEntropyConfig {
        LocalEntropyConfig {
            dt: self.dt,
            inner_steps: self.inner_steps,
            ..LocalEntropyConfig::new(self.gamma, self.beta, self.samples)
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.potential.dim() != 1 {
            return Err(Error::Config(
                "smoothing grids need a one-dimensional potential".into(),
            ));
        }
        if self.grid.points < 2 || !(self.grid.max > self.grid.min) {
            return Err(Error::Config("grid needs min < max and >= 2 points".into()));
        }
        self.local_entropy().validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Value and gradient estimates at every grid point, each from its own
/// derived random stream.
pub fn run_smoothing(cfg: &SmoothConfig) -> Result<Vec<SmoothRecord>> {
    cfg.validate()?;
    let le = cfg.local_entropy();
    let g = &cfg.grid;
    let h = (g.max - g.min) / (g.points - 1) as f64;
    (0..g.points)
        .into_par_iter()
        .map(|i| {
            let x = [g.min + h * i as f64];
            let mut rng = chain_rng(derive_seed(cfg.seed, i as u64));
            let v = local_entropy_value(&cfg.potential, &x, &le, &mut rng)?;
            let d = local_entropy_gradient(&cfg.potential, &x, &le, &mut rng)?;
            Ok(SmoothRecord {
                x: x[0],
                value: v.value,
                gradient: d.gradient[0],
                value_stderr: v.stderr,
                gradient_stderr: d.stderr[0],
                acceptance: d.acceptance,
                energy: cfg.potential.energy(&x),
            })
        })
        .collect()
}

pub fn write_smooth_csv<W: Write>(records: &[SmoothRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SMOOTH_CSV_HEADER)?;
    for r in records {
        out.write_record([
            r.x.to_string(),
            r.value.to_string(),
            r.gradient.to_string(),
            r.value_stderr.to_string(),
            r.gradient_stderr.to_string(),
            r.acceptance.to_string(),
            r.energy.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
