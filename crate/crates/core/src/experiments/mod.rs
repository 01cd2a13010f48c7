//! Step-size sweeps and everything that turns chain runs into tables.
//!
//! A [`SweepConfig`] names methods, a landscape, dimensions, roughness scales
//! and a step-size grid. [`run_sigma_sweep`] runs one chain per cell on the
//! rayon pool, [`optimal_sigma`] and [`scaling_fit`] reduce the records, and
//! [`amplification_table`] compares every method against the RWM optimum.
//! Config files are TOML (or the JSON summary written by a previous sweep)
//! and carry a `schema_version`.

mod gap;
mod io;
mod smooth;
mod sweep;
mod tables;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{PotentialSpec, RandomMultiscalePotential};
use crate::samplers::{AcceptanceRule, Method};

pub use gap::{run_gap_study, write_gap_csv, GapConfig, GapRecord, GAP_CSV_HEADER};
pub use io::{
    emit_amplification_csv, emit_csv, emit_json, read_records_csv, render_amplification,
    write_records_csv, SweepSummary, CSV_HEADER,
};
pub use smooth::{
    run_smoothing, write_smooth_csv, SmoothConfig, SmoothGrid, SmoothRecord, SMOOTH_CSV_HEADER,
};
pub use sweep::{merge_replicas, run_sigma_sweep, sampler_for, SweepRecord};
pub use tables::{
    amplification_table, optima_by_cell, optimal_sigma, scaling_fit, scaling_fit_records,
    AmplificationRow, OptimalSigma, ScalingFit,
};

/// Version written to and required from every config file.
pub const SCHEMA_VERSION: u32 = 1;

/// Grid points per decade of the auto-centered step grids.
pub const POINTS_PER_DECADE: usize = 16;

/// Step-size grid of a sweep. Grids that depend on the roughness scale are
/// resolved per epsilon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SigmaGrid {
    List {
        values: Vec<f64>,
    },
    /// `count` log-spaced values from `min` to `max` inclusive.
    LogSpaced {
        min: f64,
        max: f64,
        count: usize,
    },
    /// `sigma = c * eps^alpha` for every `c`.
    EpsScaled {
        alpha: f64,
        c: Vec<f64>,
    },
    /// Log grid with [`POINTS_PER_DECADE`] points per decade spanning
    /// `decades` around `center * eps^alpha`.
    Centered {
        center: f64,
        alpha: f64,
        decades: f64,
    },
}

impl SigmaGrid {
    pub fn values(&self, epsilon: f64) -> Result<Vec<f64>> {
        let v = match self {
            SigmaGrid::List { values } => values.clone(),
            SigmaGrid::LogSpaced { min, max, count } => {
                if *count < 2 || !(*min > 0.0 && max > min) {
                    return Err(Error::Config(
                        "log-spaced grid needs 0 < min < max and count >= 2".into(),
                    ));
                }
                let (a, b) = (min.ln(), max.ln());
                (0..*count)
                    .map(|k| (a + (b - a) * k as f64 / (*count - 1) as f64).exp())
                    .collect()
            }
            SigmaGrid::EpsScaled { alpha, c } => {
                c.iter().map(|c| c * epsilon.powf(*alpha)).collect()
            }
            SigmaGrid::Centered {
                center,
                alpha,
                decades,
            } => {
                let mid = center * epsilon.powf(*alpha);
                let half = (0.5 * decades * POINTS_PER_DECADE as f64).round() as i64;
                (-half..=half)
                    .map(|k| mid * 10f64.powf(k as f64 / POINTS_PER_DECADE as f64))
                    .collect()
            }
        };
        if v.is_empty() {
            return Err(Error::Config("empty sigma grid".into()));
        }
        if v.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config("sigma grid must be strictly positive".into()));
        }
        Ok(v)
    }
}

/// Starting point of every chain, replicated over coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartPoint {
    /// Leftmost minimum of the smooth part (0 for harmonic, -1 for the
    /// double well).
    #[default]
    Minimum,
    Zero,
    Value(f64),
}

impl StartPoint {
    pub fn resolve(self, spec: &PotentialSpec) -> Vec<f64> {
        let x = match self {
            StartPoint::Minimum => spec.smooth_minima().first().copied().unwrap_or(0.0),
            StartPoint::Zero => 0.0,
            StartPoint::Value(v) => v,
        };
        vec![x; spec.dim()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub methods: Vec<Method>,
    /// Landscape template; its dimension and epsilon are replaced per cell.
    /// For kinds without an epsilon the epsilon list only enters the grid.
    #[serde(deserialize_with = "potential_or_draw")]
    pub potential: PotentialSpec,
    pub beta: f64,
    pub dims: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub sigma: SigmaGrid,
    pub steps: u64,
    pub burn_in: u64,
    #[serde(default = "one")]
    pub replicas: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub x0: StartPoint,
    #[serde(default)]
    pub rule: AcceptanceRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tame_delta: Option<f64>,
    /// Average replicas into one record per grid point.
    #[serde(default = "yes")]
    pub merge_replicas: bool,
    /// Write measured wall times; off by default so that reruns give
    /// byte-identical files.
    #[serde(default)]
    pub record_walltime: bool,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplification: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PotentialInput {
    Spec(PotentialSpec),
    Draw {
        kind: String,
        modes: usize,
        seed: u64,
    },
}

/// Accepts either a full landscape or `{ kind = "random-multiscale", modes,
/// seed }`, which is drawn on load.
pub(crate) fn potential_or_draw<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<PotentialSpec, D::Error> {
    use serde::de::Error as _;
    match PotentialInput::deserialize(d)? {
        PotentialInput::Spec(s) => Ok(s),
        PotentialInput::Draw { kind, modes, seed } if kind == "random-multiscale" => {
            RandomMultiscalePotential::draw(modes, seed)
                .map(PotentialSpec::RandomMultiscale)
                .map_err(D::Error::custom)
        }
        PotentialInput::Draw { kind, .. } => Err(D::Error::custom(format!(
            "cannot draw a potential of kind {kind}"
        ))),
    }
}

impl SweepConfig {
    /// A single-cell-per-sigma config with defaults for everything optional.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        methods: Vec<Method>,
        potential: PotentialSpec,
        beta: f64,
        dims: Vec<usize>,
        epsilons: Vec<f64>,
        sigma: SigmaGrid,
        steps: u64,
        master_seed: u64,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            methods,
            potential,
            beta,
            dims,
            epsilons,
            sigma,
            steps,
            burn_in: steps / 10,
            replicas: 1,
            master_seed,
            x0: StartPoint::Minimum,
            rule: AcceptanceRule::Metropolis,
            tame_delta: None,
            merge_replicas: true,
            record_walltime: false,
            output: OutputPaths::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.methods.is_empty() || self.dims.is_empty() || self.epsilons.is_empty() {
            return Err(Error::Config(
                "methods, dims and epsilons must be non-empty".into(),
            ));
        }
        if self.steps <= self.burn_in {
            return Err(Error::Config(format!(
                "steps ({}) must exceed burn_in ({})",
                self.steps, self.burn_in
            )));
        }
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be >= 1".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config("beta must be positive".into()));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Config("epsilons must be positive".into()));
        }
        if self.dims.contains(&0) {
            return Err(Error::Config("dimensions must be >= 1".into()));
        }
        if self.methods.contains(&Method::TamedMala) && self.tame_delta.is_none() {
            return Err(Error::Config("tamed-mala needs tame_delta".into()));
        }
        for &e in &self.epsilons {
            self.sigma.values(e)?;
        }
        for &n in &self.dims {
            self.cell_potential(n, self.epsilons[0])?;
        }
        Ok(())
    }

    /// The landscape of one cell.
    pub fn cell_potential(&self, n: usize, epsilon: f64) -> Result<PotentialSpec> {
        let spec = self.potential.with_dim(n)?;
        match spec.epsilon() {
            Some(_) => spec.with_epsilon(epsilon),
            None => Ok(spec),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config, or the config embedded in (or stored as) JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let value = match value.get("config") {
                Some(c) => c.clone(),
                None => value,
            };
            let cfg: Self = serde_json::from_value(value)?;
            cfg.validate()?;
            Ok(cfg)
        } else {
            Self::from_toml_str(&text)
        }
    }
}

pub(crate) fn check_schema(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}
