use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, Proposal};
use super::{ChainState, SamplerConfig, StepRecord};
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::rng::{chain_rng, ChainRng};
use crate::stats::{BatchMeans, DEFAULT_BATCHES};

/// Steps between cache re-validations in debug builds.
const CACHE_CHECK_EVERY: u64 = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub steps: u64,
    pub burn_in: u64,
    /// Keep every `thin`-th post-burn-in position; 0 keeps none.
    pub thin: u64,
    pub batches: usize,
}

impl RunOptions {
    pub fn new(steps: u64, burn_in: u64) -> Self {
        Self {
            steps,
            burn_in,
            thin: 0,
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn with_thin(mut self, thin: u64) -> Self {
        self.thin = thin;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.steps <= self.burn_in {
            return Err(Error::InvalidParameter(format!(
                "steps ({}) must exceed burn_in ({})",
                self.steps, self.burn_in
            )));
        }
        Ok(())
    }
}

/// Summary of one chain run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub steps: u64,
    pub burn_in: u64,
    /// Mean squared jump over post-burn-in steps.
    pub msd: f64,
    /// Batch-means standard error of `msd`.
    pub msd_stderr: f64,
    /// Mean squared jump over all steps.
    pub msd_full: f64,
    pub accept_rate: f64,
    pub accept_rate_full: f64,
    pub accepted: u64,
    pub nonfinite: u64,
    pub final_x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<Vec<f64>>,
}

/// A running chain: kernel, state, its own random stream and scratch space.
#[derive(Clone, Debug)]
pub struct Chain {
    kernel: Kernel,
    state: ChainState,
    rng: ChainRng,
    scratch: Proposal,
}

impl Chain {
    pub fn new(
        potential: &PotentialSpec,
        cfg: &SamplerConfig,
        x0: &[f64],
        seed: u64,
    ) -> Result<Self> {
        let kernel = Kernel::for_chain(potential, cfg)?;
        let state = kernel.init_state(x0)?;
        let scratch = Proposal::with_dim(kernel.dim());
        Ok(Self {
            kernel,
            state,
            rng: chain_rng(seed),
            scratch,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    #[inline]
    pub fn step(&mut self) -> StepRecord {
        let rec = self
            .kernel
            .step_in_place(&mut self.state, &mut self.rng, &mut self.scratch);
        if cfg!(debug_assertions) && self.state.step.is_multiple_of(CACHE_CHECK_EVERY) {
            assert!(self.kernel.check_cache(&self.state), "stale chain cache");
        }
        rec
    }

    /// Runs `opts.steps` transitions, calling `observer` after each one.
    pub fn run<F>(&mut self, opts: &RunOptions, mut observer: F) -> Result<ChainReport>
    where
        F: FnMut(&ChainState, &StepRecord),
    {
        opts.validate()?;
        let kept = opts.steps - opts.burn_in;
        let mut bm = BatchMeans::new(kept, opts.batches);
        let (mut total_sd, mut acc_all, mut acc_post, mut nonfinite) = (0.0, 0u64, 0u64, 0u64);
        let mut trace = Vec::new();
        for k in 0..opts.steps {
            let rec = self.step();
            total_sd += rec.sq_disp;
            acc_all += rec.accepted as u64;
            nonfinite += rec.nonfinite as u64;
            if k >= opts.burn_in {
                bm.push(rec.sq_disp);
                acc_post += rec.accepted as u64;
                if opts.thin > 0 && (k - opts.burn_in).is_multiple_of(opts.thin) {
                    trace.push(self.state.x.clone());
                }
            }
            observer(&self.state, &rec);
        }
        Ok(ChainReport {
            steps: opts.steps,
            burn_in: opts.burn_in,
            msd: bm.mean(),
            msd_stderr: bm.stderr(),
            msd_full: total_sd / opts.steps as f64,
            accept_rate: acc_post as f64 / kept as f64,
            accept_rate_full: acc_all as f64 / opts.steps as f64,
            accepted: acc_all,
            nonfinite,
            final_x: self.state.x.clone(),
            trace,
        })
    }
}

/// Runs a chain from `x0` with default batching and no trace.
pub fn run_chain(
    cfg: &SamplerConfig,
    potential: &PotentialSpec,
    x0: &[f64],
    steps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<ChainReport> {
    run_chain_observed(
        cfg,
        potential,
        x0,
        &RunOptions::new(steps, burn_in),
        seed,
        |_, _| {},
    )
}

/// Runs a chain, streaming every state and step record to `observer`.
pub fn run_chain_observed<F>(
    cfg: &SamplerConfig,
    potential: &PotentialSpec,
    x0: &[f64],
    opts: &RunOptions,
    seed: u64,
    observer: F,
) -> Result<ChainReport>
where
    F: FnMut(&ChainState, &StepRecord),
{
    Chain::new(potential, cfg, x0, seed)?.run(opts, observer)
}
