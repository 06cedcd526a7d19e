//! Seeded ensembles of noisy and/or percolated coined walks.
//!
//! Run `i` of an ensemble with master seed `s` uses `s_i = derive_seed(s, i)`
//! as its trajectory seed; when the substrate is percolated, run `i` draws
//! its own substrate from `derive_seed(s_i, PERCOLATION_STREAM)`. Runs are
//! therefore independent of execution order, and callers may evaluate them
//! concurrently with [`EnsembleJob::run_single`] before handing the ordered
//! outcomes to [`summarize`].

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math shadows this whenever std is linked
use num_traits::Float;

use crate::analysis::{ipr, moments, Distribution, PositionLaw};
use crate::coined::{CoinOperator, Propagator, WalkState};
use crate::decoherence::{run_trajectory, NoiseModel};
use crate::error::{Result, WalkError};
use crate::seed::{derive_seed, PERCOLATION_STREAM};
use crate::substrate::{percolate, PercolationMode, PercolationSpec, Substrate};

/// Everything needed to evaluate one ensemble.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleJob<'a> {
    pub base: &'a Substrate,
    /// Per-run percolation of `base` (mode, retention probability).
    pub percolation: Option<(PercolationMode, f64)>,
    pub coin: &'a CoinOperator,
    pub initial: &'a WalkState,
    pub noise: NoiseModel,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub runs: usize,
    /// Mean position law over runs.
    pub distribution: Distribution,
    /// Per-vertex standard error of `distribution`.
    pub standard_error: Vec<f64>,
    /// Standard deviation of `distribution` (line labels only).
    pub sigma: Option<f64>,
    /// Delta-method standard error of `sigma`; needs two or more runs.
    pub sigma_stderr: Option<f64>,
    /// Mean over runs of each run's own standard deviation (line labels only).
    pub mean_run_sigma: Option<f64>,
    /// Mean over runs of each run's inverse participation ratio.
    pub mean_ipr: f64,
}

impl EnsembleJob<'_> {
    fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(WalkError::InvalidParameter("ensemble needs at least one run".into()));
        }
        if let Some((_, p)) = self.percolation {
            PercolationSpec::new(PercolationMode::Bond, p, 0)?;
        }
        Propagator::new(self.coin, self.base)?.check(self.initial)
    }

    /// Substrate used by run `index`.
    pub fn substrate_for(&self, index: usize) -> Substrate {
        match self.percolation {
            None => self.base.clone(),
            Some((mode, p)) => run_substrate(self.base, mode, p, self.seed, index),
        }
    }

    /// Final position law of run `index`.
    pub fn run_single(&self, index: usize) -> Result<Distribution> {
        let run_seed = derive_seed(self.seed, index as u64);
        let prop = match self.percolation {
            None => Propagator::new(self.coin, self.base)?,
            Some(_) => Propagator::new(self.coin, &self.substrate_for(index))?,
        };
        prop.check(self.initial)?;
        Ok(run_trajectory(&prop, self.initial, &self.noise, self.steps, run_seed).position_distribution())
    }

    /// Sequential evaluation of every run.
    pub fn run(&self) -> Result<EnsembleSummary> {
        self.validate()?;
        let outcomes = (0..self.runs)
            .map(|i| self.run_single(i))
            .collect::<Result<Vec<_>>>()?;
        summarize(&outcomes)
    }
}

/// Percolation of `base` drawn by run `index` of an ensemble seeded with `seed`.
pub fn run_substrate(base: &Substrate, mode: PercolationMode, p: f64, seed: u64, index: usize) -> Substrate {
    let run_seed = derive_seed(seed, index as u64);
    let spec = PercolationSpec {
        mode,
        p,
        seed: derive_seed(run_seed, PERCOLATION_STREAM),
    };
    percolate(base, &spec)
}

/// Aggregates per-run distributions, summing in the given order.
pub fn summarize(outcomes: &[Distribution]) -> Result<EnsembleSummary> {
    let first = outcomes
        .first()
        .ok_or_else(|| WalkError::InvalidParameter("ensemble needs at least one run".into()))?;
    let labels = first.labels().clone();
    let len = first.len();
    let runs = outcomes.len();
    let r = runs as f64;

    // accumulate deviations from the first run so identical runs average exactly
    let mut shift = vec![0.0; len];
    for d in outcomes {
        if d.labels() != &labels {
            return Err(WalkError::Incompatible("runs disagree on vertex labels".into()));
        }
        for ((s, p), p0) in shift.iter_mut().zip(d.probabilities()).zip(first.probabilities()) {
            *s += p - p0;
        }
    }
    let mean: Vec<f64> = first
        .probabilities()
        .iter()
        .zip(&shift)
        .map(|(p0, s)| (p0 + s / r).max(0.0))
        .collect();

    let mut standard_error = vec![0.0; len];
    if runs > 1 {
        for d in outcomes {
            for ((s, p), m) in standard_error.iter_mut().zip(d.probabilities()).zip(&mean) {
                *s += (p - m) * (p - m);
            }
        }
        standard_error
            .iter_mut()
            .for_each(|s| *s = (*s / (r - 1.0) / r).sqrt());
    }

    let mean_ipr = outcomes.iter().map(ipr).sum::<f64>() / r;
    let distribution = Distribution::new(mean, labels)?;

    let (sigma, sigma_stderr, mean_run_sigma) = match moments(&distribution) {
        Err(_) => (None, None, None),
        Ok(m) => {
            let per_run: Vec<(f64, f64, f64)> = outcomes
                .iter()
                .map(|d| {
                    let rm = moments(d).expect("line labels");
                    let m1 = rm.mean;
                    (m1, rm.variance + m1 * m1, rm.sigma)
                })
                .collect();
            let mean_run_sigma = per_run.iter().map(|t| t.2).sum::<f64>() / r;
            // σ² = E[x²] - E[x]²; linearise in the per-run first and second moments
            let stderr = if runs > 1 && m.sigma > 0.0 {
                let g: Vec<f64> = per_run
                    .iter()
                    .map(|(m1, m2, _)| (m2 - 2.0 * m.mean * m1) / (2.0 * m.sigma))
                    .collect();
                let gm = g.iter().sum::<f64>() / r;
                let var = g.iter().map(|x| (x - gm) * (x - gm)).sum::<f64>() / (r - 1.0);
                Some((var / r).sqrt())
            } else {
                None
            };
            (Some(m.sigma), stderr, Some(mean_run_sigma))
        }
    };

    Ok(EnsembleSummary {
        runs,
        distribution,
        standard_error,
        sigma,
        sigma_stderr,
        mean_run_sigma,
        mean_ipr,
    })
}
