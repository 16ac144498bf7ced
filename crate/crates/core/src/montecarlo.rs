//! Seeded Monte Carlo estimates of expected pivot counts.
//!
//! Trial `i` draws from a ChaCha8 stream keyed by `(seed, i)`, so any
//! partition of the trials across workers produces the same samples. Sums
//! are accumulated as integers and merged exactly.

use std::fmt;
use std::ops::Range;
use std::thread;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::Rule;
use crate::facet::{run_random_facet, run_random_facet_star, Permutation, RunError};
use crate::graph::{EdgeId, EdgeSubset, Instance, TreePolicy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonteCarloError {
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error(transparent)]
    Run(#[from] RunError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(trials)`; 0 for one trial.
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mean={:.6} stderr={:.6} trials={} seed={}",
            self.mean, self.stderr, self.trials, self.seed
        )
    }
}

/// Integer moments of the pivot counts of a block of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialSums {
    pub trials: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl TrialSums {
    pub fn merge(self, other: TrialSums) -> TrialSums {
        TrialSums {
            trials: self.trials + other.trials,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    pub fn estimate(&self, seed: u64) -> Estimate {
        let n = self.trials as f64;
        let mean = self.sum as f64 / n;
        let stderr = if self.trials > 1 {
            // n * Σx² − (Σx)² is exact in integers
            let spread = self.trials as u128 * self.sum_sq - self.sum * self.sum;
            let variance = spread as f64 / (n * (n - 1.0));
            (variance / n).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr,
            trials: self.trials,
            seed,
        }
    }
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs trials `range` and returns their integer sums.
pub fn run_trials(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    rule: Rule,
    seed: u64,
    range: Range<u64>,
) -> Result<TrialSums, MonteCarloError> {
    let all_edges: Vec<EdgeId> = (0..inst.m()).map(EdgeId).collect();
    let mut sums = TrialSums::default();
    for trial in range {
        let mut rng = trial_rng(seed, trial);
        let pivots = match rule {
            Rule::Rf => run_random_facet(inst, facets, start, &mut rng)?.pivot_count,
            Rule::RfStar => {
                let mut order = all_edges.clone();
                order.shuffle(&mut rng);
                run_random_facet_star(inst, facets, start, &Permutation::from_order(&order))?.pivot_count
            }
        } as u128;
        sums.trials += 1;
        sums.sum += pivots;
        sums.sum_sq += pivots * pivots;
    }
    Ok(sums)
}

pub fn estimate_expected_pivots(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    rule: Rule,
    trials: u64,
    seed: u64,
) -> Result<Estimate, MonteCarloError> {
    if trials == 0 {
        return Err(MonteCarloError::ZeroTrials);
    }
    Ok(run_trials(inst, facets, start, rule, seed, 0..trials)?.estimate(seed))
}

/// Same result as [`estimate_expected_pivots`], with the trials split into
/// `workers` contiguous blocks.
pub fn estimate_expected_pivots_parallel(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    rule: Rule,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Estimate, MonteCarloError> {
    if trials == 0 {
        return Err(MonteCarloError::ZeroTrials);
    }
    let workers = workers.max(1) as u64;
    let block = trials.div_ceil(workers);
    let parts: Vec<Result<TrialSums, MonteCarloError>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * block).min(trials)..((w + 1) * block).min(trials);
                s.spawn(move || run_trials(inst, facets, start, rule, seed, range))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut total = TrialSums::default();
    for p in parts {
        total = total.merge(p?);
    }
    Ok(total.estimate(seed))
}
