//! Seeded Monte Carlo evaluation of the greedy policy.

use rayon::prelude::*;
use serde::Serialize;

use crate::greedy::{Greedy, GreedyError};
use crate::instance::{is_perfect_coverage, sample_realization, Instance, ItemId};
use crate::rational::Rational;
use crate::reduction::reduce_instance;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub n_trials: usize,
    pub mean_cost: f64,
    pub sample_stddev: f64,
    pub ci95_halfwidth: f64,
    pub min_cost: f64,
    pub max_cost: f64,
    pub master_seed: u64,
    pub reduced: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub cost: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRun {
    pub stats: TrialStats,
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("trial {trial}: {source}")]
    Greedy { trial: usize, source: GreedyError },
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `t`: SplitMix64 applied to the master seed mixed with the
/// SplitMix64 image of `t`.
pub fn trial_seed(master_seed: u64, trial: usize) -> u64 {
    splitmix64(master_seed ^ splitmix64(trial as u64))
}

/// Runs `n` independently seeded trials.
///
/// Imperfect instances go through the reduction unless `force_raw` is set,
/// in which case greedy runs on the source instance and may get stuck.
/// Results do not depend on the thread count: costs are collected by trial
/// index and reduced in that order.
pub fn run_trials(inst: &Instance, n: usize, master_seed: u64, force_raw: bool) -> Result<TrialRun, HarnessError> {
    if n == 0 {
        return Err(HarnessError::NoTrials);
    }
    let reduced = !force_raw && !is_perfect_coverage(inst);
    let reduction = reduced.then(|| reduce_instance(inst));
    let greedy = match &reduction {
        Some(red) => red.greedy(),
        None => Greedy::for_instance(inst),
    };
    let records: Vec<TrialRecord> = (0..n)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(master_seed, trial);
            let real = sample_realization(inst, seed);
            let trace = match &reduction {
                Some(red) => red.solve_with(&greedy, &real).map(|s| s.trace),
                None => greedy.run(&mut |f: ItemId| real.states[f].clone()),
            }
            .map_err(|source| HarnessError::Greedy { trial, source })?;
            Ok(TrialRecord { trial, seed, cost: trace.total_cost })
        })
        .collect::<Result<_, _>>()?;

    let total: Rational = records.iter().map(|r| &r.cost).sum();
    let mean = (total / Rational::from(n)).to_f64();
    let costs: Vec<f64> = records.iter().map(|r| r.cost.to_f64()).collect();
    let sample_stddev = if n > 1 {
        (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let stats = TrialStats {
        n_trials: n,
        mean_cost: mean,
        sample_stddev,
        ci95_halfwidth: 1.96 * sample_stddev / (n as f64).sqrt(),
        min_cost: costs.iter().copied().fold(f64::INFINITY, f64::min),
        max_cost: costs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        master_seed,
        reduced,
    };
    Ok(TrialRun { stats, records })
}
