//! Exact enumeration and seeded Monte Carlo for one member's profit.
//!
//! A simulated trial draws `n` independent success indicators; the first is
//! the tracked member. The trial is recorded only as an outcome class (own
//! failure, or success with `k` failed peers), so partition results combine
//! by integer addition and the moments do not depend on how trials were
//! split across workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mean_variance::Moments;
use crate::model::{check_probability, member_profit_on_success, profit_distribution_group, GroupSpec, MarketParams};
use crate::rng::Xoshiro256StarStar;

/// Trials per partition. Part of the reproducibility contract: changing it
/// changes the draws assigned to each partition seed.
pub const PARTITION_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::config("trials must be >= 1"));
        }
        Ok(SimConfig { trials, seed })
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { trials: 1_000_000, seed: 42 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub std_error_mean: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Exact moments of one member's profit from the full outcome enumeration.
pub fn enumerate_member_profit(e: f64, group: GroupSpec, w: f64, params: &MarketParams) -> Result<Moments> {
    let dist = profit_distribution_group(e, group, w, params)?;
    Ok(Moments { mean: dist.mean(), variance: dist.variance() })
}

/// Monte Carlo estimate of the member's profit moments. Partitions run in
/// parallel; the result is identical to [`simulate_member_profit_serial`].
pub fn simulate_member_profit(
    e: f64,
    group: GroupSpec,
    w: f64,
    params: &MarketParams,
    cfg: &SimConfig,
) -> Result<SimResult> {
    check_inputs(e, cfg)?;
    let n = group.size();
    let counts = (0..partition_count(cfg.trials))
        .into_par_iter()
        .map(|index| partition_counts(e, n, cfg, index))
        .reduce(|| vec![0u64; n as usize + 1], add_counts);
    Ok(summarize(&counts, n, w, params, cfg))
}

/// Single-threaded simulation over the same partitions.
pub fn simulate_member_profit_serial(
    e: f64,
    group: GroupSpec,
    w: f64,
    params: &MarketParams,
    cfg: &SimConfig,
) -> Result<SimResult> {
    check_inputs(e, cfg)?;
    let n = group.size();
    let counts = (0..partition_count(cfg.trials))
        .map(|index| partition_counts(e, n, cfg, index))
        .fold(vec![0u64; n as usize + 1], add_counts);
    Ok(summarize(&counts, n, w, params, cfg))
}

fn check_inputs(e: f64, cfg: &SimConfig) -> Result<()> {
    check_probability(e)?;
    if cfg.trials == 0 {
        return Err(Error::config("trials must be >= 1"));
    }
    Ok(())
}

fn partition_count(trials: u64) -> u64 {
    trials.div_ceil(PARTITION_TRIALS)
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Outcome-class counts for one partition. Slot `k < n` counts trials where
/// the member succeeded and `k` peers failed; slot `n` counts own failures.
fn partition_counts(e: f64, n: u32, cfg: &SimConfig, index: u64) -> Vec<u64> {
    let start = index * PARTITION_TRIALS;
    let len = PARTITION_TRIALS.min(cfg.trials - start);
    let mut rng = Xoshiro256StarStar::for_partition(cfg.seed, index);
    let mut counts = vec![0u64; n as usize + 1];
    for _ in 0..len {
        let own_success = rng.next_f64() < e;
        let mut failed_peers = 0usize;
        for _ in 1..n {
            if rng.next_f64() >= e {
                failed_peers += 1;
            }
        }
        if own_success {
            counts[failed_peers] += 1;
        } else {
            counts[n as usize] += 1;
        }
    }
    counts
}

fn summarize(counts: &[u64], n: u32, w: f64, params: &MarketParams, cfg: &SimConfig) -> SimResult {
    let profit = |slot: usize| {
        if slot == n as usize {
            0.0
        } else {
            member_profit_on_success(slot as u32, n, w, params)
        }
    };
    let trials = cfg.trials as f64;
    let mean = counts.iter().enumerate().map(|(s, &c)| c as f64 * profit(s)).sum::<f64>() / trials;
    let variance = counts
        .iter()
        .enumerate()
        .map(|(s, &c)| {
            let d = profit(s) - mean;
            c as f64 * d * d
        })
        .sum::<f64>()
        / trials;
    SimResult {
        empirical_mean: mean,
        empirical_variance: variance,
        std_error_mean: (variance / trials).sqrt(),
        trials: cfg.trials,
        seed: cfg.seed,
    }
}
