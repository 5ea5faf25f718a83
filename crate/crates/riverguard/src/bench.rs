//! Parameter sweeps over generated instances.
//!
//! Three sweeps, each producing [`BenchRow`]s:
//!
//! * `robustness`: robust ratio and regret of the MRR policy and of the
//!   midpoint, worst and random baselines across β and budget.
//! * `approximation`: metrics of the baselines under the exact adversary,
//!   the epsilon-rounded DP and the constant-grid DP, for value/OPT curves.
//! * `k-sweep`: baseline robust ratios under constant grids of several
//!   widths.
//!
//! Random baselines are averaged over `random_runs` seeded draws. Instances
//! are solved in parallel; rows come back in job order whatever the thread
//! count.

use std::time::Instant;

use rayon::prelude::*;

use riverguard_core::adversary::{AdversaryOracle, DpOptions, Rounding};
use riverguard_core::baselines::{midpoint_policy, random_policy, robustness_with, worst_policy, Robustness};
use riverguard_core::generate::{generate, GeneratorConfig};
use riverguard_core::model::{NetworkInstance, Policy};
use riverguard_core::robust::{solve_mrr, RobustConfig};
use riverguard_core::CoreError;

use crate::tables::BenchRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchKind {
    Robustness,
    Approximation,
    KSweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub kind: BenchKind,
    /// Generator settings; `beta`, `budget_fraction` and `seed` are swept.
    pub generator: GeneratorConfig,
    pub betas: Vec<f64>,
    pub budgets: Vec<f64>,
    /// Instance seeds are `generator.seed .. generator.seed + instances`.
    pub instances: u64,
    /// Adversary for the robust loop and for robustness metrics.
    pub rounding: Rounding,
    pub dp_options: DpOptions,
    pub threshold: f64,
    pub max_iterations: usize,
    /// Grid widths for `k-sweep`; the first one is also the constant grid of
    /// `approximation`.
    pub ks: Vec<f64>,
    pub random_runs: usize,
    pub timing: bool,
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            kind: BenchKind::Robustness,
            generator: GeneratorConfig::default(),
            betas: vec![0.1, 0.3, 0.5],
            budgets: vec![0.05, 0.1],
            instances: 1,
            rounding: Rounding::Epsilon(0.1),
            dp_options: DpOptions::HULL,
            threshold: 1e-3,
            max_iterations: 200,
            ks: vec![5.0],
            random_runs: 10,
            timing: true,
            threads: 1,
        }
    }
}

pub fn rounding_name(r: Rounding) -> String {
    match r {
        Rounding::Exact => "exact".into(),
        Rounding::Epsilon(e) => format!("epsilon={e}"),
        Rounding::Constant(k) => format!("constant={k}"),
    }
}

struct Job {
    seed: u64,
    beta: f64,
    budget: f64,
}

pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>, CoreError> {
    config.rounding.check()?;
    let mut jobs = Vec::new();
    for i in 0..config.instances {
        for &beta in &config.betas {
            for &budget in &config.budgets {
                jobs.push(Job { seed: config.generator.seed + i, beta, budget });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.max(1))
        .build()
        .expect("thread pool");
    let per_job: Vec<Result<Vec<BenchRow>, CoreError>> =
        pool.install(|| jobs.par_iter().map(|job| run_job(config, job)).collect());
    let mut rows = Vec::new();
    for r in per_job {
        rows.extend(r?);
    }
    Ok(rows)
}

fn run_job(config: &BenchConfig, job: &Job) -> Result<Vec<BenchRow>, CoreError> {
    let generator = GeneratorConfig { beta: job.beta, budget_fraction: job.budget, seed: job.seed, ..config.generator };
    let instance = generate(&generator)?;
    let row = |kind: &str, rounding: Rounding, ratio: f64, regret: f64, start: Instant| BenchRow {
        seed: job.seed,
        n: instance.len(),
        beta: job.beta,
        budget_fraction: job.budget,
        policy_kind: kind.to_string(),
        adversary: rounding_name(rounding),
        robust_ratio: ratio,
        regret,
        wall_ms: config.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    let baselines = |oracle: &AdversaryOracle, rows: &mut Vec<BenchRow>| -> Result<(), CoreError> {
        for (kind, f) in [("midpoint", midpoint_policy as fn(&NetworkInstance) -> Policy), ("worst", worst_policy)] {
            let start = Instant::now();
            let r = robustness_with(oracle, &f(&instance))?;
            rows.push(row(kind, oracle.rounding(), r.robust_ratio(), r.regret(), start));
        }
        let start = Instant::now();
        let (ratio, regret) = random_average(&instance, oracle, job.seed, config.random_runs)?;
        rows.push(row("random", oracle.rounding(), ratio, regret, start));
        Ok(())
    };

    let mut rows = Vec::new();
    match config.kind {
        BenchKind::Robustness => {
            let oracle = AdversaryOracle::new(&instance, config.rounding, config.dp_options)?;
            let start = Instant::now();
            let loop_config = RobustConfig {
                rounding: config.rounding,
                threshold: config.threshold,
                max_iterations: config.max_iterations,
                dp_options: config.dp_options,
            };
            let mrr = solve_mrr(&instance, &loop_config)?;
            let r = robustness_with(&oracle, &mrr.policy)?;
            rows.push(row("mrr", config.rounding, r.robust_ratio(), r.regret(), start));
            baselines(&oracle, &mut rows)?;
        }
        BenchKind::Approximation => {
            let k = config.ks.first().copied().unwrap_or(5.0);
            let mut modes = vec![Rounding::Exact, config.rounding];
            if config.rounding != Rounding::Constant(k) {
                modes.push(Rounding::Constant(k));
            }
            modes.dedup();
            for mode in modes {
                baselines(&AdversaryOracle::new(&instance, mode, config.dp_options)?, &mut rows)?;
            }
        }
        BenchKind::KSweep => {
            for &k in &config.ks {
                baselines(&AdversaryOracle::new(&instance, Rounding::Constant(k), config.dp_options)?, &mut rows)?;
            }
        }
    }
    Ok(rows)
}

/// Mean robust ratio and regret over `runs` random policies.
fn random_average(
    instance: &NetworkInstance,
    oracle: &AdversaryOracle,
    seed: u64,
    runs: usize,
) -> Result<(f64, f64), CoreError> {
    if runs == 0 {
        return Ok((f64::NAN, f64::NAN));
    }
    let mut sum = (0.0, 0.0);
    for i in 0..runs as u64 {
        let r: Robustness = robustness_with(oracle, &random_policy(instance, seed.wrapping_mul(1_000_003).wrapping_add(i)))?;
        sum.0 += r.robust_ratio();
        sum.1 += r.regret();
    }
    Ok((sum.0 / runs as f64, sum.1 / runs as f64))
}

/// Thread count from `RIVERGUARD_THREADS`, else the available parallelism.
pub fn threads_from_env() -> usize {
    std::env::var("RIVERGUARD_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
