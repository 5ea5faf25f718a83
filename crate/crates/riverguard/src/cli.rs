//! Command-line front end.
//!
//! Results go to `--output` or standard output; diagnostics go to standard
//! error. Exit codes: 0 on success, 1 on bad input, 2 when a robust loop
//! stops at its iteration cap.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use riverguard_core::adversary::{AdversaryOracle, DpOptions, Objective, Rounding};
use riverguard_core::baselines::{midpoint_policy, random_policy, robustness_with, worst_policy};
use riverguard_core::generate::{generate, GeneratorConfig};
use riverguard_core::milp::export_milp;
use riverguard_core::model::NetworkInstance;
use riverguard_core::robust::{solve_robust, RobustConfig};
use riverguard_core::CoreError;

use crate::bench::{run_bench, threads_from_env, BenchConfig, BenchKind};
use crate::formats::{
    read_instance, read_policy, read_scenarios, to_json, AdversaryRecord, InputError, InstanceFile, PolicyFile,
    RobustRecord,
};
use crate::tables::{accessibility_rows, to_csv, EvalRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "riverguard", version, about = "Robust barrier-removal planning on river trees")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Policy maximizing the robust ratio.
    SolveMrr(SolveArgs),
    /// Policy minimizing the maximum regret.
    SolveMr(SolveArgs),
    /// Worst case of a given policy.
    Adversary(AdversaryArgs),
    /// Midpoint, worst or random baseline policy.
    Baseline(BaselineArgs),
    /// Robust ratio and regret of policies, as CSV.
    Eval(EvalArgs),
    /// Decision problem over a scenario set as an LP file.
    ExportMilp(ExportArgs),
    /// Sweep over β and budget grids, as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    #[arg(long = "n", default_value_t = 22)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.3)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub budget_fraction: f64,
    #[arg(long, default_value_t = 0.7)]
    pub culvert_fraction: f64,
    #[arg(long, default_value_t = 1.0)]
    pub reward_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub reward_max: f64,
    /// Cap on children per node.
    #[arg(long)]
    pub max_children: Option<usize>,
}

impl GeneratorArgs {
    fn config(&self, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            nodes: self.nodes,
            max_children: self.max_children,
            reward_min: self.reward_min,
            reward_max: self.reward_max,
            culvert_fraction: self.culvert_fraction,
            beta: self.beta,
            budget_fraction: self.budget_fraction,
            seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Adversary mode; at most one of the flags. Defaults to `--epsilon 0.1`.
#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct AdversaryMode {
    /// Exact DP.
    #[arg(long)]
    pub exact: bool,
    /// Rounded DP with approximation factor 1+ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Rounded DP with grid width K at every node.
    #[arg(long)]
    pub constant: Option<f64>,
}

impl AdversaryMode {
    pub fn rounding(&self) -> Rounding {
        if self.exact {
            Rounding::Exact
        } else if let Some(k) = self.constant {
            Rounding::Constant(k)
        } else {
            Rounding::Epsilon(self.epsilon.unwrap_or(0.1))
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PruneArgs {
    /// Run the DP without pruning.
    #[arg(long)]
    pub no_pruning: bool,
}

impl PruneArgs {
    fn options(&self) -> DpOptions {
        if self.no_pruning {
            DpOptions::default()
        } else {
            DpOptions::HULL
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub mode: AdversaryMode,
    #[command(flatten)]
    pub prune: PruneArgs,
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Ratio,
    Regret,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Ratio => Objective::Ratio,
            ObjectiveArg::Regret => Objective::Regret,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AdversaryArgs {
    pub instance: PathBuf,
    /// Decision policy file.
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Ratio)]
    pub objective: ObjectiveArg,
    #[command(flatten)]
    pub mode: AdversaryMode,
    #[command(flatten)]
    pub prune: PruneArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Midpoint,
    Worst,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub kind: BaselineKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    pub instance: PathBuf,
    /// Policy files; repeat for several.
    #[arg(long = "policy", required = true)]
    pub policies: Vec<PathBuf>,
    #[command(flatten)]
    pub mode: AdversaryMode,
    #[command(flatten)]
    pub prune: PruneArgs,
    /// Per-edge accessibility CSV of the first policy and its ratio
    /// adversary.
    #[arg(long)]
    pub accessibility: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    pub instance: PathBuf,
    /// Scenario list, or a solve-mrr result.
    #[arg(long)]
    pub scenarios: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchKindArg {
    Robustness,
    Approximation,
    KSweep,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchKindArg::Robustness)]
    pub kind: BenchKindArg,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5])]
    pub betas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1])]
    pub budgets: Vec<f64>,
    /// Number of instances per grid point.
    #[arg(long, default_value_t = 1)]
    pub instances: u64,
    /// First instance seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub mode: AdversaryMode,
    #[command(flatten)]
    pub prune: PruneArgs,
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
    /// Constant grid widths.
    #[arg(long, value_delimiter = ',', default_values_t = [5.0])]
    pub ks: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub random_runs: usize,
    /// Leave `wall_ms` empty so that output is reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(config.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Input(InputError::Invalid(violations)) = &e {
                for v in violations {
                    eprintln!("  {v}");
                }
            }
            EXIT_INPUT
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|source| CliError::Write { path: path.display().to_string(), source })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn oracle(instance: &NetworkInstance, mode: &AdversaryMode, prune: &PruneArgs) -> Result<AdversaryOracle, CliError> {
    Ok(AdversaryOracle::new(instance, mode.rounding(), prune.options())?)
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Gen(a) => {
            let instance = generate(&a.generator.config(a.seed))?;
            emit(a.output.as_deref(), &to_json(&InstanceFile::from_instance(&instance)))?;
        }
        Command::SolveMrr(a) => return solve(a, Objective::Ratio),
        Command::SolveMr(a) => return solve(a, Objective::Regret),
        Command::Adversary(a) => {
            let instance = read_instance(&a.instance)?;
            let policy = read_policy(&a.policy, &instance)?;
            let result = oracle(&instance, &a.mode, &a.prune)?.solve(&policy, a.objective.into())?;
            emit(a.output.as_deref(), &to_json(&AdversaryRecord::from_result(&instance, &result)))?;
        }
        Command::Baseline(a) => {
            let instance = read_instance(&a.instance)?;
            let policy = match a.kind {
                BaselineKind::Midpoint => midpoint_policy(&instance),
                BaselineKind::Worst => worst_policy(&instance),
                BaselineKind::Random => random_policy(&instance, a.seed),
            };
            emit(a.output.as_deref(), &to_json(&PolicyFile::from_policy(&instance, &policy)))?;
        }
        Command::Eval(a) => {
            let instance = read_instance(&a.instance)?;
            let oracle = oracle(&instance, &a.mode, &a.prune)?;
            let mut rows = Vec::new();
            for (i, path) in a.policies.iter().enumerate() {
                let policy = read_policy(path, &instance)?;
                let r = robustness_with(&oracle, &policy)?;
                let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                rows.push(EvalRow::new(&name, &instance, &policy, &r));
                if i == 0 {
                    if let Some(out) = &a.accessibility {
                        emit(Some(out), &to_csv(&accessibility_rows(&instance, &policy, &r)?))?;
                    }
                }
            }
            emit(a.output.as_deref(), &to_csv(&rows))?;
        }
        Command::ExportMilp(a) => {
            let instance = read_instance(&a.instance)?;
            let scenarios = read_scenarios(&a.scenarios, &instance)?;
            emit(a.output.as_deref(), &export_milp(&instance, &scenarios)?)?;
        }
        Command::Bench(a) => {
            let config = BenchConfig {
                kind: match a.kind {
                    BenchKindArg::Robustness => BenchKind::Robustness,
                    BenchKindArg::Approximation => BenchKind::Approximation,
                    BenchKindArg::KSweep => BenchKind::KSweep,
                },
                generator: a.generator.config(a.seed),
                betas: a.betas,
                budgets: a.budgets,
                instances: a.instances,
                rounding: a.mode.rounding(),
                dp_options: a.prune.options(),
                threshold: a.threshold,
                max_iterations: a.max_iterations,
                ks: a.ks,
                random_runs: a.random_runs,
                timing: !a.no_timing,
                threads: threads_from_env(),
            };
            let rows = run_bench(&config)?;
            emit(a.output.as_deref(), &to_csv(&rows))?;
        }
    }
    Ok(EXIT_OK)
}

fn solve(a: SolveArgs, objective: Objective) -> Result<i32, CliError> {
    let instance = read_instance(&a.instance)?;
    let config = RobustConfig {
        rounding: a.mode.rounding(),
        threshold: a.threshold,
        max_iterations: a.max_iterations,
        dp_options: a.prune.options(),
    };
    let result = solve_robust(&instance, &config, objective)?;
    emit(a.output.as_deref(), &to_json(&RobustRecord::from_result(&instance, &result)))?;
    eprintln!(
        "{} after {} iteration(s): U = {}, L = {}",
        if result.converged { "stopped" } else { "iteration cap reached" },
        result.iterations,
        result.upper,
        result.lower
    );
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}
