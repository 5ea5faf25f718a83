//! Constraint generation for robust policies.
//!
//! Alternates between the decision problem over a growing scenario set
//! ([`crate::master`]) and the adversary problem against the latest policy
//! ([`crate::adversary`]). For the ratio objective the master value `U`
//! upper-bounds the best robust ratio and the adversary's ratio lower-bounds
//! the robust ratio of the current policy; for regret the roles swap.
//!
//! With the epsilon-rounded adversary, the found ratio `L̂` is only within a
//! factor `1+ε` of the true minimum, so the certified lower bound is
//! `L = L̂/(1+ε)`. That gap never closes by itself: `U − L` stays near
//! `ε·U/(1+ε)` even when `U = L̂`. The loop therefore also stops when
//! `U − L̂` is within the threshold and reports it as
//! [`StopReason::ApproximationLimit`].
//!
//! The constant grid gives no such factor; there `L` is just the rounded
//! adversary ratio and is not a certified bound.
//!
//! When the iteration cap is hit first, the result carries the policy with the
//! best certified bound over all rounds rather than the last one, together
//! with that bound.

use alloc::vec::Vec;

use crate::adversary::{AdversaryOracle, AdversaryResult, DpOptions, Objective, Rounding};
use crate::error::CoreError;
use crate::master::{solve_master_seeded, Scenario, ScenarioSet};
use crate::model::{NetworkInstance, ParamVector, Policy};

/// Slack on threshold comparisons.
const STOP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustConfig {
    pub rounding: Rounding,
    /// Absolute gap `U − L` at which the loop stops.
    pub threshold: f64,
    pub max_iterations: usize,
    pub dp_options: DpOptions,
}

impl Default for RobustConfig {
    fn default() -> Self {
        Self { rounding: Rounding::Epsilon(0.1), threshold: 1e-3, max_iterations: 200, dp_options: DpOptions::HULL }
    }
}

impl RobustConfig {
    pub fn exact() -> Self {
        Self { rounding: Rounding::Exact, ..Self::default() }
    }

    pub fn check(&self) -> Result<(), CoreError> {
        self.rounding.check()?;
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return Err(CoreError::InvalidLoopConfig("threshold must be finite and nonnegative"));
        }
        if self.max_iterations == 0 {
            return Err(CoreError::InvalidLoopConfig("at least one iteration is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    /// `U − L` is within the threshold.
    Converged,
    /// `U − L̂` is within the threshold; the remaining gap to `L` is the
    /// rounding slack of the adversary.
    ApproximationLimit,
    /// The adversary returned a scenario already in the set.
    RepeatedScenario,
    /// The iteration cap was reached first.
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Value of the decision problem over the scenario set.
    pub master_value: f64,
    /// Objective of the pair found by the adversary, `L̂` for ratio.
    pub adversary_value: f64,
    /// Certified adversary bound, `L = L̂/(1+ε)` for ratio with epsilon
    /// rounding and the found value otherwise.
    pub adversary_bound: f64,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustResult {
    pub objective: Objective,
    pub policy: Policy,
    pub upper: f64,
    pub lower: f64,
    /// Number of master/adversary rounds run.
    pub iterations: usize,
    /// Round whose master policy is returned.
    pub policy_iteration: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub scenarios: ScenarioSet,
    pub trace: Vec<TraceEntry>,
    /// The adversary's answer to the returned policy, found in round
    /// `policy_iteration`.
    pub certificate: AdversaryResult,
}

impl RobustResult {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Policy maximizing the robust ratio.
pub fn solve_mrr(instance: &NetworkInstance, config: &RobustConfig) -> Result<RobustResult, CoreError> {
    solve_robust(instance, config, Objective::Ratio)
}

/// Policy minimizing the maximum regret.
pub fn solve_mr(instance: &NetworkInstance, config: &RobustConfig) -> Result<RobustResult, CoreError> {
    solve_robust(instance, config, Objective::Regret)
}

pub fn solve_robust(
    instance: &NetworkInstance,
    config: &RobustConfig,
    objective: Objective,
) -> Result<RobustResult, CoreError> {
    config.check()?;
    let oracle = AdversaryOracle::new(instance, config.rounding, config.dp_options)?;
    let mut scenarios = ScenarioSet::new();
    scenarios.push(Scenario::new(instance, Policy::null(instance), ParamVector::midpoints(instance))?)?;
    let mut trace = Vec::new();
    let threshold = config.threshold + STOP_SLACK;
    // Earlier master policies seed the next search.
    let mut hints: Vec<Policy> = Vec::new();
    // (certified bound, round, policy, adversary answer) of the best round.
    let mut best: Option<(f64, usize, Policy, AdversaryResult)> = None;

    for iteration in 1..=config.max_iterations {
        let master = solve_master_seeded(instance, &scenarios, objective, &hints)?;
        let found = oracle.solve(&master.policy, objective)?;
        let (upper, lower, bound, approx_gap) = match objective {
            Objective::Ratio => {
                let bound = match config.rounding.epsilon() {
                    Some(eps) => found.value / (1.0 + eps),
                    None => found.value,
                };
                (master.value, bound, bound, master.value - found.value)
            }
            Objective::Regret => (found.value, master.value, found.value, found.value - master.value),
        };
        trace.push(TraceEntry {
            iteration,
            master_value: master.value,
            adversary_value: found.value,
            adversary_bound: bound,
            upper,
            lower,
        });
        // Ratio bounds grow with quality, regret bounds shrink.
        let quality = match objective {
            Objective::Ratio => bound,
            Objective::Regret => -bound,
        };
        if best.as_ref().is_none_or(|b| quality > b.0) {
            best = Some((quality, iteration, master.policy.clone(), found.clone()));
        }

        let stop = if upper - lower <= threshold {
            Some(StopReason::Converged)
        } else if approx_gap <= threshold {
            Some(StopReason::ApproximationLimit)
        } else if scenarios.contains(&found.policy, &found.params) {
            Some(StopReason::RepeatedScenario)
        } else if iteration == config.max_iterations {
            Some(StopReason::IterationLimit)
        } else {
            None
        };
        let Some(stop_reason) = stop else {
            hints.push(master.policy);
            scenarios.push(Scenario::new(instance, found.policy, found.params)?)?;
            continue;
        };
        let mut result = RobustResult {
            objective,
            policy: master.policy,
            upper,
            lower,
            iterations: iteration,
            policy_iteration: iteration,
            converged: stop_reason != StopReason::IterationLimit,
            stop_reason,
            scenarios,
            trace,
            certificate: found,
        };
        if stop_reason == StopReason::IterationLimit {
            let (_, round, policy, certificate) = best.expect("at least one round ran");
            let entry = result.trace[round - 1];
            result.policy = policy;
            result.policy_iteration = round;
            result.certificate = certificate;
            // U only improves over rounds; the certified side is the best one.
            match objective {
                Objective::Ratio => result.lower = entry.lower,
                Objective::Regret => result.upper = entry.upper,
            }
        }
        return Ok(result);
    }
    unreachable!("the last iteration always stops")
}
