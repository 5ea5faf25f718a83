//! Point-estimate baselines and robustness metrics.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{AdversaryOracle, AdversaryResult, DpOptions, Objective, Rounding};
use crate::error::CoreError;
use crate::model::{NetworkInstance, NodeIndex, ParamVector, Policy};
use crate::pareto::budgeted_frontiers;
use crate::within_budget;

/// Exact optimal budgeted policy for fixed probabilities; ties go to the
/// cheaper policy.
pub fn solve_point(instance: &NetworkInstance, params: &ParamVector) -> Policy {
    budgeted_frontiers(instance, params, instance.budget()).best_policy(instance).0
}

/// Optimal policy if every probability sits at its interval midpoint.
pub fn midpoint_policy(instance: &NetworkInstance) -> Policy {
    solve_point(instance, &ParamVector::midpoints(instance))
}

/// Optimal policy if every probability sits at its lower bound.
pub fn worst_policy(instance: &NetworkInstance) -> Policy {
    solve_point(instance, &ParamVector::lower_bounds(instance))
}

/// Random feasible policy: visits edges in shuffled order and gives each a
/// uniformly drawn action among those still affordable.
pub fn random_policy(instance: &NetworkInstance, seed: u64) -> Policy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<NodeIndex> = instance.edges().collect();
    edges.shuffle(&mut rng);
    let mut policy = Policy::null(instance);
    let mut spent = 0.0;
    for e in edges {
        let affordable: Vec<usize> = instance
            .actions(e)
            .iter()
            .enumerate()
            .filter(|(_, a)| within_budget(spent + a.cost, instance.budget()))
            .map(|(i, _)| i)
            .collect();
        let a = affordable[rng.random_range(0..affordable.len())];
        spent += instance.actions(e)[a].cost;
        policy.set(e, a);
    }
    policy
}

/// Both robustness metrics of one policy with their adversarial
/// certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct Robustness {
    pub ratio: AdversaryResult,
    pub regret: AdversaryResult,
}

impl Robustness {
    pub fn robust_ratio(&self) -> f64 {
        self.ratio.value
    }

    pub fn regret(&self) -> f64 {
        self.regret.value
    }
}

pub fn robustness_with(oracle: &AdversaryOracle, policy: &Policy) -> Result<Robustness, CoreError> {
    Ok(Robustness { ratio: oracle.solve(policy, Objective::Ratio)?, regret: oracle.solve(policy, Objective::Regret)? })
}

pub fn evaluate_robustness(
    instance: &NetworkInstance,
    policy: &Policy,
    rounding: Rounding,
    options: DpOptions,
) -> Result<Robustness, CoreError> {
    robustness_with(&AdversaryOracle::new(instance, rounding, options)?, policy)
}
