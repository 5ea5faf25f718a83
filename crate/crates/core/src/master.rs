//! The decision problem against a finite scenario set.
//!
//! Given scenarios `(π′_k, p_k)` with constants `Z_k = z(π′_k; p_k)`, find a
//! budget-feasible policy maximizing `min_k z(π; p_k) / Z_k` (ratio) or
//! minimizing `max_k Z_k − z(π; p_k)` (regret).
//!
//! [`solve_master`] runs a depth-first branch-and-bound over edges. Edges are
//! assigned parents first, so at any node of the search the assigned edges
//! form a subtree containing the root. For one scenario the best completion
//! of such a partial policy is then an independent budgeted problem on each
//! hanging subtree, which the Pareto DP of [`crate::pareto`] solves exactly.
//! The bound of a search node is the minimum over scenarios of these
//! per-scenario optima.

use alloc::vec;
use alloc::vec::Vec;

use crate::adversary::Objective;
use crate::error::CoreError;
use crate::model::{evaluate, policy_cost, NetworkInstance, NodeIndex, ParamVector, Policy};
use crate::pareto::{budgeted_frontiers, Frontier, Point};
use crate::{within_budget, BUDGET_SLACK};

/// Absolute slack on objective comparisons during pruning.
pub const PRUNE_SLACK: f64 = 1e-12;

/// One adversary choice: a policy, a parameter vector and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub policy: Policy,
    pub params: ParamVector,
    /// `z(π′; p)`.
    pub value: f64,
}

impl Scenario {
    pub fn new(instance: &NetworkInstance, policy: Policy, params: ParamVector) -> Result<Self, CoreError> {
        policy.check(instance)?;
        params.check(instance)?;
        let value = evaluate(instance, &policy, &params)?;
        Ok(Self { policy, params, value })
    }
}

/// The scenario set `C` of constraint generation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioSet {
    scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Checks every scenario against `instance`, recomputing its value.
    pub fn from_scenarios(instance: &NetworkInstance, scenarios: Vec<Scenario>) -> Result<Self, CoreError> {
        let mut set = Self::new();
        for s in scenarios {
            let fresh = Scenario::new(instance, s.policy, s.params)?;
            if (fresh.value - s.value).abs() > 1e-9 * fresh.value.abs().max(1.0) {
                return Err(CoreError::InvalidConfig("scenario value does not match its policy and parameters"));
            }
            set.push(fresh)?;
        }
        Ok(set)
    }

    /// Appends a scenario unless an identical one is present; returns whether
    /// it was added.
    pub fn push(&mut self, scenario: Scenario) -> Result<bool, CoreError> {
        if !(scenario.value > 0.0) {
            return Err(CoreError::NonPositiveScenario { index: self.scenarios.len(), value: scenario.value });
        }
        if self.contains(&scenario.policy, &scenario.params) {
            return Ok(false);
        }
        self.scenarios.push(scenario);
        Ok(true)
    }

    pub fn contains(&self, policy: &Policy, params: &ParamVector) -> bool {
        self.scenarios.iter().any(|s| &s.policy == policy && &s.params == params)
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn get(&self, k: usize) -> &Scenario {
        &self.scenarios[k]
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Scenario> {
        self.scenarios.iter()
    }

    pub fn as_slice(&self) -> &[Scenario] {
        &self.scenarios
    }
}

impl<'a> IntoIterator for &'a ScenarioSet {
    type Item = &'a Scenario;
    type IntoIter = core::slice::Iter<'a, Scenario>;

    fn into_iter(self) -> Self::IntoIter {
        self.scenarios.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterResult {
    pub policy: Policy,
    /// Worst ratio over the scenarios, or worst regret for the regret
    /// objective.
    pub value: f64,
    /// `z(π; p_k)` for each scenario.
    pub scenario_values: Vec<f64>,
    pub cost: f64,
    /// Search nodes visited.
    pub nodes: u64,
}

/// Scenario-wise worst objective of a policy with values `z_k`.
pub fn worst_case(objective: Objective, scenarios: &ScenarioSet, values: &[f64]) -> f64 {
    let it = scenarios.iter().zip(values);
    match objective {
        Objective::Ratio => it.map(|(s, z)| z / s.value).fold(f64::INFINITY, f64::min),
        Objective::Regret => it.map(|(s, z)| s.value - z).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Exact optimum of the decision problem against `scenarios`.
pub fn solve_master(
    instance: &NetworkInstance,
    scenarios: &ScenarioSet,
    objective: Objective,
) -> Result<MasterResult, CoreError> {
    solve_master_seeded(instance, scenarios, objective, &[])
}

/// [`solve_master`] with extra starting incumbents, typically the policies
/// of earlier rounds. Hints only speed up the search; the result is the same.
pub fn solve_master_seeded(
    instance: &NetworkInstance,
    scenarios: &ScenarioSet,
    objective: Objective,
    hints: &[Policy],
) -> Result<MasterResult, CoreError> {
    for h in hints {
        h.check(instance)?;
    }
    if scenarios.is_empty() {
        return Err(CoreError::EmptyScenarioSet);
    }
    for (index, s) in scenarios.iter().enumerate() {
        if !(s.value > 0.0) {
            return Err(CoreError::NonPositiveScenario { index, value: s.value });
        }
        s.params.check(instance)?;
    }

    let mut search = Search::new(instance, scenarios, objective);
    search.seed_incumbents(hints);
    search.dfs(0);
    let best = search.best.expect("the null policy is always an incumbent");
    let policy = Policy::from_actions(best.actions);
    let scenario_values =
        scenarios.iter().map(|s| evaluate(instance, &policy, &s.params)).collect::<Result<Vec<_>, _>>()?;
    Ok(MasterResult {
        value: worst_case(objective, scenarios, &scenario_values),
        cost: policy_cost(instance, &policy),
        policy,
        scenario_values,
        nodes: search.nodes,
    })
}

/// Scenarios per search node that get the exact budget-split bound.
const MERGED_BOUNDS: usize = 4;

struct Incumbent {
    score: f64,
    cost: f64,
    actions: Vec<usize>,
}

struct Search<'a> {
    instance: &'a NetworkInstance,
    objective: Objective,
    targets: Vec<f64>,
    params: Vec<&'a ParamVector>,
    /// Branching order; every edge comes after its parent edge.
    order: Vec<NodeIndex>,
    /// `open[d]`: unassigned edges hanging off the assigned part after `d`
    /// assignments.
    open: Vec<Vec<NodeIndex>>,
    action_order: Vec<Vec<usize>>,
    /// `frontiers[k][v]`: (value, cost) frontier of the edge into `v` plus
    /// its subtree under scenario `k`.
    frontiers: Vec<Vec<Frontier>>,
    /// `acc[k][v]`: accessibility of assigned node `v` under scenario `k`.
    acc: Vec<Vec<f64>>,
    /// `fixed[d][k]`: reward collected by assigned nodes at depth `d`.
    fixed: Vec<Vec<f64>>,
    current: Vec<usize>,
    cost: f64,
    cost_slack: f64,
    best: Option<Incumbent>,
    nodes: u64,
    scratch: Vec<(f64, usize)>,
}

impl<'a> Search<'a> {
    fn new(instance: &'a NetworkInstance, scenarios: &'a ScenarioSet, objective: Objective) -> Self {
        let n = instance.len();
        let mass = instance.subtree_rewards();
        let depth = instance.depths();
        let mut order: Vec<NodeIndex> = instance.edges().collect();
        order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(depth[a].cmp(&depth[b])).then(a.cmp(&b)));
        // Subtree mass never grows going down, and ties go to the shallower
        // edge, so parents precede children.
        let mut position = vec![usize::MAX; n];
        for (i, &e) in order.iter().enumerate() {
            position[e] = i;
        }
        let root = instance.root();
        let mut open = Vec::with_capacity(order.len() + 1);
        let mut current: Vec<NodeIndex> = instance.children(root).to_vec();
        current.sort_by_key(|&e| position[e]);
        for &e in &order {
            open.push(current.clone());
            current.retain(|&x| x != e);
            current.extend_from_slice(instance.children(e));
            current.sort_by_key(|&x| position[x]);
        }
        open.push(current);

        let action_order = (0..n)
            .map(|v| {
                if instance.parent(v).is_none() {
                    return Vec::new();
                }
                let acts = instance.actions(v);
                let mut idx: Vec<usize> = (0..acts.len()).collect();
                idx.sort_by(|&a, &b| acts[b].p_high.total_cmp(&acts[a].p_high).then(a.cmp(&b)));
                idx
            })
            .collect();

        let budget = instance.budget();
        let frontiers = scenarios
            .iter()
            .map(|s| {
                let dp = budgeted_frontiers(instance, &s.params, budget);
                (0..n).map(|v| if v == root { Frontier::default() } else { dp.edge_frontier(v) }).collect()
            })
            .collect();
        let k = scenarios.len();
        let mut acc = vec![vec![0.0; n]; k];
        for row in &mut acc {
            row[root] = 1.0;
        }
        let mut fixed = vec![vec![0.0; k]; order.len() + 1];
        fixed[0] = vec![instance.reward(root); k];

        Self {
            instance,
            objective,
            targets: scenarios.iter().map(|s| s.value).collect(),
            params: scenarios.iter().map(|s| &s.params).collect(),
            order,
            open,
            action_order,
            frontiers,
            acc,
            fixed,
            current: vec![0; n],
            cost: 0.0,
            cost_slack: BUDGET_SLACK * budget.abs().max(1.0),
            best: None,
            nodes: 0,
            scratch: Vec::with_capacity(k),
        }
    }

    fn score(&self, k: usize, z: f64) -> f64 {
        match self.objective {
            Objective::Ratio => z / self.targets[k],
            Objective::Regret => z - self.targets[k],
        }
    }

    fn offer(&mut self, score: f64, cost: f64, actions: &[usize]) {
        let better = match &self.best {
            None => true,
            Some(b) => {
                score > b.score + PRUNE_SLACK
                    || (score >= b.score - PRUNE_SLACK
                        && (cost < b.cost - self.cost_slack
                            || (cost <= b.cost + self.cost_slack && actions < b.actions.as_slice())))
            }
        };
        if better {
            self.best = Some(Incumbent { score, cost, actions: actions.to_vec() });
        }
    }

    /// Starts from the null policy, each scenario's own optimum and the
    /// affordable hints.
    fn seed_incumbents(&mut self, hints: &[Policy]) {
        let mut candidates = vec![Policy::null(self.instance)];
        for p in &self.params {
            candidates.push(budgeted_frontiers(self.instance, p, self.instance.budget()).best_policy(self.instance).0);
        }
        candidates.extend(hints.iter().filter(|h| within_budget(policy_cost(self.instance, h), self.instance.budget())).cloned());
        for pi in candidates {
            let score = (0..self.params.len())
                .map(|k| self.score(k, evaluate(self.instance, &pi, self.params[k]).expect("checked shapes")))
                .fold(f64::INFINITY, f64::min);
            self.offer(score, policy_cost(self.instance, &pi), pi.as_slice());
        }
    }

    fn remaining_budget(&self) -> f64 {
        self.instance.budget() - self.cost + self.cost_slack
    }

    /// False when no completion of the current partial policy can beat or
    /// tie the incumbent.
    fn promising(&mut self, d: usize) -> bool {
        let Some(best) = &self.best else { return true };
        let (target, tie_cost) = (best.score, best.cost);
        let cannot_win = |bound: f64, cost: f64, slack: f64| {
            bound < target - PRUNE_SLACK || (bound <= target + PRUNE_SLACK && cost > tie_cost + slack)
        };
        let brem = self.remaining_budget();
        let open = &self.open[d];

        // Each hanging subtree alone may spend the whole remaining budget.
        let mut scratch = core::mem::take(&mut self.scratch);
        scratch.clear();
        for k in 0..self.targets.len() {
            let mut z = self.fixed[d][k];
            for &e in open {
                let w = self.acc[k][self.instance.parent(e).unwrap()];
                if w > 0.0 {
                    z += w * self.frontiers[k][e].best_within(brem);
                }
            }
            let s = self.score(k, z);
            if cannot_win(s, self.cost, self.cost_slack) {
                self.scratch = scratch;
                return false;
            }
            scratch.push((s, k));
        }

        // Exact split of the remaining budget for the tightest scenarios. Any
        // subset of scenarios still gives a valid bound.
        if open.len() > 1 {
            scratch.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, k) in scratch.iter().take(MERGED_BOUNDS) {
                let mut merged = Frontier::new([Point { value: 0.0, cost: 0.0 }]);
                for &e in open {
                    let w = self.acc[k][self.instance.parent(e).unwrap()];
                    if w > 0.0 {
                        merged = merged.merge_weighted(&self.frontiers[k][e], w, brem);
                    }
                }
                let s = self.score(k, self.fixed[d][k] + merged.best_within(brem));
                if cannot_win(s, self.cost, self.cost_slack) {
                    self.scratch = scratch;
                    return false;
                }
            }
        }
        self.scratch = scratch;
        true
    }

    fn dfs(&mut self, d: usize) {
        self.nodes += 1;
        if d == self.order.len() {
            let score = (0..self.targets.len()).map(|k| self.score(k, self.fixed[d][k])).fold(f64::INFINITY, f64::min);
            let current = core::mem::take(&mut self.current);
            self.offer(score, self.cost, &current);
            self.current = current;
            return;
        }
        if !self.promising(d) {
            return;
        }
        let e = self.order[d];
        let parent = self.instance.parent(e).unwrap();
        let reward = self.instance.reward(e);
        let saved_cost = self.cost;
        for i in 0..self.action_order[e].len() {
            let a = self.action_order[e][i];
            let cost = saved_cost + self.instance.actions(e)[a].cost;
            if !within_budget(cost, self.instance.budget()) {
                continue;
            }
            self.current[e] = a;
            self.cost = cost;
            for k in 0..self.targets.len() {
                let acc = self.acc[k][parent] * self.params[k].prob(e, a);
                self.acc[k][e] = acc;
                self.fixed[d + 1][k] = self.fixed[d][k] + reward * acc;
            }
            self.dfs(d + 1);
        }
        self.current[e] = 0;
        self.cost = saved_cost;
    }
}
