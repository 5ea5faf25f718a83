//! The adversary problem: given a decision policy, find the budget-feasible
//! adversary policy and interval-bounded probabilities that minimize the
//! robust ratio `z(π;p) / z(π′;p)` or maximize the regret
//! `z(π′;p) − z(π;p)`.
//!
//! Only interval endpoints need to be considered (see
//! [`gen_pp_actions`]), which turns the problem into a budgeted tree DP over
//! per-edge policy-parameter actions. Each subtree table maps a pair
//! (adversary value, decision value) to the cheapest adversary choice that
//! reaches it. Exact tables grow exponentially; the rounded DP groups values
//! into bins of width `K_u` and, with `K_u = μ·r_u` and `μ = ε/(2+ε)`,
//! returns a pair within a factor `1+ε` of the optimal ratio.

mod actions;
mod table;

use alloc::vec;
use alloc::vec::Vec;

pub use actions::{gen_pp_actions, PolicyParamAction};
pub use table::{combine_tables, ChildInput, CombineOptions, DpTable, Entry, Link, Quantizer};

use crate::error::CoreError;
use crate::model::{binarize, evaluate, policy_cost, NetworkInstance, NodeIndex, NodeMapping, ParamVector, Policy};
use crate::within_budget;
use actions::PpStep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Maximize `z(π;p) / z(π′;p)` over policies; the adversary minimizes it.
    Ratio,
    /// Minimize `z(π′;p) − z(π;p)` over policies; the adversary maximizes it.
    Regret,
}

/// How the adversary DP treats values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rounding {
    /// No rounding: exact but exponential in the worst case.
    Exact,
    /// `K_u = μ·r_u` with `μ = ε/(2+ε)`; a `(1+ε)` guarantee for the ratio.
    Epsilon(f64),
    /// `K_u = K` at every node; fast, no guarantee.
    Constant(f64),
}

impl Rounding {
    pub fn check(&self) -> Result<(), CoreError> {
        match *self {
            Rounding::Exact => Ok(()),
            Rounding::Epsilon(x) | Rounding::Constant(x) => {
                if x.is_finite() && x > 0.0 {
                    Ok(())
                } else {
                    Err(CoreError::InvalidRounding(x))
                }
            }
        }
    }

    /// `μ = ε/(2+ε)` in epsilon mode.
    pub fn mu(&self) -> Option<f64> {
        match *self {
            Rounding::Epsilon(eps) => Some(eps / (2.0 + eps)),
            _ => None,
        }
    }

    /// Approximation slack `ε` certified for the ratio objective.
    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            Rounding::Epsilon(eps) => Some(eps),
            _ => None,
        }
    }

    /// Grid width of every node of a binarized instance.
    ///
    /// Binarization replaces a node `u` with `k > 2` children by a chain of
    /// `u` and `k − 2` zero-reward dummies. In epsilon mode the whole chain
    /// shares the rounding loss `μ·r_u` allowed at `u`: each of its `k − 1`
    /// nodes uses the grid `μ·r_u/(k − 1)`. Chains of zero-reward nodes are
    /// not rounded. In constant mode every node uses `K`.
    pub fn grids(&self, instance: &NetworkInstance) -> Vec<Option<f64>> {
        let n = instance.len();
        match *self {
            Rounding::Exact => vec![None; n],
            Rounding::Constant(k) => vec![Some(k); n],
            Rounding::Epsilon(eps) => {
                let mu = eps / (2.0 + eps);
                let mut owner: Vec<NodeIndex> = (0..n).collect();
                for &v in instance.preorder() {
                    if instance.is_dummy(v) {
                        owner[v] = owner[instance.parent(v).expect("dummies have parents")];
                    }
                }
                let mut chain = vec![0usize; n];
                for &o in &owner {
                    chain[o] += 1;
                }
                owner
                    .iter()
                    .map(|&o| {
                        let k = mu * instance.reward(o) / chain[o] as f64;
                        (k > 0.0).then_some(k)
                    })
                    .collect()
            }
        }
    }
}

/// Optional pruning inside the DP; all off by default.
///
/// Budget and dominance pruning never change the table optimum. Hull pruning
/// keeps only pairs on the lower-right convex hull of the pairs that cost no
/// more. It keeps the exact optimum of exact tables, and with epsilon rounding
/// the returned pair still satisfies the `1+ε` bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DpOptions {
    /// Drop table entries dominated in (adversary value, decision value, cost).
    pub dominance_pruning: bool,
    /// Drop partial adversary choices that already exceed the budget.
    pub budget_pruning: bool,
    pub hull_pruning: bool,
}

impl DpOptions {
    pub const PRUNED: DpOptions = DpOptions { dominance_pruning: true, budget_pruning: true, hull_pruning: false };
    pub const HULL: DpOptions = DpOptions { dominance_pruning: true, budget_pruning: true, hull_pruning: true };
}

/// An adversary policy-parameter pair and its objective against a decision
/// policy.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryResult {
    pub objective: Objective,
    pub policy: Policy,
    pub params: ParamVector,
    /// Objective recomputed from `policy` and `params` by exact evaluation.
    pub value: f64,
    /// Objective as seen by the (possibly rounded) DP table.
    pub table_value: f64,
    pub cost: f64,
    /// `z(π;p)` for the decision policy.
    pub decision_value: f64,
    /// `z(π′;p)` for the adversary policy.
    pub adversary_value: f64,
}

impl AdversaryResult {
    /// Robust ratio of this certificate, whatever objective produced it.
    pub fn ratio(&self) -> f64 {
        self.decision_value / self.adversary_value
    }

    /// Regret of this certificate, whatever objective produced it.
    pub fn regret(&self) -> f64 {
        self.adversary_value - self.decision_value
    }
}

/// Every table of one DP run over a binary instance.
#[derive(Debug, Clone)]
pub struct DpTables {
    objective: Objective,
    tables: Vec<DpTable>,
    pp: Vec<Vec<PolicyParamAction>>,
    root: NodeIndex,
}

impl DpTables {
    pub fn table(&self, v: NodeIndex) -> &DpTable {
        &self.tables[v]
    }

    pub fn root_table(&self) -> &DpTable {
        &self.tables[self.root]
    }

    /// Policy-parameter actions available on the edge into `v`.
    pub fn pp_actions(&self, v: NodeIndex) -> &[PolicyParamAction] {
        &self.pp[v]
    }

    /// Index of the best root entry within the budget: minimal rounded ratio
    /// or maximal rounded regret, first entry on ties.
    pub fn best_entry(&self, budget: f64) -> Option<usize> {
        let entries = self.root_table().entries();
        let feasible = entries.iter().enumerate().filter(|(_, e)| within_budget(e.cost, budget));
        let mut best: Option<(usize, f64)> = None;
        let mut fallback = None;
        for (i, e) in feasible {
            fallback.get_or_insert(i);
            let score = match self.objective {
                Objective::Ratio if e.adversary_value > 0.0 => e.decision_value / e.adversary_value,
                Objective::Ratio => continue,
                Objective::Regret => -(e.adversary_value - e.decision_value),
            };
            if best.map_or(true, |(_, s)| score < s) {
                best = Some((i, score));
            }
        }
        best.map(|(i, _)| i).or(fallback)
    }

    /// Rebuilds the adversary policy and parameters behind a root entry.
    pub fn reconstruct(&self, instance: &NetworkInstance, entry: usize) -> (Policy, ParamVector) {
        self.reconstruct_at(instance, self.root, entry)
    }

    /// Rebuilds the subtree choice behind entry `entry` of node `node`; edges
    /// outside the subtree keep the null action at lower bounds.
    pub fn reconstruct_at(&self, instance: &NetworkInstance, node: NodeIndex, entry: usize) -> (Policy, ParamVector) {
        let mut policy = Policy::null(instance);
        let mut params = ParamVector::lower_bounds(instance);
        let mut stack = vec![(node, entry)];
        while let Some((u, idx)) = stack.pop() {
            let e = &self.tables[u].entries()[idx];
            for (slot, &c) in instance.children(u).iter().enumerate() {
                let link = e.links[slot].expect("entry links every child");
                let pp = &self.pp[c][link.pp as usize];
                policy.set(c, pp.adversary_action);
                params.set_row(c, pp.probs.clone());
                stack.push((c, link.entry as usize));
            }
        }
        (policy, params)
    }
}

/// Builds all DP tables bottom-up for a binary instance.
pub fn build_tables(
    instance: &NetworkInstance,
    decision: &Policy,
    objective: Objective,
    rounding: Rounding,
    options: DpOptions,
) -> Result<DpTables, CoreError> {
    instance.require_binary()?;
    rounding.check()?;
    decision.check(instance)?;

    let n = instance.len();
    let mut pp: Vec<Vec<PolicyParamAction>> = vec![Vec::new(); n];
    let mut steps: Vec<Vec<PpStep>> = vec![Vec::new(); n];
    for v in instance.edges() {
        let actions = instance.actions(v);
        let j = decision.action(v);
        pp[v] = gen_pp_actions(actions, j);
        steps[v] = pp[v].iter().map(|a| a.step(actions, j)).collect();
    }

    let combine = CombineOptions {
        budget: options.budget_pruning.then_some(instance.budget()),
        dominance: options.dominance_pruning,
        hull: options.hull_pruning,
    };
    let grids = rounding.grids(instance);
    let mut tables: Vec<DpTable> = vec![DpTable::default(); n];
    for &u in instance.preorder().iter().rev() {
        let quantizer = Quantizer { grid: grids[u], objective };
        let children: Vec<ChildInput<'_>> = instance
            .children(u)
            .iter()
            .map(|&c| ChildInput { table: &tables[c], steps: &steps[c] })
            .collect();
        let table = combine_tables(instance.reward(u), quantizer, &children, combine);
        tables[u] = table;
    }
    Ok(DpTables { objective, tables, pp, root: instance.root() })
}

/// Solves the adversary problem on a binary instance.
pub fn solve_with(
    instance: &NetworkInstance,
    decision: &Policy,
    objective: Objective,
    rounding: Rounding,
    options: DpOptions,
) -> Result<AdversaryResult, CoreError> {
    let tables = build_tables(instance, decision, objective, rounding, options)?;
    // The all-null adversary costs nothing, so some root entry is feasible.
    let best = tables.best_entry(instance.budget()).expect("null adversary is always feasible");
    let entry = tables.root_table().entries()[best];
    let (policy, params) = tables.reconstruct(instance, best);
    let table_value = match objective {
        Objective::Ratio => entry.decision_value / entry.adversary_value,
        Objective::Regret => entry.adversary_value - entry.decision_value,
    };
    certificate(instance, decision, objective, policy, params, table_value)
}

fn certificate(
    instance: &NetworkInstance,
    decision: &Policy,
    objective: Objective,
    policy: Policy,
    params: ParamVector,
    table_value: f64,
) -> Result<AdversaryResult, CoreError> {
    let decision_value = evaluate(instance, decision, &params)?;
    let adversary_value = evaluate(instance, &policy, &params)?;
    let value = match objective {
        Objective::Ratio => decision_value / adversary_value,
        Objective::Regret => adversary_value - decision_value,
    };
    let cost = policy_cost(instance, &policy);
    Ok(AdversaryResult { objective, policy, params, value, table_value, cost, decision_value, adversary_value })
}

/// Exact adversary on a binary instance.
pub fn solve_exact(instance: &NetworkInstance, decision: &Policy, objective: Objective) -> Result<AdversaryResult, CoreError> {
    solve_with(instance, decision, objective, Rounding::Exact, DpOptions::default())
}

/// Rounded-DP adversary on a binary instance.
pub fn solve_rdp(
    instance: &NetworkInstance,
    decision: &Policy,
    objective: Objective,
    rounding: Rounding,
) -> Result<AdversaryResult, CoreError> {
    if rounding == Rounding::Exact {
        return Err(CoreError::InvalidRounding(0.0));
    }
    solve_with(instance, decision, objective, rounding, DpOptions::default())
}

/// An adversary bound to one instance of any shape.
///
/// Binarizes once, then answers queries for decision policies expressed on
/// the original instance; results come back on the original instance too.
#[derive(Debug, Clone)]
pub struct AdversaryOracle {
    original: NetworkInstance,
    binary: NetworkInstance,
    mapping: NodeMapping,
    rounding: Rounding,
    options: DpOptions,
}

impl AdversaryOracle {
    pub fn new(instance: &NetworkInstance, rounding: Rounding, options: DpOptions) -> Result<Self, CoreError> {
        rounding.check()?;
        let (binary, mapping) = binarize(instance);
        Ok(Self { original: instance.clone(), binary, mapping, rounding, options })
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    pub fn instance(&self) -> &NetworkInstance {
        &self.original
    }

    pub fn solve(&self, decision: &Policy, objective: Objective) -> Result<AdversaryResult, CoreError> {
        decision.check(&self.original)?;
        let lifted = self.mapping.lift_policy(decision);
        let found = solve_with(&self.binary, &lifted, objective, self.rounding, self.options)?;
        let policy = self.mapping.project_policy(&found.policy);
        let params = self.mapping.project_params(&found.params);
        certificate(&self.original, decision, objective, policy, params, found.table_value)
    }
}
