//! Brute-force reference solvers for testing.
//!
//! Everything here enumerates: policies, interval-bound vectors, paths. None
//! of it shares code with the solvers under test beyond the instance types.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riverguard_core::model::{
    Action, EdgeSpec, InstanceSpec, NetworkInstance, NodeIndex, NodeSpec, ParamVector, Policy,
};
use riverguard_core::within_budget;

/// Shape of a random test instance.
#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub nodes: usize,
    /// Cap on children per node; `Some(2)` yields binary trees.
    pub max_children: Option<usize>,
    /// Largest action-set size per edge (null action included).
    pub max_actions: usize,
    /// Budget as a fraction of the summed cheapest repair costs.
    pub budget_fraction: f64,
    /// Probability that a non-root reward is exactly zero.
    pub zero_reward_prob: f64,
}

impl RandomSpec {
    pub fn new(nodes: usize, max_actions: usize) -> Self {
        Self { nodes, max_children: None, max_actions, budget_fraction: 0.4, zero_reward_prob: 0.1 }
    }

    pub fn binary(mut self) -> Self {
        self.max_children = Some(2);
        self
    }
}

fn random_interval(rng: &mut ChaCha8Rng, floor: f64) -> (f64, f64) {
    if rng.random_bool(0.15) {
        let p = rng.random_range(floor..=1.0);
        return (p, p);
    }
    let a = rng.random_range(floor..=1.0);
    let b = rng.random_range(floor..=1.0);
    (a.min(b), a.max(b))
}

/// A random valid instance; the same seed always gives the same instance.
pub fn random_instance(seed: u64, spec: &RandomSpec) -> NetworkInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.nodes.max(1);
    let mut nodes = vec![NodeSpec { id: 0, reward: rng.random_range(0.5..3.0) }];
    let mut kids = vec![0usize];
    let mut edges = Vec::new();
    let mut repair_total = 0.0;
    for v in 1..n {
        let open: Vec<usize> =
            (0..v).filter(|&u| spec.max_children.map_or(true, |m| kids[u] < m)).collect();
        let parent = open[rng.random_range(0..open.len())];
        kids[parent] += 1;
        kids.push(0);
        let reward = if rng.random_bool(spec.zero_reward_prob) { 0.0 } else { rng.random_range(0.1..3.0) };
        nodes.push(NodeSpec { id: v as u64, reward });

        let k = rng.random_range(1..=spec.max_actions.max(1));
        let (lo, hi) = random_interval(&mut rng, 0.0);
        let mut actions = vec![Action::new(0.0, lo, hi)];
        let mut cheapest = f64::INFINITY;
        for _ in 1..k {
            let cost = f64::from(rng.random_range(1..=4u32));
            let (lo, hi) = random_interval(&mut rng, 0.3);
            actions.push(Action::new(cost, lo, hi));
            cheapest = cheapest.min(cost);
        }
        if cheapest.is_finite() {
            repair_total += cheapest;
        }
        edges.push(EdgeSpec { parent: parent as u64, child: v as u64, actions });
    }
    let budget = (spec.budget_fraction * repair_total).floor();
    NetworkInstance::new(&InstanceSpec { root: 0, budget, nodes, edges }).expect("generated instance is valid")
}

/// Objective value by enumerating every root-to-node path independently.
pub fn path_value(instance: &NetworkInstance, policy: &Policy, params: &ParamVector) -> f64 {
    let mut total = 0.0;
    for v in 0..instance.len() {
        let mut acc = 1.0;
        let mut u = v;
        while let Some(p) = instance.parent(u) {
            acc *= params.prob(u, policy.action(u));
            u = p;
        }
        total += instance.reward(v) * acc;
    }
    total
}

pub fn cost_of(instance: &NetworkInstance, policy: &Policy) -> f64 {
    (0..instance.len())
        .filter(|&v| instance.parent(v).is_some())
        .map(|v| instance.actions(v)[policy.action(v)].cost)
        .sum()
}

/// Every policy (feasible or not), in lexicographic order of child index.
pub fn all_policies(instance: &NetworkInstance) -> Vec<Policy> {
    let edges: Vec<NodeIndex> = (0..instance.len()).filter(|&v| instance.parent(v).is_some()).collect();
    let mut out = Vec::new();
    let mut current = vec![0usize; instance.len()];
    loop {
        out.push(Policy::from_actions(current.clone()));
        let mut k = edges.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            let e = edges[k];
            current[e] += 1;
            if current[e] < instance.actions(e).len() {
                break;
            }
            current[e] = 0;
        }
    }
}

pub fn feasible_policies(instance: &NetworkInstance) -> Vec<Policy> {
    all_policies(instance)
        .into_iter()
        .filter(|p| within_budget(cost_of(instance, p), instance.budget()))
        .collect()
}

/// Best robust ratio and regret an adversary can force against `decision`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryOptimum {
    pub min_ratio: f64,
    pub max_regret: f64,
}

#[derive(Clone, Copy)]
struct EdgeOption {
    p_decision: f64,
    p_adversary: f64,
    cost: f64,
}

/// Every per-edge joint choice: any adversary action, and each probability
/// used by either player at its lower or upper bound.
fn bound_options(actions: &[Action], decision: usize) -> Vec<EdgeOption> {
    let mut out = Vec::new();
    for (i, a) in actions.iter().enumerate() {
        if i == decision {
            for p in [a.p_low, a.p_high] {
                out.push(EdgeOption { p_decision: p, p_adversary: p, cost: a.cost });
            }
        } else {
            let d = actions[decision];
            for pa in [a.p_low, a.p_high] {
                for pd in [d.p_low, d.p_high] {
                    out.push(EdgeOption { p_decision: pd, p_adversary: pa, cost: a.cost });
                }
            }
        }
    }
    out
}

struct Enumerator<'a> {
    instance: &'a NetworkInstance,
    order: Vec<NodeIndex>,
    options: Vec<Vec<EdgeOption>>,
    acc_d: Vec<f64>,
    acc_a: Vec<f64>,
    budget: Option<f64>,
}

impl<'a> Enumerator<'a> {
    fn new(instance: &'a NetworkInstance, options: Vec<Vec<EdgeOption>>, budget: Option<f64>) -> Self {
        // Parents before children.
        let order: Vec<NodeIndex> = instance.preorder()[1..].to_vec();
        let mut acc_d = vec![0.0; instance.len()];
        let mut acc_a = vec![0.0; instance.len()];
        acc_d[instance.root()] = 1.0;
        acc_a[instance.root()] = 1.0;
        Self { instance, order, options, acc_d, acc_a, budget }
    }

    fn run(&mut self, visit: &mut impl FnMut(f64, f64, f64)) {
        let r = self.instance.reward(self.instance.root());
        self.step(0, r, r, 0.0, visit);
    }

    fn step(&mut self, k: usize, zd: f64, za: f64, cost: f64, visit: &mut impl FnMut(f64, f64, f64)) {
        if k == self.order.len() {
            visit(za, zd, cost);
            return;
        }
        let v = self.order[k];
        let p = self.instance.parent(v).unwrap();
        for i in 0..self.options[v].len() {
            let o = self.options[v][i];
            let c = cost + o.cost;
            if let Some(b) = self.budget {
                if !within_budget(c, b) {
                    continue;
                }
            }
            self.acc_d[v] = self.acc_d[p] * o.p_decision;
            self.acc_a[v] = self.acc_a[p] * o.p_adversary;
            let r = self.instance.reward(v);
            self.step(k + 1, zd + r * self.acc_d[v], za + r * self.acc_a[v], c, visit);
        }
    }
}

/// Exhaustive adversary over all budget-feasible policies and all interval
/// bound vectors.
pub fn adversary_brute(instance: &NetworkInstance, decision: &Policy) -> AdversaryOptimum {
    let options = (0..instance.len())
        .map(|v| {
            if instance.parent(v).is_some() {
                bound_options(instance.actions(v), decision.action(v))
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut best = AdversaryOptimum { min_ratio: f64::INFINITY, max_regret: f64::NEG_INFINITY };
    Enumerator::new(instance, options, Some(instance.budget())).run(&mut |za, zd, _| {
        best.min_ratio = best.min_ratio.min(zd / za);
        best.max_regret = best.max_regret.max(za - zd);
    });
    best
}

/// Every (adversary value, decision value, cost) reachable by choosing, per
/// edge, one of the `|A_e| + 1` endpoint-structured joint actions, ignoring
/// the budget.
pub fn structured_pairs(instance: &NetworkInstance, decision: &Policy) -> Vec<(f64, f64, f64)> {
    let options = (0..instance.len())
        .map(|v| {
            if instance.parent(v).is_none() {
                return Vec::new();
            }
            let actions = instance.actions(v);
            let j = decision.action(v);
            let mut out = Vec::new();
            for (i, a) in actions.iter().enumerate() {
                if i == j {
                    out.push(EdgeOption { p_decision: a.p_low, p_adversary: a.p_low, cost: a.cost });
                    out.push(EdgeOption { p_decision: a.p_high, p_adversary: a.p_high, cost: a.cost });
                } else {
                    out.push(EdgeOption { p_decision: actions[j].p_low, p_adversary: a.p_high, cost: a.cost });
                }
            }
            out
        })
        .collect();
    let mut out = Vec::new();
    Enumerator::new(instance, options, None).run(&mut |za, zd, c| out.push((za, zd, c)));
    out
}

/// Best budget-feasible value for fixed probabilities, by enumeration.
pub fn point_brute(instance: &NetworkInstance, params: &ParamVector) -> f64 {
    feasible_policies(instance)
        .iter()
        .map(|p| path_value(instance, p, params))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Scenario of a finite adversary: probabilities and the adversary value.
pub struct BruteScenario<'a> {
    pub params: &'a ParamVector,
    pub adversary_value: f64,
}

/// Max over feasible policies of the worst scenario score: the minimum
/// ratio (`ratio == true`) or minus the maximum regret.
pub fn master_brute(instance: &NetworkInstance, scenarios: &[BruteScenario<'_>], ratio: bool) -> f64 {
    feasible_policies(instance)
        .iter()
        .map(|pi| {
            scenarios
                .iter()
                .map(|s| {
                    let z = path_value(instance, pi, s.params);
                    if ratio {
                        z / s.adversary_value
                    } else {
                        z - s.adversary_value
                    }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Adversary optimum on a single-edge instance by grid search over every
/// action's probability at the given step (interval endpoints included).
pub fn grid_adversary_single_edge(instance: &NetworkInstance, decision: &Policy, step: f64) -> AdversaryOptimum {
    assert_eq!(instance.len(), 2, "single-edge instances only");
    let root = instance.root();
    let leaf = 1 - root;
    let (r0, r1) = (instance.reward(root), instance.reward(leaf));
    let actions = instance.actions(leaf);
    let grid = |a: &Action| -> Vec<f64> {
        let mut out = vec![a.p_low];
        let mut k = 1.0;
        while a.p_low + k * step < a.p_high {
            out.push(a.p_low + k * step);
            k += 1.0;
        }
        out.push(a.p_high);
        out
    };
    let j = decision.action(leaf);
    let mut best = AdversaryOptimum { min_ratio: f64::INFINITY, max_regret: f64::NEG_INFINITY };
    for (i, a) in actions.iter().enumerate() {
        if !within_budget(a.cost, instance.budget()) {
            continue;
        }
        let own = grid(a);
        let theirs = if i == j { vec![f64::NAN] } else { grid(&actions[j]) };
        for &pa in &own {
            for &pd in &theirs {
                let pd = if i == j { pa } else { pd };
                let (za, zd) = (r0 + r1 * pa, r0 + r1 * pd);
                best.min_ratio = best.min_ratio.min(zd / za);
                best.max_regret = best.max_regret.max(za - zd);
            }
        }
    }
    best
}
