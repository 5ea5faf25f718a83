//! Network instances, policies and parameter vectors.
//!
//! Nodes are addressed by a dense index (`NodeIndex`) internally and by a
//! caller-chosen `u64` label externally. Every non-root node has exactly one
//! parent, so an edge is identified with its child node: `actions(v)` is the
//! action set of the barrier between `parent(v)` and `v`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::CoreError;

pub type NodeIndex = usize;

/// One candidate action on a barrier: its cost and the interval its passage
/// probability is known to lie in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub cost: f64,
    pub p_low: f64,
    pub p_high: f64,
}

impl Action {
    pub const fn new(cost: f64, p_low: f64, p_high: f64) -> Self {
        Self { cost, p_low, p_high }
    }

    /// A free action with a point passage probability.
    pub const fn fixed(p: f64) -> Self {
        Self::new(0.0, p, p)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.p_low + self.p_high)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.p_low <= p && p <= self.p_high
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: u64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub parent: u64,
    pub child: u64,
    /// Action 0 is the null action and must cost nothing.
    pub actions: Vec<Action>,
}

/// An unvalidated instance description, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub root: u64,
    pub budget: f64,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

/// A single reason an [`InstanceSpec`] is not a valid network.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyNetwork,
    DuplicateNode(u64),
    UnknownRoot(u64),
    UnknownNode { parent: u64, child: u64, missing: u64 },
    SelfLoop(u64),
    MultipleParents(u64),
    RootHasParent(u64),
    Cycle(u64),
    Unreachable(u64),
    InvalidReward(u64),
    RootRewardNotPositive(u64),
    InvalidBudget,
    EmptyActionSet { parent: u64, child: u64 },
    NullActionCost { parent: u64, child: u64 },
    InvalidCost { parent: u64, child: u64, action: usize },
    InvertedInterval { parent: u64, child: u64, action: usize },
    IntervalOutOfRange { parent: u64, child: u64, action: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::EmptyNetwork => write!(f, "network has no nodes"),
            Violation::DuplicateNode(v) => write!(f, "duplicate node id {v}"),
            Violation::UnknownRoot(v) => write!(f, "root {v} is not a node"),
            Violation::UnknownNode { parent, child, missing } => {
                write!(f, "edge ({parent},{child}) references unknown node {missing}")
            }
            Violation::SelfLoop(v) => write!(f, "self loop at {v}"),
            Violation::MultipleParents(v) => write!(f, "node {v} has more than one parent"),
            Violation::RootHasParent(v) => write!(f, "root {v} has a parent"),
            Violation::Cycle(v) => write!(f, "cycle detected at {v}"),
            Violation::Unreachable(v) => write!(f, "node {v} is unreachable from the root"),
            Violation::InvalidReward(v) => write!(f, "reward of node {v} is negative or not finite"),
            Violation::RootRewardNotPositive(v) => write!(f, "root {v} must have a positive reward"),
            Violation::InvalidBudget => write!(f, "budget must be finite and nonnegative"),
            Violation::EmptyActionSet { parent, child } => {
                write!(f, "edge ({parent},{child}) has no actions")
            }
            Violation::NullActionCost { parent, child } => {
                write!(f, "null action on ({parent},{child}) must cost 0")
            }
            Violation::InvalidCost { parent, child, action } => {
                write!(f, "negative or non-finite cost on ({parent},{child}) action {action}")
            }
            Violation::InvertedInterval { parent, child, action } => {
                write!(f, "inverted interval on ({parent},{child}) action {action}")
            }
            Violation::IntervalOutOfRange { parent, child, action } => {
                write!(f, "interval outside [0,1] on ({parent},{child}) action {action}")
            }
        }
    }
}

/// Checks every structural and numeric invariant of a network description.
///
/// Returns one entry per violation; an empty list means the spec can be
/// turned into a [`NetworkInstance`].
pub fn validate(spec: &InstanceSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if spec.nodes.is_empty() {
        out.push(Violation::EmptyNetwork);
        return out;
    }
    if !(spec.budget.is_finite() && spec.budget >= 0.0) {
        out.push(Violation::InvalidBudget);
    }

    let mut index: BTreeMap<u64, usize> = BTreeMap::new();
    for (i, node) in spec.nodes.iter().enumerate() {
        if index.insert(node.id, i).is_some() {
            out.push(Violation::DuplicateNode(node.id));
        }
        if !(node.reward.is_finite() && node.reward >= 0.0) {
            out.push(Violation::InvalidReward(node.id));
        }
    }
    let root = match index.get(&spec.root) {
        Some(&r) => Some(r),
        None => {
            out.push(Violation::UnknownRoot(spec.root));
            None
        }
    };
    if let Some(r) = root {
        let reward = spec.nodes[r].reward;
        if reward.is_finite() && reward <= 0.0 {
            out.push(Violation::RootRewardNotPositive(spec.root));
        }
    }

    let n = spec.nodes.len();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for edge in &spec.edges {
        let (p, c) = (edge.parent, edge.child);
        check_actions(edge, &mut out);
        let pi = index.get(&p).copied();
        let ci = index.get(&c).copied();
        for (id, found) in [(p, pi), (c, ci)] {
            if found.is_none() {
                out.push(Violation::UnknownNode { parent: p, child: c, missing: id });
            }
        }
        let (Some(pi), Some(ci)) = (pi, ci) else { continue };
        if pi == ci {
            out.push(Violation::SelfLoop(c));
            continue;
        }
        if Some(ci) == root {
            out.push(Violation::RootHasParent(c));
        }
        if parent[ci].is_some() {
            out.push(Violation::MultipleParents(c));
        } else {
            parent[ci] = Some(pi);
        }
        children[pi].push(ci);
    }

    // Walk child links from the root; an edge back into an already visited
    // node closes a cycle at its tail.
    let mut state = vec![0u8; n]; // 0 = new, 1 = on stack, 2 = done
    let walk = |start: usize, state: &mut [u8], out: &mut Vec<Violation>| {
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(&c) = children[u].get(*next) {
                *next += 1;
                match state[c] {
                    0 => {
                        state[c] = 1;
                        stack.push((c, 0));
                    }
                    1 => out.push(Violation::Cycle(spec.nodes[u].id)),
                    _ => {}
                }
            } else {
                state[u] = 2;
                stack.pop();
            }
        }
    };
    if let Some(r) = root {
        walk(r, &mut state, &mut out);
    }
    let reached: Vec<bool> = state.iter().map(|&s| s == 2).collect();
    for v in 0..n {
        if !reached[v] {
            out.push(Violation::Unreachable(spec.nodes[v].id));
        }
        if state[v] == 0 {
            walk(v, &mut state, &mut out);
        }
    }
    out
}

fn check_actions(edge: &EdgeSpec, out: &mut Vec<Violation>) {
    let (parent, child) = (edge.parent, edge.child);
    if edge.actions.is_empty() {
        out.push(Violation::EmptyActionSet { parent, child });
        return;
    }
    if edge.actions[0].cost != 0.0 {
        out.push(Violation::NullActionCost { parent, child });
    }
    for (action, a) in edge.actions.iter().enumerate() {
        if !(a.cost.is_finite() && a.cost >= 0.0) {
            out.push(Violation::InvalidCost { parent, child, action });
        }
        let finite = a.p_low.is_finite() && a.p_high.is_finite();
        if !finite || a.p_low < 0.0 || a.p_high > 1.0 {
            out.push(Violation::IntervalOutOfRange { parent, child, action });
        }
        if finite && a.p_low > a.p_high {
            out.push(Violation::InvertedInterval { parent, child, action });
        }
    }
}

/// A validated rooted tree with rewards, barrier actions and a budget.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    labels: Vec<u64>,
    rewards: Vec<f64>,
    dummy: Vec<bool>,
    parent: Vec<Option<NodeIndex>>,
    children: Vec<Vec<NodeIndex>>,
    actions: Vec<Vec<Action>>,
    root: NodeIndex,
    budget: f64,
    preorder: Vec<NodeIndex>,
}

impl NetworkInstance {
    pub fn new(spec: &InstanceSpec) -> Result<Self, CoreError> {
        let violations = validate(spec);
        if !violations.is_empty() {
            return Err(CoreError::InvalidInstance(violations));
        }
        let n = spec.nodes.len();
        let index: BTreeMap<u64, usize> =
            spec.nodes.iter().enumerate().map(|(i, node)| (node.id, i)).collect();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut actions = vec![Vec::new(); n];
        for edge in &spec.edges {
            let (p, c) = (index[&edge.parent], index[&edge.child]);
            parent[c] = Some(p);
            children[p].push(c);
            actions[c] = edge.actions.clone();
        }
        Ok(Self::assemble(
            spec.nodes.iter().map(|node| node.id).collect(),
            spec.nodes.iter().map(|node| node.reward).collect(),
            vec![false; n],
            parent,
            children,
            actions,
            index[&spec.root],
            spec.budget,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        labels: Vec<u64>,
        rewards: Vec<f64>,
        dummy: Vec<bool>,
        parent: Vec<Option<NodeIndex>>,
        children: Vec<Vec<NodeIndex>>,
        actions: Vec<Vec<Action>>,
        root: NodeIndex,
        budget: f64,
    ) -> Self {
        let mut preorder = Vec::with_capacity(labels.len());
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            preorder.push(u);
            stack.extend(children[u].iter().rev().copied());
        }
        Self { labels, rewards, dummy, parent, children, actions, root, budget, preorder }
    }

    /// Rebuilds the description this instance was created from (dummy nodes
    /// included, as ordinary nodes).
    pub fn to_spec(&self) -> InstanceSpec {
        InstanceSpec {
            root: self.labels[self.root],
            budget: self.budget,
            nodes: (0..self.len())
                .map(|v| NodeSpec { id: self.labels[v], reward: self.rewards[v] })
                .collect(),
            edges: self
                .edges()
                .map(|v| EdgeSpec {
                    parent: self.labels[self.parent[v].unwrap()],
                    child: self.labels[v],
                    actions: self.actions[v].clone(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn root(&self) -> NodeIndex {
        self.root
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// The same network with a different budget.
    pub fn with_budget(&self, budget: f64) -> Self {
        Self { budget, ..self.clone() }
    }

    pub fn label(&self, v: NodeIndex) -> u64 {
        self.labels[v]
    }

    pub fn index_of(&self, label: u64) -> Option<NodeIndex> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn reward(&self, v: NodeIndex) -> f64 {
        self.rewards[v]
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// True for zero-reward nodes inserted by [`binarize`].
    pub fn is_dummy(&self, v: NodeIndex) -> bool {
        self.dummy[v]
    }

    pub fn parent(&self, v: NodeIndex) -> Option<NodeIndex> {
        self.parent[v]
    }

    pub fn children(&self, v: NodeIndex) -> &[NodeIndex] {
        &self.children[v]
    }

    /// Action set of the edge into `v`; empty for the root.
    pub fn actions(&self, v: NodeIndex) -> &[Action] {
        &self.actions[v]
    }

    /// Nodes in root-first order; every parent precedes its children.
    pub fn preorder(&self) -> &[NodeIndex] {
        &self.preorder
    }

    /// Edges (identified by their child node) in root-first order.
    pub fn edges(&self) -> impl Iterator<Item = NodeIndex> + '_ {
        self.preorder[1..].iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.len() - 1
    }

    /// Whether every node has at most two children.
    pub fn is_binary(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 2)
    }

    pub fn require_binary(&self) -> Result<(), CoreError> {
        match (0..self.len()).find(|&v| self.children[v].len() > 2) {
            Some(v) => Err(CoreError::NotBinary { node: self.labels[v], children: self.children[v].len() }),
            None => Ok(()),
        }
    }

    /// Number of nodes in each node's subtree.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1usize; self.len()];
        for &v in self.preorder.iter().rev() {
            if let Some(p) = self.parent[v] {
                size[p] += size[v];
            }
        }
        size
    }

    /// Total reward in each node's subtree.
    pub fn subtree_rewards(&self) -> Vec<f64> {
        let mut mass = self.rewards.clone();
        for &v in self.preorder.iter().rev() {
            if let Some(p) = self.parent[v] {
                mass[p] += mass[v];
            }
        }
        mass
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.len()];
        for &v in &self.preorder[1..] {
            depth[v] = depth[self.parent[v].unwrap()] + 1;
        }
        depth
    }

    /// Sum over edges of the cheapest non-null action; zero for edges that
    /// only offer the null action.
    pub fn total_repair_cost(&self) -> f64 {
        self.edges()
            .map(|v| {
                self.actions[v][1..].iter().map(|a| a.cost).fold(f64::INFINITY, f64::min)
            })
            .filter(|c| c.is_finite())
            .sum()
    }
}

/// One action index per edge, indexed by child node. The root slot is unused
/// and always 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Policy(Vec<usize>);

impl Policy {
    /// Every edge takes its null action.
    pub fn null(instance: &NetworkInstance) -> Self {
        Self(vec![0; instance.len()])
    }

    pub fn from_actions(actions: Vec<usize>) -> Self {
        Self(actions)
    }

    pub fn action(&self, edge: NodeIndex) -> usize {
        self.0[edge]
    }

    pub fn set(&mut self, edge: NodeIndex, action: usize) {
        self.0[edge] = action;
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn check(&self, instance: &NetworkInstance) -> Result<(), CoreError> {
        if self.0.len() != instance.len() {
            return Err(CoreError::PolicyShape { expected: instance.len(), found: self.0.len() });
        }
        for v in instance.edges() {
            if self.0[v] >= instance.actions(v).len() {
                return Err(CoreError::ActionOutOfRange { edge: instance.label(v), action: self.0[v] });
            }
        }
        Ok(())
    }
}

/// One passage probability per (edge, action), indexed `[child][action]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<Vec<f64>>);

impl ParamVector {
    fn from_fn(instance: &NetworkInstance, f: impl Fn(&Action) -> f64) -> Self {
        Self((0..instance.len()).map(|v| instance.actions(v).iter().map(&f).collect()).collect())
    }

    pub fn midpoints(instance: &NetworkInstance) -> Self {
        Self::from_fn(instance, Action::midpoint)
    }

    pub fn lower_bounds(instance: &NetworkInstance) -> Self {
        Self::from_fn(instance, |a| a.p_low)
    }

    pub fn upper_bounds(instance: &NetworkInstance) -> Self {
        Self::from_fn(instance, |a| a.p_high)
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Self(rows)
    }

    pub fn prob(&self, edge: NodeIndex, action: usize) -> f64 {
        self.0[edge][action]
    }

    pub fn set(&mut self, edge: NodeIndex, action: usize, prob: f64) {
        self.0[edge][action] = prob;
    }

    pub fn row(&self, edge: NodeIndex) -> &[f64] {
        &self.0[edge]
    }

    pub fn set_row(&mut self, edge: NodeIndex, row: Vec<f64>) {
        self.0[edge] = row;
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }

    /// Checks shape and that every probability lies inside its interval.
    pub fn check(&self, instance: &NetworkInstance) -> Result<(), CoreError> {
        if self.0.len() != instance.len() {
            return Err(CoreError::ParamShape { edge: instance.label(instance.root()) });
        }
        for v in instance.edges() {
            let actions = instance.actions(v);
            if self.0[v].len() != actions.len() {
                return Err(CoreError::ParamShape { edge: instance.label(v) });
            }
            for (i, (a, &p)) in actions.iter().zip(&self.0[v]).enumerate() {
                if !a.contains(p) {
                    return Err(CoreError::ParamOutOfInterval { edge: instance.label(v), action: i, prob: p });
                }
            }
        }
        Ok(())
    }
}

fn check_shapes(instance: &NetworkInstance, policy: &Policy, params: &ParamVector) -> Result<(), CoreError> {
    policy.check(instance)?;
    if params.0.len() != instance.len() {
        return Err(CoreError::ParamShape { edge: instance.label(instance.root()) });
    }
    for v in instance.edges() {
        if params.0[v].len() <= policy.0[v] {
            return Err(CoreError::ParamShape { edge: instance.label(v) });
        }
    }
    Ok(())
}

/// Accessibility of every node: the product of the passage probabilities on
/// its root path under `policy`.
pub fn accessibilities(
    instance: &NetworkInstance,
    policy: &Policy,
    params: &ParamVector,
) -> Result<Vec<f64>, CoreError> {
    check_shapes(instance, policy, params)?;
    let mut acc = vec![0.0; instance.len()];
    acc[instance.root] = 1.0;
    for v in instance.edges() {
        let p = instance.parent[v].unwrap();
        acc[v] = acc[p] * params.0[v][policy.0[v]];
    }
    Ok(acc)
}

/// Expected reward reached from the root: `sum_v r_v * accessibility(v)`.
pub fn evaluate(instance: &NetworkInstance, policy: &Policy, params: &ParamVector) -> Result<f64, CoreError> {
    let acc = accessibilities(instance, policy, params)?;
    Ok(acc.iter().zip(&instance.rewards).map(|(a, r)| a * r).sum())
}

/// Total cost of the actions taken by `policy`.
pub fn policy_cost(instance: &NetworkInstance, policy: &Policy) -> f64 {
    instance.edges().map(|v| instance.actions[v][policy.0[v]].cost).sum()
}

/// Correspondence between a binarized instance and its original.
///
/// Original nodes keep their indices; dummy nodes are appended after them.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMapping {
    original_len: usize,
    binary_len: usize,
}

impl NodeMapping {
    pub fn identity(len: usize) -> Self {
        Self { original_len: len, binary_len: len }
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    /// Original node for a binarized index, `None` for dummies.
    pub fn to_original(&self, v: NodeIndex) -> Option<NodeIndex> {
        (v < self.original_len).then_some(v)
    }

    pub fn to_binary(&self, v: NodeIndex) -> NodeIndex {
        v
    }

    pub fn is_identity(&self) -> bool {
        self.original_len == self.binary_len
    }

    pub fn lift_policy(&self, policy: &Policy) -> Policy {
        let mut actions = policy.0.clone();
        actions.resize(self.binary_len, 0);
        Policy(actions)
    }

    pub fn lift_params(&self, params: &ParamVector) -> ParamVector {
        let mut rows = params.0.clone();
        rows.resize(self.binary_len, vec![1.0]);
        ParamVector(rows)
    }

    pub fn project_policy(&self, policy: &Policy) -> Policy {
        Policy(policy.0[..self.original_len].to_vec())
    }

    pub fn project_params(&self, params: &ParamVector) -> ParamVector {
        ParamVector(params.0[..self.original_len].to_vec())
    }
}

/// Rewrites the tree so that every node has at most two children.
///
/// A node `u` with children `c1, ..., ck` (k > 2) keeps `c1` and gets a dummy
/// child `d1` holding `c2, ..., ck`, recursively. Dummy nodes have reward 0
/// and their incoming edge offers only a free action with probability 1, so
/// every policy and parameter vector keeps its value.
pub fn binarize(instance: &NetworkInstance) -> (NetworkInstance, NodeMapping) {
    let n = instance.len();
    if instance.is_binary() {
        return (instance.clone(), NodeMapping::identity(n));
    }
    let mut labels = instance.labels.clone();
    let mut rewards = instance.rewards.clone();
    let mut dummy = instance.dummy.clone();
    let mut parent = instance.parent.clone();
    let mut children = instance.children.clone();
    let mut actions = instance.actions.clone();
    let mut next_label = labels.iter().copied().max().unwrap_or(0);

    for u in 0..n {
        if instance.children[u].len() <= 2 {
            continue;
        }
        let kids = instance.children[u].clone();
        let mut holder = u;
        let mut rest = &kids[..];
        while rest.len() > 2 {
            let d = labels.len();
            next_label += 1;
            labels.push(next_label);
            rewards.push(0.0);
            dummy.push(true);
            parent.push(Some(holder));
            children.push(Vec::new());
            actions.push(vec![Action::fixed(1.0)]);
            children[holder] = vec![rest[0], d];
            parent[rest[0]] = Some(holder);
            holder = d;
            rest = &rest[1..];
        }
        children[holder] = rest.to_vec();
        for &c in rest {
            parent[c] = Some(holder);
        }
    }
    let binary_len = labels.len();
    let out = NetworkInstance::assemble(
        labels,
        rewards,
        dummy,
        parent,
        children,
        actions,
        instance.root,
        instance.budget,
    );
    (out, NodeMapping { original_len: n, binary_len })
}
