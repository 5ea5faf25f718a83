//! Budgeted (value, cost) Pareto-frontier DP over the tree.
//!
//! For fixed probabilities the value of a subtree decomposes over children,
//! so the set of non-dominated (value, cost) pairs of every subtree can be
//! built bottom-up. This solves the single-scenario budgeted problem exactly
//! and supplies the per-scenario bounds of the branch-and-bound master.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{NetworkInstance, NodeIndex, ParamVector, Policy};
use crate::within_budget;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub value: f64,
    pub cost: f64,
}

/// Drops dominated points (lower value at no lower cost).
///
/// Leaves the points sorted by increasing cost with strictly increasing
/// value. Among equal points the first inserted survives.
pub fn pareto_filter<T>(points: &mut Vec<(Point, T)>) {
    points.sort_by(|a, b| a.0.cost.total_cmp(&b.0.cost).then(b.0.value.total_cmp(&a.0.value)));
    let mut best = f64::NEG_INFINITY;
    points.retain(|(p, _)| {
        if p.value > best {
            best = p.value;
            true
        } else {
            false
        }
    });
}

/// A Pareto frontier without back-references.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Frontier {
    points: Vec<Point>,
}

impl Frontier {
    pub fn new(points: impl IntoIterator<Item = Point>) -> Self {
        let mut tagged: Vec<(Point, ())> = points.into_iter().map(|p| (p, ())).collect();
        pareto_filter(&mut tagged);
        Self { points: tagged.into_iter().map(|(p, _)| p).collect() }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest value reachable with cost within `budget`, or `-inf`.
    pub fn best_within(&self, budget: f64) -> f64 {
        let k = self.points.partition_point(|p| within_budget(p.cost, budget));
        if k == 0 {
            f64::NEG_INFINITY
        } else {
            self.points[k - 1].value
        }
    }

    /// Frontier of `self ⊕ weight·other`, dropping points over `budget`.
    pub fn merge_weighted(&self, other: &Frontier, weight: f64, budget: f64) -> Frontier {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.points {
            for b in &other.points {
                let cost = a.cost + b.cost;
                if !within_budget(cost, budget) {
                    break;
                }
                out.push(Point { value: a.value + weight * b.value, cost });
            }
        }
        Frontier::new(out)
    }
}

#[derive(Debug, Clone, Copy)]
enum Back {
    Start,
    /// Index into the previous stage of the same node and into the edge
    /// frontier of the child being merged.
    Merge(u32, u32),
}

/// All frontiers of one budgeted DP run, kept for policy reconstruction.
#[derive(Debug, Clone)]
pub struct BudgetedDp {
    /// Per node, one frontier per merged child (stage 0 is the node alone).
    stages: Vec<Vec<Vec<(Point, Back)>>>,
    /// Per edge: frontier of "edge action + subtree below", tagged with
    /// (action, index into the child's final stage).
    edges: Vec<Vec<(Point, (u32, u32))>>,
}

/// Runs the budgeted Pareto DP for fixed probabilities.
///
/// Points costing more than `budget` are discarded as soon as they appear;
/// costs are nonnegative so this never loses a feasible optimum.
pub fn budgeted_frontiers(instance: &NetworkInstance, params: &ParamVector, budget: f64) -> BudgetedDp {
    let n = instance.len();
    let mut stages: Vec<Vec<Vec<(Point, Back)>>> = vec![Vec::new(); n];
    let mut edges: Vec<Vec<(Point, (u32, u32))>> = vec![Vec::new(); n];
    for &u in instance.preorder().iter().rev() {
        let mut current = vec![(Point { value: instance.reward(u), cost: 0.0 }, Back::Start)];
        let mut node_stages = Vec::with_capacity(instance.children(u).len() + 1);
        for &c in instance.children(u) {
            let child_final = stages[c].last().expect("child processed first");
            let mut edge = Vec::new();
            for (a, action) in instance.actions(c).iter().enumerate() {
                let p = params.prob(c, a);
                for (j, (pt, _)) in child_final.iter().enumerate() {
                    let cost = pt.cost + action.cost;
                    if within_budget(cost, budget) {
                        edge.push((Point { value: p * pt.value, cost }, (a as u32, j as u32)));
                    }
                }
            }
            pareto_filter(&mut edge);

            let mut merged = Vec::with_capacity(current.len() * edge.len());
            for (i, (x, _)) in current.iter().enumerate() {
                for (j, (y, _)) in edge.iter().enumerate() {
                    let cost = x.cost + y.cost;
                    if !within_budget(cost, budget) {
                        break;
                    }
                    merged.push((Point { value: x.value + y.value, cost }, Back::Merge(i as u32, j as u32)));
                }
            }
            pareto_filter(&mut merged);
            node_stages.push(core::mem::replace(&mut current, merged));
            edges[c] = edge;
        }
        node_stages.push(current);
        stages[u] = node_stages;
    }
    BudgetedDp { stages, edges }
}

impl BudgetedDp {
    /// Frontier of the subtree rooted at `v`.
    pub fn node_frontier(&self, v: NodeIndex) -> Frontier {
        Frontier { points: self.stages[v].last().unwrap().iter().map(|(p, _)| *p).collect() }
    }

    /// Frontier of the edge into `v` together with everything below it.
    pub fn edge_frontier(&self, v: NodeIndex) -> Frontier {
        Frontier { points: self.edges[v].iter().map(|(p, _)| *p).collect() }
    }

    /// Best policy at the root: maximum value, ties toward lower cost.
    pub fn best_policy(&self, instance: &NetworkInstance) -> (Policy, Point) {
        let root = instance.root();
        let final_stage = self.stages[root].last().unwrap();
        // Sorted by cost with strictly increasing value: the last point has
        // the highest value and is the cheapest such point.
        let idx = final_stage.len() - 1;
        let best = final_stage[idx].0;
        let mut policy = Policy::null(instance);
        let mut stack: Vec<(NodeIndex, usize)> = vec![(root, idx)];
        while let Some((u, mut idx)) = stack.pop() {
            let kids = instance.children(u);
            for s in (1..self.stages[u].len()).rev() {
                let Back::Merge(prev, e) = self.stages[u][s][idx].1 else { unreachable!() };
                let c = kids[s - 1];
                let (action, child_idx) = self.edges[c][e as usize].1;
                policy.set(c, action as usize);
                stack.push((c, child_idx as usize));
                idx = prev as usize;
            }
        }
        (policy, best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{evaluate, policy_cost, Action};

    #[test]
    fn filter_keeps_cheapest_of_equal_values() {
        let mut pts = vec![
            (Point { value: 2.0, cost: 3.0 }, 'a'),
            (Point { value: 2.0, cost: 1.0 }, 'b'),
            (Point { value: 1.0, cost: 0.0 }, 'c'),
            (Point { value: 0.5, cost: 0.5 }, 'd'),
            (Point { value: 2.0, cost: 1.0 }, 'e'),
        ];
        pareto_filter(&mut pts);
        let tags: Vec<char> = pts.iter().map(|p| p.1).collect();
        assert_eq!(tags, vec!['c', 'b']);
    }

    #[test]
    fn best_within_budget() {
        let f = Frontier::new([
            Point { value: 1.0, cost: 0.0 },
            Point { value: 3.0, cost: 2.0 },
            Point { value: 5.0, cost: 4.0 },
        ]);
        assert_eq!(f.best_within(0.0), 1.0);
        assert_eq!(f.best_within(3.9), 3.0);
        assert_eq!(f.best_within(100.0), 5.0);
        assert_eq!(Frontier::new([Point { value: 1.0, cost: 1.0 }]).best_within(0.5), f64::NEG_INFINITY);
    }

    #[test]
    fn tiny_point_optimum() {
        let inst = tiny();
        let dp = budgeted_frontiers(&inst, &ParamVector::midpoints(&inst), inst.budget());
        let (pi, best) = dp.best_policy(&inst);
        assert_eq!(pi.action(1), 1);
        assert!((best.value - 1.9).abs() < 1e-12);
        assert_eq!(best.cost, 1.0);
    }

    #[test]
    fn reconstruction_matches_reported_point() {
        let a = |c: f64, p: f64| vec![Action::fixed(0.3), Action::new(c, p, p)];
        let inst = chain(&[1.0, 2.0, 3.0, 4.0], &[a(1.0, 0.9), a(2.0, 0.8), a(1.5, 1.0)], 3.0);
        let p = ParamVector::midpoints(&inst);
        let dp = budgeted_frontiers(&inst, &p, inst.budget());
        let (pi, best) = dp.best_policy(&inst);
        assert!((evaluate(&inst, &pi, &p).unwrap() - best.value).abs() < 1e-12);
        assert_eq!(policy_cost(&inst, &pi), best.cost);
        assert!(best.cost <= 3.0);
    }
}
