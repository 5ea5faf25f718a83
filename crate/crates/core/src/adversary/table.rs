//! DP tables over (adversary value, decision value) pairs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::hash_map::Entry as MapEntry;
use hashbrown::{HashMap, HashSet};

use super::actions::PpStep;
use super::Objective;

/// Reference from a table entry to the child entry and policy-parameter
/// action that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub entry: u32,
    pub pp: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    /// Value of the adversary policy on the subtree (rounded in grid mode).
    pub adversary_value: f64,
    /// Value of the decision policy on the subtree (rounded in grid mode).
    pub decision_value: f64,
    /// Minimum adversary cost over all choices reaching this pair.
    pub cost: f64,
    /// One link per real child, in child order.
    pub links: [Option<Link>; 2],
}

/// Value-pair table of one subtree.
#[derive(Debug, Clone, Default)]
pub struct DpTable {
    entries: Vec<Entry>,
    grid: Option<f64>,
}

impl DpTable {
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rounding granularity `K_u`, or `None` when values are exact.
    pub fn grid(&self) -> Option<f64> {
        self.grid
    }

    /// Number of distinct adversary values (`m^a_u`).
    pub fn distinct_adversary_values(&self) -> usize {
        self.entries.iter().map(|e| e.adversary_value.to_bits()).collect::<HashSet<_>>().len()
    }

    /// Number of distinct decision values (`m^d_u`).
    pub fn distinct_decision_values(&self) -> usize {
        self.entries.iter().map(|e| e.decision_value.to_bits()).collect::<HashSet<_>>().len()
    }
}

/// Maps a raw value pair at a node to its table key and stored values.
///
/// With a grid `K`, the ratio objective floors the adversary value and ceils
/// the decision value; regret does the opposite, so the rounded objective is
/// optimistic for the adversary in both cases. Keys are integer bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    pub grid: Option<f64>,
    pub objective: Objective,
}

impl Quantizer {
    pub fn exact(objective: Objective) -> Self {
        Self { grid: None, objective }
    }

    pub fn quantize(&self, adversary: f64, decision: f64) -> ((u64, u64), f64, f64) {
        match self.grid {
            None => {
                // +0.0 folds a negative zero into the same key.
                let (a, d) = (adversary + 0.0, decision + 0.0);
                ((a.to_bits(), d.to_bits()), a, d)
            }
            Some(k) => {
                let (na, nd) = match self.objective {
                    Objective::Ratio => (libm::floor(adversary / k), libm::ceil(decision / k)),
                    Objective::Regret => (libm::ceil(adversary / k), libm::floor(decision / k)),
                };
                (((na as i64) as u64, (nd as i64) as u64), k * na, k * nd)
            }
        }
    }
}

/// Pruning switches for [`combine_tables`]. None of them changes the root
/// optimum of an exact table.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CombineOptions {
    /// Drop partial choices costing more than this.
    pub budget: Option<f64>,
    /// Drop entries dominated in (higher adversary value, lower decision
    /// value, lower cost).
    pub dominance: bool,
    /// Keep only entries on the lower-right convex hull of the entries that
    /// cost no more.
    pub hull: bool,
}

#[derive(Debug, Clone, Copy)]
struct Contribution {
    adversary: f64,
    decision: f64,
    cost: f64,
    link: Option<Link>,
}

/// One child's input to [`combine_tables`]: its finished table and the
/// policy-parameter actions available on the edge into it.
pub struct ChildInput<'a> {
    pub table: &'a DpTable,
    pub(crate) steps: &'a [PpStep],
}

/// Builds the table of node `u` from the tables of its (at most two)
/// children.
///
/// Every child entry is extended by every policy-parameter action on its
/// edge, then every pair of extended entries (one per child) is summed with
/// `reward` and quantized. Keys that recur keep the lowest cost; among equal
/// costs the first inserted wins. A missing second child contributes value
/// 0 at cost 0, and a leaf yields the single pair `(reward, reward)`.
pub fn combine_tables(reward: f64, quantizer: Quantizer, children: &[ChildInput<'_>], options: CombineOptions) -> DpTable {
    assert!(children.len() <= 2, "combine_tables needs a binary tree");
    let zero = [Contribution { adversary: 0.0, decision: 0.0, cost: 0.0, link: None }];
    let lists: Vec<Vec<Contribution>> = children.iter().map(|c| extend(c, options)).collect();
    let first: &[Contribution] = lists.first().map_or(&zero[..], |l| &l[..]);
    let second: &[Contribution] = lists.get(1).map_or(&zero[..], |l| &l[..]);

    let mut index: HashMap<(u64, u64), u32> = HashMap::with_capacity(first.len().max(second.len()));
    let mut entries: Vec<Entry> = Vec::new();
    for x in first {
        for y in second {
            let cost = x.cost + y.cost;
            if let Some(b) = options.budget {
                if !crate::within_budget(cost, b) {
                    continue;
                }
            }
            let (key, a, d) = quantizer.quantize(
                reward + x.adversary + y.adversary,
                reward + x.decision + y.decision,
            );
            let entry = Entry { adversary_value: a, decision_value: d, cost, links: [x.link, y.link] };
            match index.entry(key) {
                MapEntry::Occupied(slot) => {
                    let existing = &mut entries[*slot.get() as usize];
                    if cost < existing.cost {
                        *existing = entry;
                    }
                }
                MapEntry::Vacant(slot) => {
                    slot.insert(entries.len() as u32);
                    entries.push(entry);
                }
            }
        }
    }
    if options.hull {
        entries = hull_filter(entries, |e| (e.adversary_value, e.decision_value, e.cost));
    } else if options.dominance {
        entries = dominance_filter(entries, |e| (e.adversary_value, e.decision_value, e.cost));
    }
    DpTable { entries, grid: quantizer.grid }
}

fn extend(child: &ChildInput<'_>, options: CombineOptions) -> Vec<Contribution> {
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    let mut out: Vec<Contribution> = Vec::with_capacity(child.table.len() * child.steps.len());
    for (ei, e) in child.table.entries.iter().enumerate() {
        for (si, s) in child.steps.iter().enumerate() {
            let cost = e.cost + s.cost;
            if let Some(b) = options.budget {
                if !crate::within_budget(cost, b) {
                    continue;
                }
            }
            let c = Contribution {
                adversary: s.adversary_prob * e.adversary_value + 0.0,
                decision: s.decision_prob * e.decision_value + 0.0,
                cost,
                link: Some(Link { entry: ei as u32, pp: si as u32 }),
            };
            // Identical value pairs lead to identical keys upstream; keep the
            // cheapest.
            match seen.entry((c.adversary.to_bits(), c.decision.to_bits())) {
                MapEntry::Occupied(slot) => {
                    if cost < out[*slot.get()].cost {
                        out[*slot.get()] = c;
                    }
                }
                MapEntry::Vacant(slot) => {
                    slot.insert(out.len());
                    out.push(c);
                }
            }
        }
    }
    if options.hull {
        out = hull_filter(out, |c| (c.adversary, c.decision, c.cost));
    } else if options.dominance {
        out = dominance_filter(out, |c| (c.adversary, c.decision, c.cost));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ord64(f64);

impl Eq for Ord64 {}

impl PartialOrd for Ord64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ord64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Keeps the items not dominated by another item with adversary value `>=`,
/// decision value `<=` and cost `<=`. Survivors keep their relative order.
fn dominance_filter<T>(items: Vec<T>, key: impl Fn(&T) -> (f64, f64, f64)) -> Vec<T> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&i, &j| {
        let (ai, di, ci) = key(&items[i]);
        let (aj, dj, cj) = key(&items[j]);
        ci.total_cmp(&cj).then(aj.total_cmp(&ai)).then(di.total_cmp(&dj)).then(i.cmp(&j))
    });
    // Staircase of processed points: decision value increases with adversary
    // value, so the first point at or above `a` has the smallest decision
    // value among all points at or above `a`.
    let mut stair: BTreeMap<Ord64, f64> = BTreeMap::new();
    let mut keep = alloc::vec![false; items.len()];
    for i in order {
        let (a, d, _) = key(&items[i]);
        if let Some((_, &dd)) = stair.range(Ord64(a)..).next() {
            if dd <= d {
                continue;
            }
        }
        keep[i] = true;
        let covered: Vec<Ord64> =
            stair.range(..=Ord64(a)).rev().take_while(|(_, &dd)| dd >= d).map(|(k, _)| *k).collect();
        for k in covered {
            stair.remove(&k);
        }
        stair.insert(Ord64(a), d);
    }
    items.into_iter().zip(keep).filter_map(|(x, k)| k.then_some(x)).collect()
}

/// Keeps the items that are vertices of the lower-right convex chain (high
/// adversary value, low decision value) of all items costing no more.
///
/// Any context above a node scores a subtree pair by a ratio of affine
/// functions (or an affine function) increasing in the adversary value and
/// decreasing in the decision value, so for every remaining budget some
/// optimal pair is such a vertex. Rounding above the node moves each value by
/// at most a constant that does not depend on the pair, so the same holds
/// for the bounds on rounded values.
fn hull_filter<T>(items: Vec<T>, key: impl Fn(&T) -> (f64, f64, f64)) -> Vec<T> {
    let keys: Vec<(f64, f64, f64)> = items.iter().map(&key).collect();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&i, &j| keys[i].2.total_cmp(&keys[j].2).then(i.cmp(&j)));
    let mut keep = alloc::vec![false; items.len()];
    // Current chain as (adversary, decision, item); `usize::MAX` marks
    // points carried over from cheaper groups.
    let mut chain: Vec<(f64, f64, usize)> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let cost = keys[order[start]].2;
        let mut end = start;
        while end < order.len() && keys[order[end]].2 == cost {
            end += 1;
        }
        let mut pts: Vec<(f64, f64, usize)> = chain.iter().map(|&(a, d, _)| (a, d, usize::MAX)).collect();
        pts.extend(order[start..end].iter().map(|&i| (keys[i].0, keys[i].1, i)));
        chain = lower_right_chain(pts);
        for &(_, _, i) in &chain {
            if i != usize::MAX {
                keep[i] = true;
            }
        }
        start = end;
    }
    items.into_iter().zip(keep).filter_map(|(x, k)| k.then_some(x)).collect()
}

fn lower_right_chain(mut pts: Vec<(f64, f64, usize)>) -> Vec<(f64, f64, usize)> {
    // Pareto front: by adversary value descending, keep strictly decreasing
    // decision values. Carried-over points sort first among equals.
    pts.sort_by(|x, y| {
        y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)).then((x.2 != usize::MAX).cmp(&(y.2 != usize::MAX))).then(x.2.cmp(&y.2))
    });
    let mut front: Vec<(f64, f64, usize)> = Vec::new();
    for p in pts {
        if front.last().is_none_or(|q| p.1 < q.1) {
            front.push(p);
        }
    }
    front.reverse();
    let mut hull: Vec<(f64, f64, usize)> = Vec::with_capacity(front.len());
    for p in front {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}
