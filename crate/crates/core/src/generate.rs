//! Seeded synthetic instances in the style of culvert and dam networks.
//!
//! Culverts are mostly passable and can be replaced outright; dams block
//! most passage and a repair raises passability substantially. The point
//! probability ranges below are assumptions; every interval is
//! `[p − βp, p + βp]` clipped to `[0, 1]`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::model::{Action, EdgeSpec, InstanceSpec, NetworkInstance, NodeSpec};

pub const CULVERT_COST: f64 = 100_000.0;
pub const DAM_COST: f64 = 173_030.0;
/// Range of a culvert's current passability.
pub const CULVERT_PASSABILITY: (f64, f64) = (0.8, 0.9);
/// Range of a dam's current passability.
pub const DAM_PASSABILITY: (f64, f64) = (0.05, 0.2);
/// Range of the passability gain from repairing a dam.
pub const DAM_REPAIR_GAIN: (f64, f64) = (0.5, 0.9);

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub nodes: usize,
    /// Cap on children per node; `None` for plain uniform attachment.
    pub max_children: Option<usize>,
    pub reward_min: f64,
    pub reward_max: f64,
    /// Share of barriers that are culverts; the rest are dams.
    pub culvert_fraction: f64,
    pub beta: f64,
    /// Budget as a share of the cost of repairing every barrier.
    pub budget_fraction: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            nodes: 22,
            max_children: None,
            reward_min: 1.0,
            reward_max: 10.0,
            culvert_fraction: 0.7,
            beta: 0.3,
            budget_fraction: 0.1,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn check(&self) -> Result<(), CoreError> {
        if self.nodes == 0 {
            return Err(CoreError::InvalidConfig("node count must be positive"));
        }
        if !(self.reward_min > 0.0 && self.reward_min <= self.reward_max && self.reward_max.is_finite()) {
            return Err(CoreError::InvalidConfig("reward range must satisfy 0 < min <= max"));
        }
        if !(0.0..=1.0).contains(&self.culvert_fraction) {
            return Err(CoreError::InvalidConfig("culvert fraction must lie in [0, 1]"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(CoreError::InvalidConfig("beta must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.budget_fraction) {
            return Err(CoreError::InvalidConfig("budget fraction must lie in [0, 1]"));
        }
        if self.max_children == Some(0) {
            return Err(CoreError::InvalidConfig("max children must be positive"));
        }
        Ok(())
    }
}

fn widen(p: f64, beta: f64) -> (f64, f64) {
    ((p - beta * p).clamp(0.0, 1.0), (p + beta * p).clamp(0.0, 1.0))
}

/// Builds a random instance. The random draws do not depend on `beta`, so
/// configs that differ only in `beta` give the same tree and point values
/// with nested intervals.
pub fn generate(config: &GeneratorConfig) -> Result<NetworkInstance, CoreError> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.nodes;
    let mut nodes = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut kids: Vec<usize> = vec![0; n];
    let mut open: Vec<usize> = Vec::with_capacity(n);
    let mut repair_total = 0.0;
    for v in 0..n {
        let reward = rng.random_range(config.reward_min..=config.reward_max);
        nodes.push(NodeSpec { id: v as u64, reward });
        if v > 0 {
            let slot = rng.random_range(0..open.len());
            let parent = open[slot];
            kids[parent] += 1;
            if config.max_children.is_some_and(|m| kids[parent] >= m) {
                open.remove(slot);
            }
            let culvert = rng.random_bool(config.culvert_fraction);
            let actions = if culvert {
                let p = rng.random_range(CULVERT_PASSABILITY.0..=CULVERT_PASSABILITY.1);
                let (lo, hi) = widen(p, config.beta);
                vec![Action::new(0.0, lo, hi), Action::new(CULVERT_COST, 1.0, 1.0)]
            } else {
                let p = rng.random_range(DAM_PASSABILITY.0..=DAM_PASSABILITY.1);
                let repaired = (p + rng.random_range(DAM_REPAIR_GAIN.0..=DAM_REPAIR_GAIN.1)).min(1.0);
                let (lo, hi) = widen(p, config.beta);
                let (rlo, rhi) = widen(repaired, config.beta);
                vec![Action::new(0.0, lo, hi), Action::new(DAM_COST, rlo, rhi)]
            };
            repair_total += if culvert { CULVERT_COST } else { DAM_COST };
            edges.push(EdgeSpec { parent: parent as u64, child: v as u64, actions });
        }
        open.push(v);
    }
    let spec = InstanceSpec { root: 0, budget: config.budget_fraction * repair_total, nodes, edges };
    NetworkInstance::new(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let inst = generate(&GeneratorConfig { nodes: 1, ..Default::default() }).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst.edge_count(), 0);
        assert_eq!(inst.budget(), 0.0);
    }

    #[test]
    fn zero_beta_is_degenerate() {
        let inst = generate(&GeneratorConfig { nodes: 30, beta: 0.0, ..Default::default() }).unwrap();
        for v in inst.edges() {
            assert!(inst.actions(v).iter().all(|a| a.p_low == a.p_high));
        }
    }

    #[test]
    fn bad_configs() {
        for cfg in [
            GeneratorConfig { nodes: 0, ..Default::default() },
            GeneratorConfig { reward_min: 0.0, ..Default::default() },
            GeneratorConfig { reward_min: 5.0, reward_max: 2.0, ..Default::default() },
            GeneratorConfig { beta: -0.1, ..Default::default() },
            GeneratorConfig { budget_fraction: 1.5, ..Default::default() },
            GeneratorConfig { culvert_fraction: -1.0, ..Default::default() },
            GeneratorConfig { max_children: Some(0), ..Default::default() },
        ] {
            assert!(generate(&cfg).is_err());
        }
    }
}
