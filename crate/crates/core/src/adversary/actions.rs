use alloc::vec::Vec;

use crate::model::Action;

/// A joint per-edge choice of the adversary: the action it takes and the
/// passage probability of every action on the edge, each at an interval
/// bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParamAction {
    pub adversary_action: usize,
    pub probs: Vec<f64>,
}

impl PolicyParamAction {
    /// Reduces the action to what the DP needs once the decision action is
    /// fixed.
    pub(crate) fn step(&self, actions: &[Action], decision: usize) -> PpStep {
        PpStep {
            adversary_prob: self.probs[self.adversary_action],
            decision_prob: self.probs[decision],
            cost: actions[self.adversary_action].cost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PpStep {
    pub adversary_prob: f64,
    pub decision_prob: f64,
    pub cost: f64,
}

/// Policy-parameter actions worth considering on one edge when the decision
/// policy takes `decision` there.
///
/// An adversary action `i != decision` only needs `p_i` at its upper bound and
/// `p_decision` at its lower bound; `i == decision` needs both bounds of
/// `p_i`. That gives exactly `actions.len() + 1` entries. Probabilities of
/// actions neither player takes are left at their lower bound.
pub fn gen_pp_actions(actions: &[Action], decision: usize) -> Vec<PolicyParamAction> {
    assert!(decision < actions.len(), "decision action out of range");
    let low: Vec<f64> = actions.iter().map(|a| a.p_low).collect();
    let mut out = Vec::with_capacity(actions.len() + 1);
    for (i, a) in actions.iter().enumerate() {
        if i == decision {
            out.push(PolicyParamAction { adversary_action: i, probs: low.clone() });
            let mut probs = low.clone();
            probs[i] = a.p_high;
            out.push(PolicyParamAction { adversary_action: i, probs });
        } else {
            let mut probs = low.clone();
            probs[i] = a.p_high;
            out.push(PolicyParamAction { adversary_action: i, probs });
        }
    }
    out
}
