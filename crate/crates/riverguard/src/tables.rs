//! CSV outputs: robustness metrics, per-edge accessibility and bench rows.

use serde::Serialize;

use riverguard_core::baselines::Robustness;
use riverguard_core::model::{accessibilities, policy_cost, NetworkInstance, Policy};
use riverguard_core::CoreError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub policy: String,
    pub cost: f64,
    pub robust_ratio: f64,
    pub regret: f64,
    /// `z(π′; p)` of the ratio certificate.
    pub ratio_adversary_value: f64,
    /// `z(π′; p)` of the regret certificate.
    pub regret_adversary_value: f64,
}

impl EvalRow {
    pub fn new(name: &str, instance: &NetworkInstance, policy: &Policy, r: &Robustness) -> Self {
        Self {
            policy: name.to_string(),
            cost: policy_cost(instance, policy),
            robust_ratio: r.robust_ratio(),
            regret: r.regret(),
            ratio_adversary_value: r.ratio.adversary_value,
            regret_adversary_value: r.regret.adversary_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccessibilityRow {
    /// Label of the edge's child node.
    pub edge: u64,
    pub decision_accessibility: f64,
    pub adversary_accessibility: f64,
}

/// Accessibility of every edge's child under the decision policy and under
/// the adversary's policy, both at the ratio certificate's probabilities.
pub fn accessibility_rows(
    instance: &NetworkInstance,
    policy: &Policy,
    r: &Robustness,
) -> Result<Vec<AccessibilityRow>, CoreError> {
    let decision = accessibilities(instance, policy, &r.ratio.params)?;
    let adversary = accessibilities(instance, &r.ratio.policy, &r.ratio.params)?;
    Ok(instance
        .edges()
        .map(|v| AccessibilityRow {
            edge: instance.label(v),
            decision_accessibility: decision[v],
            adversary_accessibility: adversary[v],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub seed: u64,
    pub n: usize,
    pub beta: f64,
    pub budget_fraction: f64,
    pub policy_kind: String,
    /// Adversary used for the metrics, e.g. `exact`, `epsilon=0.1`.
    pub adversary: String,
    pub robust_ratio: f64,
    pub regret: f64,
    /// Empty when timing is off.
    pub wall_ms: Option<f64>,
}

/// Serializes rows with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows always serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is utf-8")
}
