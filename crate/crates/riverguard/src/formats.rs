//! JSON file formats.
//!
//! Nodes and edges are named by their `u64` labels; an edge is named by its
//! child. Policies and parameter vectors list one record per edge in node
//! index order, so serialization is deterministic.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use riverguard_core::adversary::{AdversaryResult, Objective};
use riverguard_core::master::{Scenario, ScenarioSet};
use riverguard_core::model::{
    Action, EdgeSpec, InstanceSpec, NetworkInstance, NodeSpec, ParamVector, Policy, Violation,
};
use riverguard_core::robust::{RobustResult, StopReason, TraceEntry};
use riverguard_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("invalid instance with {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),
    #[error("unknown edge {0}: no such child node")]
    UnknownEdge(u64),
    #[error("edge {0} is listed twice")]
    DuplicateEdge(u64),
    #[error("edge {0} is missing")]
    MissingEdge(u64),
    #[error(transparent)]
    Core(CoreError),
}

impl From<CoreError> for InputError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidInstance(v) => InputError::Invalid(v),
            other => InputError::Core(other),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| InputError::Json { path: path.display().to_string(), source })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub cost: f64,
    pub p_low: f64,
    pub p_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: u64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub parent: u64,
    pub child: u64,
    pub actions: Vec<ActionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub root: u64,
    pub budget: f64,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl InstanceFile {
    pub fn from_instance(instance: &NetworkInstance) -> Self {
        let spec = instance.to_spec();
        Self {
            root: spec.root,
            budget: spec.budget,
            nodes: spec.nodes.iter().map(|n| NodeRecord { id: n.id, reward: n.reward }).collect(),
            edges: spec
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    parent: e.parent,
                    child: e.child,
                    actions: e
                        .actions
                        .iter()
                        .map(|a| ActionRecord { cost: a.cost, p_low: a.p_low, p_high: a.p_high })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_spec(&self) -> InstanceSpec {
        InstanceSpec {
            root: self.root,
            budget: self.budget,
            nodes: self.nodes.iter().map(|n| NodeSpec { id: n.id, reward: n.reward }).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    parent: e.parent,
                    child: e.child,
                    actions: e.actions.iter().map(|a| Action::new(a.cost, a.p_low, a.p_high)).collect(),
                })
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<NetworkInstance, InputError> {
        Ok(NetworkInstance::new(&self.to_spec())?)
    }
}

pub fn read_instance(path: &Path) -> Result<NetworkInstance, InputError> {
    read_json::<InstanceFile>(path)?.to_instance()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionChoice {
    pub edge: u64,
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub actions: Vec<ActionChoice>,
}

/// Maps edge records onto node indices, rejecting unknown, repeated and
/// missing edges.
fn edge_slots<T>(
    instance: &NetworkInstance,
    records: impl IntoIterator<Item = (u64, T)>,
) -> Result<Vec<Option<T>>, InputError> {
    let mut slots: Vec<Option<T>> = (0..instance.len()).map(|_| None).collect();
    for (label, item) in records {
        let v = instance
            .index_of(label)
            .filter(|&v| instance.parent(v).is_some())
            .ok_or(InputError::UnknownEdge(label))?;
        if slots[v].is_some() {
            return Err(InputError::DuplicateEdge(label));
        }
        slots[v] = Some(item);
    }
    if let Some(v) = instance.edges().find(|&v| slots[v].is_none()) {
        return Err(InputError::MissingEdge(instance.label(v)));
    }
    Ok(slots)
}

impl PolicyFile {
    pub fn from_policy(instance: &NetworkInstance, policy: &Policy) -> Self {
        Self {
            actions: instance.edges().map(|v| ActionChoice { edge: instance.label(v), action: policy.action(v) }).collect(),
        }
    }

    pub fn to_policy(&self, instance: &NetworkInstance) -> Result<Policy, InputError> {
        let slots = edge_slots(instance, self.actions.iter().map(|c| (c.edge, c.action)))?;
        let policy = Policy::from_actions(slots.into_iter().map(|a| a.unwrap_or(0)).collect());
        policy.check(instance)?;
        Ok(policy)
    }
}

pub fn read_policy(path: &Path, instance: &NetworkInstance) -> Result<Policy, InputError> {
    read_json::<PolicyFile>(path)?.to_policy(instance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeProbs {
    pub edge: u64,
    /// One probability per action.
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamsFile(pub Vec<EdgeProbs>);

impl ParamsFile {
    pub fn from_params(instance: &NetworkInstance, params: &ParamVector) -> Self {
        Self(instance.edges().map(|v| EdgeProbs { edge: instance.label(v), probs: params.row(v).to_vec() }).collect())
    }

    pub fn to_params(&self, instance: &NetworkInstance) -> Result<ParamVector, InputError> {
        let slots = edge_slots(instance, self.0.iter().map(|r| (r.edge, r.probs.clone())))?;
        let params = ParamVector::from_rows(slots.into_iter().map(Option::unwrap_or_default).collect());
        params.check(instance)?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub policy: PolicyFile,
    pub params: ParamsFile,
    /// `z(π′; p)`; recomputed on read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl ScenarioRecord {
    pub fn from_scenario(instance: &NetworkInstance, s: &Scenario) -> Self {
        Self {
            policy: PolicyFile::from_policy(instance, &s.policy),
            params: ParamsFile::from_params(instance, &s.params),
            value: Some(s.value),
        }
    }

    pub fn to_scenario(&self, instance: &NetworkInstance) -> Result<Scenario, InputError> {
        Ok(Scenario::new(instance, self.policy.to_policy(instance)?, self.params.to_params(instance)?)?)
    }
}

/// A scenario list, either bare or inside a robust-loop result.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ScenarioSource {
    List(Vec<ScenarioRecord>),
    Wrapped { scenarios: Vec<ScenarioRecord> },
}

pub fn scenarios_to_records(instance: &NetworkInstance, set: &ScenarioSet) -> Vec<ScenarioRecord> {
    set.iter().map(|s| ScenarioRecord::from_scenario(instance, s)).collect()
}

pub fn records_to_scenarios(instance: &NetworkInstance, records: &[ScenarioRecord]) -> Result<ScenarioSet, InputError> {
    let scenarios = records.iter().map(|r| r.to_scenario(instance)).collect::<Result<Vec<_>, _>>()?;
    Ok(ScenarioSet::from_scenarios(instance, scenarios)?)
}

/// Reads a JSON scenario list, or the `scenarios` of a robust-loop result.
pub fn read_scenarios(path: &Path, instance: &NetworkInstance) -> Result<ScenarioSet, InputError> {
    let records = match read_json::<ScenarioSource>(path)? {
        ScenarioSource::List(r) | ScenarioSource::Wrapped { scenarios: r } => r,
    };
    records_to_scenarios(instance, &records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveName {
    Ratio,
    Regret,
}

impl From<Objective> for ObjectiveName {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Ratio => ObjectiveName::Ratio,
            Objective::Regret => ObjectiveName::Regret,
        }
    }
}

impl From<ObjectiveName> for Objective {
    fn from(o: ObjectiveName) -> Self {
        match o {
            ObjectiveName::Ratio => Objective::Ratio,
            ObjectiveName::Regret => Objective::Regret,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryRecord {
    pub objective: ObjectiveName,
    /// Exact objective of the returned pair.
    pub value: f64,
    /// Objective as seen by the (possibly rounded) DP table.
    pub table_value: f64,
    pub decision_value: f64,
    pub adversary_value: f64,
    pub cost: f64,
    pub policy: PolicyFile,
    pub params: ParamsFile,
}

impl AdversaryRecord {
    pub fn from_result(instance: &NetworkInstance, r: &AdversaryResult) -> Self {
        Self {
            objective: r.objective.into(),
            value: r.value,
            table_value: r.table_value,
            decision_value: r.decision_value,
            adversary_value: r.adversary_value,
            cost: r.cost,
            policy: PolicyFile::from_policy(instance, &r.policy),
            params: ParamsFile::from_params(instance, &r.params),
        }
    }

    pub fn to_result(&self, instance: &NetworkInstance) -> Result<AdversaryResult, InputError> {
        Ok(AdversaryResult {
            objective: self.objective.into(),
            policy: self.policy.to_policy(instance)?,
            params: self.params.to_params(instance)?,
            value: self.value,
            table_value: self.table_value,
            cost: self.cost,
            decision_value: self.decision_value,
            adversary_value: self.adversary_value,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopName {
    Converged,
    ApproximationLimit,
    RepeatedScenario,
    IterationLimit,
}

impl From<StopReason> for StopName {
    fn from(s: StopReason) -> Self {
        match s {
            StopReason::Converged => StopName::Converged,
            StopReason::ApproximationLimit => StopName::ApproximationLimit,
            StopReason::RepeatedScenario => StopName::RepeatedScenario,
            StopReason::IterationLimit => StopName::IterationLimit,
        }
    }
}

impl From<StopName> for StopReason {
    fn from(s: StopName) -> Self {
        match s {
            StopName::Converged => StopReason::Converged,
            StopName::ApproximationLimit => StopReason::ApproximationLimit,
            StopName::RepeatedScenario => StopReason::RepeatedScenario,
            StopName::IterationLimit => StopReason::IterationLimit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub master_value: f64,
    pub adversary_value: f64,
    pub adversary_bound: f64,
    pub upper: f64,
    pub lower: f64,
}

impl From<TraceEntry> for TraceRecord {
    fn from(t: TraceEntry) -> Self {
        Self {
            iteration: t.iteration,
            master_value: t.master_value,
            adversary_value: t.adversary_value,
            adversary_bound: t.adversary_bound,
            upper: t.upper,
            lower: t.lower,
        }
    }
}

impl From<TraceRecord> for TraceEntry {
    fn from(t: TraceRecord) -> Self {
        Self {
            iteration: t.iteration,
            master_value: t.master_value,
            adversary_value: t.adversary_value,
            adversary_bound: t.adversary_bound,
            upper: t.upper,
            lower: t.lower,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustRecord {
    pub objective: ObjectiveName,
    pub policy: PolicyFile,
    pub policy_cost: f64,
    pub upper: f64,
    pub lower: f64,
    pub iterations: usize,
    pub policy_iteration: usize,
    pub converged: bool,
    pub stop_reason: StopName,
    pub trace: Vec<TraceRecord>,
    pub scenarios: Vec<ScenarioRecord>,
    pub certificate: AdversaryRecord,
}

impl RobustRecord {
    pub fn from_result(instance: &NetworkInstance, r: &RobustResult) -> Self {
        Self {
            objective: r.objective.into(),
            policy: PolicyFile::from_policy(instance, &r.policy),
            policy_cost: riverguard_core::model::policy_cost(instance, &r.policy),
            upper: r.upper,
            lower: r.lower,
            iterations: r.iterations,
            policy_iteration: r.policy_iteration,
            converged: r.converged,
            stop_reason: r.stop_reason.into(),
            trace: r.trace.iter().map(|&t| t.into()).collect(),
            scenarios: scenarios_to_records(instance, &r.scenarios),
            certificate: AdversaryRecord::from_result(instance, &r.certificate),
        }
    }

    pub fn to_result(&self, instance: &NetworkInstance) -> Result<RobustResult, InputError> {
        Ok(RobustResult {
            objective: self.objective.into(),
            policy: self.policy.to_policy(instance)?,
            upper: self.upper,
            lower: self.lower,
            iterations: self.iterations,
            policy_iteration: self.policy_iteration,
            converged: self.converged,
            stop_reason: self.stop_reason.into(),
            scenarios: records_to_scenarios(instance, &self.scenarios)?,
            trace: self.trace.iter().map(|&t| t.into()).collect(),
            certificate: self.certificate.to_result(instance)?,
        })
    }
}

pub fn read_robust(path: &Path, instance: &NetworkInstance) -> Result<RobustResult, InputError> {
    read_json::<RobustRecord>(path)?.to_result(instance)
}
