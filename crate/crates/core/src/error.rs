use alloc::vec::Vec;

use crate::model::Violation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("invalid instance: {} violation(s)", .0.len())]
    InvalidInstance(Vec<Violation>),
    #[error("policy length {found} does not match instance with {expected} nodes")]
    PolicyShape { expected: usize, found: usize },
    #[error("edge into node {edge} has no assigned action")]
    MissingAssignment { edge: u64 },
    #[error("action {action} out of range on edge into node {edge}")]
    ActionOutOfRange { edge: u64, action: usize },
    #[error("parameter vector does not cover edge into node {edge}")]
    ParamShape { edge: u64 },
    #[error("probability {prob} for action {action} on edge into node {edge} is outside its interval")]
    ParamOutOfInterval { edge: u64, action: usize, prob: f64 },
    #[error("instance is not binary: node {node} has {children} children")]
    NotBinary { node: u64, children: usize },
    #[error("rounding parameter must be positive, got {0}")]
    InvalidRounding(f64),
    #[error("scenario set is empty")]
    EmptyScenarioSet,
    #[error("scenario {index} has non-positive adversary value {value}")]
    NonPositiveScenario { index: usize, value: f64 },
    #[error("policy cost {cost} exceeds budget {budget}")]
    OverBudget { cost: f64, budget: f64 },
    #[error("invalid generator config: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid robust-loop config: {0}")]
    InvalidLoopConfig(&'static str),
}
