//! 0-1 integer programs and the branch-and-bound engine that solves them.

mod instance;
mod solver;

use thiserror::Error;

pub use instance::{evaluate, Constraint, Evaluation, MilpInstance, Objective, Relation, Sense, VarId, VarKind, Violation};
pub use solver::{propagate, solve, Limits, Propagation, Solution, Stats, Status};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MilpError {
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("assignment has no value for {0}")]
    IncompleteAssignment(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable {name} has non-binary value {value}")]
    NonBinaryValue { name: String, value: String },
}
