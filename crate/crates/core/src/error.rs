use thiserror::Error;

use crate::syntax::{ParseError, Var};

/// Errors raised by the workbench operations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    /// The operation needs a closed term and got one with free variables.
    #[error("term is not closed; free variables: {}", join(.free))]
    OpenTerm { free: Vec<Var> },

    #[error("applied-value frame holds a non-value: {0}")]
    NonValueFrame(String),

    #[error("not a pure evaluation context: {0}")]
    NotPureContext(String),

    #[error("side condition of {axiom} violated: {detail}")]
    SideCondition { axiom: String, detail: String },

    #[error("axiom {axiom} needs metavariable `{name}`")]
    MissingMetavariable { axiom: String, name: String },

    #[error("invalid probe pool: {0}")]
    InvalidPool(String),

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
}

fn join(vars: &[Var]) -> String {
    vars.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
