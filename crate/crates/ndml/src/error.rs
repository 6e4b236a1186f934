//! Error types shared across the crate.

use thiserror::Error;

use crate::syntax::VarId;

/// Syntax error with a byte position into the input.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

/// Well-formedness violation, reported distinctly from syntax errors.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WfError {
    #[error("{var} occurs in its own term {term}")]
    VarInOwnTerm { var: VarId, term: String },
    #[error("`{lhs} <= {rhs}` is not a labelled formula or a pure structure")]
    BadPure { lhs: String, rhs: String },
    #[error("renaming changes the kind of {from} (to {to})")]
    KindChange { from: VarId, to: VarId },
    #[error("renaming collides with untouched variable {var}")]
    RenameCollision { var: VarId },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("well-formedness: {0}")]
    WellFormedness(#[from] WfError),
}

/// Failure to apply a rule of the calculus.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("schema mismatch for {rule}: {msg}")]
    SchemaMismatch { rule: String, msg: String },
    #[error("freshness violation in {rule}: {var} {cond}")]
    FreshnessViolation { rule: String, var: VarId, cond: String },
    #[error("display violation in {rule}: {msg}")]
    DisplayViolation { rule: String, msg: String },
    #[error("rule {rule} requires axiom ({axiom}) which is not enabled")]
    SigmaDisabled { rule: String, axiom: String },
    #[error("well-formedness: {0}")]
    WellFormedness(#[from] WfError),
}

/// Failure of a proof transformation.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("rule application failed: {0}")]
    Rule(#[from] RuleError),
    #[error("display search exceeded the {bound}-step bound for {target}")]
    Unreachable { target: String, bound: usize },
    #[error("sequent is not reorderable into a cycle: {0}")]
    NotCyclic(String),
    #[error("relaxed switch mode broke a required side condition: {0}")]
    NonProperConfiguration(String),
    #[error("cut not eliminable: {0}")]
    NotEliminable(String),
    #[error("{0}")]
    Other(String),
}

/// Failure in the correspondence engine.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AlbaError {
    #[error("inequality outside the supported inductive fragment: {0}")]
    OutOfFragment(String),
    #[error("no Ackermann substitution applies: {0}")]
    AckermannBlocked(String),
    #[error("quasi-inequality has no one-premise rule reading: {0}")]
    UnsupportedShape(String),
}

/// Failure loading or validating a lattice model.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("model is not a bounded lattice: {0}")]
    NotALattice(String),
    #[error("operator is not normal: {0}")]
    NotNormal(String),
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("malformed quantifier prefix: {0}")]
    BadPrefix(String),
}
