//! Labelled sequent calculi for basic non-distributive modal logic and
//! its axiomatic extensions: a proof kernel and checker, a bounded
//! prover, a cut eliminator, a correspondence engine, and a
//! finite-lattice semantic oracle.
//!
//! The guide in `book/` walks through each part with runnable examples;
//! its chapters are compiled as doc-tests (see [`guide`]).

pub mod alba;
pub mod calculus;
pub mod corpus;
pub mod error;
pub mod guide;
pub mod proof;
pub mod search;
pub mod semantics;
pub mod syntax;
pub mod transform;

pub use calculus::{apply, backward, check_instance, Axiom, Bindings, CalcConfig, Mode, RuleId, RuleInstance};
pub use proof::{check_derivation, classify_label, congruence, Derivation, LabelClass};
pub use syntax::{parse_sequent, Formula, Loc, Position, Sequent, Side, Structure, Term, VarId, VarKind};
