//! Schematic first-order term and formula languages, the RPL0 and RPL0-Psi
//! resolution calculi, s-substitution algebra, call-graph semantics, and
//! recursively defined refutations.
//!
//! The crate is organised around the pipeline: parse a problem file into a
//! [`dsl::ProblemFile`], validate its signature and definitions, then either
//! evaluate schematic objects at concrete parameter values (terms, formulas,
//! proof schemata, call-graph traces) or check derivations against the
//! calculus rules.

// Formula::not names the connective; the rule and verdict enums differ in
// payload size by nature (derivation-carrying variants).
#![allow(clippy::should_implement_trait, clippy::large_enum_variant)]

pub mod signature;
pub mod numeric;
pub mod iota;
pub mod formula;
pub mod ssubst;
pub mod rpl0;
pub mod rpl0_psi;
pub mod callgraph;
pub mod proof_schema;
pub mod dsl;
pub mod export;
pub mod cli;

pub use signature::Signature;
pub use numeric::{Guard, NumericTerm, ParameterAssignment, Partition};
pub use iota::IotaTerm;
pub use formula::Formula;
pub use rpl0::{Derivation, Rule, Sequent};
pub use ssubst::{FoSubstitution, SSubstitution};
