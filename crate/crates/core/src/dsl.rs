//! The problem-file language: signatures, defining equations, formulas,
//! proof schemata, and call graphs, with a printer that round-trips through
//! the parser.

mod lexer;
mod parser;
mod printer;

pub use lexer::{LexError, Token, TokenKind};
pub use parser::{parse, parse_ssubst_text, parse_term_text, ParseError};
pub use printer::print_problem;

use crate::callgraph::CallGraph;
use crate::formula::Formula;
use crate::proof_schema::ProofSchema;
use crate::signature::Signature;

/// A parsed problem file.
#[derive(Debug, Clone, Default)]
pub struct ProblemFile {
    pub signature: Signature,
    pub formulas: Vec<(String, Formula)>,
    pub schemas: Vec<ProofSchema>,
    pub graphs: Vec<CallGraph>,
}

impl ProblemFile {
    pub fn formula(&self, name: &str) -> Option<&Formula> {
        self.formulas
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f)
    }

    pub fn schema(&self, name: &str) -> Option<&ProofSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }

    pub fn graph(&self, name: &str) -> Option<&CallGraph> {
        self.graphs.iter().find(|g| g.name == name)
    }
}
