//! Recursive-descent parser for problem files.

use super::lexer::{lex, Token, TokenKind};
use super::ProblemFile;
use crate::callgraph::{CallGraph, Flow, FlowCell, Junction, PointOrder};
use crate::formula::Formula;
use crate::iota::{DefArg, IotaTerm};
use crate::numeric::{Guard, GuardAtom, NumericTerm};
use crate::proof_schema::{ProofSchema, SchemaCell, SchemaComponent};
use crate::rpl0::{DefDir, Derivation, Rule, Sequent, Side, TautologyId};
use crate::signature::{GvarFormal, IotaDef, NumericDef, PredBody, PredDef};
use crate::ssubst::SSubstitution;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Parse a standalone s-substitution in the context of a signature.
pub fn parse_ssubst_text(
    input: &str,
    sig: &crate::signature::Signature,
) -> Result<SSubstitution, ParseError> {
    let mut p = fragment_parser(input, sig)?;
    p.parse_ssubst()
}

/// Parse a standalone iota term in the context of a signature.
pub fn parse_term_text(
    input: &str,
    sig: &crate::signature::Signature,
) -> Result<IotaTerm, ParseError> {
    let mut p = fragment_parser(input, sig)?;
    p.parse_iota_term()
}

fn fragment_parser(
    input: &str,
    sig: &crate::signature::Signature,
) -> Result<Parser, ParseError> {
    let tokens = lex(input).map_err(|e| ParseError {
        line: e.line,
        col: e.col,
        message: e.message,
    })?;
    let file = ProblemFile {
        signature: sig.clone(),
        ..Default::default()
    };
    Ok(Parser {
        tokens,
        pos: 0,
        file,
    })
}

pub fn parse(input: &str) -> Result<ProblemFile, ParseError> {
    let tokens = lex(input).map_err(|e| ParseError {
        line: e.line,
        col: e.col,
        message: e.message,
    })?;
    let mut p = Parser {
        tokens,
        pos: 0,
        file: ProblemFile::default(),
    };
    p.parse_file()?;
    Ok(p.file)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    file: ProblemFile,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek2(&self) -> &TokenKind {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].kind
    }

    fn here(&self) -> (usize, usize) {
        (self.tokens[self.pos].line, self.tokens[self.pos].col)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn advance(&mut self) -> TokenKind {
        let t = self.tokens[self.pos].kind.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: &TokenKind) -> Result<(), ParseError> {
        if self.peek() == kind {
            self.advance();
            Ok(())
        } else {
            self.err(format!("expected {}, found {}", kind, self.peek()))
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            TokenKind::Ident(s) => {
                self.advance();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {}", other)),
        }
    }

    fn expect_number(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            TokenKind::Number(n) => {
                self.advance();
                Ok(n)
            }
            other => self.err(format!("expected number, found {}", other)),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if let TokenKind::Ident(s) = self.peek() {
            if s == kw {
                self.advance();
                return true;
            }
        }
        false
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.err(format!("expected keyword {}, found {}", kw, self.peek()))
        }
    }

    fn parse_file(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek().clone() {
                TokenKind::Eof => {
                    if self.file.signature.params.is_empty()
                        && self.file.formulas.is_empty()
                        && self.file.schemas.is_empty()
                        && self.file.graphs.is_empty()
                        && self.file.signature.pred_defs.is_empty()
                        && self.file.signature.numeric_defs.is_empty()
                        && self.file.signature.iota_defs.is_empty()
                    {
                        return self.err("empty problem file");
                    }
                    return Ok(());
                }
                TokenKind::Ident(kw) => match kw.as_str() {
                    "signature" => {
                        self.advance();
                        self.parse_signature()?;
                    }
                    "define" => {
                        self.advance();
                        self.parse_define()?;
                    }
                    "formula" => {
                        self.advance();
                        let name = self.expect_ident()?;
                        self.expect(&TokenKind::Eq)?;
                        let f = self.parse_formula()?;
                        self.file.formulas.push((name, f));
                    }
                    "schema" => {
                        self.advance();
                        self.parse_schema()?;
                    }
                    "graph" => {
                        self.advance();
                        self.parse_graph()?;
                    }
                    other => return self.err(format!("unexpected section keyword {}", other)),
                },
                other => return self.err(format!("unexpected token {}", other)),
            }
        }
    }

    // -----------------------------------------------------------------
    // signature
    // -----------------------------------------------------------------

    fn parse_signature(&mut self) -> Result<(), ParseError> {
        self.expect(&TokenKind::LBrace)?;
        const ITEM_KEYWORDS: [&str; 9] = [
            "param", "const", "func", "pred", "gvar", "fvar", "proofsym", "orderf", "orderp",
        ];
        while self.peek() != &TokenKind::RBrace {
            let kw = self.expect_ident()?;
            let name_ahead = |p: &Self| -> Option<String> {
                match p.peek() {
                    TokenKind::Ident(n) if !ITEM_KEYWORDS.contains(&n.as_str()) => Some(n.clone()),
                    _ => None,
                }
            };
            match kw.as_str() {
                "param" => {
                    while let Some(name) = name_ahead(self) {
                        self.advance();
                        self.file.signature.params.insert(name);
                    }
                }
                "const" => {
                    while let Some(name) = name_ahead(self) {
                        self.advance();
                        self.file.signature.consts.insert(name);
                    }
                }
                "func" => {
                    let name = self.expect_ident()?;
                    let arity = self.expect_number()?;
                    self.file.signature.funcs.insert(name, arity);
                }
                "pred" => {
                    let name = self.expect_ident()?;
                    let arity = self.expect_number()?;
                    self.file.signature.preds.insert(name, arity);
                }
                "gvar" => {
                    let name = self.expect_ident()?;
                    let arity = self.expect_number()?;
                    self.file.signature.gvars.insert(name, arity);
                }
                "fvar" => {
                    while let Some(name) = name_ahead(self) {
                        self.advance();
                        self.file.signature.fvars.insert(name);
                    }
                }
                "proofsym" => {
                    let name = self.expect_ident()?;
                    self.expect(&TokenKind::LParen)?;
                    let params = self.parse_ident_list(&TokenKind::RParen)?;
                    self.expect(&TokenKind::RParen)?;
                    self.file.signature.proof_syms.insert(name.clone(), params.len());
                    self.file.signature.proof_params.insert(name, params);
                }
                "orderf" | "orderp" => {
                    let mut prev = self.expect_ident()?;
                    while self.peek() == &TokenKind::Lt {
                        self.advance();
                        let next = self.expect_ident()?;
                        let edge = (prev.clone(), next.clone());
                        if kw == "orderf" {
                            self.file.signature.order_f.push(edge);
                        } else {
                            self.file.signature.order_p.push(edge);
                        }
                        prev = next;
                    }
                }
                other => return self.err(format!("unknown signature item {}", other)),
            }
        }
        self.expect(&TokenKind::RBrace)?;
        Ok(())
    }

    fn parse_ident_list(&mut self, stop: &TokenKind) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        while self.peek() != stop {
            out.push(self.expect_ident()?);
            if self.peek() == &TokenKind::Comma {
                self.advance();
            }
        }
        Ok(out)
    }

    // -----------------------------------------------------------------
    // defining equations
    // -----------------------------------------------------------------

    fn parse_define(&mut self) -> Result<(), ParseError> {
        let kind = self.expect_ident()?;
        let name = self.expect_ident()?;
        match kind.as_str() {
            "numeric" => {
                self.expect(&TokenKind::LParen)?;
                let params = self.parse_ident_list(&TokenKind::RParen)?;
                self.expect(&TokenKind::RParen)?;
                self.expect_keyword("rec")?;
                let rec_param = self.expect_ident()?;
                self.expect(&TokenKind::LBrace)?;
                self.expect_keyword("base")?;
                let base = self.parse_omega_term()?;
                self.expect_keyword("step")?;
                let step = self.parse_omega_term()?;
                self.expect(&TokenKind::RBrace)?;
                self.file
                    .signature
                    .register_numeric(
                        &name,
                        NumericDef {
                            params,
                            rec_param,
                            base,
                            step,
                        },
                    )
                    .map_err(|e| self.mk_err(e.to_string()))?;
            }
            "iota" => {
                self.expect(&TokenKind::LParen)?;
                let (formals, params) = self.parse_formals()?;
                self.expect(&TokenKind::RParen)?;
                self.expect_keyword("rec")?;
                let rec_param = self.expect_ident()?;
                self.expect(&TokenKind::LBrace)?;
                self.expect_keyword("base")?;
                let base = self.parse_iota_term()?;
                self.expect_keyword("step")?;
                let step = self.parse_iota_term()?;
                self.expect(&TokenKind::RBrace)?;
                self.file
                    .signature
                    .register_iota(
                        &name,
                        IotaDef {
                            formals,
                            params,
                            rec_param,
                            base,
                            step,
                        },
                    )
                    .map_err(|e| self.mk_err(e.to_string()))?;
            }
            "pred" => {
                self.expect(&TokenKind::LParen)?;
                let (formals, params) = self.parse_formals()?;
                self.expect(&TokenKind::RParen)?;
                let body = if self.eat_keyword("flat") {
                    let last_param = self.expect_ident()?;
                    self.expect(&TokenKind::LBrace)?;
                    self.expect_keyword("rhs")?;
                    let rhs = self.parse_formula()?;
                    self.expect(&TokenKind::RBrace)?;
                    PredBody::Flat { last_param, rhs }
                } else {
                    self.expect_keyword("rec")?;
                    let rec_param = self.expect_ident()?;
                    self.expect(&TokenKind::LBrace)?;
                    self.expect_keyword("base")?;
                    let base = self.parse_formula()?;
                    self.expect_keyword("step")?;
                    let step = self.parse_formula()?;
                    self.expect(&TokenKind::RBrace)?;
                    PredBody::Recursive {
                        rec_param,
                        base,
                        step,
                    }
                };
                self.file
                    .signature
                    .register_pred(
                        &name,
                        PredDef {
                            formals,
                            params,
                            body,
                        },
                    )
                    .map_err(|e| self.mk_err(e.to_string()))?;
            }
            other => return self.err(format!("unknown definition kind {}", other)),
        }
        Ok(())
    }

    fn mk_err(&self, message: String) -> ParseError {
        let (line, col) = self.here();
        ParseError { line, col, message }
    }

    /// `X:2, Z:0 ; n, m` — global-variable formals, then omega parameters.
    fn parse_formals(&mut self) -> Result<(Vec<GvarFormal>, Vec<String>), ParseError> {
        let mut formals = Vec::new();
        let mut params = Vec::new();
        let mut after_semi = false;
        loop {
            match self.peek().clone() {
                TokenKind::RParen => break,
                TokenKind::Semi => {
                    self.advance();
                    after_semi = true;
                }
                TokenKind::Comma => {
                    self.advance();
                }
                TokenKind::Ident(name) => {
                    self.advance();
                    if !after_semi && self.peek() == &TokenKind::Colon {
                        self.advance();
                        let arity = self.expect_number()?;
                        formals.push(GvarFormal { name, arity });
                    } else {
                        params.push(name);
                    }
                }
                other => return self.err(format!("unexpected token {} in formals", other)),
            }
        }
        Ok((formals, params))
    }

    // -----------------------------------------------------------------
    // terms
    // -----------------------------------------------------------------

    fn parse_omega_term(&mut self) -> Result<NumericTerm, ParseError> {
        match self.peek().clone() {
            TokenKind::Number(n) => {
                self.advance();
                Ok(NumericTerm::numeral(n))
            }
            TokenKind::Ident(name) => {
                self.advance();
                if name == "rec" {
                    return Ok(NumericTerm::Rec);
                }
                if name == "s" {
                    self.expect(&TokenKind::LParen)?;
                    let inner = self.parse_omega_term()?;
                    self.expect(&TokenKind::RParen)?;
                    return Ok(NumericTerm::succ(inner));
                }
                if self.peek() == &TokenKind::LParen
                    && self.file.signature.numeric_defs.contains_key(&name)
                {
                    self.advance();
                    let mut args = Vec::new();
                    while self.peek() != &TokenKind::RParen {
                        args.push(self.parse_omega_term()?);
                        if self.peek() == &TokenKind::Comma {
                            self.advance();
                        }
                    }
                    self.expect(&TokenKind::RParen)?;
                    return Ok(NumericTerm::DefApp(name, args));
                }
                Ok(NumericTerm::Param(name))
            }
            other => self.err(format!("expected omega term, found {}", other)),
        }
    }

    fn parse_iota_term(&mut self) -> Result<IotaTerm, ParseError> {
        match self.peek().clone() {
            TokenKind::Ident(name) => {
                self.advance();
                if name == "rec" {
                    if self.peek() == &TokenKind::LParen {
                        self.advance();
                        let mut shift = Vec::new();
                        while self.peek() != &TokenKind::RParen {
                            shift.push(self.parse_omega_term()?);
                            if self.peek() == &TokenKind::Comma {
                                self.advance();
                            }
                        }
                        self.expect(&TokenKind::RParen)?;
                        return Ok(IotaTerm::Rec(shift));
                    }
                    return Ok(IotaTerm::Rec(vec![]));
                }
                if self.peek() != &TokenKind::LParen {
                    // bare identifier: a constant, or an arity-zero V-term
                    if self.file.signature.consts.contains(&name) {
                        return Ok(IotaTerm::Const(name));
                    }
                    return Ok(IotaTerm::VTerm(name, vec![]));
                }
                self.advance();
                if self.file.signature.iota_defs.contains_key(&name) {
                    let def = self.file.signature.iota_defs[&name].clone();
                    let mut args = Vec::new();
                    for formal in &def.formals {
                        let arg = if formal.arity > 0 {
                            DefArg::Gvar(self.expect_ident()?)
                        } else {
                            // arity-zero: bare gvar names stay bare
                            match (self.peek().clone(), self.peek2().clone()) {
                                (TokenKind::Ident(g), k)
                                    if k != TokenKind::LParen
                                        && self.file.signature.gvars.contains_key(&g) =>
                                {
                                    self.advance();
                                    DefArg::Gvar(g)
                                }
                                _ => DefArg::Term(self.parse_iota_term()?),
                            }
                        };
                        args.push(arg);
                        if self.peek() == &TokenKind::Comma {
                            self.advance();
                        }
                    }
                    let mut omega_args = Vec::new();
                    while self.peek() != &TokenKind::RParen {
                        omega_args.push(self.parse_omega_term()?);
                        if self.peek() == &TokenKind::Comma {
                            self.advance();
                        }
                    }
                    self.expect(&TokenKind::RParen)?;
                    return Ok(IotaTerm::DefApp {
                        sym: name,
                        args,
                        omega_args,
                    });
                }
                if self.file.signature.funcs.contains_key(&name) {
                    let mut args = Vec::new();
                    while self.peek() != &TokenKind::RParen {
                        args.push(self.parse_iota_term()?);
                        if self.peek() == &TokenKind::Comma {
                            self.advance();
                        }
                    }
                    self.expect(&TokenKind::RParen)?;
                    return Ok(IotaTerm::FunApp(name, args));
                }
                // V-term: global variable applied to omega terms
                let mut args = Vec::new();
                while self.peek() != &TokenKind::RParen {
                    args.push(self.parse_omega_term()?);
                    if self.peek() == &TokenKind::Comma {
                        self.advance();
                    }
                }
                self.expect(&TokenKind::RParen)?;
                Ok(IotaTerm::VTerm(name, args))
            }
            other => self.err(format!("expected iota term, found {}", other)),
        }
    }

    // -----------------------------------------------------------------
    // formulas
    // -----------------------------------------------------------------

    pub(super) fn parse_formula(&mut self) -> Result<Formula, ParseError> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.parse_and()?;
        while self.peek() == &TokenKind::Or {
            self.advance();
            let right = self.parse_and()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.parse_unary_formula()?;
        while self.peek() == &TokenKind::And {
            self.advance();
            let right = self.parse_unary_formula()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn parse_unary_formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            TokenKind::Not => {
                self.advance();
                Ok(Formula::not(self.parse_unary_formula()?))
            }
            TokenKind::LParen => {
                self.advance();
                let f = self.parse_formula()?;
                self.expect(&TokenKind::RParen)?;
                Ok(f)
            }
            TokenKind::Ident(name) => {
                if name == "rec" {
                    self.advance();
                    return Ok(Formula::Rec);
                }
                if self.file.signature.fvars.contains(&name) {
                    self.advance();
                    return Ok(Formula::FormulaVar(name));
                }
                if self.file.signature.pred_defs.contains_key(&name) {
                    self.advance();
                    self.expect(&TokenKind::LParen)?;
                    let def = self.file.signature.pred_defs[&name].clone();
                    let mut gvars = Vec::new();
                    for _ in 0..def.formals.len() {
                        gvars.push(self.expect_ident()?);
                        if self.peek() == &TokenKind::Comma {
                            self.advance();
                        }
                    }
                    let mut omega_args = Vec::new();
                    while self.peek() != &TokenKind::RParen {
                        omega_args.push(self.parse_omega_term()?);
                        if self.peek() == &TokenKind::Comma {
                            self.advance();
                        }
                    }
                    self.expect(&TokenKind::RParen)?;
                    return Ok(Formula::DefAtom {
                        sym: name,
                        gvars,
                        omega_args,
                    });
                }
                if self.file.signature.preds.contains_key(&name) {
                    self.advance();
                    self.expect(&TokenKind::LParen)?;
                    let mut args = Vec::new();
                    while self.peek() != &TokenKind::RParen {
                        args.push(self.parse_iota_term()?);
                        if self.peek() == &TokenKind::Comma {
                            self.advance();
                        }
                    }
                    self.expect(&TokenKind::RParen)?;
                    return Ok(Formula::Atom(name, args));
                }
                self.err(format!("unknown predicate or formula head {}", name))
            }
            other => self.err(format!("expected formula, found {}", other)),
        }
    }

    // -----------------------------------------------------------------
    // sequents, substitutions
    // -----------------------------------------------------------------

    fn parse_sequent(&mut self) -> Result<Sequent, ParseError> {
        let mut ante = Vec::new();
        if self.peek() != &TokenKind::Turnstile {
            loop {
                ante.push(self.parse_formula()?);
                if self.peek() == &TokenKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(&TokenKind::Turnstile)?;
        let mut succ = Vec::new();
        if self.formula_ahead() {
            loop {
                succ.push(self.parse_formula()?);
                if self.peek() == &TokenKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        Ok(Sequent::new(ante, succ))
    }

    fn parse_ssubst(&mut self) -> Result<SSubstitution, ParseError> {
        self.expect(&TokenKind::LBrace)?;
        let mut pairs = Vec::new();
        while self.peek() != &TokenKind::RBrace {
            let dom = self.parse_iota_term()?;
            self.expect(&TokenKind::BindArrow)?;
            let rng = self.parse_iota_term()?;
            pairs.push((dom, rng));
            if self.peek() == &TokenKind::Comma {
                self.advance();
            }
        }
        self.expect(&TokenKind::RBrace)?;
        Ok(SSubstitution::of(pairs))
    }

    fn parse_param_subst(&mut self) -> Result<BTreeMap<String, NumericTerm>, ParseError> {
        self.expect(&TokenKind::LBrace)?;
        let mut map = BTreeMap::new();
        while self.peek() != &TokenKind::RBrace {
            let p = self.expect_ident()?;
            self.expect(&TokenKind::BindArrow)?;
            let t = self.parse_omega_term()?;
            map.insert(p, t);
            if self.peek() == &TokenKind::Comma {
                self.advance();
            }
        }
        self.expect(&TokenKind::RBrace)?;
        Ok(map)
    }

    fn parse_rename_map(&mut self) -> Result<BTreeMap<String, String>, ParseError> {
        self.expect(&TokenKind::LBrace)?;
        let mut map = BTreeMap::new();
        while self.peek() != &TokenKind::RBrace {
            let from = self.expect_ident()?;
            self.expect(&TokenKind::Arrow)?;
            let to = self.expect_ident()?;
            map.insert(from, to);
            if self.peek() == &TokenKind::Comma {
                self.advance();
            }
        }
        self.expect(&TokenKind::RBrace)?;
        Ok(map)
    }

    fn parse_guard(&mut self) -> Result<Guard, ParseError> {
        if self.eat_keyword("true") {
            return Ok(Guard::always());
        }
        let mut atoms = Vec::new();
        loop {
            let p = self.expect_ident()?;
            match self.advance() {
                TokenKind::Eq => {
                    let c = self.expect_number()?;
                    atoms.push(GuardAtom::Eq(p, c));
                }
                TokenKind::Gt => {
                    let c = self.expect_number()?;
                    atoms.push(GuardAtom::Gt(p, c));
                }
                other => return self.err(format!("expected = or > in guard, found {}", other)),
            }
            if self.peek() == &TokenKind::Conj {
                self.advance();
            } else {
                break;
            }
        }
        Ok(Guard::of(atoms))
    }

    fn parse_index_list(&mut self) -> Result<Vec<usize>, ParseError> {
        self.expect(&TokenKind::LBracket)?;
        let mut out = Vec::new();
        while self.peek() != &TokenKind::RBracket {
            out.push(self.expect_number()?);
            if self.peek() == &TokenKind::Comma {
                self.advance();
            }
        }
        self.expect(&TokenKind::RBracket)?;
        Ok(out)
    }

    // -----------------------------------------------------------------
    // schemas
    // -----------------------------------------------------------------

    fn parse_schema(&mut self) -> Result<(), ParseError> {
        let name = self.expect_ident()?;
        self.expect_keyword("main")?;
        let main = self.expect_ident()?;
        self.expect_keyword("top")?;
        let top_symbol = self.expect_ident()?;
        self.expect(&TokenKind::LBrace)?;
        let mut components = BTreeMap::new();
        while self.eat_keyword("component") {
            let sym = self.expect_ident()?;
            self.expect(&TokenKind::LParen)?;
            let params = self.parse_ident_list(&TokenKind::RParen)?;
            self.expect(&TokenKind::RParen)?;
            self.expect_keyword("ends")?;
            let end_sequent = self.parse_sequent()?;
            self.expect(&TokenKind::LBrace)?;
            let mut cells = Vec::new();
            while self.eat_keyword("cell") {
                let guard = self.parse_guard()?;
                self.expect(&TokenKind::LBrace)?;
                let derivation = self.parse_proof_block()?;
                self.expect(&TokenKind::RBrace)?;
                cells.push(SchemaCell { guard, derivation });
            }
            self.expect(&TokenKind::RBrace)?;
            components.insert(
                sym.clone(),
                SchemaComponent {
                    sym,
                    params,
                    end_sequent,
                    cells,
                },
            );
        }
        self.expect(&TokenKind::RBrace)?;
        self.file.schemas.push(ProofSchema {
            name,
            main,
            top_symbol,
            components,
        });
        Ok(())
    }

    /// A proof block: named inference lines referencing premise names,
    /// closed by `conclude NAME`.
    fn parse_proof_block(&mut self) -> Result<Derivation, ParseError> {
        let mut nodes: BTreeMap<String, Derivation> = BTreeMap::new();
        loop {
            if self.eat_keyword("conclude") {
                let name = self.expect_ident()?;
                return match nodes.remove(&name) {
                    Some(d) => Ok(d),
                    None => self.err(format!("conclude references unknown line {}", name)),
                };
            }
            let name = self.expect_ident()?;
            self.expect(&TokenKind::Eq)?;
            let (rule, premises) = self.parse_rule()?;
            self.expect(&TokenKind::Colon)?;
            let sequent = self.parse_sequent()?;
            let children = premises
                .iter()
                .map(|p| {
                    nodes
                        .get(p)
                        .cloned()
                        .ok_or_else(|| self.mk_err(format!("unknown premise {}", p)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            nodes.insert(
                name,
                Derivation {
                    sequent,
                    rule,
                    children,
                },
            );
        }
    }

    fn parse_rule(&mut self) -> Result<(Rule, Vec<String>), ParseError> {
        let tag = self.expect_ident()?;
        let parse_premises = |p: &mut Self| -> Result<Vec<String>, ParseError> {
            p.expect(&TokenKind::LParen)?;
            let names = p.parse_ident_list(&TokenKind::RParen)?;
            p.expect(&TokenKind::RParen)?;
            Ok(names)
        };
        let parse_pos = |p: &mut Self| -> Result<usize, ParseError> {
            if p.peek() == &TokenKind::At {
                p.advance();
                p.expect_number()
            } else {
                Ok(0)
            }
        };
        match tag.as_str() {
            "axiom" => Ok((Rule::Axiom, vec![])),
            "hyp" => Ok((Rule::Hypothesis, vec![])),
            "label" => {
                let sym = self.expect_ident()?;
                let subst = self.parse_param_subst()?;
                Ok((Rule::Labeled { sym, subst }, vec![]))
            }
            "taut" => {
                let id_name = self.expect_ident()?;
                let id = TautologyId::from_name(&id_name)
                    .ok_or_else(|| self.mk_err(format!("unknown tautology {}", id_name)))?;
                self.expect(&TokenKind::LBracket)?;
                let xi1 = self.parse_formula()?;
                let xi2 = if self.peek() == &TokenKind::Comma {
                    self.advance();
                    Some(self.parse_formula()?)
                } else {
                    None
                };
                self.expect(&TokenKind::RBracket)?;
                Ok((Rule::Taut { id, xi1, xi2 }, vec![]))
            }
            "andr1" | "andr2" | "andl" | "orr" | "orl1" | "orl2" | "negr" | "negl" => {
                let pos = parse_pos(self)?;
                let prems = parse_premises(self)?;
                let rule = match tag.as_str() {
                    "andr1" => Rule::AndR1 { pos },
                    "andr2" => Rule::AndR2 { pos },
                    "andl" => Rule::AndL { pos },
                    "orr" => Rule::OrR { pos },
                    "orl1" => Rule::OrL1 { pos },
                    "orl2" => Rule::OrL2 { pos },
                    "negr" => Rule::NegR { pos },
                    _ => Rule::NegL { pos },
                };
                Ok((rule, prems))
            }
            "res" => {
                let theta = self.parse_ssubst()?;
                let left_atoms = self.parse_index_list()?;
                let right_atoms = self.parse_index_list()?;
                let prems = parse_premises(self)?;
                Ok((
                    Rule::Res {
                        theta,
                        left_atoms,
                        right_atoms,
                    },
                    prems,
                ))
            }
            "rename" => {
                let map = self.parse_rename_map()?;
                let prems = parse_premises(self)?;
                Ok((Rule::GlobalRename { map }, prems))
            }
            "defr" | "defl" | "rwr" | "rwl" => {
                let sym = self.expect_ident()?;
                let dir = if self.peek() == &TokenKind::Plus {
                    self.advance();
                    DefDir::Intro
                } else {
                    DefDir::Elim
                };
                let pos = parse_pos(self)?;
                let prems = parse_premises(self)?;
                let side = if tag.ends_with('r') {
                    Side::Right
                } else {
                    Side::Left
                };
                let rule = if tag.starts_with("def") {
                    Rule::DefPred {
                        sym,
                        side,
                        pos,
                        dir,
                    }
                } else {
                    Rule::DefFun {
                        sym,
                        side,
                        pos,
                        dir,
                    }
                };
                Ok((rule, prems))
            }
            other => self.err(format!("unknown rule tag {}", other)),
        }
    }

    // -----------------------------------------------------------------
    // call graphs
    // -----------------------------------------------------------------

    fn parse_graph(&mut self) -> Result<(), ParseError> {
        let name = self.expect_ident()?;
        self.expect_keyword("order")?;
        let order = match self.expect_ident()?.as_str() {
            "lex" => PointOrder::Lex,
            "revlex" => PointOrder::RevLex,
            other => return self.err(format!("unknown point order {}", other)),
        };
        self.expect(&TokenKind::LBrace)?;
        let mut flows = Vec::new();
        while self.eat_keyword("flow") {
            let fname = self.expect_ident()?;
            self.expect_keyword("source")?;
            let source = self.parse_junction()?;
            self.expect(&TokenKind::LBrace)?;
            let mut cells = Vec::new();
            while self.eat_keyword("cell") {
                let guard = self.parse_guard()?;
                self.expect(&TokenKind::LBrace)?;
                let mut junctions = vec![source.clone()];
                while self.peek() == &TokenKind::LParen {
                    let j = self.parse_junction()?;
                    if !junctions.contains(&j) {
                        junctions.push(j);
                    }
                }
                self.expect(&TokenKind::RBrace)?;
                cells.push(FlowCell { guard, junctions });
            }
            self.expect(&TokenKind::RBrace)?;
            flows.push(Flow {
                name: fname,
                source,
                cells,
            });
        }
        self.expect(&TokenKind::RBrace)?;
        self.file.graphs.push(CallGraph { name, flows, order });
        Ok(())
    }

    fn parse_junction(&mut self) -> Result<Junction, ParseError> {
        self.expect(&TokenKind::LParen)?;
        let sym = self.expect_ident()?;
        self.expect(&TokenKind::Semi)?;
        let mut point = Vec::new();
        while self.peek() != &TokenKind::RParen {
            point.push(self.parse_omega_term()?);
            if self.peek() == &TokenKind::Comma {
                self.advance();
            }
        }
        self.expect(&TokenKind::RParen)?;
        Ok(Junction { sym, point })
    }
}

impl Parser {
    /// Does a formula start here? Atoms are always applied, so a bare
    /// identifier only opens a formula when followed by a parenthesis (or
    /// when it is a declared formula variable). This disambiguates sequent
    /// ends from the next inference line inside proof blocks.
    fn formula_ahead(&self) -> bool {
        match self.peek() {
            TokenKind::Not | TokenKind::LParen => true,
            TokenKind::Ident(name) => {
                if self.file.signature.fvars.contains(name) {
                    return true;
                }
                self.peek2() == &TokenKind::LParen && name != "conclude"
            }
            _ => false,
        }
    }
}
