//! Symbol tables: parameters, individual constants and functions, predicates,
//! global variables, defined symbols with their defining equations, the
//! precedence orders on defined symbols, and proof symbols with arities.

use crate::formula::Formula;
use crate::iota::IotaTerm;
use crate::numeric::NumericTerm;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// The three sorts of the language. `O` only appears as the result sort of
/// predicates and formula variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sort {
    Omega,
    Iota,
    O,
}

/// Defining equations of a numeric defined function symbol.
///
/// `f(params.., 0) = base` and `f(params.., s(rec_param)) = step`, where the
/// step right-hand side may mention `rec` for the recursive call
/// `f(params.., rec_param)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericDef {
    pub params: Vec<String>,
    pub rec_param: String,
    pub base: NumericTerm,
    pub step: NumericTerm,
}

/// A formal argument of an iota-sort defined symbol: a global-variable slot
/// with an omega arity. Arity zero slots accept arbitrary iota terms;
/// positive-arity slots accept global variable names only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GvarFormal {
    pub name: String,
    pub arity: usize,
}

/// Defining equations of an iota-sort defined function symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IotaDef {
    pub formals: Vec<GvarFormal>,
    pub params: Vec<String>,
    pub rec_param: String,
    pub base: IotaTerm,
    pub step: IotaTerm,
}

/// Right-hand sides of a defined predicate symbol.
///
/// `Recursive` is the base/step pair of the paper; `Flat` is a single
/// unconditioned equation (no recursion on the last argument), used by
/// definitions whose base and step coincide up to the recursion argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredBody {
    Recursive {
        rec_param: String,
        base: Formula,
        step: Formula,
    },
    Flat {
        last_param: String,
        rhs: Formula,
    },
}

/// Defining equations of a defined predicate symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredDef {
    pub formals: Vec<GvarFormal>,
    pub params: Vec<String>,
    pub body: PredBody,
}

impl PredDef {
    /// Number of omega arguments an atom over this symbol takes.
    pub fn omega_arity(&self) -> usize {
        match &self.body {
            PredBody::Recursive { .. } => self.params.len() + 1,
            PredBody::Flat { .. } => self.params.len() + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SigError {
    #[error("symbol {0} already registered")]
    Duplicate(String),
    #[error("{owner}: right-hand side uses defined symbol {used} that is not smaller in the precedence")]
    OrderViolation { owner: String, used: String },
    #[error("{owner}: right-hand side uses undeclared parameter {param}")]
    ParameterLeak { owner: String, param: String },
    #[error("{owner}: missing {what} case")]
    MissingCase { owner: String, what: String },
    #[error("precedence cycle through {0}")]
    CycleDetected(String),
    #[error("{owner}: recursion placeholder in base right-hand side")]
    RecInBase { owner: String },
    #[error("{owner}: unknown symbol {sym}")]
    UnknownSymbol { owner: String, sym: String },
    #[error("{owner}: arity mismatch for {sym}")]
    ArityMismatch { owner: String, sym: String },
}

/// A full signature. Construction is single-threaded; after validation the
/// value is immutable and safe to share across evaluators.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Signature {
    pub params: BTreeSet<String>,
    pub consts: BTreeSet<String>,
    pub funcs: BTreeMap<String, usize>,
    pub preds: BTreeMap<String, usize>,
    pub gvars: BTreeMap<String, usize>,
    pub fvars: BTreeSet<String>,
    pub numeric_defs: BTreeMap<String, NumericDef>,
    pub iota_defs: BTreeMap<String, IotaDef>,
    pub pred_defs: BTreeMap<String, PredDef>,
    /// Declared edges `small < big` on defined function symbols.
    pub order_f: Vec<(String, String)>,
    /// Declared edges `small < big` on defined predicate symbols.
    pub order_p: Vec<(String, String)>,
    /// Proof symbols with their point arity.
    pub proof_syms: BTreeMap<String, usize>,
    /// Declared parameter order per proof symbol (the point coordinates).
    pub proof_params: BTreeMap<String, Vec<String>>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn is_defined_fun(&self, name: &str) -> bool {
        self.numeric_defs.contains_key(name) || self.iota_defs.contains_key(name)
    }

    /// Transitive closure of the declared edges. Detects cycles.
    fn closure(edges: &[(String, String)]) -> Result<BTreeSet<(String, String)>, SigError> {
        let mut closed: BTreeSet<(String, String)> = edges.iter().cloned().collect();
        loop {
            let mut added = Vec::new();
            for (a, b) in &closed {
                for (c, d) in &closed {
                    if b == c && !closed.contains(&(a.clone(), d.clone())) {
                        added.push((a.clone(), d.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            closed.extend(added);
        }
        for (a, b) in &closed {
            if a == b {
                return Err(SigError::CycleDetected(a.clone()));
            }
        }
        Ok(closed)
    }

    pub fn order_f_closure(&self) -> Result<BTreeSet<(String, String)>, SigError> {
        Self::closure(&self.order_f)
    }

    pub fn order_p_closure(&self) -> Result<BTreeSet<(String, String)>, SigError> {
        Self::closure(&self.order_p)
    }

    fn smaller_f(&self, a: &str, b: &str) -> bool {
        self.order_f_closure()
            .map(|c| c.contains(&(a.to_string(), b.to_string())))
            .unwrap_or(false)
    }

    fn smaller_p(&self, a: &str, b: &str) -> bool {
        self.order_p_closure()
            .map(|c| c.contains(&(a.to_string(), b.to_string())))
            .unwrap_or(false)
    }

    /// Register a numeric defined symbol together with its equations.
    pub fn register_numeric(&mut self, name: &str, def: NumericDef) -> Result<(), SigError> {
        if self.is_defined_fun(name) {
            return Err(SigError::Duplicate(name.to_string()));
        }
        self.numeric_defs.insert(name.to_string(), def);
        if let Err(e) = self.check_numeric(name) {
            self.numeric_defs.remove(name);
            return Err(e);
        }
        Ok(())
    }

    pub fn register_iota(&mut self, name: &str, def: IotaDef) -> Result<(), SigError> {
        if self.is_defined_fun(name) {
            return Err(SigError::Duplicate(name.to_string()));
        }
        self.iota_defs.insert(name.to_string(), def);
        if let Err(e) = self.check_iota(name) {
            self.iota_defs.remove(name);
            return Err(e);
        }
        Ok(())
    }

    pub fn register_pred(&mut self, name: &str, def: PredDef) -> Result<(), SigError> {
        if self.pred_defs.contains_key(name) {
            return Err(SigError::Duplicate(name.to_string()));
        }
        self.pred_defs.insert(name.to_string(), def);
        if let Err(e) = self.check_pred(name) {
            self.pred_defs.remove(name);
            return Err(e);
        }
        Ok(())
    }

    fn check_numeric(&self, name: &str) -> Result<(), SigError> {
        let def = &self.numeric_defs[name];
        let declared: BTreeSet<String> = def.params.iter().cloned().collect();
        let mut step_scope = declared.clone();
        step_scope.insert(def.rec_param.clone());
        check_omega_rhs(self, name, &def.base, &declared, false)?;
        check_omega_rhs(self, name, &def.step, &step_scope, true)?;
        Ok(())
    }

    fn check_iota(&self, name: &str) -> Result<(), SigError> {
        let def = &self.iota_defs[name];
        let declared: BTreeSet<String> = def.params.iter().cloned().collect();
        let mut step_scope = declared.clone();
        step_scope.insert(def.rec_param.clone());
        let formals: BTreeMap<String, usize> = def
            .formals
            .iter()
            .map(|f| (f.name.clone(), f.arity))
            .collect();
        check_iota_rhs(self, name, &def.base, &declared, &formals, false)?;
        check_iota_rhs(self, name, &def.step, &step_scope, &formals, true)?;
        Ok(())
    }

    fn check_pred(&self, name: &str) -> Result<(), SigError> {
        let def = &self.pred_defs[name];
        let declared: BTreeSet<String> = def.params.iter().cloned().collect();
        let formals: BTreeMap<String, usize> = def
            .formals
            .iter()
            .map(|f| (f.name.clone(), f.arity))
            .collect();
        match &def.body {
            PredBody::Recursive {
                rec_param,
                base,
                step,
            } => {
                let mut step_scope = declared.clone();
                step_scope.insert(rec_param.clone());
                check_formula_rhs(self, name, base, &declared, &formals, false)?;
                check_formula_rhs(self, name, step, &step_scope, &formals, true)?;
            }
            PredBody::Flat { last_param, rhs } => {
                let mut scope = declared;
                scope.insert(last_param.clone());
                check_formula_rhs(self, name, rhs, &scope, &formals, false)?;
            }
        }
        Ok(())
    }

    /// Re-check every registered definition and structural invariant.
    /// Total: returns the list of violations, empty iff well-formed.
    pub fn validate(&self) -> Vec<SigError> {
        let mut report = Vec::new();
        if let Err(e) = self.order_f_closure() {
            report.push(e);
        }
        if let Err(e) = self.order_p_closure() {
            report.push(e);
        }
        for name in self.numeric_defs.keys() {
            if let Err(e) = self.check_numeric(name) {
                report.push(e);
            }
        }
        for name in self.iota_defs.keys() {
            if let Err(e) = self.check_iota(name) {
                report.push(e);
            }
        }
        for name in self.pred_defs.keys() {
            if let Err(e) = self.check_pred(name) {
                report.push(e);
            }
        }
        report
    }
}

fn check_omega_rhs(
    sig: &Signature,
    owner: &str,
    t: &NumericTerm,
    scope: &BTreeSet<String>,
    allow_rec: bool,
) -> Result<(), SigError> {
    match t {
        NumericTerm::Zero => Ok(()),
        NumericTerm::Succ(u) => check_omega_rhs(sig, owner, u, scope, allow_rec),
        NumericTerm::Rec => {
            if allow_rec {
                Ok(())
            } else {
                Err(SigError::RecInBase {
                    owner: owner.to_string(),
                })
            }
        }
        NumericTerm::Param(p) => {
            if scope.contains(p) {
                Ok(())
            } else {
                Err(SigError::ParameterLeak {
                    owner: owner.to_string(),
                    param: p.clone(),
                })
            }
        }
        NumericTerm::DefApp(f, args) => {
            // Recursive occurrences must come through the placeholder, and
            // defined-function owners may only use strictly smaller symbols.
            if sig.is_defined_fun(owner) && (f == owner || !sig.smaller_f(f, owner)) {
                return Err(SigError::OrderViolation {
                    owner: owner.to_string(),
                    used: f.clone(),
                });
            }
            let def = sig
                .numeric_defs
                .get(f)
                .ok_or_else(|| SigError::UnknownSymbol {
                    owner: owner.to_string(),
                    sym: f.clone(),
                })?;
            if args.len() != def.params.len() + 1 {
                return Err(SigError::ArityMismatch {
                    owner: owner.to_string(),
                    sym: f.clone(),
                });
            }
            for a in args {
                check_omega_rhs(sig, owner, a, scope, allow_rec)?;
            }
            Ok(())
        }
    }
}

fn check_iota_rhs(
    sig: &Signature,
    owner: &str,
    t: &IotaTerm,
    scope: &BTreeSet<String>,
    formals: &BTreeMap<String, usize>,
    allow_rec: bool,
) -> Result<(), SigError> {
    use crate::iota::DefArg;
    match t {
        IotaTerm::Const(c) => {
            if sig.consts.contains(c) {
                Ok(())
            } else {
                Err(SigError::UnknownSymbol {
                    owner: owner.to_string(),
                    sym: c.clone(),
                })
            }
        }
        IotaTerm::VTerm(x, args) => {
            let arity = formals
                .get(x)
                .copied()
                .or_else(|| sig.gvars.get(x).copied())
                .ok_or_else(|| SigError::UnknownSymbol {
                    owner: owner.to_string(),
                    sym: x.clone(),
                })?;
            if args.len() != arity {
                return Err(SigError::ArityMismatch {
                    owner: owner.to_string(),
                    sym: x.clone(),
                });
            }
            for a in args {
                check_omega_rhs(sig, owner, a, scope, allow_rec)?;
            }
            Ok(())
        }
        IotaTerm::FunApp(f, args) => {
            let arity = sig.funcs.get(f).copied().ok_or_else(|| SigError::UnknownSymbol {
                owner: owner.to_string(),
                sym: f.clone(),
            })?;
            if args.len() != arity {
                return Err(SigError::ArityMismatch {
                    owner: owner.to_string(),
                    sym: f.clone(),
                });
            }
            for a in args {
                check_iota_rhs(sig, owner, a, scope, formals, allow_rec)?;
            }
            Ok(())
        }
        IotaTerm::DefApp {
            sym,
            args,
            omega_args,
        } => {
            // The function precedence constrains defined-function owners;
            // predicate right-hand sides may use any registered iota symbol.
            if sig.is_defined_fun(owner) && (sym == owner || !sig.smaller_f(sym, owner)) {
                return Err(SigError::OrderViolation {
                    owner: owner.to_string(),
                    used: sym.clone(),
                });
            }
            let def = sig.iota_defs.get(sym).ok_or_else(|| SigError::UnknownSymbol {
                owner: owner.to_string(),
                sym: sym.clone(),
            })?;
            if args.len() != def.formals.len() || omega_args.len() != def.params.len() + 1 {
                return Err(SigError::ArityMismatch {
                    owner: owner.to_string(),
                    sym: sym.clone(),
                });
            }
            for (formal, arg) in def.formals.iter().zip(args) {
                match arg {
                    DefArg::Gvar(g) => {
                        let arity = formals
                            .get(g)
                            .copied()
                            .or_else(|| sig.gvars.get(g).copied())
                            .ok_or_else(|| SigError::UnknownSymbol {
                                owner: owner.to_string(),
                                sym: g.clone(),
                            })?;
                        if arity != formal.arity {
                            return Err(SigError::ArityMismatch {
                                owner: owner.to_string(),
                                sym: g.clone(),
                            });
                        }
                    }
                    DefArg::Term(u) => {
                        if formal.arity != 0 {
                            return Err(SigError::ArityMismatch {
                                owner: owner.to_string(),
                                sym: sym.clone(),
                            });
                        }
                        check_iota_rhs(sig, owner, u, scope, formals, allow_rec)?;
                    }
                }
            }
            for a in omega_args {
                check_omega_rhs(sig, owner, a, scope, allow_rec)?;
            }
            Ok(())
        }
        IotaTerm::Rec(shift) => {
            if !allow_rec {
                return Err(SigError::RecInBase {
                    owner: owner.to_string(),
                });
            }
            for a in shift {
                check_omega_rhs(sig, owner, a, scope, allow_rec)?;
            }
            Ok(())
        }
    }
}

fn check_formula_rhs(
    sig: &Signature,
    owner: &str,
    f: &Formula,
    scope: &BTreeSet<String>,
    formals: &BTreeMap<String, usize>,
    allow_rec: bool,
) -> Result<(), SigError> {
    match f {
        Formula::FormulaVar(x) => {
            if sig.fvars.contains(x) {
                Ok(())
            } else {
                Err(SigError::UnknownSymbol {
                    owner: owner.to_string(),
                    sym: x.clone(),
                })
            }
        }
        Formula::Rec => {
            if allow_rec {
                Ok(())
            } else {
                Err(SigError::RecInBase {
                    owner: owner.to_string(),
                })
            }
        }
        Formula::Atom(p, args) => {
            let arity = sig.preds.get(p).copied().ok_or_else(|| SigError::UnknownSymbol {
                owner: owner.to_string(),
                sym: p.clone(),
            })?;
            if args.len() != arity {
                return Err(SigError::ArityMismatch {
                    owner: owner.to_string(),
                    sym: p.clone(),
                });
            }
            for a in args {
                check_iota_rhs(sig, owner, a, scope, formals, allow_rec)?;
            }
            Ok(())
        }
        Formula::DefAtom {
            sym,
            gvars,
            omega_args,
        } => {
            if sym == owner || !sig.smaller_p(sym, owner) {
                return Err(SigError::OrderViolation {
                    owner: owner.to_string(),
                    used: sym.clone(),
                });
            }
            let def = sig.pred_defs.get(sym).ok_or_else(|| SigError::UnknownSymbol {
                owner: owner.to_string(),
                sym: sym.clone(),
            })?;
            if gvars.len() != def.formals.len() || omega_args.len() != def.omega_arity() {
                return Err(SigError::ArityMismatch {
                    owner: owner.to_string(),
                    sym: sym.clone(),
                });
            }
            for a in omega_args {
                check_omega_rhs(sig, owner, a, scope, allow_rec)?;
            }
            Ok(())
        }
        Formula::Not(g) => check_formula_rhs(sig, owner, g, scope, formals, allow_rec),
        Formula::And(a, b) | Formula::Or(a, b) => {
            check_formula_rhs(sig, owner, a, scope, formals, allow_rec)?;
            check_formula_rhs(sig, owner, b, scope, formals, allow_rec)
        }
    }
}

/// Shared fixture signatures for unit tests.
pub mod test_support {
    use super::*;

    /// phat (predecessor), fhat (addition), ghat (multiplication).
    pub fn arith_signature() -> Signature {
        let mut sig = Signature::new();
        sig.params.extend(["n".to_string(), "m".to_string()]);
        sig.register_numeric(
            "phat",
            NumericDef {
                params: vec![],
                rec_param: "m".into(),
                base: NumericTerm::Zero,
                step: NumericTerm::param("m"),
            },
        )
        .unwrap();
        sig.register_numeric(
            "fhat",
            NumericDef {
                params: vec!["n".into()],
                rec_param: "m".into(),
                base: NumericTerm::param("n"),
                step: NumericTerm::succ(NumericTerm::Rec),
            },
        )
        .unwrap();
        sig.order_f.push(("fhat".into(), "ghat".into()));
        sig.register_numeric(
            "ghat",
            NumericDef {
                params: vec!["n".into()],
                rec_param: "m".into(),
                base: NumericTerm::Zero,
                step: NumericTerm::DefApp(
                    "fhat".into(),
                    vec![NumericTerm::param("n"), NumericTerm::Rec],
                ),
            },
        )
        .unwrap();
        sig
    }
}
