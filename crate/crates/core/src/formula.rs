//! Formula schemata, defined predicate symbols, and evaluation to ground
//! quantifier-free formulas.

use crate::iota::{eval_iota, DefArg, IotaError, IotaTerm};
use crate::numeric::{normalize_omega, NumericTerm, ParameterAssignment};
use crate::signature::{PredBody, Signature};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A formula schema. `Rec` is the formula-variable placeholder of a step
/// defining equation. Implication is not a connective; it is expressed with
/// negation and disjunction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    FormulaVar(String),
    Atom(String, Vec<IotaTerm>),
    DefAtom {
        sym: String,
        gvars: Vec<String>,
        omega_args: Vec<NumericTerm>,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Rec,
}

impl Formula {
    pub fn atom(p: &str, args: Vec<IotaTerm>) -> Formula {
        Formula::Atom(p.to_string(), args)
    }

    pub fn def_atom(sym: &str, gvars: &[&str], omega_args: Vec<NumericTerm>) -> Formula {
        Formula::DefAtom {
            sym: sym.to_string(),
            gvars: gvars.iter().map(|s| s.to_string()).collect(),
            omega_args,
        }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// Member of F0: no formula variables, defined symbols, parameters, and
    /// every V-term argument a numeral.
    pub fn is_ground(&self) -> bool {
        match self {
            Formula::FormulaVar(_) | Formula::DefAtom { .. } | Formula::Rec => false,
            Formula::Atom(_, args) => args.iter().all(|t| t.is_ground()),
            Formula::Not(f) => f.is_ground(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_ground() && b.is_ground(),
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(..) | Formula::DefAtom { .. })
    }

    pub fn gvars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::FormulaVar(_) | Formula::Rec => {}
            Formula::Atom(_, args) => {
                for t in args {
                    t.gvars(out);
                }
            }
            Formula::DefAtom { gvars, .. } => {
                out.extend(gvars.iter().cloned());
            }
            Formula::Not(f) => f.gvars(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.gvars(out);
                b.gvars(out);
            }
        }
    }

    /// V-term occurrences in atom arguments (bare global-variable arguments
    /// of defined atoms are not V-terms).
    pub fn vterms(&self, out: &mut Vec<IotaTerm>) {
        match self {
            Formula::Atom(_, args) => {
                for t in args {
                    t.vterms(out);
                }
            }
            Formula::Not(f) => f.vterms(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.vterms(out);
                b.vterms(out);
            }
            _ => {}
        }
    }

    pub fn params(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::FormulaVar(_) | Formula::Rec => {}
            Formula::Atom(_, args) => {
                for t in args {
                    t.params(out);
                }
            }
            Formula::DefAtom { omega_args, .. } => {
                for t in omega_args {
                    t.params(out);
                }
            }
            Formula::Not(f) => f.params(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.params(out);
                b.params(out);
            }
        }
    }

    pub fn rename_gvars(&self, map: &BTreeMap<String, String>) -> Formula {
        let ren = |x: &String| map.get(x).cloned().unwrap_or_else(|| x.clone());
        match self {
            Formula::FormulaVar(x) => Formula::FormulaVar(x.clone()),
            Formula::Rec => Formula::Rec,
            Formula::Atom(p, args) => Formula::Atom(
                p.clone(),
                args.iter().map(|t| t.rename_gvars(map)).collect(),
            ),
            Formula::DefAtom {
                sym,
                gvars,
                omega_args,
            } => Formula::DefAtom {
                sym: sym.clone(),
                gvars: gvars.iter().map(ren).collect(),
                omega_args: omega_args.clone(),
            },
            Formula::Not(f) => Formula::not(f.rename_gvars(map)),
            Formula::And(a, b) => Formula::and(a.rename_gvars(map), b.rename_gvars(map)),
            Formula::Or(a, b) => Formula::or(a.rename_gvars(map), b.rename_gvars(map)),
        }
    }

    /// Distinct individual variables of a ground formula.
    pub fn distinct_variables(&self) -> BTreeSet<IotaTerm> {
        let mut vterms = Vec::new();
        self.vterms(&mut vterms);
        vterms.into_iter().collect()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::FormulaVar(x) => write!(f, "{}", x),
            Formula::Rec => write!(f, "rec"),
            Formula::Atom(p, args) => {
                write!(f, "{}(", p)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
            Formula::DefAtom {
                sym,
                gvars,
                omega_args,
            } => {
                write!(f, "{}(", sym)?;
                let mut first = true;
                for g in gvars {
                    if !first {
                        write!(f, ",")?;
                    }
                    first = false;
                    write!(f, "{}", g)?;
                }
                for a in omega_args {
                    if !first {
                        write!(f, ",")?;
                    }
                    first = false;
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
            Formula::Not(g) => write!(f, "!{}", Paren(g)),
            Formula::And(a, b) => write!(f, "{} & {}", Paren(a), Paren(b)),
            Formula::Or(a, b) => write!(f, "{} | {}", Paren(a), Paren(b)),
        }
    }
}

struct Paren<'a>(&'a Formula);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Formula::And(..) | Formula::Or(..) | Formula::Not(..) => write!(f, "({})", self.0),
            other => write!(f, "{}", other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("arity mismatch for {0}")]
    ArityMismatch(String),
    #[error("formula variable {0} cannot be evaluated")]
    FormulaVar(String),
    #[error("recursion placeholder outside a defining equation")]
    StrayRec,
    #[error(transparent)]
    Iota(#[from] IotaError),
    #[error(transparent)]
    Numeric(#[from] crate::numeric::NumericError),
}

/// Evaluate a formula schema without formula variables to a ground formula.
pub fn eval_formula(
    f: &Formula,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<Formula, FormulaError> {
    let out = eval_f(f, sigma, sig)?;
    debug_assert!(out.is_ground());
    Ok(out)
}

fn eval_f(
    f: &Formula,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<Formula, FormulaError> {
    match f {
        Formula::FormulaVar(x) => Err(FormulaError::FormulaVar(x.clone())),
        Formula::Rec => Err(FormulaError::StrayRec),
        Formula::Atom(p, args) => Ok(Formula::Atom(
            p.clone(),
            args.iter()
                .map(|t| eval_iota(t, sigma, sig))
                .collect::<Result<Vec<_>, _>>()?,
        )),
        Formula::DefAtom {
            sym,
            gvars,
            omega_args,
        } => {
            let vals = omega_args
                .iter()
                .map(|t| normalize_omega(t, sigma, sig))
                .collect::<Result<Vec<_>, _>>()?;
            unfold_pred(sym, gvars, &vals, sig)
        }
        Formula::Not(g) => Ok(Formula::not(eval_f(g, sigma, sig)?)),
        Formula::And(a, b) => Ok(Formula::and(eval_f(a, sigma, sig)?, eval_f(b, sigma, sig)?)),
        Formula::Or(a, b) => Ok(Formula::or(eval_f(a, sigma, sig)?, eval_f(b, sigma, sig)?)),
    }
}

fn unfold_pred(
    sym: &str,
    actual_gvars: &[String],
    vals: &[usize],
    sig: &Signature,
) -> Result<Formula, FormulaError> {
    let def = sig
        .pred_defs
        .get(sym)
        .ok_or_else(|| FormulaError::UnknownSymbol(sym.to_string()))?;
    if actual_gvars.len() != def.formals.len() || vals.len() != def.omega_arity() {
        return Err(FormulaError::ArityMismatch(sym.to_string()));
    }
    let gvar_env: BTreeMap<String, String> = def
        .formals
        .iter()
        .map(|f| f.name.clone())
        .zip(actual_gvars.iter().cloned())
        .collect();
    let mut omega_env = ParameterAssignment::new();
    for (p, v) in def.params.iter().zip(vals) {
        omega_env.set(p, *v);
    }
    let last = vals[def.params.len()];
    match &def.body {
        PredBody::Flat { last_param, rhs } => {
            omega_env.set(last_param, last);
            instantiate_pred_rhs(rhs, &gvar_env, &omega_env, None, sig)
        }
        PredBody::Recursive {
            rec_param,
            base,
            step,
        } => {
            if last == 0 {
                instantiate_pred_rhs(base, &gvar_env, &omega_env, None, sig)
            } else {
                omega_env.set(rec_param, last - 1);
                let rec_vals: Vec<usize> = def
                    .params
                    .iter()
                    .map(|p| omega_env.get(p))
                    .chain(std::iter::once(last - 1))
                    .collect();
                let rec_formula = unfold_pred(sym, actual_gvars, &rec_vals, sig)?;
                instantiate_pred_rhs(step, &gvar_env, &omega_env, Some(&rec_formula), sig)
            }
        }
    }
}

fn instantiate_pred_rhs(
    f: &Formula,
    gvar_env: &BTreeMap<String, String>,
    omega_env: &ParameterAssignment,
    rec: Option<&Formula>,
    sig: &Signature,
) -> Result<Formula, FormulaError> {
    match f {
        Formula::Rec => rec.cloned().ok_or(FormulaError::StrayRec),
        Formula::FormulaVar(x) => Err(FormulaError::FormulaVar(x.clone())),
        Formula::Atom(p, args) => {
            let renamed = Formula::Atom(
                p.clone(),
                args.iter()
                    .map(|t| rename_term_formals(t, gvar_env))
                    .collect(),
            );
            match renamed {
                Formula::Atom(p, args) => Ok(Formula::Atom(
                    p,
                    args.iter()
                        .map(|t| eval_iota(t, omega_env, sig))
                        .collect::<Result<Vec<_>, _>>()?,
                )),
                _ => unreachable!(),
            }
        }
        Formula::DefAtom {
            sym,
            gvars,
            omega_args,
        } => {
            let actual: Vec<String> = gvars
                .iter()
                .map(|g| gvar_env.get(g).cloned().unwrap_or_else(|| g.clone()))
                .collect();
            let vals = omega_args
                .iter()
                .map(|t| normalize_omega(t, omega_env, sig))
                .collect::<Result<Vec<_>, _>>()?;
            unfold_pred(sym, &actual, &vals, sig)
        }
        Formula::Not(g) => Ok(Formula::not(instantiate_pred_rhs(
            g, gvar_env, omega_env, rec, sig,
        )?)),
        Formula::And(a, b) => Ok(Formula::and(
            instantiate_pred_rhs(a, gvar_env, omega_env, rec, sig)?,
            instantiate_pred_rhs(b, gvar_env, omega_env, rec, sig)?,
        )),
        Formula::Or(a, b) => Ok(Formula::or(
            instantiate_pred_rhs(a, gvar_env, omega_env, rec, sig)?,
            instantiate_pred_rhs(b, gvar_env, omega_env, rec, sig)?,
        )),
    }
}

/// Rename formal global variables inside a right-hand-side term to the
/// actual global variables of the application being unfolded.
fn rename_term_formals(t: &IotaTerm, gvar_env: &BTreeMap<String, String>) -> IotaTerm {
    match t {
        IotaTerm::Const(_) => t.clone(),
        IotaTerm::VTerm(x, args) => IotaTerm::VTerm(
            gvar_env.get(x).cloned().unwrap_or_else(|| x.clone()),
            args.clone(),
        ),
        IotaTerm::FunApp(f, args) => IotaTerm::FunApp(
            f.clone(),
            args.iter().map(|a| rename_term_formals(a, gvar_env)).collect(),
        ),
        IotaTerm::DefApp {
            sym,
            args,
            omega_args,
        } => IotaTerm::DefApp {
            sym: sym.clone(),
            args: args
                .iter()
                .map(|a| match a {
                    DefArg::Gvar(g) => {
                        DefArg::Gvar(gvar_env.get(g).cloned().unwrap_or_else(|| g.clone()))
                    }
                    DefArg::Term(u) => DefArg::Term(rename_term_formals(u, gvar_env)),
                })
                .collect(),
            omega_args: omega_args.clone(),
        },
        IotaTerm::Rec(_) => t.clone(),
    }
}

/// Number of distinct individual variables in a ground formula.
pub fn count_distinct_variables(f: &Formula) -> usize {
    f.distinct_variables().len()
}
