//! Iota-sort terms with global-variable applications and defined symbols,
//! and their evaluation to ordinary first-order terms.

use crate::numeric::{normalize_omega, NumericError, NumericTerm, ParameterAssignment};
use crate::signature::Signature;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Argument of a defined iota symbol: a bare global variable (for formal
/// slots of positive arity) or an arbitrary iota term (for arity-zero slots).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DefArg {
    Gvar(String),
    Term(IotaTerm),
}

/// A term of the individual sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IotaTerm {
    Const(String),
    /// Global variable applied to omega terms; with numeral arguments this
    /// is an individual variable.
    VTerm(String, Vec<NumericTerm>),
    FunApp(String, Vec<IotaTerm>),
    DefApp {
        sym: String,
        args: Vec<DefArg>,
        omega_args: Vec<NumericTerm>,
    },
    /// Recursion placeholder of a step right-hand side. The omega terms, when
    /// present, replace the declared parameters in the recursive call.
    Rec(Vec<NumericTerm>),
}

impl IotaTerm {
    pub fn cst(name: &str) -> IotaTerm {
        IotaTerm::Const(name.to_string())
    }

    pub fn var(gvar: &str, args: Vec<NumericTerm>) -> IotaTerm {
        IotaTerm::VTerm(gvar.to_string(), args)
    }

    /// Individual variable: global variable applied to numerals.
    pub fn ivar(gvar: &str, args: &[usize]) -> IotaTerm {
        IotaTerm::VTerm(
            gvar.to_string(),
            args.iter().map(|n| NumericTerm::numeral(*n)).collect(),
        )
    }

    pub fn fun(name: &str, args: Vec<IotaTerm>) -> IotaTerm {
        IotaTerm::FunApp(name.to_string(), args)
    }

    pub fn def(sym: &str, args: Vec<DefArg>, omega_args: Vec<NumericTerm>) -> IotaTerm {
        IotaTerm::DefApp {
            sym: sym.to_string(),
            args,
            omega_args,
        }
    }

    /// True when the term contains no defined symbols and no parameters:
    /// the "ordinary" first-order terms.
    pub fn is_ground(&self) -> bool {
        match self {
            IotaTerm::Const(_) => true,
            IotaTerm::VTerm(_, args) => args.iter().all(|a| a.as_numeral().is_some()),
            IotaTerm::FunApp(_, args) => args.iter().all(|a| a.is_ground()),
            IotaTerm::DefApp { .. } | IotaTerm::Rec(_) => false,
        }
    }

    /// Is this term an individual variable (V-term over numerals)?
    pub fn as_ivar(&self) -> Option<(&str, Vec<usize>)> {
        match self {
            IotaTerm::VTerm(x, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(a.as_numeral()?);
                }
                Some((x, vals))
            }
            _ => None,
        }
    }

    pub fn gvars(&self, out: &mut BTreeSet<String>) {
        match self {
            IotaTerm::Const(_) => {}
            IotaTerm::VTerm(x, _) => {
                out.insert(x.clone());
            }
            IotaTerm::FunApp(_, args) => {
                for a in args {
                    a.gvars(out);
                }
            }
            IotaTerm::DefApp { args, .. } => {
                for a in args {
                    match a {
                        DefArg::Gvar(g) => {
                            out.insert(g.clone());
                        }
                        DefArg::Term(t) => t.gvars(out),
                    }
                }
            }
            IotaTerm::Rec(_) => {}
        }
    }

    /// Collect every V-term occurrence.
    pub fn vterms(&self, out: &mut Vec<IotaTerm>) {
        match self {
            IotaTerm::VTerm(..) => out.push(self.clone()),
            IotaTerm::FunApp(_, args) => {
                for a in args {
                    a.vterms(out);
                }
            }
            IotaTerm::DefApp { args, .. } => {
                for a in args {
                    if let DefArg::Term(t) = a {
                        t.vterms(out);
                    }
                }
            }
            _ => {}
        }
    }

    pub fn params(&self, out: &mut BTreeSet<String>) {
        match self {
            IotaTerm::Const(_) => {}
            IotaTerm::VTerm(_, args) => {
                for a in args {
                    a.params(out);
                }
            }
            IotaTerm::FunApp(_, args) => {
                for a in args {
                    a.params(out);
                }
            }
            IotaTerm::DefApp {
                args, omega_args, ..
            } => {
                for a in args {
                    if let DefArg::Term(t) = a {
                        t.params(out);
                    }
                }
                for a in omega_args {
                    a.params(out);
                }
            }
            IotaTerm::Rec(shift) => {
                for a in shift {
                    a.params(out);
                }
            }
        }
    }

    /// Rename global variables according to a (bijective) map, in both bare
    /// and applied positions.
    pub fn rename_gvars(&self, map: &BTreeMap<String, String>) -> IotaTerm {
        let ren = |x: &String| map.get(x).cloned().unwrap_or_else(|| x.clone());
        match self {
            IotaTerm::Const(c) => IotaTerm::Const(c.clone()),
            IotaTerm::VTerm(x, args) => IotaTerm::VTerm(ren(x), args.clone()),
            IotaTerm::FunApp(f, args) => IotaTerm::FunApp(
                f.clone(),
                args.iter().map(|a| a.rename_gvars(map)).collect(),
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
                        DefArg::Gvar(g) => DefArg::Gvar(ren(g)),
                        DefArg::Term(t) => DefArg::Term(t.rename_gvars(map)),
                    })
                    .collect(),
                omega_args: omega_args.clone(),
            },
            IotaTerm::Rec(s) => IotaTerm::Rec(s.clone()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            IotaTerm::Const(_) | IotaTerm::VTerm(..) | IotaTerm::Rec(_) => 1,
            IotaTerm::FunApp(_, args) => 1 + args.iter().map(|a| a.depth()).max().unwrap_or(0),
            IotaTerm::DefApp { args, .. } => {
                1 + args
                    .iter()
                    .map(|a| match a {
                        DefArg::Gvar(_) => 1,
                        DefArg::Term(t) => t.depth(),
                    })
                    .max()
                    .unwrap_or(0)
            }
        }
    }
}

impl fmt::Display for IotaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IotaTerm::Const(c) => write!(f, "{}", c),
            IotaTerm::VTerm(x, args) => {
                write!(f, "{}(", x)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
            IotaTerm::FunApp(g, args) => {
                write!(f, "{}(", g)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
            IotaTerm::DefApp {
                sym,
                args,
                omega_args,
            } => {
                write!(f, "{}(", sym)?;
                let mut first = true;
                for a in args {
                    if !first {
                        write!(f, ",")?;
                    }
                    first = false;
                    match a {
                        DefArg::Gvar(g) => write!(f, "{}", g)?,
                        DefArg::Term(t) => write!(f, "{}", t)?,
                    }
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
            IotaTerm::Rec(shift) => {
                if shift.is_empty() {
                    write!(f, "rec")
                } else {
                    write!(f, "rec(")?;
                    for (i, a) in shift.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    write!(f, ")")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IotaError {
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("arity mismatch for {0}")]
    ArityMismatch(String),
    #[error("recursion placeholder outside a defining equation")]
    StrayRec,
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Environment for unfolding one defined symbol application.
struct UnfoldEnv<'a> {
    /// formal gvar name -> actual argument
    gvar_env: BTreeMap<String, DefArg>,
    omega_env: ParameterAssignment,
    /// declared parameters in order, for recursive calls
    params: Vec<String>,
    rec_param: String,
    rec_value: usize,
    sym: String,
    sig: &'a Signature,
}

/// Evaluate an iota term under an assignment to an ordinary first-order term.
pub fn eval_iota(
    t: &IotaTerm,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<IotaTerm, IotaError> {
    let out = eval_inner(t, sigma, sig)?;
    debug_assert!(out.is_ground());
    Ok(out)
}

fn eval_inner(
    t: &IotaTerm,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<IotaTerm, IotaError> {
    match t {
        IotaTerm::Const(c) => Ok(IotaTerm::Const(c.clone())),
        IotaTerm::VTerm(x, args) => {
            let vals = args
                .iter()
                .map(|a| normalize_omega(a, sigma, sig))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(IotaTerm::VTerm(
                x.clone(),
                vals.into_iter().map(NumericTerm::numeral).collect(),
            ))
        }
        IotaTerm::FunApp(f, args) => Ok(IotaTerm::FunApp(
            f.clone(),
            args.iter()
                .map(|a| eval_inner(a, sigma, sig))
                .collect::<Result<Vec<_>, _>>()?,
        )),
        IotaTerm::DefApp {
            sym,
            args,
            omega_args,
        } => {
            let vals = omega_args
                .iter()
                .map(|a| normalize_omega(a, sigma, sig))
                .collect::<Result<Vec<_>, _>>()?;
            // Arity-zero slots take the evaluated actual term.
            let def = sig
                .iota_defs
                .get(sym)
                .ok_or_else(|| IotaError::UnknownSymbol(sym.clone()))?;
            if args.len() != def.formals.len() || vals.len() != def.params.len() + 1 {
                return Err(IotaError::ArityMismatch(sym.clone()));
            }
            let mut gvar_env = BTreeMap::new();
            for (formal, actual) in def.formals.iter().zip(args) {
                let bound = match actual {
                    DefArg::Gvar(g) => DefArg::Gvar(g.clone()),
                    DefArg::Term(u) => DefArg::Term(eval_inner(u, sigma, sig)?),
                };
                gvar_env.insert(formal.name.clone(), bound);
            }
            unfold_iota_def(sym, gvar_env, &vals, sig)
        }
        IotaTerm::Rec(_) => Err(IotaError::StrayRec),
    }
}

fn unfold_iota_def(
    sym: &str,
    gvar_env: BTreeMap<String, DefArg>,
    vals: &[usize],
    sig: &Signature,
) -> Result<IotaTerm, IotaError> {
    let def = sig
        .iota_defs
        .get(sym)
        .ok_or_else(|| IotaError::UnknownSymbol(sym.to_string()))?;
    if vals.len() != def.params.len() + 1 {
        return Err(IotaError::ArityMismatch(sym.to_string()));
    }
    let mut omega_env = ParameterAssignment::new();
    for (p, v) in def.params.iter().zip(vals) {
        omega_env.set(p, *v);
    }
    let rec_value = vals[def.params.len()];
    let rhs = if rec_value == 0 { &def.base } else { &def.step };
    let mut env = UnfoldEnv {
        gvar_env,
        omega_env,
        params: def.params.clone(),
        rec_param: def.rec_param.clone(),
        rec_value,
        sym: sym.to_string(),
        sig,
    };
    if rec_value > 0 {
        env.omega_env.set(&def.rec_param.clone(), rec_value - 1);
    }
    instantiate_rhs(rhs, &env)
}

fn instantiate_rhs(t: &IotaTerm, env: &UnfoldEnv) -> Result<IotaTerm, IotaError> {
    match t {
        IotaTerm::Const(c) => Ok(IotaTerm::Const(c.clone())),
        IotaTerm::VTerm(x, args) => {
            let vals = args
                .iter()
                .map(|a| normalize_omega(a, &env.omega_env, env.sig))
                .collect::<Result<Vec<_>, _>>()?;
            match env.gvar_env.get(x) {
                Some(DefArg::Gvar(g)) => Ok(IotaTerm::VTerm(
                    g.clone(),
                    vals.into_iter().map(NumericTerm::numeral).collect(),
                )),
                Some(DefArg::Term(u)) => {
                    if vals.is_empty() {
                        Ok(u.clone())
                    } else {
                        Err(IotaError::ArityMismatch(x.clone()))
                    }
                }
                None => Ok(IotaTerm::VTerm(
                    x.clone(),
                    vals.into_iter().map(NumericTerm::numeral).collect(),
                )),
            }
        }
        IotaTerm::FunApp(f, args) => Ok(IotaTerm::FunApp(
            f.clone(),
            args.iter()
                .map(|a| instantiate_rhs(a, env))
                .collect::<Result<Vec<_>, _>>()?,
        )),
        IotaTerm::DefApp {
            sym,
            args,
            omega_args,
        } => {
            let vals = omega_args
                .iter()
                .map(|a| normalize_omega(a, &env.omega_env, env.sig))
                .collect::<Result<Vec<_>, _>>()?;
            let def = env
                .sig
                .iota_defs
                .get(sym)
                .ok_or_else(|| IotaError::UnknownSymbol(sym.clone()))?;
            if args.len() != def.formals.len() {
                return Err(IotaError::ArityMismatch(sym.clone()));
            }
            let mut inner_env = BTreeMap::new();
            for (formal, actual) in def.formals.iter().zip(args) {
                let bound = match actual {
                    DefArg::Gvar(g) => match env.gvar_env.get(g) {
                        Some(b) => b.clone(),
                        None => DefArg::Gvar(g.clone()),
                    },
                    DefArg::Term(u) => DefArg::Term(instantiate_rhs(u, env)?),
                };
                inner_env.insert(formal.name.clone(), bound);
            }
            unfold_iota_def(sym, inner_env, &vals, env.sig)
        }
        IotaTerm::Rec(shift) => {
            if env.rec_value == 0 {
                return Err(IotaError::StrayRec);
            }
            let param_vals: Vec<usize> = if shift.is_empty() {
                env.params.iter().map(|p| env.omega_env.get(p)).collect()
            } else {
                if shift.len() != env.params.len() {
                    return Err(IotaError::ArityMismatch(env.sym.clone()));
                }
                shift
                    .iter()
                    .map(|a| normalize_omega(a, &env.omega_env, env.sig))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let mut vals = param_vals;
            vals.push(env.omega_env.get(&env.rec_param));
            unfold_iota_def(&env.sym, env.gvar_env.clone(), &vals, env.sig)
        }
    }
}

/// Componentwise comparison of two V-terms after normalization.
pub fn vterm_equal(
    u: &IotaTerm,
    v: &IotaTerm,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<bool, IotaError> {
    match (u, v) {
        (IotaTerm::VTerm(x, xs), IotaTerm::VTerm(y, ys)) => {
            if x != y {
                return Ok(false);
            }
            if xs.len() != ys.len() {
                return Err(IotaError::ArityMismatch(x.clone()));
            }
            for (a, b) in xs.iter().zip(ys) {
                if normalize_omega(a, sigma, sig)? != normalize_omega(b, sigma, sig)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Err(IotaError::ArityMismatch("not a V-term".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{GvarFormal, IotaDef, Signature};

    /// Signature of the running evaluation example: a two-place global
    /// variable X, a zero-place Y, binary g, and the defined symbol
    /// fhat2(X, Y, n, 0) = Y; fhat2(X, Y, n, s(m)) = g(X(n, m), rec).
    fn eval_example_signature() -> Signature {
        let mut sig = Signature::new();
        sig.params.extend(["n".to_string(), "m".to_string()]);
        sig.funcs.insert("g".into(), 2);
        sig.gvars.insert("X".into(), 2);
        sig.gvars.insert("Y".into(), 0);
        sig.register_iota(
            "fhat2",
            IotaDef {
                formals: vec![
                    GvarFormal {
                        name: "X".into(),
                        arity: 2,
                    },
                    GvarFormal {
                        name: "Y".into(),
                        arity: 0,
                    },
                ],
                params: vec!["n".into()],
                rec_param: "m".into(),
                base: IotaTerm::var("Y", vec![]),
                step: IotaTerm::fun(
                    "g",
                    vec![
                        IotaTerm::var("X", vec![NumericTerm::param("n"), NumericTerm::param("m")]),
                        IotaTerm::Rec(vec![]),
                    ],
                ),
            },
        )
        .unwrap();
        sig
    }

    #[test]
    fn evaluation_example() {
        // fhat2(X, Y, n, m) at n := 1, m := 2 evaluates to
        // g(X(1,1), g(X(1,0), Y))
        let sig = eval_example_signature();
        let t = IotaTerm::def(
            "fhat2",
            vec![DefArg::Gvar("X".into()), DefArg::Gvar("Y".into())],
            vec![NumericTerm::param("n"), NumericTerm::param("m")],
        );
        let sigma = ParameterAssignment::from_pairs(&[("n", 1), ("m", 2)]);
        let result = eval_iota(&t, &sigma, &sig).unwrap();
        let expected = IotaTerm::fun(
            "g",
            vec![
                IotaTerm::ivar("X", &[1, 1]),
                IotaTerm::fun(
                    "g",
                    vec![IotaTerm::ivar("X", &[1, 0]), IotaTerm::var("Y", vec![])],
                ),
            ],
        );
        assert_eq!(result, expected);
        assert!(result.is_ground());
    }

    #[test]
    fn constants_evaluate_to_themselves() {
        let mut sig = eval_example_signature();
        sig.consts.insert("c".into());
        let sigma = ParameterAssignment::new();
        assert_eq!(
            eval_iota(&IotaTerm::cst("c"), &sigma, &sig).unwrap(),
            IotaTerm::cst("c")
        );
    }

    #[test]
    fn unary_chain_unfolding() {
        // fhat(X, m) with fhat(X,0) = X(0), fhat(X, s(m)) = g2(X(s(m)), rec)
        // at m := 2 gives g2(X(2), g2(X(1), X(0)))
        let mut sig = Signature::new();
        sig.params.insert("m".into());
        sig.funcs.insert("g2".into(), 2);
        sig.gvars.insert("X".into(), 1);
        sig.register_iota(
            "fhat",
            IotaDef {
                formals: vec![GvarFormal {
                    name: "X".into(),
                    arity: 1,
                }],
                params: vec![],
                rec_param: "m".into(),
                base: IotaTerm::var("X", vec![NumericTerm::Zero]),
                step: IotaTerm::fun(
                    "g2",
                    vec![
                        IotaTerm::var("X", vec![NumericTerm::succ(NumericTerm::param("m"))]),
                        IotaTerm::Rec(vec![]),
                    ],
                ),
            },
        )
        .unwrap();
        let t = IotaTerm::def(
            "fhat",
            vec![DefArg::Gvar("X".into())],
            vec![NumericTerm::numeral(2)],
        );
        let result = eval_iota(&t, &ParameterAssignment::new(), &sig).unwrap();
        let expected = IotaTerm::fun(
            "g2",
            vec![
                IotaTerm::ivar("X", &[2]),
                IotaTerm::fun(
                    "g2",
                    vec![IotaTerm::ivar("X", &[1]), IotaTerm::ivar("X", &[0])],
                ),
            ],
        );
        assert_eq!(result, expected);
    }

    #[test]
    fn vterm_equality_examples() {
        let sig = crate::signature::test_support::arith_signature();
        let sigma = ParameterAssignment::from_pairs(&[("n", 1)]);
        let u = IotaTerm::var("X", vec![NumericTerm::param("n")]);
        let v = IotaTerm::var("X", vec![NumericTerm::numeral(1)]);
        assert!(vterm_equal(&u, &v, &sigma, &sig).unwrap());
        let w = IotaTerm::var("Y", vec![NumericTerm::param("n")]);
        assert!(!vterm_equal(&u, &w, &sigma, &sig).unwrap());
        // X(fhat(0, n)) equals X(n) for every assignment since 0 + n = n
        let plus = IotaTerm::var(
            "X",
            vec![NumericTerm::DefApp(
                "fhat".into(),
                vec![NumericTerm::Zero, NumericTerm::param("n")],
            )],
        );
        let plain = IotaTerm::var("X", vec![NumericTerm::param("n")]);
        for k in 0..5 {
            let sigma = ParameterAssignment::from_pairs(&[("n", k)]);
            assert!(vterm_equal(&plus, &plain, &sigma, &sig).unwrap());
        }
    }
}
