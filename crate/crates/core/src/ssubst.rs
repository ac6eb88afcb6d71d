//! s-substitutions: validation, instantiation, application, normality and
//! composability decisions, composition, s-unifier verification, and
//! ordinary first-order unification over ground terms.

use crate::formula::Formula;
use crate::iota::{eval_iota, DefArg, IotaError, IotaTerm};
use crate::numeric::{
    assignment_grid, essentially_distinct, partial_eval_omega, tuples_always_equal, unify_t0,
    NumericError, NumericTerm, ParameterAssignment,
};
use crate::signature::Signature;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A finite set of pairs from V-terms (with T0 arguments) to iota terms.
/// For two pairs over the same global variable, the argument tuples must be
/// essentially distinct or provably map to the same image wherever they
/// coincide.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SSubstitution {
    pub pairs: Vec<(IotaTerm, IotaTerm)>,
}

impl SSubstitution {
    pub fn empty() -> SSubstitution {
        SSubstitution { pairs: Vec::new() }
    }

    pub fn of(pairs: Vec<(IotaTerm, IotaTerm)>) -> SSubstitution {
        SSubstitution { pairs }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &IotaTerm> {
        self.pairs.iter().map(|(d, _)| d)
    }

    pub fn range(&self) -> impl Iterator<Item = &IotaTerm> {
        self.pairs.iter().map(|(_, r)| r)
    }

    pub fn domain_gvars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for d in self.domain() {
            d.gvars(&mut out);
        }
        out
    }

    pub fn gvars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (d, r) in &self.pairs {
            d.gvars(&mut out);
            r.gvars(&mut out);
        }
        out
    }

    /// V-terms occurring anywhere in the substitution.
    pub fn vterms(&self) -> Vec<IotaTerm> {
        let mut out = Vec::new();
        for (d, r) in &self.pairs {
            d.vterms(&mut out);
            r.vterms(&mut out);
        }
        out
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (d, r) in &self.pairs {
            d.params(&mut out);
            r.params(&mut out);
        }
        out
    }
}

impl fmt::Display for SSubstitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (d, r)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} <- {}", d, r)?;
        }
        write!(f, "}}")
    }
}

/// A first-order substitution: individual variables to ground terms.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FoSubstitution {
    pub map: BTreeMap<IotaTerm, IotaTerm>,
}

impl FoSubstitution {
    pub fn empty() -> FoSubstitution {
        FoSubstitution::default()
    }

    pub fn bind(&mut self, var: IotaTerm, term: IotaTerm) {
        self.map.insert(var, term);
    }

    pub fn apply(&self, t: &IotaTerm) -> IotaTerm {
        match t {
            IotaTerm::VTerm(..) => match self.map.get(t) {
                Some(u) => u.clone(),
                None => t.clone(),
            },
            IotaTerm::FunApp(f, args) => {
                IotaTerm::FunApp(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            other => other.clone(),
        }
    }

    pub fn apply_formula(&self, f: &Formula) -> Formula {
        match f {
            Formula::Atom(p, args) => {
                Formula::Atom(p.clone(), args.iter().map(|t| self.apply(t)).collect())
            }
            Formula::Not(g) => Formula::not(self.apply_formula(g)),
            Formula::And(a, b) => Formula::and(self.apply_formula(a), self.apply_formula(b)),
            Formula::Or(a, b) => Formula::or(self.apply_formula(a), self.apply_formula(b)),
            other => other.clone(),
        }
    }

    /// Composition in diagrammatic order: `x (self ; other) = (x self) other`.
    pub fn compose(&self, other: &FoSubstitution) -> FoSubstitution {
        let mut map = BTreeMap::new();
        for (x, t) in &self.map {
            map.insert(x.clone(), other.apply(t));
        }
        for (y, r) in &other.map {
            map.entry(y.clone()).or_insert_with(|| r.clone());
        }
        FoSubstitution { map }
    }
}

impl fmt::Display for FoSubstitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (d, r)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} <- {}", d, r)?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SSubstError {
    #[error("domain entry {0} is not a V-term with T0 arguments")]
    BadDomain(String),
    #[error("pairs {0} and {1} collide: same variable, overlapping tuples, different images")]
    Collision(String, String),
    #[error("substitutions are not composable")]
    NotComposable,
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Iota(#[from] IotaError),
}

fn dom_parts(d: &IotaTerm) -> Result<(&str, &[NumericTerm]), SSubstError> {
    match d {
        IotaTerm::VTerm(x, args) if args.iter().all(|a| a.is_t0()) => Ok((x, args)),
        other => Err(SSubstError::BadDomain(other.to_string())),
    }
}

/// Validate the s-substitution discipline.
///
/// Two pairs over the same global variable must have essentially distinct
/// argument tuples; when the tuples can coincide, the pair is still accepted
/// if the two images provably agree at every coincidence point (checked by
/// applying the tuple unifier and comparing partial normal forms, with a
/// bounded grid fallback).
pub fn validate(theta: &SSubstitution, sig: &Signature) -> Result<(), SSubstError> {
    for (d, _) in &theta.pairs {
        dom_parts(d)?;
    }
    for i in 0..theta.pairs.len() {
        for j in i + 1..theta.pairs.len() {
            let (x, xs) = dom_parts(&theta.pairs[i].0)?;
            let (y, ys) = dom_parts(&theta.pairs[j].0)?;
            if x != y {
                continue;
            }
            if essentially_distinct(xs, ys)? {
                continue;
            }
            // Overlapping tuples: images must agree under the overlap.
            let unifier = match unify_t0(
                &xs.iter()
                    .cloned()
                    .zip(ys.iter().cloned())
                    .collect::<Vec<_>>(),
            )? {
                Some(u) => u,
                None => continue,
            };
            let ti = subst_params_term(&theta.pairs[i].1, &unifier);
            let tj = subst_params_term(&theta.pairs[j].1, &unifier);
            if iota_partial_eval(&ti, sig) == iota_partial_eval(&tj, sig) {
                continue;
            }
            // bounded fallback
            let mut params = BTreeSet::new();
            ti.params(&mut params);
            tj.params(&mut params);
            let params: Vec<String> = params.into_iter().collect();
            let agree = assignment_grid(&params, 4).into_iter().all(|sigma| {
                eval_iota(&ti, &sigma, sig).ok() == eval_iota(&tj, &sigma, sig).ok()
            });
            if !agree {
                return Err(SSubstError::Collision(
                    theta.pairs[i].0.to_string(),
                    theta.pairs[j].0.to_string(),
                ));
            }
        }
    }
    Ok(())
}

fn subst_params_omega(t: &NumericTerm, map: &BTreeMap<String, NumericTerm>) -> NumericTerm {
    match t {
        NumericTerm::Param(p) => map.get(p).cloned().unwrap_or_else(|| t.clone()),
        NumericTerm::Succ(u) => NumericTerm::succ(subst_params_omega(u, map)),
        NumericTerm::DefApp(f, args) => NumericTerm::DefApp(
            f.clone(),
            args.iter().map(|a| subst_params_omega(a, map)).collect(),
        ),
        other => other.clone(),
    }
}

/// Apply a parameter-to-term map inside an iota term.
pub fn subst_params_term(t: &IotaTerm, map: &BTreeMap<String, NumericTerm>) -> IotaTerm {
    match t {
        IotaTerm::Const(_) => t.clone(),
        IotaTerm::VTerm(x, args) => IotaTerm::VTerm(
            x.clone(),
            args.iter().map(|a| subst_params_omega(a, map)).collect(),
        ),
        IotaTerm::FunApp(f, args) => IotaTerm::FunApp(
            f.clone(),
            args.iter().map(|a| subst_params_term(a, map)).collect(),
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
                    DefArg::Gvar(g) => DefArg::Gvar(g.clone()),
                    DefArg::Term(u) => DefArg::Term(subst_params_term(u, map)),
                })
                .collect(),
            omega_args: omega_args
                .iter()
                .map(|a| subst_params_omega(a, map))
                .collect(),
        },
        IotaTerm::Rec(_) => t.clone(),
    }
}

/// Partial evaluation of an iota term: normalize omega arguments where
/// closed, and unfold defined applications whose recursion argument is a
/// numeral.
pub fn iota_partial_eval(t: &IotaTerm, sig: &Signature) -> IotaTerm {
    match t {
        IotaTerm::Const(_) => t.clone(),
        IotaTerm::VTerm(x, args) => IotaTerm::VTerm(
            x.clone(),
            args.iter().map(|a| partial_eval_omega(a, sig)).collect(),
        ),
        IotaTerm::FunApp(f, args) => IotaTerm::FunApp(
            f.clone(),
            args.iter().map(|a| iota_partial_eval(a, sig)).collect(),
        ),
        IotaTerm::DefApp {
            sym,
            args,
            omega_args,
        } => {
            let omega: Vec<NumericTerm> = omega_args
                .iter()
                .map(|a| partial_eval_omega(a, sig))
                .collect();
            let args: Vec<DefArg> = args
                .iter()
                .map(|a| match a {
                    DefArg::Gvar(g) => DefArg::Gvar(g.clone()),
                    DefArg::Term(u) => DefArg::Term(iota_partial_eval(u, sig)),
                })
                .collect();
            let all_closed = omega.iter().all(|a| a.as_numeral().is_some());
            if all_closed {
                let probe = IotaTerm::DefApp {
                    sym: sym.clone(),
                    args: args.clone(),
                    omega_args: omega.clone(),
                };
                // Closed recursion arguments: unfolding is safe. Free
                // variables inside iota arguments survive evaluation only if
                // they are V-terms with closed indices, so guard on that.
                if let Ok(res) = eval_iota_relaxed(&probe, sig) {
                    return res;
                }
            }
            IotaTerm::DefApp {
                sym: sym.clone(),
                args,
                omega_args: omega,
            }
        }
        IotaTerm::Rec(_) => t.clone(),
    }
}

/// Evaluation that tolerates open V-term indices by leaving them in place.
fn eval_iota_relaxed(t: &IotaTerm, sig: &Signature) -> Result<IotaTerm, IotaError> {
    match t {
        IotaTerm::Const(_) | IotaTerm::VTerm(..) => Ok(t.clone()),
        IotaTerm::FunApp(f, args) => Ok(IotaTerm::FunApp(
            f.clone(),
            args.iter()
                .map(|a| eval_iota_relaxed(a, sig))
                .collect::<Result<Vec<_>, _>>()?,
        )),
        IotaTerm::DefApp { omega_args, .. } => {
            if omega_args.iter().any(|a| a.as_numeral().is_none()) {
                return Err(IotaError::ArityMismatch("open".into()));
            }
            // All omega arguments closed: ordinary evaluation with an empty
            // assignment after replacing iota arguments by their relaxed
            // evaluations.
            match t {
                IotaTerm::DefApp {
                    sym,
                    args,
                    omega_args,
                } => {
                    let args = args
                        .iter()
                        .map(|a| {
                            Ok(match a {
                                DefArg::Gvar(g) => DefArg::Gvar(g.clone()),
                                DefArg::Term(u) => DefArg::Term(eval_iota_relaxed(u, sig)?),
                            })
                        })
                        .collect::<Result<Vec<_>, IotaError>>()?;
                    let probe = IotaTerm::DefApp {
                        sym: sym.clone(),
                        args,
                        omega_args: omega_args.clone(),
                    };
                    eval_open_defapp(&probe, sig)
                }
                _ => unreachable!(),
            }
        }
        IotaTerm::Rec(_) => Err(IotaError::StrayRec),
    }
}

/// Unfold a defined application whose omega arguments are numerals, leaving
/// embedded V-terms (possibly with open indices) untouched.
fn eval_open_defapp(t: &IotaTerm, sig: &Signature) -> Result<IotaTerm, IotaError> {
    // The standard evaluator only normalizes V-term indices, which is the
    // identity on already-closed indices; open indices would be zeroed, so
    // substitute placeholders first.
    // Implementation detail: we temporarily swap open V-terms for fresh
    // constants, evaluate, and swap back.
    let mut table: Vec<(String, IotaTerm)> = Vec::new();
    let masked = mask_open_vterms(t, &mut table);
    let sigma = ParameterAssignment::new();
    let evaled = eval_iota_masked(&masked, &sigma, sig)?;
    Ok(unmask(&evaled, &table))
}

fn mask_open_vterms(t: &IotaTerm, table: &mut Vec<(String, IotaTerm)>) -> IotaTerm {
    match t {
        IotaTerm::VTerm(_, args) if args.iter().any(|a| a.as_numeral().is_none()) => {
            let key = format!("#mask{}", table.len());
            table.push((key.clone(), t.clone()));
            IotaTerm::Const(key)
        }
        IotaTerm::FunApp(f, args) => IotaTerm::FunApp(
            f.clone(),
            args.iter().map(|a| mask_open_vterms(a, table)).collect(),
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
                    DefArg::Gvar(g) => DefArg::Gvar(g.clone()),
                    DefArg::Term(u) => DefArg::Term(mask_open_vterms(u, table)),
                })
                .collect(),
            omega_args: omega_args.clone(),
        },
        other => other.clone(),
    }
}

/// Like `eval_iota` but accepting the mask constants.
fn eval_iota_masked(
    t: &IotaTerm,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<IotaTerm, IotaError> {
    // Mask constants survive because evaluation treats unknown constants
    // as themselves.
    match t {
        IotaTerm::Const(_) => Ok(t.clone()),
        _ => eval_iota(t, sigma, sig),
    }
}

fn unmask(t: &IotaTerm, table: &[(String, IotaTerm)]) -> IotaTerm {
    match t {
        IotaTerm::Const(c) => {
            for (key, orig) in table {
                if key == c {
                    return orig.clone();
                }
            }
            t.clone()
        }
        IotaTerm::FunApp(f, args) => IotaTerm::FunApp(
            f.clone(),
            args.iter().map(|a| unmask(a, table)).collect(),
        ),
        other => other.clone(),
    }
}

/// Instantiate an s-substitution at an assignment, yielding a first-order
/// substitution.
pub fn instantiate(
    theta: &SSubstitution,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<FoSubstitution, SSubstError> {
    let mut out = FoSubstitution::empty();
    for (d, r) in &theta.pairs {
        let (x, args) = dom_parts(d)?;
        let var = IotaTerm::VTerm(
            x.to_string(),
            args.iter()
                .map(|a| {
                    crate::numeric::normalize_omega(a, sigma, sig).map(NumericTerm::numeral)
                })
                .collect::<Result<Vec<_>, _>>()?,
        );
        let image = eval_iota(r, sigma, sig)?;
        out.bind(var, image);
    }
    Ok(out)
}

/// Apply an s-substitution to a term under an assignment: evaluate, then
/// replace individual variables by the instantiated images.
pub fn apply(
    t: &IotaTerm,
    theta: &SSubstitution,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<IotaTerm, SSubstError> {
    let ground = eval_iota(t, sigma, sig)?;
    let fo = instantiate(theta, sigma, sig)?;
    Ok(fo.apply(&ground))
}

pub fn apply_to_formula(
    f: &Formula,
    theta: &SSubstitution,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<Formula, SSubstError> {
    let ground = crate::formula::eval_formula(f, sigma, sig)
        .map_err(|_| SSubstError::BadDomain(f.to_string()))?;
    let fo = instantiate(theta, sigma, sig)?;
    Ok(fo.apply_formula(&ground))
}

/// Decide normality: no instantiation may share a variable between the
/// domain and the range. Implemented by unification tests between domain
/// tuples and range V-term tuples over each shared global variable.
pub fn is_normal(theta: &SSubstitution, sig: &Signature) -> Result<bool, SSubstError> {
    for (d, _) in &theta.pairs {
        let (x, xs) = dom_parts(d)?;
        for r in theta.range() {
            let mut vterms = Vec::new();
            r.vterms(&mut vterms);
            for vt in vterms {
                if let IotaTerm::VTerm(y, ys) = &vt {
                    if x != y || ys.len() != xs.len() {
                        continue;
                    }
                    if tuples_can_coincide(xs, ys, sig)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Can the two tuples be made equal by some assignment? T0 tuples are decided
/// exactly by unification; tuples with defined symbols fall back to a bounded
/// grid search (sound for the fixture forms, which are monotone in each
/// parameter).
fn tuples_can_coincide(
    xs: &[NumericTerm],
    ys: &[NumericTerm],
    sig: &Signature,
) -> Result<bool, SSubstError> {
    if xs.len() != ys.len() {
        return Ok(false);
    }
    let all_t0 = xs.iter().chain(ys.iter()).all(|t| t.is_t0());
    if all_t0 {
        return Ok(!essentially_distinct(xs, ys)?);
    }
    let mut params = BTreeSet::new();
    for t in xs.iter().chain(ys.iter()) {
        t.params(&mut params);
    }
    let params: Vec<String> = params.into_iter().collect();
    for sigma in assignment_grid(&params, 6) {
        let eq = xs.iter().zip(ys.iter()).all(|(a, b)| {
            crate::numeric::normalize_omega(a, &sigma, sig).ok()
                == crate::numeric::normalize_omega(b, &sigma, sig).ok()
        });
        if eq {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Restrictedness of an s-unifier to a set of terms: all V-terms of the
/// substitution occur in the terms.
pub fn is_restricted(theta: &SSubstitution, terms: &[IotaTerm]) -> bool {
    let mut allowed: BTreeSet<IotaTerm> = BTreeSet::new();
    for t in terms {
        let mut vs = Vec::new();
        t.vterms(&mut vs);
        allowed.extend(vs);
    }
    theta.vterms().iter().all(|v| allowed.contains(v))
}

/// Composability of two normal s-substitutions: no domain overlap and no
/// domain-of-first against range-variables-of-second overlap, under any
/// assignment.
pub fn composable(
    t1: &SSubstitution,
    t2: &SSubstitution,
    sig: &Signature,
) -> Result<bool, SSubstError> {
    for (d1, _) in &t1.pairs {
        let (x, xs) = dom_parts(d1)?;
        // condition 1: dom(t1) disjoint from dom(t2)
        for (d2, _) in &t2.pairs {
            let (y, ys) = dom_parts(d2)?;
            if x == y && tuples_can_coincide(xs, ys, sig)? {
                return Ok(false);
            }
        }
        // condition 2: dom(t1) disjoint from variables of rg(t2)
        for r in t2.range() {
            let mut vterms = Vec::new();
            r.vterms(&mut vterms);
            for vt in vterms {
                if let IotaTerm::VTerm(y, ys) = &vt {
                    if x == y && tuples_can_coincide(xs, ys, sig)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Composition of two normal, composable s-substitutions.
pub fn compose(
    t1: &SSubstitution,
    t2: &SSubstitution,
    sig: &Signature,
) -> Result<SSubstitution, SSubstError> {
    if !composable(t1, t2, sig)? {
        return Err(SSubstError::NotComposable);
    }
    let mut pairs: Vec<(IotaTerm, IotaTerm)> = Vec::new();
    for (d, r) in &t1.pairs {
        pairs.push((d.clone(), apply_schematic_term(r, t2, sig)));
    }
    for (d, r) in &t2.pairs {
        if !pairs.contains(&(d.clone(), r.clone())) {
            pairs.push((d.clone(), r.clone()));
        }
    }
    Ok(SSubstitution { pairs })
}

/// Symbolic application of an s-substitution to a possibly open term:
/// replace V-terms whose argument tuple provably coincides with a domain
/// tuple under every assignment.
pub fn apply_schematic_term(t: &IotaTerm, theta: &SSubstitution, sig: &Signature) -> IotaTerm {
    match t {
        IotaTerm::Const(_) => t.clone(),
        IotaTerm::VTerm(x, args) => {
            for (d, r) in &theta.pairs {
                if let IotaTerm::VTerm(y, ys) = d {
                    if x == y && tuples_always_equal(args, ys, sig) {
                        return r.clone();
                    }
                }
            }
            t.clone()
        }
        IotaTerm::FunApp(f, args) => IotaTerm::FunApp(
            f.clone(),
            args.iter()
                .map(|a| apply_schematic_term(a, theta, sig))
                .collect(),
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
                    DefArg::Gvar(g) => DefArg::Gvar(g.clone()),
                    DefArg::Term(u) => DefArg::Term(apply_schematic_term(u, theta, sig)),
                })
                .collect(),
            omega_args: omega_args.clone(),
        },
        IotaTerm::Rec(_) => t.clone(),
    }
}

pub fn apply_schematic_formula(f: &Formula, theta: &SSubstitution, sig: &Signature) -> Formula {
    match f {
        Formula::Atom(p, args) => Formula::Atom(
            p.clone(),
            args.iter()
                .map(|t| apply_schematic_term(t, theta, sig))
                .collect(),
        ),
        Formula::Not(g) => Formula::not(apply_schematic_formula(g, theta, sig)),
        Formula::And(a, b) => Formula::and(
            apply_schematic_formula(a, theta, sig),
            apply_schematic_formula(b, theta, sig),
        ),
        Formula::Or(a, b) => Formula::or(
            apply_schematic_formula(a, theta, sig),
            apply_schematic_formula(b, theta, sig),
        ),
        other => other.clone(),
    }
}

/// Verdicts of bounded-plus-symbolic s-unifier verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnifierVerdict {
    Verified,
    CounterexampleAt(String),
    Unknown,
}

/// Verify that `theta` equates `t1` and `t2` under every assignment with
/// parameters up to `bound`; a symbolic pass promotes the bounded result to
/// `Verified`, otherwise the check reports `Unknown` (never silently).
pub fn verify_sunifier(
    theta: &SSubstitution,
    t1: &IotaTerm,
    t2: &IotaTerm,
    bound: usize,
    sig: &Signature,
) -> Result<UnifierVerdict, SSubstError> {
    validate(theta, sig)?;
    let mut params = BTreeSet::new();
    t1.params(&mut params);
    t2.params(&mut params);
    params.extend(theta.params());
    let params: Vec<String> = params.into_iter().collect();
    for sigma in assignment_grid(&params, bound) {
        let a = apply(t1, theta, &sigma, sig)?;
        let b = apply(t2, theta, &sigma, sig)?;
        if a != b {
            return Ok(UnifierVerdict::CounterexampleAt(sigma.to_string()));
        }
    }
    // Symbolic pass: apply schematically and compare partial normal forms.
    let a = iota_partial_eval(&apply_schematic_term(t1, theta, sig), sig);
    let b = iota_partial_eval(&apply_schematic_term(t2, theta, sig), sig);
    if a == b {
        Ok(UnifierVerdict::Verified)
    } else if params.is_empty() {
        // No parameters anywhere: the grid check was exhaustive.
        Ok(UnifierVerdict::Verified)
    } else {
        Ok(UnifierVerdict::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnifyError {
    #[error("terms are not unifiable")]
    NotUnifiable,
    #[error("occurs check failed for {0}")]
    Occurs(String),
}

/// First-order unification with occurs check over ground-style terms whose
/// variables are V-terms with numeral arguments. Returns an idempotent most
/// general unifier of all terms in the set.
pub fn fo_unify(terms: &[IotaTerm]) -> Result<FoSubstitution, UnifyError> {
    let mut subst = FoSubstitution::empty();
    if terms.len() < 2 {
        return Ok(subst);
    }
    let mut work: Vec<(IotaTerm, IotaTerm)> = terms
        .windows(2)
        .map(|w| (w[0].clone(), w[1].clone()))
        .collect();
    while let Some((a, b)) = work.pop() {
        let a = subst.apply(&a);
        let b = subst.apply(&b);
        if a == b {
            continue;
        }
        match (a, b) {
            (v @ IotaTerm::VTerm(..), t) | (t, v @ IotaTerm::VTerm(..)) => {
                if occurs_in(&v, &t) {
                    return Err(UnifyError::Occurs(v.to_string()));
                }
                let mut single = FoSubstitution::empty();
                single.bind(v.clone(), t.clone());
                // keep idempotency: fold the new binding through
                let mut map = BTreeMap::new();
                for (x, u) in &subst.map {
                    map.insert(x.clone(), single.apply(u));
                }
                map.insert(v, t);
                subst = FoSubstitution { map };
            }
            (IotaTerm::FunApp(f, xs), IotaTerm::FunApp(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return Err(UnifyError::NotUnifiable);
                }
                work.extend(xs.into_iter().zip(ys));
            }
            (IotaTerm::Const(c), IotaTerm::Const(d)) => {
                if c != d {
                    return Err(UnifyError::NotUnifiable);
                }
            }
            _ => return Err(UnifyError::NotUnifiable),
        }
    }
    Ok(subst)
}

fn occurs_in(v: &IotaTerm, t: &IotaTerm) -> bool {
    if v == t {
        return true;
    }
    match t {
        IotaTerm::FunApp(_, args) => args.iter().any(|a| occurs_in(v, a)),
        _ => false,
    }
}

/// Unify two formulas structurally (connectives as constructors).
pub fn fo_unify_formulas(fs: &[Formula]) -> Result<FoSubstitution, UnifyError> {
    let mut subst = FoSubstitution::empty();
    for w in fs.windows(2) {
        unify_formula_pair(&w[0], &w[1], &mut subst)?;
    }
    Ok(subst)
}

fn unify_formula_pair(
    a: &Formula,
    b: &Formula,
    subst: &mut FoSubstitution,
) -> Result<(), UnifyError> {
    match (a, b) {
        (Formula::Atom(p, xs), Formula::Atom(q, ys)) => {
            if p != q || xs.len() != ys.len() {
                return Err(UnifyError::NotUnifiable);
            }
            for (x, y) in xs.iter().zip(ys) {
                let u = fo_unify(&[subst.apply(x), subst.apply(y)])?;
                *subst = subst.compose(&u);
            }
            Ok(())
        }
        (Formula::Not(x), Formula::Not(y)) => unify_formula_pair(x, y, subst),
        (Formula::And(x1, x2), Formula::And(y1, y2))
        | (Formula::Or(x1, x2), Formula::Or(y1, y2)) => {
            unify_formula_pair(x1, y1, subst)?;
            unify_formula_pair(x2, y2, subst)
        }
        (
            Formula::DefAtom {
                sym: s1,
                gvars: g1,
                omega_args: o1,
            },
            Formula::DefAtom {
                sym: s2,
                gvars: g2,
                omega_args: o2,
            },
        ) => {
            if s1 == s2 && g1 == g2 && o1 == o2 {
                Ok(())
            } else {
                Err(UnifyError::NotUnifiable)
            }
        }
        _ => Err(UnifyError::NotUnifiable),
    }
}

/// Best-effort search for an s-unifier of two terms: propose candidate
/// substitutions read off the term structure, verify each with the bounded
/// check, and return the first verified candidate.
pub fn suggest_unifier(
    t1: &IotaTerm,
    t2: &IotaTerm,
    bound: usize,
    sig: &Signature,
) -> Option<SSubstitution> {
    let mut candidates: Vec<SSubstitution> = vec![SSubstitution::empty()];
    // Candidate from syntactic alignment of the two terms.
    let mut pairs = Vec::new();
    align(t1, t2, &mut pairs);
    if !pairs.is_empty() {
        candidates.push(SSubstitution::of(pairs.clone()));
        let flipped: Vec<(IotaTerm, IotaTerm)> = pairs
            .iter()
            .map(|(a, b)| (b.clone(), a.clone()))
            .collect();
        if flipped
            .iter()
            .all(|(d, _)| matches!(d, IotaTerm::VTerm(..)))
        {
            candidates.push(SSubstitution::of(flipped));
        }
    }
    for cand in candidates {
        if validate(&cand, sig).is_err() {
            continue;
        }
        if let Ok(UnifierVerdict::Verified) = verify_sunifier(&cand, t1, t2, bound, sig) {
            return Some(cand);
        }
    }
    None
}

fn align(a: &IotaTerm, b: &IotaTerm, out: &mut Vec<(IotaTerm, IotaTerm)>) {
    match (a, b) {
        (IotaTerm::VTerm(..), _) if a != b => out.push((a.clone(), b.clone())),
        (_, IotaTerm::VTerm(..)) if a != b => out.push((b.clone(), a.clone())),
        (IotaTerm::FunApp(f, xs), IotaTerm::FunApp(g, ys))
            if f == g && xs.len() == ys.len() =>
        {
            for (x, y) in xs.iter().zip(ys) {
                align(x, y, out);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{GvarFormal, IotaDef, Signature};

    /// Signature with Shat (successor iteration), a unary f and constants,
    /// global variables X (2), Y (1), X3/X4 (2), X1 (1), X2 (1).
    fn sig() -> Signature {
        let mut sig = Signature::new();
        sig.params.extend(["n".to_string(), "m".to_string()]);
        sig.consts.extend(["a".to_string(), "b".to_string()]);
        sig.funcs.insert("f".into(), 1);
        sig.funcs.insert("g".into(), 2);
        sig.funcs.insert("suc".into(), 1);
        sig.gvars.insert("X".into(), 2);
        sig.gvars.insert("Y".into(), 1);
        sig.gvars.insert("X3".into(), 2);
        sig.gvars.insert("X4".into(), 2);
        sig.gvars.insert("X1".into(), 1);
        sig.gvars.insert("X2".into(), 1);
        sig.register_iota(
            "Shat",
            IotaDef {
                formals: vec![GvarFormal {
                    name: "Z".into(),
                    arity: 0,
                }],
                params: vec![],
                rec_param: "n".into(),
                base: IotaTerm::var("Z", vec![]),
                step: IotaTerm::fun("suc", vec![IotaTerm::Rec(vec![])]),
            },
        )
        .unwrap();
        // ghat2(X, n, m): recursive call shifts the carried parameter.
        sig.register_iota(
            "ghat2",
            IotaDef {
                formals: vec![GvarFormal {
                    name: "X".into(),
                    arity: 2,
                }],
                params: vec!["n".into()],
                rec_param: "m".into(),
                base: IotaTerm::var("X", vec![NumericTerm::param("n"), NumericTerm::Zero]),
                step: IotaTerm::fun(
                    "g",
                    vec![
                        IotaTerm::var(
                            "X",
                            vec![
                                NumericTerm::param("n"),
                                NumericTerm::succ(NumericTerm::param("m")),
                            ],
                        ),
                        IotaTerm::Rec(vec![NumericTerm::succ(NumericTerm::param("n"))]),
                    ],
                ),
            },
        )
        .unwrap();
        sig
    }

    fn shat(inner: IotaTerm, idx: NumericTerm) -> IotaTerm {
        IotaTerm::def("Shat", vec![DefArg::Term(inner)], vec![idx])
    }

    /// The worked s-substitution over X with overlapping but consistent
    /// tuples.
    fn worked_theta() -> SSubstitution {
        SSubstitution::of(vec![
            (
                IotaTerm::var("X", vec![NumericTerm::param("n"), NumericTerm::param("m")]),
                shat(
                    IotaTerm::var("Y", vec![NumericTerm::param("m")]),
                    NumericTerm::param("n"),
                ),
            ),
            (
                IotaTerm::var(
                    "X",
                    vec![
                        NumericTerm::succ(NumericTerm::param("n")),
                        NumericTerm::param("m"),
                    ],
                ),
                shat(
                    IotaTerm::var("Y", vec![NumericTerm::param("m")]),
                    NumericTerm::succ(NumericTerm::param("n")),
                ),
            ),
            (
                IotaTerm::ivar("X", &[0, 0]),
                IotaTerm::ivar("Y", &[0]),
            ),
        ])
    }

    #[test]
    fn worked_example_is_valid_and_normal() {
        let sig = sig();
        let theta = worked_theta();
        validate(&theta, &sig).unwrap();
        assert!(is_normal(&theta, &sig).unwrap());
    }

    #[test]
    fn colliding_pairs_rejected() {
        let sig = sig();
        // X1(n) <- a and X1(m) <- b collide at n = m = 0 with different
        // images.
        let theta = SSubstitution::of(vec![
            (
                IotaTerm::var("X1", vec![NumericTerm::param("n")]),
                IotaTerm::cst("a"),
            ),
            (
                IotaTerm::var("X1", vec![NumericTerm::param("m")]),
                IotaTerm::cst("b"),
            ),
        ]);
        assert!(matches!(
            validate(&theta, &sig),
            Err(SSubstError::Collision(..))
        ));
        // distinct heads are fine
        let ok = SSubstitution::of(vec![
            (
                IotaTerm::var("X1", vec![NumericTerm::param("n")]),
                IotaTerm::cst("a"),
            ),
            (
                IotaTerm::var("X2", vec![NumericTerm::param("n")]),
                IotaTerm::cst("b"),
            ),
        ]);
        validate(&ok, &sig).unwrap();
    }

    #[test]
    fn instantiation_of_worked_example() {
        let sig = sig();
        let theta = worked_theta();
        let sigma = ParameterAssignment::from_pairs(&[("n", 0), ("m", 1)]);
        let fo = instantiate(&theta, &sigma, &sig).unwrap();
        // X(0,1) <- Y(1), X(1,1) <- suc(Y(1)), X(0,0) <- Y(0)
        let mut expected = FoSubstitution::empty();
        expected.bind(IotaTerm::ivar("X", &[0, 1]), IotaTerm::ivar("Y", &[1]));
        expected.bind(
            IotaTerm::ivar("X", &[1, 1]),
            IotaTerm::fun("suc", vec![IotaTerm::ivar("Y", &[1])]),
        );
        expected.bind(IotaTerm::ivar("X", &[0, 0]), IotaTerm::ivar("Y", &[0]));
        assert_eq!(fo, expected);
        // empty substitution instantiates to the empty substitution
        assert_eq!(
            instantiate(&SSubstitution::empty(), &sigma, &sig).unwrap(),
            FoSubstitution::empty()
        );
        // a self-referential pair instantiates pointwise
        let theta1 = SSubstitution::of(vec![(
            IotaTerm::var("X1", vec![NumericTerm::param("n")]),
            IotaTerm::fun("f", vec![IotaTerm::var("X1", vec![NumericTerm::param("n")])]),
        )]);
        let sigma0 = ParameterAssignment::new();
        let fo = instantiate(&theta1, &sigma0, &sig).unwrap();
        let x10 = IotaTerm::ivar("X1", &[0]);
        assert_eq!(fo.apply(&x10), IotaTerm::fun("f", vec![x10.clone()]));
    }

    #[test]
    fn application_of_worked_example() {
        // ghat2(X, n, m) under { n <- 0, m <- 1 } evaluates to
        // g(X(0,1), X(1,0)) and the substitution then rewrites the matched
        // individual variable.
        let sig = sig();
        let theta = worked_theta();
        let sigma = ParameterAssignment::from_pairs(&[("n", 0), ("m", 1)]);
        let t = IotaTerm::def(
            "ghat2",
            vec![DefArg::Gvar("X".into())],
            vec![NumericTerm::param("n"), NumericTerm::param("m")],
        );
        let ground = crate::iota::eval_iota(&t, &sigma, &sig).unwrap();
        assert_eq!(
            ground,
            IotaTerm::fun(
                "g",
                vec![IotaTerm::ivar("X", &[0, 1]), IotaTerm::ivar("X", &[1, 0])]
            )
        );
        let applied = apply(&t, &theta, &sigma, &sig).unwrap();
        // X(0,1) is in the instantiated domain (image Y(1)); X(1,0) is not.
        assert_eq!(
            applied,
            IotaTerm::fun(
                "g",
                vec![IotaTerm::ivar("Y", &[1]), IotaTerm::ivar("X", &[1, 0])]
            )
        );
        // constants are untouched, and terms without matched variables
        // reduce to their evaluation
        assert_eq!(
            apply(&IotaTerm::cst("a"), &theta, &sigma, &sig).unwrap(),
            IotaTerm::cst("a")
        );
        let untouched = IotaTerm::var("X1", vec![NumericTerm::param("n")]);
        assert_eq!(
            apply(&untouched, &theta, &sigma, &sig).unwrap(),
            crate::iota::eval_iota(&untouched, &sigma, &sig).unwrap()
        );
    }

    #[test]
    fn normality_verdicts() {
        let sig = sig();
        let theta1 = SSubstitution::of(vec![(
            IotaTerm::var("X1", vec![NumericTerm::param("n")]),
            IotaTerm::fun("f", vec![IotaTerm::var("X1", vec![NumericTerm::param("n")])]),
        )]);
        assert!(!is_normal(&theta1, &sig).unwrap());
        let theta1p = SSubstitution::of(vec![(
            IotaTerm::var("X1", vec![NumericTerm::param("n")]),
            IotaTerm::var("X2", vec![NumericTerm::param("n")]),
        )]);
        assert!(is_normal(&theta1p, &sig).unwrap());
        let theta2p = SSubstitution::of(vec![(
            IotaTerm::var("X2", vec![NumericTerm::param("m")]),
            IotaTerm::var("X1", vec![NumericTerm::param("m")]),
        )]);
        assert!(is_normal(&theta2p, &sig).unwrap());
        // the pair is not composable: under n = m the domain of the first
        // meets the range variables of the second
        assert!(!composable(&theta1p, &theta2p, &sig).unwrap());
        // the empty substitution composes with anything
        assert!(composable(&SSubstitution::empty(), &theta1p, &sig).unwrap());
        // disjoint heads compose
        let ta = SSubstitution::of(vec![(
            IotaTerm::var("X1", vec![NumericTerm::param("n")]),
            IotaTerm::cst("a"),
        )]);
        let tb = SSubstitution::of(vec![(
            IotaTerm::var("X2", vec![NumericTerm::param("n")]),
            IotaTerm::cst("b"),
        )]);
        assert!(composable(&ta, &tb, &sig).unwrap());
        let composed = compose(&ta, &tb, &sig).unwrap();
        assert!(is_normal(&composed, &sig).unwrap());
        assert_eq!(composed.pairs.len(), 2);
    }

    #[test]
    fn composition_law_on_examples() {
        let sig = sig();
        let ta = SSubstitution::of(vec![(
            IotaTerm::var("X1", vec![NumericTerm::param("n")]),
            IotaTerm::var("X2", vec![NumericTerm::succ(NumericTerm::param("n"))]),
        )]);
        let tb = SSubstitution::of(vec![(
            IotaTerm::ivar("X2", &[0]),
            IotaTerm::cst("a"),
        )]);
        assert!(composable(&ta, &tb, &sig).unwrap());
        let composed = compose(&ta, &tb, &sig).unwrap();
        for n in 0..=2usize {
            for m in 0..=2usize {
                let sigma = ParameterAssignment::from_pairs(&[("n", n), ("m", m)]);
                let left = instantiate(&composed, &sigma, &sig).unwrap();
                let right = instantiate(&ta, &sigma, &sig)
                    .unwrap()
                    .compose(&instantiate(&tb, &sigma, &sig).unwrap());
                assert_eq!(left, right, "at n={} m={}", n, m);
            }
        }
        assert!(matches!(
            compose(&SSubstitution::of(vec![(
                IotaTerm::var("X1", vec![NumericTerm::param("n")]),
                IotaTerm::var("X2", vec![NumericTerm::param("n")]),
            )]), &SSubstitution::of(vec![(
                IotaTerm::var("X2", vec![NumericTerm::param("m")]),
                IotaTerm::var("X1", vec![NumericTerm::param("m")]),
            )]), &sig),
            Err(SSubstError::NotComposable)
        ));
    }

    #[test]
    fn fo_unification_examples() {
        // a variable against a compound term
        let x = IotaTerm::ivar("X", &[0]);
        let fy = IotaTerm::fun("f", vec![IotaTerm::ivar("Y", &[0])]);
        let mgu = fo_unify(&[x.clone(), fy.clone()]).unwrap();
        assert_eq!(mgu.apply(&x), fy);
        // occurs check
        let fx = IotaTerm::fun("f", vec![x.clone()]);
        assert!(matches!(fo_unify(&[x.clone(), fx]), Err(UnifyError::Occurs(_))));
        // idempotence: applying the unifier twice changes nothing
        let t1 = IotaTerm::fun(
            "g",
            vec![IotaTerm::ivar("X", &[0]), IotaTerm::ivar("Y", &[1])],
        );
        let t2 = IotaTerm::fun(
            "g",
            vec![IotaTerm::fun("f", vec![IotaTerm::ivar("Z", &[0])]), IotaTerm::cst("a")],
        );
        let mgu = fo_unify(&[t1.clone(), t2.clone()]).unwrap();
        let u1 = mgu.apply(&t1);
        assert_eq!(u1, mgu.apply(&u1));
        assert_eq!(u1, mgu.apply(&t2));
    }

    #[test]
    fn suggestion_is_verified() {
        let sig = sig();
        let t1 = IotaTerm::ivar("X1", &[0]);
        let t2 = IotaTerm::fun("f", vec![IotaTerm::cst("a")]);
        let theta = suggest_unifier(&t1, &t2, 4, &sig).expect("suggestion");
        assert!(matches!(
            verify_sunifier(&theta, &t1, &t2, 4, &sig).unwrap(),
            UnifierVerdict::Verified
        ));
        // no candidate for distinct constants
        assert!(suggest_unifier(&IotaTerm::cst("a"), &IotaTerm::cst("b"), 4, &sig).is_none());
    }
}
