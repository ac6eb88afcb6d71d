//! The schematic calculus on top of the base rules: defined-symbol
//! unfolding/folding, tautology schemata, schematic resolution with
//! s-unifiers, normality/regularity checks, admissibility, global-unifier
//! extraction, and instance-level soundness checking.

use crate::formula::Formula;
use crate::iota::{DefArg, IotaTerm};
use crate::numeric::{normalize_omega, NumericTerm, ParameterAssignment};
use crate::rpl0::{
    check_step, essentially_disjoint, ground_atoms, sequent_truth, CheckError, Derivation, Rule,
    Sequent,
};
use crate::signature::{PredBody, Signature};
use crate::ssubst::{
    self, apply_schematic_formula, composable, compose, instantiate, is_normal, is_restricted,
    SSubstitution,
};
use std::collections::{BTreeMap, BTreeSet};

/// Check one schematic rule application. Base-rule tags coincide with the
/// base checker.
pub fn check_psi_step(
    rule: &Rule,
    premises: &[&Sequent],
    conclusion: &Sequent,
    sig: &Signature,
) -> Result<(), CheckError> {
    check_step(rule, premises, conclusion, sig)
}

/// The schematic unfolding of a defined predicate atom: base or step is
/// selected by the syntactic shape of the last omega argument (a literal
/// zero or successor); flat definitions unfold at any argument.
pub fn unfold_pred_atom_schematic(atom: &Formula, sig: &Signature) -> Result<Formula, String> {
    let Formula::DefAtom {
        sym,
        gvars,
        omega_args,
    } = atom
    else {
        return Err("principal formula is not a defined atom".into());
    };
    let def = sig
        .pred_defs
        .get(sym)
        .ok_or_else(|| format!("unknown defined predicate {}", sym))?;
    if gvars.len() != def.formals.len() || omega_args.len() != def.omega_arity() {
        return Err(format!("arity mismatch for {}", sym));
    }
    let gvar_env: BTreeMap<String, String> = def
        .formals
        .iter()
        .map(|f| f.name.clone())
        .zip(gvars.iter().cloned())
        .collect();
    let mut omega_env: BTreeMap<String, NumericTerm> = def
        .params
        .iter()
        .cloned()
        .zip(omega_args.iter().cloned())
        .collect();
    let last = &omega_args[def.params.len()];
    let rhs = match &def.body {
        PredBody::Flat { last_param, rhs } => {
            omega_env.insert(last_param.clone(), last.clone());
            rhs.clone()
        }
        PredBody::Recursive {
            rec_param,
            base,
            step,
        } => match last {
            NumericTerm::Zero => base.clone(),
            NumericTerm::Succ(inner) => {
                omega_env.insert(rec_param.clone(), (**inner).clone());
                step.clone()
            }
            _ => {
                return Err(format!(
                    "shape mismatch: last argument {} of {} is neither 0 nor s(_)",
                    last, sym
                ))
            }
        },
    };
    let rec_atom = match &def.body {
        PredBody::Recursive { .. } => {
            let mut args: Vec<NumericTerm> = def
                .params
                .iter()
                .map(|p| omega_env.get(p).cloned().unwrap_or(NumericTerm::Zero))
                .collect();
            match last {
                NumericTerm::Succ(inner) => args.push((**inner).clone()),
                _ => args.push(NumericTerm::Zero),
            }
            Some(Formula::DefAtom {
                sym: sym.clone(),
                gvars: gvars.clone(),
                omega_args: args,
            })
        }
        PredBody::Flat { .. } => None,
    };
    Ok(instantiate_schematic_rhs(
        &rhs,
        &gvar_env,
        &omega_env,
        rec_atom.as_ref(),
    ))
}

fn subst_omega(t: &NumericTerm, env: &BTreeMap<String, NumericTerm>) -> NumericTerm {
    match t {
        NumericTerm::Param(p) => env.get(p).cloned().unwrap_or_else(|| t.clone()),
        NumericTerm::Succ(u) => NumericTerm::succ(subst_omega(u, env)),
        NumericTerm::DefApp(f, args) => NumericTerm::DefApp(
            f.clone(),
            args.iter().map(|a| subst_omega(a, env)).collect(),
        ),
        other => other.clone(),
    }
}

fn subst_iota(
    t: &IotaTerm,
    gvar_env: &BTreeMap<String, String>,
    omega_env: &BTreeMap<String, NumericTerm>,
) -> IotaTerm {
    match t {
        IotaTerm::Const(_) => t.clone(),
        IotaTerm::VTerm(x, args) => IotaTerm::VTerm(
            gvar_env.get(x).cloned().unwrap_or_else(|| x.clone()),
            args.iter().map(|a| subst_omega(a, omega_env)).collect(),
        ),
        IotaTerm::FunApp(f, args) => IotaTerm::FunApp(
            f.clone(),
            args.iter()
                .map(|a| subst_iota(a, gvar_env, omega_env))
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
                    DefArg::Gvar(g) => {
                        DefArg::Gvar(gvar_env.get(g).cloned().unwrap_or_else(|| g.clone()))
                    }
                    DefArg::Term(u) => DefArg::Term(subst_iota(u, gvar_env, omega_env)),
                })
                .collect(),
            omega_args: omega_args
                .iter()
                .map(|a| subst_omega(a, omega_env))
                .collect(),
        },
        IotaTerm::Rec(_) => t.clone(),
    }
}

fn instantiate_schematic_rhs(
    f: &Formula,
    gvar_env: &BTreeMap<String, String>,
    omega_env: &BTreeMap<String, NumericTerm>,
    rec_atom: Option<&Formula>,
) -> Formula {
    match f {
        Formula::Rec => rec_atom.cloned().unwrap_or(Formula::Rec),
        Formula::FormulaVar(_) => f.clone(),
        Formula::Atom(p, args) => Formula::Atom(
            p.clone(),
            args.iter()
                .map(|t| subst_iota(t, gvar_env, omega_env))
                .collect(),
        ),
        Formula::DefAtom {
            sym,
            gvars,
            omega_args,
        } => Formula::DefAtom {
            sym: sym.clone(),
            gvars: gvars
                .iter()
                .map(|g| gvar_env.get(g).cloned().unwrap_or_else(|| g.clone()))
                .collect(),
            omega_args: omega_args
                .iter()
                .map(|a| subst_omega(a, omega_env))
                .collect(),
        },
        Formula::Not(g) => Formula::not(instantiate_schematic_rhs(g, gvar_env, omega_env, rec_atom)),
        Formula::And(a, b) => Formula::and(
            instantiate_schematic_rhs(a, gvar_env, omega_env, rec_atom),
            instantiate_schematic_rhs(b, gvar_env, omega_env, rec_atom),
        ),
        Formula::Or(a, b) => Formula::or(
            instantiate_schematic_rhs(a, gvar_env, omega_env, rec_atom),
            instantiate_schematic_rhs(b, gvar_env, omega_env, rec_atom),
        ),
    }
}

/// All formulas obtained from `f` by rewriting exactly one application of
/// the defined function symbol `sym` (base or step selected by the literal
/// shape of its recursion argument).
pub fn one_step_fun_rewrites(f: &Formula, sym: &str, sig: &Signature) -> Vec<Formula> {
    let mut out = Vec::new();
    // Rewrites inside iota terms of atoms.
    match f {
        Formula::Atom(p, args) => {
            for (i, arg) in args.iter().enumerate() {
                for rewritten in iota_rewrites(arg, sym, sig) {
                    let mut new_args = args.clone();
                    new_args[i] = rewritten;
                    out.push(Formula::Atom(p.clone(), new_args));
                }
            }
        }
        Formula::DefAtom {
            sym: psym,
            gvars,
            omega_args,
        } => {
            for (i, arg) in omega_args.iter().enumerate() {
                for rewritten in omega_rewrites(arg, sym, sig) {
                    let mut new_args = omega_args.clone();
                    new_args[i] = rewritten;
                    out.push(Formula::DefAtom {
                        sym: psym.clone(),
                        gvars: gvars.clone(),
                        omega_args: new_args,
                    });
                }
            }
        }
        Formula::Not(g) => {
            for rewritten in one_step_fun_rewrites(g, sym, sig) {
                out.push(Formula::not(rewritten));
            }
        }
        Formula::And(a, b) => {
            for rewritten in one_step_fun_rewrites(a, sym, sig) {
                out.push(Formula::and(rewritten, (**b).clone()));
            }
            for rewritten in one_step_fun_rewrites(b, sym, sig) {
                out.push(Formula::and((**a).clone(), rewritten));
            }
        }
        Formula::Or(a, b) => {
            for rewritten in one_step_fun_rewrites(a, sym, sig) {
                out.push(Formula::or(rewritten, (**b).clone()));
            }
            for rewritten in one_step_fun_rewrites(b, sym, sig) {
                out.push(Formula::or((**a).clone(), rewritten));
            }
        }
        _ => {}
    }
    out
}

fn iota_rewrites(t: &IotaTerm, sym: &str, sig: &Signature) -> Vec<IotaTerm> {
    let mut out = Vec::new();
    match t {
        IotaTerm::DefApp {
            sym: s,
            args,
            omega_args,
        } => {
            if s == sym {
                if let Some(rewritten) = unfold_iota_app_schematic(s, args, omega_args, sig) {
                    out.push(rewritten);
                }
            }
            for (i, a) in args.iter().enumerate() {
                if let DefArg::Term(u) = a {
                    for rewritten in iota_rewrites(u, sym, sig) {
                        let mut new_args = args.clone();
                        new_args[i] = DefArg::Term(rewritten);
                        out.push(IotaTerm::DefApp {
                            sym: s.clone(),
                            args: new_args,
                            omega_args: omega_args.clone(),
                        });
                    }
                }
            }
            for (i, a) in omega_args.iter().enumerate() {
                for rewritten in omega_rewrites(a, sym, sig) {
                    let mut new_args = omega_args.clone();
                    new_args[i] = rewritten;
                    out.push(IotaTerm::DefApp {
                        sym: s.clone(),
                        args: args.clone(),
                        omega_args: new_args,
                    });
                }
            }
        }
        IotaTerm::FunApp(g, args) => {
            for (i, a) in args.iter().enumerate() {
                for rewritten in iota_rewrites(a, sym, sig) {
                    let mut new_args = args.clone();
                    new_args[i] = rewritten;
                    out.push(IotaTerm::FunApp(g.clone(), new_args));
                }
            }
        }
        IotaTerm::VTerm(x, args) => {
            for (i, a) in args.iter().enumerate() {
                for rewritten in omega_rewrites(a, sym, sig) {
                    let mut new_args = args.clone();
                    new_args[i] = rewritten;
                    out.push(IotaTerm::VTerm(x.clone(), new_args));
                }
            }
        }
        _ => {}
    }
    out
}

fn omega_rewrites(t: &NumericTerm, sym: &str, sig: &Signature) -> Vec<NumericTerm> {
    let mut out = Vec::new();
    match t {
        NumericTerm::DefApp(s, args) => {
            if s == sym {
                if let Some(rewritten) = unfold_numeric_app_schematic(s, args, sig) {
                    out.push(rewritten);
                }
            }
            for (i, a) in args.iter().enumerate() {
                for rewritten in omega_rewrites(a, sym, sig) {
                    let mut new_args = args.clone();
                    new_args[i] = rewritten;
                    out.push(NumericTerm::DefApp(s.clone(), new_args));
                }
            }
        }
        NumericTerm::Succ(u) => {
            for rewritten in omega_rewrites(u, sym, sig) {
                out.push(NumericTerm::succ(rewritten));
            }
        }
        _ => {}
    }
    out
}

/// Schematic unfolding of an iota defined application whose recursion
/// argument is a literal zero or successor.
fn unfold_iota_app_schematic(
    sym: &str,
    args: &[DefArg],
    omega_args: &[NumericTerm],
    sig: &Signature,
) -> Option<IotaTerm> {
    let def = sig.iota_defs.get(sym)?;
    if args.len() != def.formals.len() || omega_args.len() != def.params.len() + 1 {
        return None;
    }
    let last = &omega_args[def.params.len()];
    let mut omega_env: BTreeMap<String, NumericTerm> = def
        .params
        .iter()
        .cloned()
        .zip(omega_args.iter().cloned())
        .collect();
    let rhs = match last {
        NumericTerm::Zero => &def.base,
        NumericTerm::Succ(inner) => {
            omega_env.insert(def.rec_param.clone(), (**inner).clone());
            &def.step
        }
        _ => return None,
    };
    let actual_env: BTreeMap<String, DefArg> = def
        .formals
        .iter()
        .map(|f| f.name.clone())
        .zip(args.iter().cloned())
        .collect();
    Some(inst_iota_rhs(
        rhs,
        sym,
        &actual_env,
        args,
        &omega_env,
        &def.params,
        last,
    ))
}

fn inst_iota_rhs(
    t: &IotaTerm,
    owner: &str,
    actual_env: &BTreeMap<String, DefArg>,
    ordered_actuals: &[DefArg],
    omega_env: &BTreeMap<String, NumericTerm>,
    owner_params: &[String],
    last: &NumericTerm,
) -> IotaTerm {
    match t {
        IotaTerm::Const(_) => t.clone(),
        IotaTerm::VTerm(x, ts) => {
            let ts: Vec<NumericTerm> = ts.iter().map(|a| subst_omega(a, omega_env)).collect();
            match actual_env.get(x) {
                Some(DefArg::Gvar(g)) => IotaTerm::VTerm(g.clone(), ts),
                Some(DefArg::Term(u)) if ts.is_empty() => u.clone(),
                _ => IotaTerm::VTerm(x.clone(), ts),
            }
        }
        IotaTerm::FunApp(f, args) => IotaTerm::FunApp(
            f.clone(),
            args.iter()
                .map(|a| {
                    inst_iota_rhs(a, owner, actual_env, ordered_actuals, omega_env, owner_params, last)
                })
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
                    DefArg::Gvar(g) => actual_env
                        .get(g)
                        .cloned()
                        .unwrap_or_else(|| DefArg::Gvar(g.clone())),
                    DefArg::Term(u) => DefArg::Term(inst_iota_rhs(
                        u,
                        owner,
                        actual_env,
                        ordered_actuals,
                        omega_env,
                        owner_params,
                        last,
                    )),
                })
                .collect(),
            omega_args: omega_args
                .iter()
                .map(|a| subst_omega(a, omega_env))
                .collect(),
        },
        IotaTerm::Rec(shift) => {
            let inner = match last {
                NumericTerm::Succ(inner) => (**inner).clone(),
                _ => NumericTerm::Zero,
            };
            let params: Vec<NumericTerm> = if shift.is_empty() {
                owner_params
                    .iter()
                    .map(|p| omega_env.get(p).cloned().unwrap_or(NumericTerm::Zero))
                    .collect()
            } else {
                shift.iter().map(|a| subst_omega(a, omega_env)).collect()
            };
            let mut omega_args = params;
            omega_args.push(inner);
            IotaTerm::DefApp {
                sym: owner.to_string(),
                args: ordered_actuals.to_vec(),
                omega_args,
            }
        }
    }
}

fn unfold_numeric_app_schematic(
    sym: &str,
    args: &[NumericTerm],
    sig: &Signature,
) -> Option<NumericTerm> {
    let def = sig.numeric_defs.get(sym)?;
    if args.len() != def.params.len() + 1 {
        return None;
    }
    let last = &args[def.params.len()];
    let mut env: BTreeMap<String, NumericTerm> = def
        .params
        .iter()
        .cloned()
        .zip(args.iter().cloned())
        .collect();
    let rhs = match last {
        NumericTerm::Zero => &def.base,
        NumericTerm::Succ(inner) => {
            env.insert(def.rec_param.clone(), (**inner).clone());
            &def.step
        }
        _ => return None,
    };
    Some(inst_numeric_rhs(rhs, sym, &env, &def.params, last))
}

fn inst_numeric_rhs(
    t: &NumericTerm,
    owner: &str,
    env: &BTreeMap<String, NumericTerm>,
    owner_params: &[String],
    last: &NumericTerm,
) -> NumericTerm {
    match t {
        NumericTerm::Rec => {
            let inner = match last {
                NumericTerm::Succ(inner) => (**inner).clone(),
                _ => NumericTerm::Zero,
            };
            let mut args: Vec<NumericTerm> = owner_params
                .iter()
                .map(|p| env.get(p).cloned().unwrap_or(NumericTerm::Zero))
                .collect();
            args.push(inner);
            NumericTerm::DefApp(owner.to_string(), args)
        }
        NumericTerm::Param(p) => env.get(p).cloned().unwrap_or_else(|| t.clone()),
        NumericTerm::Succ(u) => {
            NumericTerm::succ(inst_numeric_rhs(u, owner, env, owner_params, last))
        }
        NumericTerm::DefApp(f, args) => NumericTerm::DefApp(
            f.clone(),
            args.iter()
                .map(|a| inst_numeric_rhs(a, owner, env, owner_params, last))
                .collect(),
        ),
        NumericTerm::Zero => NumericTerm::Zero,
    }
}

// ---------------------------------------------------------------------------
// Normality, regularity, renaming apart
// ---------------------------------------------------------------------------

/// All resolution s-unifiers in the derivation are normal and restricted to
/// their resolved atoms.
pub fn check_normal(d: &Derivation, sig: &Signature) -> bool {
    let mut ok = true;
    d.walk(&mut Vec::new(), &mut |_, node| {
        if !ok {
            return;
        }
        if let Rule::Res {
            theta,
            left_atoms,
            right_atoms,
        } = &node.rule
        {
            if !is_normal(theta, sig).unwrap_or(false) {
                ok = false;
                return;
            }
            let mut atoms: Vec<IotaTerm> = Vec::new();
            if node.children.len() == 2 {
                for &i in left_atoms {
                    if let Some(f) = node.children[0].sequent.succ.get(i) {
                        f.vterms(&mut atoms);
                    }
                }
                for &j in right_atoms {
                    if let Some(f) = node.children[1].sequent.ante.get(j) {
                        f.vterms(&mut atoms);
                    }
                }
            }
            let atom_terms: Vec<IotaTerm> = atoms;
            if !is_restricted(theta, &atom_terms) {
                ok = false;
            }
        }
    });
    ok
}

/// Regularity: at every resolution the two subderivations' V-term sets are
/// essentially disjoint, so that instances are variable-disjoint for every
/// assignment. (The comparison is on V-term occurrences; bare higher-order
/// arguments of defined atoms name schema-level constants and are exempt.)
pub fn check_regular(d: &Derivation) -> bool {
    let mut ok = true;
    d.walk(&mut Vec::new(), &mut |_, node| {
        if !ok {
            return;
        }
        if matches!(node.rule, Rule::Res { .. }) && node.children.len() == 2 {
            let left = node.children[0].vterms();
            let right = node.children[1].vterms();
            if !essentially_disjoint(&left, &right) {
                ok = false;
            }
        }
    });
    ok
}

/// Rename subderivations apart so that every resolution has essentially
/// disjoint branches. Returns the renamed derivation and the subsumption
/// witness: an s-substitution on renamed V-terms plus the bare-variable map,
/// such that applying both to the result reproduces the input node for node.
pub fn rename_apart(d: &Derivation) -> (Derivation, SSubstitution, BTreeMap<String, String>) {
    let mut counter = 0usize;
    let mut total_map: BTreeMap<String, String> = BTreeMap::new();
    let renamed = rename_walk(d, &mut counter, &mut total_map);
    // Witness: map each renamed V-term occurrence back to the original.
    let mut pairs: Vec<(IotaTerm, IotaTerm)> = Vec::new();
    let inverse: BTreeMap<String, String> = total_map
        .iter()
        .map(|(orig, fresh)| (fresh.clone(), orig.clone()))
        .collect();
    for vt in renamed.vterms() {
        if let IotaTerm::VTerm(x, args) = &vt {
            if let Some(orig) = inverse.get(x) {
                let back = IotaTerm::VTerm(orig.clone(), args.clone());
                if !pairs.contains(&(vt.clone(), back.clone())) {
                    pairs.push((vt.clone(), back));
                }
            }
        }
    }
    (renamed, SSubstitution::of(pairs), inverse)
}

fn rename_walk(
    d: &Derivation,
    counter: &mut usize,
    total_map: &mut BTreeMap<String, String>,
) -> Derivation {
    let children: Vec<Derivation> = d
        .children
        .iter()
        .map(|c| rename_walk(c, counter, total_map))
        .collect();
    if matches!(d.rule, Rule::Res { .. }) && children.len() == 2 {
        let left = children[0].vterms();
        let right = children[1].vterms();
        if !essentially_disjoint(&left, &right) {
            // rename the overlapping global variables of the right branch
            let lg: BTreeSet<String> = children[0].gvars();
            let rg: BTreeSet<String> = children[1].gvars();
            let mut map = BTreeMap::new();
            for g in lg.intersection(&rg) {
                *counter += 1;
                let fresh = format!("{}_r{}", g, counter);
                map.insert(g.clone(), fresh.clone());
                total_map.insert(g.clone(), fresh);
            }
            let new_right = children[1].rename_gvars(&map);
            let mut cs = children;
            cs[1] = new_right;
            // The conclusion keeps its sequent: the resolution unifier must
            // be adjusted so the renamed branch still resolves. Rename the
            // domain entries that came from the right branch.
            let rule = match &d.rule {
                Rule::Res {
                    theta,
                    left_atoms,
                    right_atoms,
                } => {
                    let right_vts: BTreeSet<IotaTerm> = cs[1].vterms().into_iter().collect();
                    let pairs = theta
                        .pairs
                        .iter()
                        .map(|(dom, rng)| {
                            let renamed_dom = dom.rename_gvars(&map);
                            if right_vts.contains(&renamed_dom) {
                                (renamed_dom, rng.clone())
                            } else {
                                (dom.clone(), rng.clone())
                            }
                        })
                        .collect();
                    Rule::Res {
                        theta: SSubstitution::of(pairs),
                        left_atoms: left_atoms.clone(),
                        right_atoms: right_atoms.clone(),
                    }
                }
                other => other.clone(),
            };
            return Derivation::node(d.sequent.clone(), rule, cs);
        }
    }
    Derivation::node(d.sequent.clone(), d.rule.clone(), children)
}

// ---------------------------------------------------------------------------
// Admissibility and application of s-substitutions to derivations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PsiError {
    #[error("substitution blocks a resolution: {0}")]
    Blocked(String),
    #[error("derivation is not normal")]
    NotNormal,
    #[error("derivation is not regular")]
    NotRegular,
    #[error("composition failed: {0}")]
    Compose(String),
}

/// Is the substitution admissible for the derivation: every resolution's
/// atom set stays s-unifiable after applying it.
pub fn admissible(d: &Derivation, theta: &SSubstitution, sig: &Signature) -> bool {
    apply_to_derivation(d, theta, sig).is_ok()
}

/// Apply an s-substitution to a derivation, re-unifying each resolution
/// (the re-unifier is searched symbolically and verified on a bounded grid).
pub fn apply_to_derivation(
    d: &Derivation,
    theta: &SSubstitution,
    sig: &Signature,
) -> Result<Derivation, PsiError> {
    match &d.rule {
        Rule::Res {
            theta: old,
            left_atoms,
            right_atoms,
        } => {
            let left = apply_to_derivation(&d.children[0], theta, sig)?;
            let right = apply_to_derivation(&d.children[1], theta, sig)?;
            // Collect the resolved atoms after applying theta.
            let mut atoms: Vec<Formula> = Vec::new();
            for &i in left_atoms {
                atoms.push(left.sequent.succ[i].clone());
            }
            for &j in right_atoms {
                atoms.push(right.sequent.ante[j].clone());
            }
            // Re-unifier: compose the old unifier's theta-image with nothing
            // if the atoms already coincide, otherwise search.
            let combined = find_reunifier(&atoms, old, theta, sig)
                .ok_or_else(|| PsiError::Blocked(format!("atoms {:?}", atoms.len())))?;
            let mut ante: Vec<Formula> = left
                .sequent
                .ante
                .iter()
                .map(|f| apply_schematic_formula(f, &combined, sig))
                .collect();
            ante.extend(
                right
                    .sequent
                    .ante
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| !right_atoms.contains(j))
                    .map(|(_, f)| apply_schematic_formula(f, &combined, sig)),
            );
            let mut succ: Vec<Formula> = left
                .sequent
                .succ
                .iter()
                .enumerate()
                .filter(|(i, _)| !left_atoms.contains(i))
                .map(|(_, f)| apply_schematic_formula(f, &combined, sig))
                .collect();
            succ.extend(
                right
                    .sequent
                    .succ
                    .iter()
                    .map(|f| apply_schematic_formula(f, &combined, sig)),
            );
            Ok(Derivation::node(
                Sequent::new(ante, succ),
                Rule::Res {
                    theta: combined,
                    left_atoms: left_atoms.clone(),
                    right_atoms: right_atoms.clone(),
                },
                vec![left, right],
            ))
        }
        rule => {
            let children: Vec<Derivation> = d
                .children
                .iter()
                .map(|c| apply_to_derivation(c, theta, sig))
                .collect::<Result<_, _>>()?;
            let sequent = Sequent {
                ante: d
                    .sequent
                    .ante
                    .iter()
                    .map(|f| apply_schematic_formula(f, theta, sig))
                    .collect(),
                succ: d
                    .sequent
                    .succ
                    .iter()
                    .map(|f| apply_schematic_formula(f, theta, sig))
                    .collect(),
            };
            let rule = match rule {
                Rule::Taut { id, xi1, xi2 } => Rule::Taut {
                    id: *id,
                    xi1: apply_schematic_formula(xi1, theta, sig),
                    xi2: xi2
                        .as_ref()
                        .map(|f| apply_schematic_formula(f, theta, sig)),
                },
                other => other.clone(),
            };
            Ok(Derivation::node(sequent, rule, children))
        }
    }
}

/// Find a substitution making all atoms schematically equal: try the image
/// of the old unifier, then the empty substitution, then a syntactic
/// alignment candidate.
fn find_reunifier(
    atoms: &[Formula],
    old: &SSubstitution,
    theta: &SSubstitution,
    sig: &Signature,
) -> Option<SSubstitution> {
    let image_old = SSubstitution::of(
        old.pairs
            .iter()
            .map(|(d, r)| {
                (
                    crate::ssubst::apply_schematic_term(d, theta, sig),
                    crate::ssubst::apply_schematic_term(r, theta, sig),
                )
            })
            .filter(|(d, r)| d != r)
            .filter(|(d, _)| matches!(d, IotaTerm::VTerm(..)))
            .collect(),
    );
    for cand in [image_old, SSubstitution::empty()] {
        if ssubst::validate(&cand, sig).is_err() {
            continue;
        }
        let images: Vec<Formula> = atoms
            .iter()
            .map(|a| crate::rpl0::normalize_formula(&apply_schematic_formula(a, &cand, sig), sig))
            .collect();
        if images.windows(2).all(|w| w[0] == w[1]) {
            return Some(cand);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Global unifier
// ---------------------------------------------------------------------------

/// Construct the global unifier of a normal and regular derivation by the
/// inductive composition of its resolution unifiers.
pub fn global_unifier(d: &Derivation, sig: &Signature) -> Result<SSubstitution, PsiError> {
    if !check_normal(d, sig) {
        return Err(PsiError::NotNormal);
    }
    if !check_regular(d) {
        return Err(PsiError::NotRegular);
    }
    build_global(d, sig)
}

fn build_global(d: &Derivation, sig: &Signature) -> Result<SSubstitution, PsiError> {
    match &d.rule {
        Rule::Res { theta, .. } => {
            let t1 = build_global(&d.children[0], sig)?;
            let t2 = build_global(&d.children[1], sig)?;
            let left = star(&t1, theta, sig)?;
            let right = star(&t2, theta, sig)?;
            let mut pairs = left.pairs;
            for p in right.pairs {
                if !pairs.contains(&p) {
                    pairs.push(p);
                }
            }
            let combined = SSubstitution::of(pairs);
            ssubst::validate(&combined, sig)
                .map_err(|e| PsiError::Compose(e.to_string()))?;
            Ok(combined)
        }
        _ if d.children.is_empty() => Ok(SSubstitution::empty()),
        _ if d.children.len() == 1 => build_global(&d.children[0], sig),
        _ => {
            // Binary non-resolution rules: union of the children's unifiers.
            let mut pairs = Vec::new();
            for c in &d.children {
                for p in build_global(c, sig)?.pairs {
                    if !pairs.contains(&p) {
                        pairs.push(p);
                    }
                }
            }
            Ok(SSubstitution::of(pairs))
        }
    }
}

fn star(
    t1: &SSubstitution,
    t2: &SSubstitution,
    sig: &Signature,
) -> Result<SSubstitution, PsiError> {
    if t1.is_empty() {
        return Ok(t2.clone());
    }
    if t2.is_empty() {
        return Ok(t1.clone());
    }
    if !composable(t1, t2, sig).map_err(|e| PsiError::Compose(e.to_string()))? {
        return Err(PsiError::Compose(format!(
            "{} and {} are not composable",
            t1, t2
        )));
    }
    compose(t1, t2, sig).map_err(|e| PsiError::Compose(e.to_string()))
}

/// Do all resolution nodes of the derivation carry (effectively) empty
/// unifiers, i.e. identical resolved atoms?
pub fn is_cut_derivation(d: &Derivation, sig: &Signature) -> bool {
    let mut ok = true;
    d.walk(&mut Vec::new(), &mut |_, node| {
        if !ok {
            return;
        }
        if let Rule::Res {
            left_atoms,
            right_atoms,
            ..
        } = &node.rule
        {
            if node.children.len() != 2 {
                ok = false;
                return;
            }
            let mut atoms = Vec::new();
            for &i in left_atoms {
                match node.children[0].sequent.succ.get(i) {
                    Some(f) => atoms.push(crate::rpl0::normalize_formula(f, sig)),
                    None => {
                        ok = false;
                        return;
                    }
                }
            }
            for &j in right_atoms {
                match node.children[1].sequent.ante.get(j) {
                    Some(f) => atoms.push(crate::rpl0::normalize_formula(f, sig)),
                    None => {
                        ok = false;
                        return;
                    }
                }
            }
            if !atoms.windows(2).all(|w| w[0] == w[1]) {
                ok = false;
            }
        }
    });
    ok
}

// ---------------------------------------------------------------------------
// Instance-level soundness checking
// ---------------------------------------------------------------------------

/// Instantiate a derivation at an assignment: normalize all omega positions
/// to numerals and instantiate resolution unifiers. Labeled leaves must be
/// gone before instantiation.
pub fn instantiate_derivation(
    d: &Derivation,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Derivation {
    let sequent = instantiate_sequent(&d.sequent, sigma, sig);
    let rule = match &d.rule {
        Rule::Res {
            theta,
            left_atoms,
            right_atoms,
        } => Rule::Res {
            theta: instantiate_ssubst_syntactic(theta, sigma, sig),
            left_atoms: left_atoms.clone(),
            right_atoms: right_atoms.clone(),
        },
        Rule::Taut { id, xi1, xi2 } => Rule::Taut {
            id: *id,
            xi1: instantiate_formula_omega(xi1, sigma, sig),
            xi2: xi2
                .as_ref()
                .map(|f| instantiate_formula_omega(f, sigma, sig)),
        },
        other => other.clone(),
    };
    Derivation {
        sequent,
        rule,
        children: d
            .children
            .iter()
            .map(|c| instantiate_derivation(c, sigma, sig))
            .collect(),
    }
}

pub fn instantiate_sequent(
    s: &Sequent,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Sequent {
    Sequent {
        ante: s
            .ante
            .iter()
            .map(|f| instantiate_formula_omega(f, sigma, sig))
            .collect(),
        succ: s
            .succ
            .iter()
            .map(|f| instantiate_formula_omega(f, sigma, sig))
            .collect(),
    }
}

/// Replace parameters by their values and normalize omega positions, keeping
/// defined atoms folded.
pub fn instantiate_formula_omega(
    f: &Formula,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Formula {
    match f {
        Formula::Atom(p, args) => Formula::Atom(
            p.clone(),
            args.iter()
                .map(|t| instantiate_term_omega(t, sigma, sig))
                .collect(),
        ),
        Formula::DefAtom {
            sym,
            gvars,
            omega_args,
        } => Formula::DefAtom {
            sym: sym.clone(),
            gvars: gvars.clone(),
            omega_args: omega_args
                .iter()
                .map(|t| {
                    normalize_omega(t, sigma, sig)
                        .map(NumericTerm::numeral)
                        .unwrap_or_else(|_| t.clone())
                })
                .collect(),
        },
        Formula::Not(g) => Formula::not(instantiate_formula_omega(g, sigma, sig)),
        Formula::And(a, b) => Formula::and(
            instantiate_formula_omega(a, sigma, sig),
            instantiate_formula_omega(b, sigma, sig),
        ),
        Formula::Or(a, b) => Formula::or(
            instantiate_formula_omega(a, sigma, sig),
            instantiate_formula_omega(b, sigma, sig),
        ),
        other => other.clone(),
    }
}

pub fn instantiate_term_omega(
    t: &IotaTerm,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> IotaTerm {
    match t {
        IotaTerm::Const(_) => t.clone(),
        IotaTerm::VTerm(x, args) => IotaTerm::VTerm(
            x.clone(),
            args.iter()
                .map(|a| {
                    normalize_omega(a, sigma, sig)
                        .map(NumericTerm::numeral)
                        .unwrap_or_else(|_| a.clone())
                })
                .collect(),
        ),
        IotaTerm::FunApp(g, args) => IotaTerm::FunApp(
            g.clone(),
            args.iter()
                .map(|a| instantiate_term_omega(a, sigma, sig))
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
                    DefArg::Term(u) => DefArg::Term(instantiate_term_omega(u, sigma, sig)),
                })
                .collect(),
            omega_args: omega_args
                .iter()
                .map(|a| {
                    normalize_omega(a, sigma, sig)
                        .map(NumericTerm::numeral)
                        .unwrap_or_else(|_| a.clone())
                })
                .collect(),
        },
        IotaTerm::Rec(_) => t.clone(),
    }
}

fn instantiate_ssubst_syntactic(
    theta: &SSubstitution,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> SSubstitution {
    SSubstitution::of(
        theta
            .pairs
            .iter()
            .map(|(d, r)| {
                (
                    instantiate_term_omega(d, sigma, sig),
                    instantiate_term_omega(r, sigma, sig),
                )
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceVerdict {
    Ok,
    Countermodel { position: Vec<usize>, detail: String },
}

/// Instance-wise soundness: instantiate the derivation at sigma, unfold all
/// defined symbols, and verify every step. Structural and definitional steps
/// are checked truth-functionally over the ground atom set; resolution and
/// renaming steps are checked syntactically through their substitutions.
pub fn soundness_check_instance(
    d: &Derivation,
    sigma: &ParameterAssignment,
    sig: &Signature,
    axiom_ok: &dyn Fn(&Formula) -> bool,
) -> InstanceVerdict {
    let inst = instantiate_derivation(d, sigma, sig);
    let mut verdict = InstanceVerdict::Ok;
    inst.walk(&mut Vec::new(), &mut |path, node| {
        if verdict != InstanceVerdict::Ok {
            return;
        }
        if let Some(err) = check_instance_node(node, sigma, sig, axiom_ok) {
            verdict = InstanceVerdict::Countermodel {
                position: path.to_vec(),
                detail: err,
            };
        }
    });
    verdict
}

fn unfold_ground(f: &Formula, sig: &Signature) -> Formula {
    crate::formula::eval_formula(f, &ParameterAssignment::new(), sig)
        .unwrap_or_else(|_| f.clone())
}

fn unfold_sequent(s: &Sequent, sig: &Signature) -> Sequent {
    Sequent {
        ante: s.ante.iter().map(|f| unfold_ground(f, sig)).collect(),
        succ: s.succ.iter().map(|f| unfold_ground(f, sig)).collect(),
    }
}

fn check_instance_node(
    node: &Derivation,
    sigma: &ParameterAssignment,
    sig: &Signature,
    axiom_ok: &dyn Fn(&Formula) -> bool,
) -> Option<String> {
    match &node.rule {
        Rule::Axiom => {
            if node.sequent.ante.is_empty()
                && node.sequent.succ.len() == 1
                && axiom_ok(&node.sequent.succ[0])
            {
                None
            } else {
                Some("axiom leaf is not an instance of the refuted schema".into())
            }
        }
        Rule::Hypothesis => Some("hypothesis leaves are not allowed in schema instances".into()),
        Rule::Labeled { .. } => Some("labeled leaf survives instantiation".into()),
        Rule::Taut { .. } => {
            // Tautology instances must be truth-functionally valid.
            let unfolded = unfold_sequent(&node.sequent, sig);
            let fs: Vec<&Formula> = unfolded.formulas().collect();
            let atoms = ground_atoms(&fs);
            if atoms.len() > 16 {
                return Some("tautology instance too large to verify".into());
            }
            let valid =
                (0..(1u64 << atoms.len())).all(|a| sequent_truth(&unfolded, &atoms, a));
            if valid {
                None
            } else {
                Some("tautology leaf is not valid".into())
            }
        }
        Rule::Res {
            theta,
            left_atoms,
            right_atoms,
        } => {
            // Resolution: resolved atoms must coincide after applying the
            // instantiated unifier, and the conclusion must be the residue.
            let fo = match instantiate(theta, sigma, sig) {
                Ok(fo) => fo,
                Err(e) => return Some(format!("unifier fails to instantiate: {}", e)),
            };
            if node.children.len() != 2 {
                return Some("resolution needs two premises".into());
            }
            let left = &node.children[0].sequent;
            let right = &node.children[1].sequent;
            // Unfold first, then substitute: the instantiated images of a
            // defined application are computed on its evaluated form.
            let mut atoms: Vec<Formula> = Vec::new();
            for &i in left_atoms {
                match left.succ.get(i) {
                    Some(f) => atoms.push(fo.apply_formula(&unfold_ground(f, sig))),
                    None => return Some("left atom index out of range".into()),
                }
            }
            for &j in right_atoms {
                match right.ante.get(j) {
                    Some(f) => atoms.push(fo.apply_formula(&unfold_ground(f, sig))),
                    None => return Some("right atom index out of range".into()),
                }
            }
            if !atoms.windows(2).all(|w| w[0] == w[1]) {
                return Some("resolved atoms differ after instantiation".into());
            }
            let unfolded_apply = |f: &Formula| fo.apply_formula(&unfold_ground(f, sig));
            let mut ante: Vec<Formula> = left.ante.iter().map(unfolded_apply).collect();
            ante.extend(
                right
                    .ante
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| !right_atoms.contains(j))
                    .map(|(_, f)| unfolded_apply(f)),
            );
            let mut succ: Vec<Formula> = left
                .succ
                .iter()
                .enumerate()
                .filter(|(i, _)| !left_atoms.contains(i))
                .map(|(_, f)| unfolded_apply(f))
                .collect();
            succ.extend(right.succ.iter().map(unfolded_apply));
            let expect = Sequent::new(ante, succ);
            let actual = unfold_sequent(&node.sequent, sig);
            if actual.same_as(&expect) {
                None
            } else {
                Some(format!("resolution conclusion {} differs from {}", actual, expect))
            }
        }
        Rule::GlobalRename { map } => {
            let expect = node.children[0].sequent.rename_gvars(map);
            if node.sequent.same_as(&expect) {
                None
            } else {
                Some("renaming step mismatch".into())
            }
        }
        Rule::DefPred { .. } | Rule::DefFun { .. } => {
            // Definitional steps are identities after full unfolding.
            if node.children.len() != 1 {
                return Some("definitional step needs one premise".into());
            }
            let premise = unfold_sequent(&node.children[0].sequent, sig);
            let concl = unfold_sequent(&node.sequent, sig);
            if premise.same_as(&concl) {
                None
            } else {
                Some(format!(
                    "unfolded premise {} differs from conclusion {}",
                    premise, concl
                ))
            }
        }
        rule => {
            // Structural rules apply to the instantiated sequents as written.
            let premises: Vec<&Sequent> =
                node.children.iter().map(|c| &c.sequent).collect();
            match check_step(rule, &premises, &node.sequent, sig) {
                Ok(()) => None,
                Err(e) => Some(format!("structural step unsound: {}", e)),
            }
        }
    }
}
