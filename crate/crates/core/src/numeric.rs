//! Omega-sort terms, parameter assignments, normalization to numerals,
//! essential distinctness, and the guard/partition language used by flows
//! and proof schemata.

use crate::signature::Signature;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A term of the numeric sort. Numerals are `Succ` chains over `Zero`.
///
/// `Rec` is the recursion placeholder of a step defining equation; it never
/// occurs in terms submitted for evaluation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NumericTerm {
    Zero,
    Succ(Box<NumericTerm>),
    Param(String),
    DefApp(String, Vec<NumericTerm>),
    Rec,
}

impl NumericTerm {
    pub fn numeral(n: usize) -> NumericTerm {
        let mut t = NumericTerm::Zero;
        for _ in 0..n {
            t = NumericTerm::Succ(Box::new(t));
        }
        t
    }

    pub fn param(name: &str) -> NumericTerm {
        NumericTerm::Param(name.to_string())
    }

    pub fn succ(t: NumericTerm) -> NumericTerm {
        NumericTerm::Succ(Box::new(t))
    }

    /// Value of a closed constructor term, if this is one.
    pub fn as_numeral(&self) -> Option<usize> {
        match self {
            NumericTerm::Zero => Some(0),
            NumericTerm::Succ(t) => t.as_numeral().map(|n| n + 1),
            _ => None,
        }
    }

    /// True for terms built only from zero, successor and parameters.
    pub fn is_t0(&self) -> bool {
        match self {
            NumericTerm::Zero | NumericTerm::Param(_) => true,
            NumericTerm::Succ(t) => t.is_t0(),
            NumericTerm::DefApp(..) | NumericTerm::Rec => false,
        }
    }

    pub fn params(&self, out: &mut BTreeSet<String>) {
        match self {
            NumericTerm::Zero | NumericTerm::Rec => {}
            NumericTerm::Succ(t) => t.params(out),
            NumericTerm::Param(p) => {
                out.insert(p.clone());
            }
            NumericTerm::DefApp(_, args) => {
                for a in args {
                    a.params(out);
                }
            }
        }
    }

    pub fn contains_rec(&self) -> bool {
        match self {
            NumericTerm::Rec => true,
            NumericTerm::Succ(t) => t.contains_rec(),
            NumericTerm::DefApp(_, args) => args.iter().any(|a| a.contains_rec()),
            _ => false,
        }
    }

    pub fn defined_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            NumericTerm::Succ(t) => t.defined_symbols(out),
            NumericTerm::DefApp(f, args) => {
                out.insert(f.clone());
                for a in args {
                    a.defined_symbols(out);
                }
            }
            _ => {}
        }
    }
}

impl fmt::Display for NumericTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_numeral() {
            return write!(f, "{}", n);
        }
        match self {
            NumericTerm::Zero => write!(f, "0"),
            NumericTerm::Succ(t) => write!(f, "s({})", t),
            NumericTerm::Param(p) => write!(f, "{}", p),
            NumericTerm::DefApp(g, args) => {
                write!(f, "{}(", g)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
            NumericTerm::Rec => write!(f, "rec"),
        }
    }
}

/// Total parameter assignment; parameters not mentioned default to zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParameterAssignment {
    map: BTreeMap<String, usize>,
}

impl ParameterAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(&str, usize)]) -> Self {
        let mut s = Self::new();
        for (k, v) in pairs {
            s.set(k, *v);
        }
        s
    }

    pub fn set(&mut self, param: &str, value: usize) {
        if value == 0 {
            self.map.remove(param);
        } else {
            self.map.insert(param.to_string(), value);
        }
    }

    pub fn get(&self, param: &str) -> usize {
        self.map.get(param).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &usize)> {
        self.map.iter()
    }

    /// Restriction to a parameter list, in that order. Used as a memo key.
    pub fn restrict(&self, params: &[String]) -> Vec<usize> {
        params.iter().map(|p| self.get(p)).collect()
    }
}

impl fmt::Display for ParameterAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}<-{}", k, v)?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumericError {
    #[error("unknown defined symbol {0}")]
    UnknownSymbol(String),
    #[error("arity mismatch for {0}: expected {1}, got {2}")]
    Arity(String, usize, usize),
    #[error("recursion placeholder outside a step right-hand side")]
    StrayRec,
    #[error("term is not in T0 (contains a defined symbol)")]
    NotT0,
}

/// Normalize a numeric term under a (total) assignment to its numeral value.
///
/// Call-by-value on the recursion argument: all arguments are normalized to
/// numerals first, then the defining equations unfold.
pub fn normalize_omega(
    t: &NumericTerm,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Result<usize, NumericError> {
    match t {
        NumericTerm::Zero => Ok(0),
        NumericTerm::Succ(u) => Ok(normalize_omega(u, sigma, sig)? + 1),
        NumericTerm::Param(p) => Ok(sigma.get(p)),
        NumericTerm::Rec => Err(NumericError::StrayRec),
        NumericTerm::DefApp(f, args) => {
            let vals = args
                .iter()
                .map(|a| normalize_omega(a, sigma, sig))
                .collect::<Result<Vec<_>, _>>()?;
            eval_numeric_def(f, &vals, sig)
        }
    }
}

/// Unfold a numeric defined symbol applied to numeral values.
pub fn eval_numeric_def(f: &str, vals: &[usize], sig: &Signature) -> Result<usize, NumericError> {
    let def = sig
        .numeric_defs
        .get(f)
        .ok_or_else(|| NumericError::UnknownSymbol(f.to_string()))?;
    let arity = def.params.len() + 1;
    if vals.len() != arity {
        return Err(NumericError::Arity(f.to_string(), arity, vals.len()));
    }
    let mut env = ParameterAssignment::new();
    for (p, v) in def.params.iter().zip(vals) {
        env.set(p, *v);
    }
    let rec_val = vals[def.params.len()];
    if rec_val == 0 {
        eval_rhs(&def.base, &env, None, sig)
    } else {
        env.set(&def.rec_param, rec_val - 1);
        let rec_vals: Vec<usize> = def
            .params
            .iter()
            .map(|p| env.get(p))
            .chain(std::iter::once(rec_val - 1))
            .collect();
        let rec_result = eval_numeric_def(f, &rec_vals, sig)?;
        eval_rhs(&def.step, &env, Some(rec_result), sig)
    }
}

fn eval_rhs(
    t: &NumericTerm,
    env: &ParameterAssignment,
    rec: Option<usize>,
    sig: &Signature,
) -> Result<usize, NumericError> {
    match t {
        NumericTerm::Rec => rec.ok_or(NumericError::StrayRec),
        NumericTerm::Zero => Ok(0),
        NumericTerm::Succ(u) => Ok(eval_rhs(u, env, rec, sig)? + 1),
        NumericTerm::Param(p) => Ok(env.get(p)),
        NumericTerm::DefApp(f, args) => {
            let vals = args
                .iter()
                .map(|a| eval_rhs(a, env, rec, sig))
                .collect::<Result<Vec<_>, _>>()?;
            eval_numeric_def(f, &vals, sig)
        }
    }
}

/// Partial evaluation: normalize closed subterms, unfold defined applications
/// whose recursion argument is closed, and leave open parameters in place.
/// The result is the input's unique normal form restricted to the rewrite
/// steps that do not require parameter values.
pub fn partial_eval_omega(t: &NumericTerm, sig: &Signature) -> NumericTerm {
    let mut open = BTreeSet::new();
    t.params(&mut open);
    if open.is_empty() && !t.contains_rec() {
        if let Ok(v) = normalize_omega(t, &ParameterAssignment::new(), sig) {
            return NumericTerm::numeral(v);
        }
    }
    match t {
        NumericTerm::Succ(u) => NumericTerm::succ(partial_eval_omega(u, sig)),
        NumericTerm::DefApp(f, args) => NumericTerm::DefApp(
            f.clone(),
            args.iter().map(|a| partial_eval_omega(a, sig)).collect(),
        ),
        other => other.clone(),
    }
}

/// Unification over T0 terms (constructors `0`/`s` plus parameters).
///
/// Returns a most general unifier as a parameter-to-term map, or `None` when
/// the terms are not simultaneously unifiable. Occurs check included.
pub fn unify_t0(
    pairs: &[(NumericTerm, NumericTerm)],
) -> Result<Option<BTreeMap<String, NumericTerm>>, NumericError> {
    let mut subst: BTreeMap<String, NumericTerm> = BTreeMap::new();
    let mut work: Vec<(NumericTerm, NumericTerm)> = pairs.to_vec();
    while let Some((a, b)) = work.pop() {
        let a = apply_t0(&a, &subst)?;
        let b = apply_t0(&b, &subst)?;
        match (a, b) {
            (NumericTerm::Zero, NumericTerm::Zero) => {}
            (NumericTerm::Succ(x), NumericTerm::Succ(y)) => work.push((*x, *y)),
            (NumericTerm::Param(p), t) | (t, NumericTerm::Param(p)) => {
                if t == NumericTerm::Param(p.clone()) {
                    continue;
                }
                if occurs(&p, &t) {
                    return Ok(None);
                }
                let binding: BTreeMap<String, NumericTerm> =
                    std::iter::once((p.clone(), t.clone())).collect();
                for v in subst.values_mut() {
                    *v = apply_t0(v, &binding)?;
                }
                subst.insert(p, t);
            }
            (NumericTerm::DefApp(..), _) | (_, NumericTerm::DefApp(..)) => {
                return Err(NumericError::NotT0)
            }
            (NumericTerm::Rec, _) | (_, NumericTerm::Rec) => return Err(NumericError::StrayRec),
            _ => return Ok(None),
        }
    }
    Ok(Some(subst))
}

fn occurs(p: &str, t: &NumericTerm) -> bool {
    match t {
        NumericTerm::Param(q) => p == q,
        NumericTerm::Succ(u) => occurs(p, u),
        _ => false,
    }
}

fn apply_t0(
    t: &NumericTerm,
    subst: &BTreeMap<String, NumericTerm>,
) -> Result<NumericTerm, NumericError> {
    Ok(match t {
        NumericTerm::Zero => NumericTerm::Zero,
        NumericTerm::Succ(u) => NumericTerm::succ(apply_t0(u, subst)?),
        NumericTerm::Param(p) => subst.get(p).cloned().unwrap_or_else(|| t.clone()),
        NumericTerm::DefApp(..) => return Err(NumericError::NotT0),
        NumericTerm::Rec => return Err(NumericError::StrayRec),
    })
}

/// Two tuples of T0 terms are essentially distinct when no parameter
/// assignment makes them componentwise equal. Decided by simultaneous
/// unification: the tuples unify exactly when they are not essentially
/// distinct.
pub fn essentially_distinct(
    left: &[NumericTerm],
    right: &[NumericTerm],
) -> Result<bool, NumericError> {
    for t in left.iter().chain(right.iter()) {
        if !t.is_t0() {
            return Err(NumericError::NotT0);
        }
    }
    if left.len() != right.len() {
        return Ok(true);
    }
    let pairs: Vec<_> = left.iter().cloned().zip(right.iter().cloned()).collect();
    Ok(unify_t0(&pairs)?.is_none())
}

/// Schematic equality of two tuples of omega terms: equal after evaluation
/// under every assignment. Complete for T0 tuples; for tuples containing
/// defined symbols the check is partial evaluation followed by syntactic
/// comparison (sound, conservative).
pub fn tuples_always_equal(left: &[NumericTerm], right: &[NumericTerm], sig: &Signature) -> bool {
    if left.len() != right.len() {
        return false;
    }
    left.iter()
        .zip(right.iter())
        .all(|(a, b)| partial_eval_omega(a, sig) == partial_eval_omega(b, sig))
}

// ---------------------------------------------------------------------------
// Guards and partitions
// ---------------------------------------------------------------------------

/// One atomic parameter constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuardAtom {
    /// `param = c`
    Eq(String, usize),
    /// `param > c`
    Gt(String, usize),
}

/// Conjunction of guard atoms; the empty conjunction is the full set of
/// assignments.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Guard {
    pub atoms: Vec<GuardAtom>,
}

impl Guard {
    pub fn always() -> Guard {
        Guard { atoms: Vec::new() }
    }

    pub fn eq(param: &str, c: usize) -> GuardAtom {
        GuardAtom::Eq(param.to_string(), c)
    }

    pub fn gt(param: &str, c: usize) -> GuardAtom {
        GuardAtom::Gt(param.to_string(), c)
    }

    pub fn of(atoms: Vec<GuardAtom>) -> Guard {
        Guard { atoms }
    }

    pub fn params(&self) -> BTreeSet<String> {
        self.atoms
            .iter()
            .map(|a| match a {
                GuardAtom::Eq(p, _) | GuardAtom::Gt(p, _) => p.clone(),
            })
            .collect()
    }

    /// The per-parameter constraint, or `None` when unsatisfiable.
    fn interval(&self, param: &str) -> Option<ParamSet> {
        let mut set = ParamSet::All;
        for a in &self.atoms {
            let next = match a {
                GuardAtom::Eq(p, c) if p == param => ParamSet::Point(*c),
                GuardAtom::Gt(p, c) if p == param => ParamSet::Above(*c),
                _ => continue,
            };
            set = set.intersect(&next)?;
        }
        Some(set)
    }

    pub fn satisfiable(&self) -> bool {
        self.params().iter().all(|p| self.interval(p).is_some())
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " /\\ ")?;
            }
            match a {
                GuardAtom::Eq(p, c) => write!(f, "{}={}", p, c)?,
                GuardAtom::Gt(p, c) => write!(f, "{}>{}", p, c)?,
            }
        }
        Ok(())
    }
}

/// Subsets of the naturals expressible by guard atoms on one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ParamSet {
    All,
    Point(usize),
    Above(usize),
}

impl ParamSet {
    fn intersect(&self, other: &ParamSet) -> Option<ParamSet> {
        use ParamSet::*;
        Some(match (*self, *other) {
            (All, s) | (s, All) => s,
            (Point(a), Point(b)) => {
                if a == b {
                    Point(a)
                } else {
                    return None;
                }
            }
            (Point(a), Above(c)) | (Above(c), Point(a)) => {
                if a > c {
                    Point(a)
                } else {
                    return None;
                }
            }
            (Above(a), Above(b)) => Above(a.max(b)),
        })
    }
}

/// A finite list of guards intended to partition the assignment space.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Partition {
    pub cells: Vec<Guard>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("no cell matches assignment {0}")]
    NoCell(String),
    #[error("cells {0} and {1} overlap at {2}")]
    MultiCell(usize, usize, String),
    #[error("cells {i} and {j} are not disjoint; witness {witness}")]
    NotDisjoint { i: usize, j: usize, witness: String },
    #[error("partition is not exhaustive; witness {witness}")]
    NotExhaustive { witness: String },
}

pub fn guard_membership(sigma: &ParameterAssignment, g: &Guard) -> bool {
    g.atoms.iter().all(|a| match a {
        GuardAtom::Eq(p, c) => sigma.get(p) == *c,
        GuardAtom::Gt(p, c) => sigma.get(p) > *c,
    })
}

/// Index of the unique cell containing `sigma`.
pub fn partition_locate(
    sigma: &ParameterAssignment,
    partition: &Partition,
) -> Result<usize, PartitionError> {
    let hits: Vec<usize> = partition
        .cells
        .iter()
        .enumerate()
        .filter(|(_, g)| guard_membership(sigma, g))
        .map(|(i, _)| i)
        .collect();
    match hits.as_slice() {
        [] => Err(PartitionError::NoCell(sigma.to_string())),
        [i] => Ok(*i),
        [i, j, ..] => Err(PartitionError::MultiCell(*i, *j, sigma.to_string())),
    }
}

/// Exact disjointness and exhaustiveness check.
///
/// Each guard confines each parameter to a point or a final segment, so
/// pairwise intersection is decided by interval reasoning, and coverage is
/// decided on the finite grid of threshold values (guard truth is constant
/// beyond the largest mentioned constant).
pub fn partition_validate(partition: &Partition) -> Result<(), PartitionError> {
    let cells = &partition.cells;
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if let Some(witness) = guards_intersect(&cells[i], &cells[j]) {
                return Err(PartitionError::NotDisjoint {
                    i,
                    j,
                    witness: witness.to_string(),
                });
            }
        }
    }
    // Exhaustiveness over the grid of relevant values.
    let mut params: BTreeSet<String> = BTreeSet::new();
    let mut max_const = 0usize;
    for g in cells {
        params.extend(g.params());
        for a in &g.atoms {
            match a {
                GuardAtom::Eq(_, c) | GuardAtom::Gt(_, c) => max_const = max_const.max(*c),
            }
        }
    }
    let params: Vec<String> = params.into_iter().collect();
    let limit = max_const + 2;
    let mut point = vec![0usize; params.len()];
    loop {
        let mut sigma = ParameterAssignment::new();
        for (p, v) in params.iter().zip(&point) {
            sigma.set(p, *v);
        }
        if !cells.iter().any(|g| guard_membership(&sigma, g)) {
            return Err(PartitionError::NotExhaustive {
                witness: sigma.to_string(),
            });
        }
        // advance grid point
        let mut k = 0;
        loop {
            if k == params.len() {
                return Ok(());
            }
            point[k] += 1;
            if point[k] < limit {
                break;
            }
            point[k] = 0;
            k += 1;
        }
    }
}

/// A satisfying assignment of `g1 /\ g2`, if any.
fn guards_intersect(g1: &Guard, g2: &Guard) -> Option<ParameterAssignment> {
    let mut sigma = ParameterAssignment::new();
    let mut params = g1.params();
    params.extend(g2.params());
    for p in &params {
        let s1 = g1.interval(p)?;
        let s2 = g2.interval(p)?;
        let s = s1.intersect(&s2)?;
        let v = match s {
            ParamSet::All => 0,
            ParamSet::Point(c) => c,
            ParamSet::Above(c) => c + 1,
        };
        sigma.set(p, v);
    }
    Some(sigma)
}

/// Enumerate all assignments over `params` with values bounded by `bound`
/// (inclusive). Used by sampling-based checks.
pub fn assignment_grid(params: &[String], bound: usize) -> Vec<ParameterAssignment> {
    let mut out = Vec::new();
    let mut point = vec![0usize; params.len()];
    loop {
        let mut sigma = ParameterAssignment::new();
        for (p, v) in params.iter().zip(&point) {
            sigma.set(p, *v);
        }
        out.push(sigma);
        let mut k = 0;
        loop {
            if k == params.len() {
                return out;
            }
            point[k] += 1;
            if point[k] <= bound {
                break;
            }
            point[k] = 0;
            k += 1;
        }
    }
}

pub type NumResult<T> = Result<T, NumericError>;
