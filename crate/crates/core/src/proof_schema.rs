//! Proof-schema definitions, the join operator, evaluation into concrete
//! derivations, semantic well-formedness against call graphs, and
//! unification schemata.

use crate::callgraph::{CallGraph, Flow};
use crate::formula::Formula;
use crate::numeric::{
    assignment_grid, normalize_omega, partition_locate, partition_validate, Guard, NumericTerm,
    ParameterAssignment, Partition,
};
use crate::rpl0::{Derivation, Rule, Sequent};
use crate::rpl0_psi::{
    self, check_normal, check_regular, global_unifier, instantiate_derivation,
    instantiate_sequent, PsiError,
};
use crate::signature::Signature;
use crate::ssubst::{FoSubstitution, SSubstitution};
use std::collections::BTreeMap;

/// One component of a schema definition: a guard cell and its labeled
/// derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaCell {
    pub guard: Guard,
    pub derivation: Derivation,
}

/// Per proof symbol: the partition-indexed derivations and the end-sequent
/// template over the symbol's declared parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaComponent {
    pub sym: String,
    pub params: Vec<String>,
    pub end_sequent: Sequent,
    pub cells: Vec<SchemaCell>,
}

impl SchemaComponent {
    pub fn partition(&self) -> Partition {
        Partition {
            cells: self.cells.iter().map(|c| c.guard.clone()).collect(),
        }
    }
}

/// A proof schema: components per symbol plus the distinguished main symbol
/// and the top symbol of the refuted definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofSchema {
    pub name: String,
    pub main: String,
    /// Top defined predicate symbol whose instances are the axiom leaves.
    pub top_symbol: String,
    pub components: BTreeMap<String, SchemaComponent>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("no component for proof symbol {0}")]
    NoComponent(String),
    #[error("component {sym}: {detail}")]
    Component { sym: String, detail: String },
    #[error("component {sym} cell {cell}: label ({target},{subst}) does not match the target end sequent: {detail}")]
    LabelMismatch {
        sym: String,
        cell: usize,
        target: String,
        subst: String,
        detail: String,
    },
    #[error("evaluation exceeded the step cap")]
    CapExceeded,
    #[error("assignment {sigma}: {detail}")]
    CellMiss { sigma: String, detail: String },
    #[error(transparent)]
    Psi(#[from] PsiError),
}

/// Parameter substitutions used in proof labels.
pub type ParamSubst = BTreeMap<String, NumericTerm>;

/// The updated assignment `sigma[theta]`: apply the label substitution's
/// right-hand sides under sigma, normalize, and update; untouched
/// parameters keep their values.
pub fn update_assignment(
    sigma: &ParameterAssignment,
    theta: &ParamSubst,
    sig: &Signature,
) -> ParameterAssignment {
    let mut out = sigma.clone();
    for (p, t) in theta {
        let v = normalize_omega(t, sigma, sig).unwrap_or(0);
        out.set(p, v);
    }
    out
}

/// Apply a parameter substitution to a sequent syntactically.
pub fn subst_sequent(s: &Sequent, theta: &ParamSubst) -> Sequent {
    let subst_f = |f: &Formula| subst_formula_params(f, theta);
    Sequent {
        ante: s.ante.iter().map(subst_f).collect(),
        succ: s.succ.iter().map(subst_f).collect(),
    }
}

pub fn subst_formula_params(f: &Formula, theta: &ParamSubst) -> Formula {
    match f {
        Formula::Atom(p, args) => Formula::Atom(
            p.clone(),
            args.iter()
                .map(|t| crate::ssubst::subst_params_term(t, theta))
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
                .map(|t| subst_params_omega(t, theta))
                .collect(),
        },
        Formula::Not(g) => Formula::not(subst_formula_params(g, theta)),
        Formula::And(a, b) => Formula::and(
            subst_formula_params(a, theta),
            subst_formula_params(b, theta),
        ),
        Formula::Or(a, b) => Formula::or(
            subst_formula_params(a, theta),
            subst_formula_params(b, theta),
        ),
        other => other.clone(),
    }
}

fn subst_params_omega(t: &NumericTerm, theta: &ParamSubst) -> NumericTerm {
    match t {
        NumericTerm::Param(p) => theta.get(p).cloned().unwrap_or_else(|| t.clone()),
        NumericTerm::Succ(u) => NumericTerm::succ(subst_params_omega(u, theta)),
        NumericTerm::DefApp(f, args) => NumericTerm::DefApp(
            f.clone(),
            args.iter().map(|a| subst_params_omega(a, theta)).collect(),
        ),
        other => other.clone(),
    }
}

/// Apply a parameter substitution to a whole derivation.
pub fn subst_derivation(d: &Derivation, theta: &ParamSubst) -> Derivation {
    let rule = match &d.rule {
        Rule::Res {
            theta: unifier,
            left_atoms,
            right_atoms,
        } => Rule::Res {
            theta: SSubstitution::of(
                unifier
                    .pairs
                    .iter()
                    .map(|(dom, rng)| {
                        (
                            crate::ssubst::subst_params_term(dom, theta),
                            crate::ssubst::subst_params_term(rng, theta),
                        )
                    })
                    .collect(),
            ),
            left_atoms: left_atoms.clone(),
            right_atoms: right_atoms.clone(),
        },
        Rule::Taut { id, xi1, xi2 } => Rule::Taut {
            id: *id,
            xi1: subst_formula_params(xi1, theta),
            xi2: xi2.as_ref().map(|f| subst_formula_params(f, theta)),
        },
        Rule::Labeled { sym, subst } => Rule::Labeled {
            sym: sym.clone(),
            subst: subst
                .iter()
                .map(|(p, t)| (p.clone(), subst_params_omega(t, theta)))
                .collect(),
        },
        other => other.clone(),
    };
    Derivation {
        sequent: subst_sequent(&d.sequent, theta),
        rule,
        children: d
            .children
            .iter()
            .map(|c| subst_derivation(c, theta))
            .collect(),
    }
}

/// Structural validation of a schema: partitions valid, every cell derives
/// the end-sequent template, labeled leaves match their target templates,
/// axiom leaves assert the top symbol, and every component is normal and
/// regular.
pub fn validate_schema(schema: &ProofSchema, sig: &Signature) -> Vec<SchemaError> {
    validate_schema_ext(schema, sig, false)
}

/// Like [`validate_schema`], optionally accepting user-declared tautology
/// leaves validated per instance.
pub fn validate_schema_ext(
    schema: &ProofSchema,
    sig: &Signature,
    allow_extra_tautologies: bool,
) -> Vec<SchemaError> {
    let mut report = Vec::new();
    if !schema.components.contains_key(&schema.main) {
        report.push(SchemaError::NoComponent(schema.main.clone()));
    }
    for (sym, comp) in &schema.components {
        if let Err(e) = partition_validate(&comp.partition()) {
            report.push(SchemaError::Component {
                sym: sym.clone(),
                detail: e.to_string(),
            });
        }
        for (idx, cell) in comp.cells.iter().enumerate() {
            if !cell.derivation.sequent.same_as(&comp.end_sequent) {
                report.push(SchemaError::Component {
                    sym: sym.clone(),
                    detail: format!(
                        "cell {} derives {} instead of the template {}",
                        idx, cell.derivation.sequent, comp.end_sequent
                    ),
                });
            }
            // Leaf discipline.
            cell.derivation.walk(&mut Vec::new(), &mut |_, node| {
                match &node.rule {
                    Rule::Labeled { sym: target, subst } => {
                        match schema.components.get(target) {
                            None => report.push(SchemaError::NoComponent(target.clone())),
                            Some(tc) => {
                                let expect = subst_sequent(&tc.end_sequent, subst);
                                if !node.sequent.same_as(&expect) {
                                    report.push(SchemaError::LabelMismatch {
                                        sym: sym.clone(),
                                        cell: idx,
                                        target: target.clone(),
                                        subst: format!("{:?}", subst),
                                        detail: format!(
                                            "leaf {} vs template instance {}",
                                            node.sequent, expect
                                        ),
                                    });
                                }
                            }
                        }
                    }
                    Rule::Axiom => {
                        let ok = node.sequent.ante.is_empty()
                            && node.sequent.succ.len() == 1
                            && matches!(
                                &node.sequent.succ[0],
                                Formula::DefAtom { sym: s, .. } if *s == schema.top_symbol
                            );
                        if !ok {
                            report.push(SchemaError::Component {
                                sym: sym.clone(),
                                detail: format!(
                                    "axiom leaf {} is not an instance of {}",
                                    node.sequent, schema.top_symbol
                                ),
                            });
                        }
                    }
                    Rule::Hypothesis => report.push(SchemaError::Component {
                        sym: sym.clone(),
                        detail: "hypothesis leaves are not allowed in schemas".into(),
                    }),
                    _ => {}
                }
            });
            // Rule-level checking with labels allowed.
            let policy = crate::rpl0::LeafPolicy {
                axioms: None,
                hypotheses: &[],
                allow_labels: true,
                allow_extra_tautologies,
            };
            if let Err(e) = crate::rpl0::check_derivation(&cell.derivation, sig, &policy) {
                report.push(SchemaError::Component {
                    sym: sym.clone(),
                    detail: e.to_string(),
                });
            }
            if !check_normal(&cell.derivation, sig) {
                report.push(SchemaError::Component {
                    sym: sym.clone(),
                    detail: format!("cell {} has a non-normal resolution unifier", idx),
                });
            }
            if !check_regular(&cell.derivation) {
                report.push(SchemaError::Component {
                    sym: sym.clone(),
                    detail: format!("cell {} is not regular", idx),
                });
            }
        }
    }
    report
}

/// The join of two labeled derivations: replace every labeled leaf of the
/// first whose sequent is the (substituted) end sequent of the second by the
/// correspondingly substituted second derivation.
pub fn join(phi0: &Derivation, phi1: &Derivation) -> Derivation {
    match &phi0.rule {
        Rule::Labeled { subst, .. } => {
            let candidate = subst_sequent(&phi1.sequent, subst);
            if candidate.same_as(&phi0.sequent) {
                subst_derivation(phi1, subst)
            } else {
                phi0.clone()
            }
        }
        _ => Derivation {
            sequent: phi0.sequent.clone(),
            rule: phi0.rule.clone(),
            children: phi0.children.iter().map(|c| join(c, phi1)).collect(),
        },
    }
}

/// Evaluation of a schema at a symbol and assignment: instantiate the cell
/// derivation and graft the recursively evaluated components at the labeled
/// leaves. Memoized on (symbol, restricted assignment).
pub fn evaluate(
    schema: &ProofSchema,
    sym: &str,
    sigma: &ParameterAssignment,
    step_cap: usize,
    sig: &Signature,
) -> Result<Derivation, SchemaError> {
    let mut memo: BTreeMap<(String, Vec<usize>), Derivation> = BTreeMap::new();
    let mut budget = step_cap;
    eval_inner(schema, sym, sigma, &mut budget, &mut memo, sig)
}

fn eval_inner(
    schema: &ProofSchema,
    sym: &str,
    sigma: &ParameterAssignment,
    budget: &mut usize,
    memo: &mut BTreeMap<(String, Vec<usize>), Derivation>,
    sig: &Signature,
) -> Result<Derivation, SchemaError> {
    if *budget == 0 {
        return Err(SchemaError::CapExceeded);
    }
    *budget -= 1;
    let comp = schema
        .components
        .get(sym)
        .ok_or_else(|| SchemaError::NoComponent(sym.to_string()))?;
    let key = (sym.to_string(), sigma.restrict(&comp.params));
    if let Some(hit) = memo.get(&key) {
        return Ok(hit.clone());
    }
    let cell_idx =
        partition_locate(sigma, &comp.partition()).map_err(|e| SchemaError::CellMiss {
            sigma: sigma.to_string(),
            detail: e.to_string(),
        })?;
    let instantiated = instantiate_derivation(&comp.cells[cell_idx].derivation, sigma, sig);
    let result = graft_labels(schema, &instantiated, sigma, budget, memo, sig)?;
    memo.insert(key, result.clone());
    Ok(result)
}

fn graft_labels(
    schema: &ProofSchema,
    d: &Derivation,
    sigma: &ParameterAssignment,
    budget: &mut usize,
    memo: &mut BTreeMap<(String, Vec<usize>), Derivation>,
    sig: &Signature,
) -> Result<Derivation, SchemaError> {
    match &d.rule {
        Rule::Labeled { sym, subst } => {
            let sigma2 = update_assignment(sigma, subst, sig);
            let sub = eval_inner(schema, sym, &sigma2, budget, memo, sig)?;
            // The grafted derivation's end sequent must coincide with the
            // instantiated leaf.
            if !sub.sequent.same_as(&d.sequent) {
                return Err(SchemaError::CellMiss {
                    sigma: sigma.to_string(),
                    detail: format!(
                        "grafted {} does not match labeled leaf {}",
                        sub.sequent, d.sequent
                    ),
                });
            }
            Ok(sub)
        }
        _ => {
            let children = d
                .children
                .iter()
                .map(|c| graft_labels(schema, c, sigma, budget, memo, sig))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Derivation {
                sequent: d.sequent.clone(),
                rule: d.rule.clone(),
                children,
            })
        }
    }
}

/// The recursion tree of an evaluation: one node per distinct (symbol,
/// point) subcall, mirroring trace semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallTree {
    pub sym: String,
    pub point: Vec<usize>,
    pub children: Vec<CallTree>,
}

impl CallTree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }
}

pub fn recursion_tree(
    schema: &ProofSchema,
    sym: &str,
    sigma: &ParameterAssignment,
    step_cap: usize,
    sig: &Signature,
) -> Result<CallTree, SchemaError> {
    let mut budget = step_cap;
    rec_tree_inner(schema, sym, sigma, &mut budget, sig)
}

fn rec_tree_inner(
    schema: &ProofSchema,
    sym: &str,
    sigma: &ParameterAssignment,
    budget: &mut usize,
    sig: &Signature,
) -> Result<CallTree, SchemaError> {
    if *budget == 0 {
        return Err(SchemaError::CapExceeded);
    }
    *budget -= 1;
    let comp = schema
        .components
        .get(sym)
        .ok_or_else(|| SchemaError::NoComponent(sym.to_string()))?;
    let cell_idx =
        partition_locate(sigma, &comp.partition()).map_err(|e| SchemaError::CellMiss {
            sigma: sigma.to_string(),
            detail: e.to_string(),
        })?;
    let point = sigma.restrict(&comp.params);
    let mut children = Vec::new();
    let mut seen: Vec<(String, Vec<usize>)> = Vec::new();
    let mut labels: Vec<(String, ParamSubst)> = Vec::new();
    comp.cells[cell_idx]
        .derivation
        .walk(&mut Vec::new(), &mut |_, node| {
            if let Rule::Labeled { sym, subst } = &node.rule {
                labels.push((sym.clone(), subst.clone()));
            }
        });
    for (target, subst) in labels {
        let sigma2 = update_assignment(sigma, &subst, sig);
        let tcomp = schema
            .components
            .get(&target)
            .ok_or_else(|| SchemaError::NoComponent(target.clone()))?;
        let key = (target.clone(), sigma2.restrict(&tcomp.params));
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        children.push(rec_tree_inner(schema, &target, &sigma2, budget, sig)?);
    }
    Ok(CallTree {
        sym: sym.to_string(),
        point,
        children,
    })
}

/// Compare the recursion tree with a call-graph trace node for node.
pub fn isomorphic_to_trace(tree: &CallTree, trace: &crate::callgraph::Trace) -> bool {
    if tree.sym != trace.root.sym || tree.point != trace.root.point {
        return false;
    }
    if tree.children.len() != trace.children.len() {
        return false;
    }
    // Children match as sets of (symbol, point)-rooted subtrees.
    let mut remaining: Vec<&crate::callgraph::Trace> = trace.children.iter().collect();
    for child in &tree.children {
        match remaining
            .iter()
            .position(|t| isomorphic_to_trace(child, t))
        {
            Some(i) => {
                remaining.remove(i);
            }
            None => return false,
        }
    }
    true
}

/// C models D(delta): for every sampled assignment, the unique schema cell's
/// labeled leaves correspond to junctions of the flow's cell for that
/// assignment.
pub fn models_flow(
    flow: &Flow,
    schema: &ProofSchema,
    sym: &str,
    bound: usize,
    sig: &Signature,
) -> bool {
    let Some(comp) = schema.components.get(sym) else {
        return false;
    };
    // The flow source must be the symbol at its declared parameter tuple.
    if flow.source.sym != sym {
        return false;
    }
    let expected_point: Vec<NumericTerm> = comp
        .params
        .iter()
        .map(|paramname| NumericTerm::param(paramname))
        .collect();
    if flow.source.point != expected_point {
        return false;
    }
    let mut params = comp.params.clone();
    for cell in &comp.cells {
        for extra in cell.guard.params() {
            if !params.contains(&extra) {
                params.push(extra);
            }
        }
    }
    for sigma in assignment_grid(&params, bound) {
        let Ok(cell_idx) = partition_locate(&sigma, &comp.partition()) else {
            return false;
        };
        let Ok(flow_cell) = partition_locate(&sigma, &flow.partition()) else {
            return false;
        };
        let junctions = &flow.cells[flow_cell].junctions;
        let mut labels: Vec<(String, ParamSubst)> = Vec::new();
        comp.cells[cell_idx]
            .derivation
            .walk(&mut Vec::new(), &mut |_, node| {
                if let Rule::Labeled { sym, subst } = &node.rule {
                    labels.push((sym.clone(), subst.clone()));
                }
            });
        for (target, subst) in labels {
            let sigma2 = update_assignment(&sigma, &subst, sig);
            let Some(tcomp) = schema.components.get(&target) else {
                return false;
            };
            let expected: Vec<usize> = sigma2.restrict(&tcomp.params);
            let found = junctions.iter().any(|j| {
                if j.sym != target || j == &flow.source {
                    return false;
                }
                let actual: Vec<usize> = j
                    .point
                    .iter()
                    .map(|t| normalize_omega(t, &sigma, sig).unwrap_or(0))
                    .collect();
                actual == expected
            });
            if !found {
                return false;
            }
        }
    }
    true
}

/// G models D: a bijection between flows and components under models_flow,
/// with matching cardinalities.
pub fn well_formed(graph: &CallGraph, schema: &ProofSchema, bound: usize, sig: &Signature) -> bool {
    if graph.flows.len() != schema.components.len() {
        return false;
    }
    let mut used: Vec<&str> = Vec::new();
    for sym in schema.components.keys() {
        let found = graph.flows.iter().find(|flow| {
            !used.contains(&flow.name.as_str()) && models_flow(flow, schema, sym, bound, sig)
        });
        match found {
            Some(flow) => used.push(&flow.name),
            None => return false,
        }
    }
    true
}

/// One unification triple: the component's global unifier, its labels, and
/// its guard.
#[derive(Debug, Clone)]
pub struct UnificationTriple {
    pub theta: SSubstitution,
    pub labels: Vec<(String, ParamSubst)>,
    pub guard: Guard,
}

#[derive(Debug, Clone, Default)]
pub struct UnificationSchema {
    pub triples: BTreeMap<String, Vec<UnificationTriple>>,
}

/// Construct the unification schema: per component cell, the global unifier
/// of its derivation plus the labels and guard.
pub fn build_unification_schema(
    schema: &ProofSchema,
    sig: &Signature,
) -> Result<UnificationSchema, SchemaError> {
    let mut out = UnificationSchema::default();
    for (sym, comp) in &schema.components {
        let mut triples = Vec::new();
        for cell in &comp.cells {
            let theta = global_unifier(&cell.derivation, sig)?;
            let mut labels = Vec::new();
            cell.derivation.walk(&mut Vec::new(), &mut |_, node| {
                if let Rule::Labeled { sym, subst } = &node.rule {
                    labels.push((sym.clone(), subst.clone()));
                }
            });
            triples.push(UnificationTriple {
                theta,
                labels,
                guard: cell.guard.clone(),
            });
        }
        out.triples.insert(sym.clone(), triples);
    }
    Ok(out)
}

/// Evaluate the unification schema at a symbol and assignment to a combined
/// first-order substitution: children first, composed with the cell's own
/// instantiated unifier.
pub fn evaluate_unifier(
    uschema: &UnificationSchema,
    schema: &ProofSchema,
    sym: &str,
    sigma: &ParameterAssignment,
    step_cap: usize,
    sig: &Signature,
) -> Result<FoSubstitution, SchemaError> {
    let mut budget = step_cap;
    eval_unif_inner(uschema, schema, sym, sigma, &mut budget, sig)
}

fn eval_unif_inner(
    uschema: &UnificationSchema,
    schema: &ProofSchema,
    sym: &str,
    sigma: &ParameterAssignment,
    budget: &mut usize,
    sig: &Signature,
) -> Result<FoSubstitution, SchemaError> {
    if *budget == 0 {
        return Err(SchemaError::CapExceeded);
    }
    *budget -= 1;
    let triples = uschema
        .triples
        .get(sym)
        .ok_or_else(|| SchemaError::NoComponent(sym.to_string()))?;
    let comp = schema
        .components
        .get(sym)
        .ok_or_else(|| SchemaError::NoComponent(sym.to_string()))?;
    let cell_idx =
        partition_locate(sigma, &comp.partition()).map_err(|e| SchemaError::CellMiss {
            sigma: sigma.to_string(),
            detail: e.to_string(),
        })?;
    let triple = &triples[cell_idx];
    let own = crate::ssubst::instantiate(&triple.theta, sigma, sig).map_err(|e| {
        SchemaError::Component {
            sym: sym.to_string(),
            detail: e.to_string(),
        }
    })?;
    if triple.labels.is_empty() {
        return Ok(own);
    }
    let mut combined = FoSubstitution::empty();
    for (target, subst) in &triple.labels {
        let sigma2 = update_assignment(sigma, subst, sig);
        let child = eval_unif_inner(uschema, schema, target, &sigma2, budget, sig)?;
        for (k, v) in child.map {
            combined.map.entry(k).or_insert(v);
        }
    }
    Ok(combined.compose(&own))
}

/// Erase every resolution unifier of a derivation (the cut skeleton).
pub fn cut_skeleton(d: &Derivation) -> Derivation {
    let rule = match &d.rule {
        Rule::Res {
            left_atoms,
            right_atoms,
            ..
        } => Rule::Res {
            theta: SSubstitution::empty(),
            left_atoms: left_atoms.clone(),
            right_atoms: right_atoms.clone(),
        },
        other => other.clone(),
    };
    Derivation {
        sequent: d.sequent.clone(),
        rule,
        children: d.children.iter().map(cut_skeleton).collect(),
    }
}

/// Apply a first-order substitution to every sequent of a derivation.
pub fn apply_fo_to_derivation(d: &Derivation, fo: &FoSubstitution) -> Derivation {
    Derivation {
        sequent: Sequent {
            ante: d.sequent.ante.iter().map(|f| fo.apply_formula(f)).collect(),
            succ: d.sequent.succ.iter().map(|f| fo.apply_formula(f)).collect(),
        },
        rule: d.rule.clone(),
        children: d
            .children
            .iter()
            .map(|c| apply_fo_to_derivation(c, fo))
            .collect(),
    }
}

/// Check the cut property of an instantiated derivation after a combined
/// substitution: every resolution's atom groups coincide syntactically once
/// defined symbols are unfolded.
pub fn all_res_atoms_equal(d: &Derivation, sig: &Signature) -> bool {
    let sigma = ParameterAssignment::new();
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
            let mut atoms: Vec<Formula> = Vec::new();
            for &i in left_atoms {
                match node.children[0].sequent.succ.get(i) {
                    Some(f) => atoms.push(
                        crate::formula::eval_formula(f, &sigma, sig).unwrap_or_else(|_| f.clone()),
                    ),
                    None => {
                        ok = false;
                        return;
                    }
                }
            }
            for &j in right_atoms {
                match node.children[1].sequent.ante.get(j) {
                    Some(f) => atoms.push(
                        crate::formula::eval_formula(f, &sigma, sig).unwrap_or_else(|_| f.clone()),
                    ),
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

/// Best-effort call-graph suggestion: read the labels off every component
/// cell and emit one flow per symbol whose junctions are the label targets
/// at their substituted parameter tuples.
pub fn suggest_graph(schema: &ProofSchema, order: crate::callgraph::PointOrder) -> CallGraph {
    let mut flows = Vec::new();
    for (sym, comp) in &schema.components {
        let source = crate::callgraph::Junction {
            sym: sym.clone(),
            point: comp.params.iter().map(|p| NumericTerm::param(p)).collect(),
        };
        let mut cells = Vec::new();
        for cell in &comp.cells {
            let mut junctions = vec![source.clone()];
            cell.derivation.walk(&mut Vec::new(), &mut |_, node| {
                if let Rule::Labeled { sym: target, subst } = &node.rule {
                    if let Some(tcomp) = schema.components.get(target) {
                        let point: Vec<NumericTerm> = tcomp
                            .params
                            .iter()
                            .map(|p| {
                                subst
                                    .get(p)
                                    .cloned()
                                    .unwrap_or_else(|| NumericTerm::param(p))
                            })
                            .collect();
                        let j = crate::callgraph::Junction {
                            sym: target.clone(),
                            point,
                        };
                        if !junctions.contains(&j) {
                            junctions.push(j);
                        }
                    }
                }
            });
            cells.push(crate::callgraph::FlowCell {
                guard: cell.guard.clone(),
                junctions,
            });
        }
        flows.push(Flow {
            name: format!("C_{}", sym),
            source,
            cells,
        });
    }
    CallGraph {
        name: "suggested".into(),
        flows,
        order,
    }
}

/// Instance-level check of an evaluated refutation: ends in the empty
/// sequent, has no labels, and every step is sound.
pub fn check_refutation_instance(
    d: &Derivation,
    schema: &ProofSchema,
    sig: &Signature,
) -> Result<(), String> {
    if !d.sequent.is_empty() {
        return Err(format!("derivation ends in {} instead of |-", d.sequent));
    }
    if !d.labeled_positions().is_empty() {
        return Err("labels remain after evaluation".into());
    }
    let top = schema.top_symbol.clone();
    let axiom_ok = move |f: &Formula| matches!(f, Formula::DefAtom { sym, .. } if *sym == top);
    match rpl0_psi::soundness_check_instance(d, &ParameterAssignment::new(), sig, &axiom_ok) {
        rpl0_psi::InstanceVerdict::Ok => Ok(()),
        rpl0_psi::InstanceVerdict::Countermodel { position, detail } => Err(format!(
            "instance check failed at {:?}: {}",
            position, detail
        )),
    }
}

/// Re-export used by the CLI for `normalize`.
pub fn instantiate_component_sequent(
    schema: &ProofSchema,
    sym: &str,
    sigma: &ParameterAssignment,
    sig: &Signature,
) -> Option<Sequent> {
    schema
        .components
        .get(sym)
        .map(|c| instantiate_sequent(&c.end_sequent, sigma, sig))
}
