//! Points, junctions, flows, call graphs, and trace computation with the
//! runtime-verified finiteness guarantee.

use crate::numeric::{
    assignment_grid, guard_membership, normalize_omega, partition_locate, partition_validate,
    Guard, NumericTerm, ParameterAssignment, Partition,
};
use crate::signature::Signature;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// A junction: proof symbol paired with a point whose length is the symbol's
/// arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Junction {
    pub sym: String,
    pub point: Vec<NumericTerm>,
}

impl fmt::Display for Junction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.sym)?;
        for t in &self.point {
            write!(f, ",{}", t)?;
        }
        write!(f, ")")
    }
}

/// A concrete junction: all point components numerals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConcreteJunction {
    pub sym: String,
    pub point: Vec<usize>,
}

impl fmt::Display for ConcreteJunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.sym)?;
        for v in &self.point {
            write!(f, ",{}", v)?;
        }
        write!(f, ")")
    }
}

/// Declared order on concrete points of equal length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PointOrder {
    #[default]
    Lex,
    RevLex,
}

impl PointOrder {
    pub fn less(&self, a: &[usize], b: &[usize]) -> bool {
        match self {
            PointOrder::Lex => a < b,
            PointOrder::RevLex => {
                let ra: Vec<usize> = a.iter().rev().copied().collect();
                let rb: Vec<usize> = b.iter().rev().copied().collect();
                ra < rb
            }
        }
    }
}

/// One cell of a flow: a guard plus the finite junction set attached to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowCell {
    pub guard: Guard,
    pub junctions: Vec<Junction>,
}

/// A flow: a partition-indexed family of junction sets with a distinguished
/// source present in every cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub name: String,
    pub source: Junction,
    pub cells: Vec<FlowCell>,
}

impl Flow {
    pub fn partition(&self) -> Partition {
        Partition {
            cells: self.cells.iter().map(|c| c.guard.clone()).collect(),
        }
    }

    /// All junctions across cells (the regularity set).
    pub fn all_junctions(&self) -> Vec<&Junction> {
        let mut out: Vec<&Junction> = Vec::new();
        for c in &self.cells {
            for j in &c.junctions {
                if !out.iter().any(|k| **k == *j) {
                    out.push(j);
                }
            }
        }
        out
    }
}

/// A call graph: a finite set of flows, one per proof symbol. Junction
/// resolution maps each non-source junction to the flow of its symbol with
/// the connecting assignment read off the junction point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallGraph {
    pub name: String,
    pub flows: Vec<Flow>,
    pub order: PointOrder,
}

impl CallGraph {
    pub fn flow_of(&self, sym: &str) -> Option<&Flow> {
        self.flows.iter().find(|f| f.source.sym == sym)
    }

    pub fn flow_named(&self, name: &str) -> Option<&Flow> {
        self.flows.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("flow {flow}: {detail}")]
    Partition { flow: String, detail: String },
    #[error("flow {flow}: junction {junction} has wrong point length for {sym} (Af = {expected})")]
    Arity {
        flow: String,
        junction: String,
        sym: String,
        expected: usize,
    },
    #[error("flow {flow}: source {src} missing from cell {cell}")]
    SourceMissing {
        flow: String,
        src: String,
        cell: usize,
    },
    #[error("flow {flow}: junction {junction} is not below the source in cell {cell}")]
    OrderViolation {
        flow: String,
        junction: String,
        cell: usize,
    },
    #[error("no flow for junction symbol {0}")]
    NoResolution(String),
    #[error("trace exceeded the step cap")]
    CapExceeded,
    #[error("assignment {sigma}: {detail}")]
    Cell { sigma: String, detail: String },
}

/// How a comparison between two junctions was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decided {
    Exact,
    Sampled,
}

/// The network order restricted to a guard cell: true when the left junction
/// is below the right one for every assignment in the cell, either by the
/// point order (equal arities) or by the arity clause.
pub fn network_less(
    left: &Junction,
    right: &Junction,
    cell: &Guard,
    order: PointOrder,
    bound: usize,
    sig: &Signature,
) -> (bool, Decided) {
    if left.point.len() != right.point.len() {
        // Arity clause: (delta, p) < (delta', q) when Af(delta') < Af(delta).
        return (right.point.len() < left.point.len(), Decided::Exact);
    }
    if let Some(result) = exact_point_compare(&left.point, &right.point, cell, order, sig) {
        return (result, Decided::Exact);
    }
    let mut params: BTreeSet<String> = cell.params();
    for t in left.point.iter().chain(right.point.iter()) {
        t.params(&mut params);
    }
    let params: Vec<String> = params.into_iter().collect();
    let mut all = true;
    let mut seen = false;
    for sigma in assignment_grid(&params, bound) {
        if !guard_membership(&sigma, cell) {
            continue;
        }
        seen = true;
        let a: Vec<usize> = left
            .point
            .iter()
            .map(|t| normalize_omega(t, &sigma, sig).unwrap_or(0))
            .collect();
        let b: Vec<usize> = right
            .point
            .iter()
            .map(|t| normalize_omega(t, &sigma, sig).unwrap_or(0))
            .collect();
        if !order.less(&a, &b) {
            all = false;
            break;
        }
    }
    (seen && all, Decided::Sampled)
}

/// Symbolic form of a point component over a guard cell: a constant, or
/// `param + shift` valid when the guard keeps the parameter at or above the
/// predecessor-chain depth.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Component {
    Const(usize),
    Shifted {
        param: String,
        shift: isize,
        need: usize,
    },
}

fn analyze_component(t: &NumericTerm, sig: &Signature) -> Option<Component> {
    let mut up = 0usize;
    let mut cur = t;
    while let NumericTerm::Succ(inner) = cur {
        up += 1;
        cur = inner;
    }
    let mut down = 0usize;
    loop {
        match cur {
            NumericTerm::DefApp(f, args) if args.len() == 1 && is_predecessor(f, sig) => {
                down += 1;
                cur = &args[0];
            }
            _ => break,
        }
    }
    match cur {
        NumericTerm::Zero => Some(Component::Const(up)),
        NumericTerm::Param(p) => Some(Component::Shifted {
            param: p.clone(),
            shift: up as isize - down as isize,
            need: down,
        }),
        _ => None,
    }
}

fn is_predecessor(f: &str, sig: &Signature) -> bool {
    match sig.numeric_defs.get(f) {
        Some(def) => {
            def.params.is_empty()
                && def.base == NumericTerm::Zero
                && def.step == NumericTerm::param(&def.rec_param)
        }
        None => false,
    }
}

/// Lower bound of a parameter in a guard cell, plus its exact value if
/// pinned by an equality atom.
fn guard_bounds(cell: &Guard, param: &str) -> (usize, Option<usize>) {
    let mut lo = 0usize;
    let mut exact = None;
    for a in &cell.atoms {
        match a {
            crate::numeric::GuardAtom::Eq(p, c) if p == param => exact = Some(*c),
            crate::numeric::GuardAtom::Gt(p, c) if p == param => lo = lo.max(*c + 1),
            _ => {}
        }
    }
    (lo, exact)
}

/// Exact strict lexicographic comparison over a guard cell, where it can be
/// decided from shifted-parameter forms alone. Returns `None` when the
/// components fall outside the decidable fragment.
fn exact_point_compare(
    left: &[NumericTerm],
    right: &[NumericTerm],
    cell: &Guard,
    order: PointOrder,
    sig: &Signature,
) -> Option<bool> {
    if order != PointOrder::Lex {
        return None;
    }
    for (a, b) in left.iter().zip(right.iter()) {
        let ca = analyze_component(a, sig)?;
        let cb = analyze_component(b, sig)?;
        match component_compare(&ca, &cb, cell)? {
            std::cmp::Ordering::Equal => continue,
            std::cmp::Ordering::Less => return Some(true),
            std::cmp::Ordering::Greater => return Some(false),
        }
    }
    Some(false)
}

/// Compare two components for all assignments in the cell, when possible.
fn component_compare(
    a: &Component,
    b: &Component,
    cell: &Guard,
) -> Option<std::cmp::Ordering> {
    use std::cmp::Ordering::*;
    let resolve = |c: &Component| -> Option<Component> {
        if let Component::Shifted { param, shift, need } = c {
            let (lo, exact) = guard_bounds(cell, param);
            if let Some(v) = exact {
                let value = (v as isize + shift).max(0) as usize;
                return Some(Component::Const(value));
            }
            if lo < *need {
                // predecessor may clamp inside the cell; undecidable here
                return None;
            }
            Some(c.clone())
        } else {
            Some(c.clone())
        }
    };
    let a = resolve(a)?;
    let b = resolve(b)?;
    match (&a, &b) {
        (Component::Const(x), Component::Const(y)) => Some(x.cmp(y)),
        (
            Component::Shifted {
                param: p1,
                shift: s1,
                ..
            },
            Component::Shifted {
                param: p2,
                shift: s2,
                ..
            },
        ) => {
            if p1 == p2 {
                Some(s1.cmp(s2))
            } else {
                None
            }
        }
        (Component::Const(x), Component::Shifted { param, shift, .. }) => {
            // param + shift >= lo + shift for all assignments in the cell
            let (lo, _) = guard_bounds(cell, param);
            let min = (lo as isize + shift).max(0);
            if (*x as isize) < min {
                Some(Less)
            } else {
                None
            }
        }
        (Component::Shifted { param, shift, .. }, Component::Const(y)) => {
            let (lo, _) = guard_bounds(cell, param);
            let min = (lo as isize + shift).max(0);
            if (*y as isize) < min {
                Some(Greater)
            } else {
                None
            }
        }
    }
}

/// Validate a single flow: partition valid, arities consistent, source in
/// every cell, and every non-source junction strictly below the source in
/// its cell. Regularity is structural: the cell junction sets are finite
/// lists by construction.
pub fn validate_flow(
    flow: &Flow,
    order: PointOrder,
    bound: usize,
    sig: &Signature,
) -> Result<(), GraphError> {
    partition_validate(&flow.partition()).map_err(|e| GraphError::Partition {
        flow: flow.name.clone(),
        detail: e.to_string(),
    })?;
    for j in std::iter::once(&flow.source).chain(flow.cells.iter().flat_map(|c| &c.junctions)) {
        if let Some(expected) = sig.proof_syms.get(&j.sym).copied() {
            if j.point.len() != expected {
                return Err(GraphError::Arity {
                    flow: flow.name.clone(),
                    junction: j.to_string(),
                    sym: j.sym.clone(),
                    expected,
                });
            }
        }
    }
    for (idx, cell) in flow.cells.iter().enumerate() {
        if !cell.junctions.contains(&flow.source) {
            return Err(GraphError::SourceMissing {
                flow: flow.name.clone(),
                src: flow.source.to_string(),
                cell: idx,
            });
        }
        for j in &cell.junctions {
            if *j == flow.source {
                continue;
            }
            let (less, _) = network_less(j, &flow.source, &cell.guard, order, bound, sig);
            if !less {
                return Err(GraphError::OrderViolation {
                    flow: flow.name.clone(),
                    junction: j.to_string(),
                    cell: idx,
                });
            }
        }
    }
    Ok(())
}

/// Validate the whole call graph: each flow valid and every junction
/// resolvable to the flow of its symbol.
pub fn validate_call_graph(
    graph: &CallGraph,
    bound: usize,
    sig: &Signature,
) -> Result<(), GraphError> {
    for flow in &graph.flows {
        validate_flow(flow, graph.order, bound, sig)?;
        for cell in &flow.cells {
            for j in &cell.junctions {
                if *j == flow.source {
                    continue;
                }
                if graph.flow_of(&j.sym).is_none() {
                    return Err(GraphError::NoResolution(j.sym.clone()));
                }
            }
        }
    }
    Ok(())
}

/// The connecting assignment for a junction: evaluate its point under sigma
/// and bind the target flow's source parameters to the values.
pub fn junction_subst(
    junction: &Junction,
    sigma: &ParameterAssignment,
    target: &Flow,
    sig: &Signature,
) -> Result<ParameterAssignment, GraphError> {
    let mut theta = ParameterAssignment::new();
    for (component, source_param) in junction.point.iter().zip(&target.source.point) {
        let value = normalize_omega(component, sigma, sig).map_err(|e| GraphError::Cell {
            sigma: sigma.to_string(),
            detail: e.to_string(),
        })?;
        match source_param {
            NumericTerm::Param(p) => theta.set(p, value),
            other => {
                let sv = normalize_omega(other, &theta, sig).unwrap_or(usize::MAX);
                if sv != value {
                    return Err(GraphError::Cell {
                        sigma: sigma.to_string(),
                        detail: format!(
                            "junction {} does not instantiate source {}",
                            junction, target.source
                        ),
                    });
                }
            }
        }
    }
    Ok(theta)
}

/// A finite tree of concrete junctions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub root: ConcreteJunction,
    pub children: Vec<Trace>,
}

impl Trace {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// The junction at the end of the leftmost path (the sink of linear
    /// traces).
    pub fn sink(&self) -> &ConcreteJunction {
        match self.children.first() {
            Some(c) => c.sink(),
            None => &self.root,
        }
    }

    pub fn render_text(&self, indent: usize, out: &mut String) {
        out.push_str(&"  ".repeat(indent));
        out.push_str(&self.root.to_string());
        out.push('\n');
        for c in &self.children {
            c.render_text(indent + 1, out);
        }
    }
}

pub struct TraceStats {
    pub size: usize,
    pub depth: usize,
    pub sink: ConcreteJunction,
}

pub fn trace_stats(t: &Trace) -> TraceStats {
    TraceStats {
        size: t.size(),
        depth: t.depth(),
        sink: t.sink().clone(),
    }
}

/// Compute the trace of an assignment at a flow. The step cap is an
/// assertion device: valid graphs never hit it.
pub fn trace(
    graph: &CallGraph,
    flow: &Flow,
    sigma: &ParameterAssignment,
    step_cap: usize,
    sig: &Signature,
) -> Result<Trace, GraphError> {
    let mut budget = step_cap;
    trace_inner(graph, flow, sigma, &mut budget, sig)
}

fn trace_inner(
    graph: &CallGraph,
    flow: &Flow,
    sigma: &ParameterAssignment,
    budget: &mut usize,
    sig: &Signature,
) -> Result<Trace, GraphError> {
    if *budget == 0 {
        return Err(GraphError::CapExceeded);
    }
    *budget -= 1;
    let cell_idx = partition_locate(sigma, &flow.partition()).map_err(|e| GraphError::Cell {
        sigma: sigma.to_string(),
        detail: e.to_string(),
    })?;
    let root_point: Vec<usize> = flow
        .source
        .point
        .iter()
        .map(|t| normalize_omega(t, sigma, sig).unwrap_or(0))
        .collect();
    let root = ConcreteJunction {
        sym: flow.source.sym.clone(),
        point: root_point,
    };
    let mut children = Vec::new();
    let mut seen: Vec<ConcreteJunction> = Vec::new();
    for j in &flow.cells[cell_idx].junctions {
        if *j == flow.source {
            continue;
        }
        let target = graph
            .flow_of(&j.sym)
            .ok_or_else(|| GraphError::NoResolution(j.sym.clone()))?;
        let theta = junction_subst(j, sigma, target, sig)?;
        let key = ConcreteJunction {
            sym: j.sym.clone(),
            point: target
                .source
                .point
                .iter()
                .map(|t| normalize_omega(t, &theta, sig).unwrap_or(0))
                .collect(),
        };
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        children.push(trace_inner(graph, target, &theta, budget, sig)?);
    }
    Ok(Trace { root, children })
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn network_order_examples() {
        let (graph, sig) = prim_rec_graph();
        let flow = &graph.flows[0];
        let cell = &flow.cells[0].guard;
        let below = Junction {
            sym: "delta".into(),
            point: vec![pred(p("n"))],
        };
        let (less, how) = network_less(&below, &flow.source, cell, PointOrder::Lex, 6, &sig);
        assert!(less);
        assert_eq!(how, Decided::Exact);
        let (self_less, _) =
            network_less(&flow.source, &flow.source, cell, PointOrder::Lex, 6, &sig);
        assert!(!self_less);
        // arity clause: the longer point is below the shorter one
        let long = Junction {
            sym: "deltaprime".into(),
            point: vec![p("n"), p("m"), p("k"), p("w")],
        };
        let (less, how) = network_less(&long, &flow.source, cell, PointOrder::Lex, 6, &sig);
        assert!(less);
        assert_eq!(how, Decided::Exact);
        let (more, _) = network_less(&flow.source, &long, cell, PointOrder::Lex, 6, &sig);
        assert!(!more);
    }

    #[test]
    fn prim_rec_trace_is_linear() {
        let (graph, sig) = prim_rec_graph();
        assert!(validate_call_graph(&graph, 6, &sig).is_ok());
        for alpha in 0..=6usize {
            let sigma = ParameterAssignment::from_pairs(&[("n", alpha)]);
            let t = trace(&graph, &graph.flows[0], &sigma, 1_000_000, &sig).unwrap();
            assert_eq!(t.size(), alpha + 1);
            assert_eq!(t.depth(), alpha + 1);
            let mut node = &t;
            let mut expect = alpha;
            loop {
                assert_eq!(node.root.point, vec![expect]);
                if node.children.is_empty() {
                    break;
                }
                node = &node.children[0];
                expect -= 1;
            }
        }
    }

    #[test]
    fn source_missing_detected() {
        let (mut graph, sig) = prim_rec_graph();
        graph.flows[0].cells[1].junctions.clear();
        assert!(matches!(
            validate_flow(&graph.flows[0], PointOrder::Lex, 6, &sig),
            Err(GraphError::SourceMissing { .. })
        ));
    }

    #[test]
    fn order_violation_detected() {
        let (mut graph, sig) = prim_rec_graph();
        graph.flows[0].cells[0].junctions.push(Junction {
            sym: "delta".into(),
            point: vec![NumericTerm::succ(p("n"))],
        });
        assert!(matches!(
            validate_flow(&graph.flows[0], PointOrder::Lex, 6, &sig),
            Err(GraphError::OrderViolation { .. })
        ));
    }
}
