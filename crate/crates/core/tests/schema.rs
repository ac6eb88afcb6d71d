//! Proof-schema level behaviour: the join operator, semantic well-formedness
//! against call graphs, evaluation, and the unification schema.

use srk_core::callgraph::trace;
use srk_core::dsl::{parse, ProblemFile};
use srk_core::numeric::{assignment_grid, ParameterAssignment};
use srk_core::proof_schema::{
    self, build_unification_schema, evaluate, join, models_flow, recursion_tree, subst_derivation,
    update_assignment, validate_schema, well_formed,
};
use srk_core::rpl0::{Derivation, Rule, Sequent};

fn fixture(name: &str) -> ProblemFile {
    let path = format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixtures_validate() {
    for name in ["qhat.srk", "graded.srk"] {
        let p = fixture(name);
        let report = validate_schema(&p.schemas[0], &p.signature);
        assert!(report.is_empty(), "{}: {:?}", name, report);
    }
}

#[test]
fn label_mismatch_detected() {
    let p = fixture("qhat.srk");
    let mut schema = p.schemas[0].clone();
    // corrupt one labeled leaf's sequent
    let comp = schema.components.get_mut("delta0").unwrap();
    let mut found = false;
    for cell in &mut comp.cells {
        fn corrupt(d: &mut Derivation, found: &mut bool) {
            if *found {
                return;
            }
            if matches!(d.rule, Rule::Labeled { .. }) {
                d.sequent = Sequent::empty();
                *found = true;
                return;
            }
            for c in &mut d.children {
                corrupt(c, found);
            }
        }
        corrupt(&mut cell.derivation, &mut found);
        if found {
            break;
        }
    }
    assert!(found);
    let report = validate_schema(&schema, &p.signature);
    assert!(report
        .iter()
        .any(|e| matches!(e, proof_schema::SchemaError::LabelMismatch { .. })));
}

/// The join operator: matching labeled leaves are replaced under the label
/// substitution, mismatching ones are left in place, and label-free
/// derivations are fixed points.
#[test]
fn join_operator_cases() {
    let p = fixture("qhat.srk");
    let schema = &p.schemas[0];
    let delta1b = &schema.components["delta1b"];
    let recursive = &delta1b.cells[0].derivation;
    let terminal = &delta1b.cells[1].derivation;

    // The recursive cell's labeled leaves are instances of the component
    // template, so joining with the terminal derivation (whose end sequent
    // is exactly that template) replaces every one of them, each under its
    // own label substitution.
    let joined = join(recursive, terminal);
    assert!(joined.labeled_positions().is_empty(), "all labels replaced");
    // the grafted subtrees are the label-substituted terminal derivation
    let mut shift = std::collections::BTreeMap::new();
    shift.insert(
        "k".to_string(),
        srk_core::numeric::NumericTerm::succ(srk_core::numeric::NumericTerm::param("k")),
    );
    shift.insert(
        "n".to_string(),
        srk_core::numeric::NumericTerm::DefApp(
            "phat".into(),
            vec![srk_core::numeric::NumericTerm::param("n")],
        ),
    );
    let shifted = subst_derivation(terminal, &shift);
    for path in recursive.labeled_positions() {
        let grafted = joined.at(&path).unwrap();
        assert_eq!(grafted, &shifted);
    }
    // a derivation with mismatching end sequent joins to the identity
    let unrelated = Derivation::leaf(Sequent::empty(), Rule::Axiom);
    let unchanged = join(recursive, &unrelated);
    assert_eq!(&unchanged, recursive);
    // LAB-free derivations are fixed points of any join
    let fixed = join(terminal, recursive);
    assert_eq!(&fixed, terminal);
}

#[test]
fn models_flow_positive_and_negative() {
    let p = fixture("graded.srk");
    let schema = &p.schemas[0];
    let graph = &p.graphs[0];
    // every flow models its component
    for (flow_name, sym) in [
        ("C1", "delta0"),
        ("C2", "delta1"),
        ("C3", "delta2"),
        ("C4", "delta3"),
        ("C5", "delta4"),
        ("C6", "delta5"),
        ("C7", "delta6"),
    ] {
        let flow = graph.flow_named(flow_name).unwrap();
        assert!(
            models_flow(flow, schema, sym, 3, &p.signature),
            "{} models {}",
            flow_name,
            sym
        );
    }
    assert!(well_formed(graph, schema, 3, &p.signature));
    // dropping a junction breaks the correspondence
    let mut broken = graph.clone();
    let c2 = broken.flows.iter_mut().find(|f| f.name == "C2").unwrap();
    c2.cells[0].junctions.retain(|j| j.sym != "delta2");
    assert!(!models_flow(
        broken.flow_named("C2").unwrap(),
        schema,
        "delta1",
        3,
        &p.signature
    ));
    assert!(!well_formed(&broken, schema, 3, &p.signature));
    // removing a whole flow breaks the cardinality requirement
    let mut fewer = graph.clone();
    fewer.flows.pop();
    assert!(!well_formed(&fewer, schema, 3, &p.signature));
}

/// Termination cross-check: for every sampled assignment the evaluation
/// recursion tree is isomorphic to the call-graph trace.
#[test]
fn recursion_tree_isomorphism_samples() {
    for name in ["qhat.srk", "graded.srk"] {
        let p = fixture(name);
        let schema = &p.schemas[0];
        let graph = &p.graphs[0];
        let flow = graph.flow_of(&schema.main).unwrap();
        for sigma in assignment_grid(&["n".to_string(), "m".to_string()], 3) {
            let tree = recursion_tree(schema, &schema.main, &sigma, 1_000_000, &p.signature)
                .unwrap();
            let tr = trace(graph, flow, &sigma, 1_000_000, &p.signature).unwrap();
            assert!(
                proof_schema::isomorphic_to_trace(&tree, &tr),
                "{} at {}",
                name,
                sigma
            );
        }
    }
}

/// Assignment update: right-hand sides evaluate under the old assignment.
#[test]
fn assignment_update_semantics() {
    let p = fixture("qhat.srk");
    let sigma = ParameterAssignment::from_pairs(&[("n", 3), ("m", 1)]);
    let mut theta = std::collections::BTreeMap::new();
    theta.insert(
        "n".to_string(),
        srk_core::numeric::NumericTerm::DefApp(
            "phat".into(),
            vec![srk_core::numeric::NumericTerm::param("n")],
        ),
    );
    theta.insert("k".to_string(), srk_core::numeric::NumericTerm::numeral(0));
    let updated = update_assignment(&sigma, &theta, &p.signature);
    assert_eq!(updated.get("n"), 2);
    assert_eq!(updated.get("k"), 0);
    assert_eq!(updated.get("m"), 1, "untouched parameters carry over");
}

/// The two-parameter unification schema replays its definition: the
/// combined substitution is the composition of the children's with the
/// cell's own instantiated unifier.
#[test]
fn unification_schema_replays_definition() {
    let p = fixture("qhat.srk");
    let schema = &p.schemas[0];
    let uschema = build_unification_schema(schema, &p.signature).unwrap();
    let sigma = ParameterAssignment::from_pairs(&[("n", 1), ("m", 1)]);
    let combined = proof_schema::evaluate_unifier(
        &uschema,
        schema,
        &schema.main,
        &sigma,
        100_000,
        &p.signature,
    )
    .unwrap();
    // manual replay of the definition at this assignment
    let comp = &schema.components["delta0"];
    let cell_idx =
        srk_core::numeric::partition_locate(&sigma, &comp.partition()).unwrap();
    let triple = &uschema.triples["delta0"][cell_idx];
    let own = srk_core::ssubst::instantiate(&triple.theta, &sigma, &p.signature).unwrap();
    let mut children = srk_core::ssubst::FoSubstitution::empty();
    let mut seen = Vec::new();
    for (target, subst) in &triple.labels {
        let sigma2 = update_assignment(&sigma, subst, &p.signature);
        let key = (target.clone(), format!("{}", sigma2));
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let child = proof_schema::evaluate_unifier(
            &uschema,
            schema,
            target,
            &sigma2,
            100_000,
            &p.signature,
        )
        .unwrap();
        for (k, v) in child.map {
            children.map.entry(k).or_insert(v);
        }
    }
    let expected = children.compose(&own);
    assert_eq!(combined, expected);
    // leaf case: a label-free cell evaluates to its own unifier directly
    let sigma0 = ParameterAssignment::new();
    let combined0 = proof_schema::evaluate_unifier(
        &uschema,
        schema,
        "delta0",
        &sigma0,
        100_000,
        &p.signature,
    )
    .unwrap();
    let cell0 = srk_core::numeric::partition_locate(&sigma0, &comp.partition()).unwrap();
    let own0 =
        srk_core::ssubst::instantiate(&uschema.triples["delta0"][cell0].theta, &sigma0, &p.signature)
            .unwrap();
    assert_eq!(combined0, own0);
}

/// Resolution-free components propagate the empty unifier.
#[test]
fn resolution_free_components_have_empty_unifiers() {
    let p = fixture("graded.srk");
    let schema = &p.schemas[0];
    let uschema = build_unification_schema(schema, &p.signature).unwrap();
    for sym in ["delta3", "delta4", "delta5"] {
        for triple in &uschema.triples[sym] {
            assert!(
                triple.theta.is_empty(),
                "{} has a non-empty unifier",
                sym
            );
        }
    }
    let sigma = ParameterAssignment::from_pairs(&[("q", 2), ("w", 1)]);
    let combined = proof_schema::evaluate_unifier(
        &uschema,
        schema,
        "delta5",
        &sigma,
        100_000,
        &p.signature,
    )
    .unwrap();
    assert!(combined.map.is_empty());
}

/// The suggested graph read off the labels models the schema it came from.
#[test]
fn suggested_graph_models_schema() {
    for name in ["qhat.srk", "graded.srk"] {
        let p = fixture(name);
        let schema = &p.schemas[0];
        let suggested =
            proof_schema::suggest_graph(schema, srk_core::callgraph::PointOrder::Lex);
        assert_eq!(suggested.flows.len(), schema.components.len());
        assert!(
            well_formed(&suggested, schema, 2, &p.signature),
            "{}: suggested graph models the schema",
            name
        );
    }
}

/// Evaluation is memoized and pure: evaluating twice gives identical trees,
/// and an undersized step cap reports exhaustion.
#[test]
fn evaluation_caps_and_purity() {
    let p = fixture("graded.srk");
    let schema = &p.schemas[0];
    let sigma = ParameterAssignment::from_pairs(&[("n", 2), ("m", 1)]);
    let a = evaluate(schema, &schema.main, &sigma, 1_000_000, &p.signature).unwrap();
    let b = evaluate(schema, &schema.main, &sigma, 1_000_000, &p.signature).unwrap();
    assert_eq!(a, b);
    assert!(matches!(
        evaluate(schema, &schema.main, &sigma, 2, &p.signature),
        Err(proof_schema::SchemaError::CapExceeded)
    ));
}

/// Nested-recursion trace size law: 1 + sum over i = 1..alpha of (1 + (i + 1)),
/// checked against a direct recursive count.
#[test]
fn nested_graph_size_law() {
    let p = fixture("nested-graph.srk");
    let g = p.graph("G").unwrap();
    let p1 = g.flow_named("P1").unwrap();
    fn expected(alpha: usize) -> usize {
        1 + (1..=alpha).map(|i| 1 + (i + 1)).sum::<usize>()
    }
    for alpha in 0..=6usize {
        let sigma = ParameterAssignment::from_pairs(&[("n", alpha)]);
        let t = trace(g, p1, &sigma, 1_000_000, &p.signature).unwrap();
        assert_eq!(t.size(), expected(alpha), "alpha = {}", alpha);
    }
}

/// Every parent-to-child edge of a produced trace respects the network
/// order on concrete junctions (point order on equal arities, the arity
/// clause otherwise).
#[test]
fn trace_edges_respect_network_order() {
    fn check_edges(t: &srk_core::callgraph::Trace) {
        for c in &t.children {
            if c.root.point.len() == t.root.point.len() {
                assert!(
                    c.root.point < t.root.point,
                    "{} not below {}",
                    c.root,
                    t.root
                );
            } else {
                assert!(
                    t.root.point.len() < c.root.point.len(),
                    "arity clause violated: {} under {}",
                    c.root,
                    t.root
                );
            }
            check_edges(c);
        }
    }
    for name in [
        "prim-rec-graph.srk",
        "nested-graph.srk",
        "callgraphex.srk",
        "qhat.srk",
        "graded.srk",
    ] {
        let p = fixture(name);
        for g in &p.graphs {
            for flow in &g.flows {
                let mut params = std::collections::BTreeSet::new();
                for t in &flow.source.point {
                    t.params(&mut params);
                }
                let params: Vec<String> = params.into_iter().collect();
                for sigma in assignment_grid(&params, 3) {
                    let t = trace(g, flow, &sigma, 1_000_000, &p.signature).unwrap();
                    check_edges(&t);
                }
            }
        }
    }
}

/// Each flow of the two-parameter graph models its component.
#[test]
fn two_parameter_modeling_facts() {
    let p = fixture("qhat.srk");
    let schema = &p.schemas[0];
    let graph = &p.graphs[0];
    for (flow_name, sym) in [("C1", "delta0"), ("C2", "delta1a"), ("C3", "delta1b")] {
        let flow = graph.flow_named(flow_name).unwrap();
        assert!(
            models_flow(flow, schema, sym, 3, &p.signature),
            "{} models {}",
            flow_name,
            sym
        );
    }
    assert!(well_formed(graph, schema, 3, &p.signature));
}

/// A corrupted step inside an evaluated instance is reported with its
/// position by the instance-level soundness checker.
#[test]
fn corrupted_instance_step_is_countermodelled() {
    use srk_core::formula::Formula;
    use srk_core::rpl0_psi::{soundness_check_instance, InstanceVerdict};
    let p = fixture("graded.srk");
    let schema = &p.schemas[0];
    let sigma = ParameterAssignment::from_pairs(&[("n", 1), ("m", 0)]);
    let good = evaluate(schema, &schema.main, &sigma, 1_000_000, &p.signature).unwrap();
    let axiom_ok = |f: &Formula| matches!(f, Formula::DefAtom { sym, .. } if sym == "Fhat1");
    assert_eq!(
        soundness_check_instance(&good, &sigma, &p.signature, &axiom_ok),
        InstanceVerdict::Ok
    );
    let mut bad = good.clone();
    // corrupt the first internal node's sequent
    fn first_internal(d: &mut Derivation) -> Option<&mut Derivation> {
        if !d.children.is_empty() && !d.children[0].children.is_empty() {
            return Some(&mut d.children[0]);
        }
        for c in &mut d.children {
            if let Some(hit) = first_internal(c) {
                return Some(hit);
            }
        }
        None
    }
    let node = first_internal(&mut bad).unwrap();
    node.sequent = Sequent::empty();
    match soundness_check_instance(&bad, &sigma, &p.signature, &axiom_ok) {
        InstanceVerdict::Countermodel { .. } => {}
        other => panic!("expected a countermodel, got {:?}", other),
    }
}
