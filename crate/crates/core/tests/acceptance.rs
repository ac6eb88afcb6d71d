//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Every tolerance and bound is pinned here.

use srk_core::callgraph::{trace, validate_call_graph};
use srk_core::dsl::{parse, parse_term_text, ProblemFile};
use srk_core::formula::{count_distinct_variables, eval_formula, Formula};
use srk_core::iota::{eval_iota, DefArg, IotaTerm};
use srk_core::numeric::{normalize_omega, NumericTerm, ParameterAssignment};
use srk_core::proof_schema::{
    self, check_refutation_instance, evaluate, isomorphic_to_trace, recursion_tree, well_formed,
};
use srk_core::rpl0::{
    check_derivation, clausify, refute, refute_formula, sequents_equal_modulo_renaming,
    truth_table_satisfiable, truth_table_satisfiable_clauses, LeafPolicy, RefuteLimits,
    RefuteResult, Rule, Sequent,
};
use srk_core::rpl0_psi::{global_unifier, is_cut_derivation, rename_apart};
use srk_core::ssubst::{self, instantiate, SSubstitution};

fn fixture(name: &str) -> ProblemFile {
    let path = format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path, e));
    parse(&text).unwrap_or_else(|e| panic!("{}: {}", path, e))
}

fn assignment(pairs: &[(&str, usize)]) -> ParameterAssignment {
    ParameterAssignment::from_pairs(pairs)
}

fn pass(criterion: &str) {
    println!("ACCEPTANCE {}: PASS", criterion);
}

/// Criterion 1: the defined symbols for addition and multiplication agree
/// with machine arithmetic on 0..=8 squared, exactly.
#[test]
fn criterion_01_arithmetic() {
    let p = fixture("plus-times.srk");
    let sigma = ParameterAssignment::new();
    for a in 0..=8usize {
        for b in 0..=8usize {
            let plus = NumericTerm::DefApp(
                "fhat".into(),
                vec![NumericTerm::numeral(a), NumericTerm::numeral(b)],
            );
            let times = NumericTerm::DefApp(
                "ghat".into(),
                vec![NumericTerm::numeral(a), NumericTerm::numeral(b)],
            );
            assert_eq!(
                normalize_omega(&plus, &sigma, &p.signature).unwrap(),
                a + b,
                "addition at ({}, {})",
                a,
                b
            );
            assert_eq!(
                normalize_omega(&times, &sigma, &p.signature).unwrap(),
                a * b,
                "multiplication at ({}, {})",
                a,
                b
            );
        }
    }
    pass("1 arithmetic defined symbols");
}

/// Criterion 2: the evaluation of the two-parameter defined symbol at
/// n = 1, m = 2 is g(X(1,1), g(X(1,0), Y)), as an exact tree.
#[test]
fn criterion_02_evaluation_oracle() {
    let p = fixture("fhat-eval.srk");
    let t = IotaTerm::def(
        "fhat2",
        vec![DefArg::Gvar("X".into()), DefArg::Gvar("Y".into())],
        vec![NumericTerm::param("n"), NumericTerm::param("m")],
    );
    let sigma = assignment(&[("n", 1), ("m", 2)]);
    let result = eval_iota(&t, &sigma, &p.signature).unwrap();
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
    assert_eq!(result.to_string(), "g(X(1,1),g(X(1,0),Y()))");
    pass("2 evaluation oracle");
}

/// Criterion 3: the variable-count law (alpha + 2 distinct variables at
/// sigma(n) = alpha) and the exact formula tree at (n, m) = (3, 2).
#[test]
fn criterion_03_variable_count_and_tree() {
    let p = fixture("qhat.srk");
    let qf = p.formula("QF").expect("formula QF");
    for alpha in 0..=6usize {
        let sigma = assignment(&[("n", alpha)]);
        let ground = eval_formula(qf, &sigma, &p.signature).unwrap();
        assert_eq!(
            count_distinct_variables(&ground),
            alpha + 2,
            "count at alpha = {}",
            alpha
        );
    }
    let sigma = assignment(&[("n", 3), ("m", 2)]);
    let ground = eval_formula(qf, &sigma, &p.signature).unwrap();
    // P(g(g(Y(0))), Y(1)) & (((!P(X(0),a) | !P(X(1),g(a))) | !P(X(2),g(g(a)))) | !P(X(3),g(g(g(a)))))
    let gpow = |k: usize, inner: IotaTerm| -> IotaTerm {
        let mut t = inner;
        for _ in 0..k {
            t = IotaTerm::fun("g", vec![t]);
        }
        t
    };
    let neg = |i: usize| {
        Formula::not(Formula::atom(
            "P",
            vec![IotaTerm::ivar("X", &[i]), gpow(i, IotaTerm::cst("a"))],
        ))
    };
    let expected = Formula::and(
        Formula::atom(
            "P",
            vec![gpow(2, IotaTerm::ivar("Y", &[0])), IotaTerm::ivar("Y", &[1])],
        ),
        Formula::or(Formula::or(Formula::or(neg(0), neg(1)), neg(2)), neg(3)),
    );
    assert_eq!(ground, expected);
    pass("3 variable-count law and printed tree");
}

/// Criterion 4: the refuter finds checker-valid refutations of every
/// two-parameter instance with n, m <= 4 and every graded instance with
/// n, m <= 2, inside the step bound.
#[test]
fn criterion_04_unsatisfiability_oracle() {
    let limits = RefuteLimits {
        max_steps: 100_000,
        max_term_depth: 14,
    };
    let q = fixture("qhat.srk");
    let qf = q.formula("QF").unwrap();
    for n in 0..=4usize {
        for m in 0..=4usize {
            let sigma = assignment(&[("n", n), ("m", m)]);
            let ground = eval_formula(qf, &sigma, &q.signature).unwrap();
            let start = std::time::Instant::now();
            let (result, clauses) = refute_formula(&ground, limits, &q.signature);
            assert!(start.elapsed().as_secs() < 5, "within 5 s at ({}, {})", n, m);
            let RefuteResult::Refutation(d) = result else {
                panic!("no refutation of the two-parameter instance ({}, {})", n, m);
            };
            let pattern = Sequent::assert(ground.clone());
            let axiom_ok = move |f: &Formula| {
                sequents_equal_modulo_renaming(&pattern, &Sequent::assert(f.clone()))
            };
            let policy = LeafPolicy {
                axioms: Some(&axiom_ok),
                hypotheses: &clauses,
                allow_labels: false,
                allow_extra_tautologies: false,
            };
            check_derivation(&d, &q.signature, &policy)
                .unwrap_or_else(|e| panic!("checker rejected ({}, {}): {}", n, m, e));
        }
    }
    let g = fixture("graded.srk");
    let f1 = g.formula("F1").unwrap();
    for n in 0..=2usize {
        for m in 0..=2usize {
            let sigma = assignment(&[("n", n), ("m", m)]);
            let ground = eval_formula(f1, &sigma, &g.signature).unwrap();
            let start = std::time::Instant::now();
            let (result, clauses) = refute_formula(&ground, limits, &g.signature);
            assert!(start.elapsed().as_secs() < 5, "within 5 s at ({}, {})", n, m);
            let RefuteResult::Refutation(d) = result else {
                panic!("no refutation of the graded instance ({}, {})", n, m);
            };
            let pattern = Sequent::assert(ground.clone());
            let axiom_ok = move |f: &Formula| {
                sequents_equal_modulo_renaming(&pattern, &Sequent::assert(f.clone()))
            };
            let policy = LeafPolicy {
                axioms: Some(&axiom_ok),
                hypotheses: &clauses,
                allow_labels: false,
                allow_extra_tautologies: false,
            };
            check_derivation(&d, &g.signature, &policy)
                .unwrap_or_else(|e| panic!("checker rejected graded ({}, {}): {}", n, m, e));
        }
    }
    pass("4 unsatisfiability oracle (25 + 9 instances)");
}

/// Criterion 5: trace fidelity. The seven-junction chain at n = 2, the
/// square-accumulator law, and the linear chain of primitive recursion.
#[test]
fn criterion_05_trace_fidelity() {
    let p = fixture("callgraphex.srk");
    let g = p.graph("G").unwrap();
    let p1 = g.flow_named("P1").unwrap();
    let sigma = assignment(&[("n", 2)]);
    let t = trace(g, p1, &sigma, 1_000_000, &p.signature).unwrap();
    let mut chain = Vec::new();
    let mut node = Some(&t);
    while let Some(cur) = node {
        assert!(cur.children.len() <= 1, "linear trace");
        chain.push((cur.root.sym.clone(), cur.root.point.clone()));
        node = cur.children.first();
    }
    let expected: Vec<(String, Vec<usize>)> = vec![
        ("delta".into(), vec![2]),
        ("deltap".into(), vec![2, 1, 2, 0]),
        ("deltap".into(), vec![2, 1, 1, 1]),
        ("deltap".into(), vec![2, 1, 0, 2]),
        ("deltap".into(), vec![2, 0, 2, 2]),
        ("deltap".into(), vec![2, 0, 1, 3]),
        ("deltap".into(), vec![2, 0, 0, 4]),
    ];
    assert_eq!(chain, expected, "the seven-junction chain");
    for alpha in 1..=5usize {
        let sigma = assignment(&[("n", alpha)]);
        let t = trace(g, p1, &sigma, 1_000_000, &p.signature).unwrap();
        let sink = t.sink();
        assert_eq!(sink.point[3], alpha * alpha, "w = alpha^2 at {}", alpha);
    }
    let pr = fixture("prim-rec-graph.srk");
    let prg = pr.graph("G").unwrap();
    let flow = prg.flow_named("P").unwrap();
    for alpha in 0..=6usize {
        let sigma = assignment(&[("n", alpha)]);
        let t = trace(prg, flow, &sigma, 1_000_000, &pr.signature).unwrap();
        assert_eq!(t.size(), alpha + 1, "linear chain of length alpha + 1");
        assert_eq!(t.depth(), alpha + 1);
    }
    pass("5 trace fidelity");
}

/// Criterion 6: every fixture call graph terminates for all parameters up
/// to 6 under a million-node cap, with zero cap hits.
#[test]
fn criterion_06_finiteness() {
    let fixtures = [
        "prim-rec-graph.srk",
        "nested-graph.srk",
        "callgraphex.srk",
        "qhat.srk",
        "graded.srk",
    ];
    for name in fixtures {
        let p = fixture(name);
        for g in &p.graphs {
            validate_call_graph(g, 6, &p.signature)
                .unwrap_or_else(|e| panic!("{}: {}", name, e));
            for flow in &g.flows {
                let mut params = std::collections::BTreeSet::new();
                for t in &flow.source.point {
                    t.params(&mut params);
                }
                let params: Vec<String> = params.into_iter().collect();
                for sigma in srk_core::numeric::assignment_grid(&params, 6) {
                    trace(g, flow, &sigma, 1_000_000, &p.signature).unwrap_or_else(|e| {
                        panic!("{} flow {} at {}: {}", name, flow.name, sigma, e)
                    });
                }
            }
        }
    }
    pass("6 finiteness (0 cap hits)");
}

/// Criterion 7: end-to-end schema evaluation on both refutation fixtures:
/// empty end sequent, no labels, instance-checker acceptance, and recursion
/// trees isomorphic to the call-graph traces.
#[test]
fn criterion_07_schema_evaluation() {
    for (name, bound) in [("qhat.srk", 4usize), ("graded.srk", 2usize)] {
        let p = fixture(name);
        let schema = &p.schemas[0];
        let graph = &p.graphs[0];
        assert!(
            well_formed(graph, schema, 3, &p.signature),
            "{}: graph models schema",
            name
        );
        for n in 0..=bound {
            for m in 0..=bound {
                let sigma = assignment(&[("n", n), ("m", m)]);
                let d = evaluate(schema, &schema.main, &sigma, 1_000_000, &p.signature)
                    .unwrap_or_else(|e| panic!("{} at ({}, {}): {}", name, n, m, e));
                assert!(d.sequent.is_empty(), "{} ends empty at ({}, {})", name, n, m);
                assert!(d.labeled_positions().is_empty());
                check_refutation_instance(&d, schema, &p.signature)
                    .unwrap_or_else(|e| panic!("{} at ({}, {}): {}", name, n, m, e));
                let tree =
                    recursion_tree(schema, &schema.main, &sigma, 1_000_000, &p.signature)
                        .unwrap();
                let flow = graph.flow_of(&schema.main).unwrap();
                let tr = trace(graph, flow, &sigma, 1_000_000, &p.signature).unwrap();
                assert!(
                    isomorphic_to_trace(&tree, &tr),
                    "{} at ({}, {}): recursion tree is not trace-isomorphic",
                    name,
                    n,
                    m
                );
            }
        }
    }
    pass("7 end-to-end schema evaluation");
}

/// Criterion 8: the normality verdicts of the worked substitutions, and the
/// composition law on 200 randomized triples with parameters up to 4.
#[test]
fn criterion_08_ssubst_algebra() {
    use rand::{Rng, SeedableRng};
    let p = fixture("graded.srk");
    let sig = &p.signature;
    // Worked example: { X1(n,m) <- Shat(X3(m), n), X1(s(n),m) <- Shat(X3(m), s(n)), X1(0,0) <- X3(0) }
    let theta = srk_core::dsl::parse_ssubst_text(
        "{ X1(n, m) <- Shat(X3(m), n), X1(s(n), m) <- Shat(X3(m), s(n)), X1(0, 0) <- X3(0) }",
        sig,
    )
    .unwrap();
    ssubst::validate(&theta, sig).expect("the worked substitution is an s-substitution");
    assert!(ssubst::is_normal(&theta, sig).unwrap(), "worked example is normal");
    // theta1 = { X1(n) <- suc(X1(n)) } is not normal; over arity-2 here:
    let theta1 = srk_core::dsl::parse_ssubst_text("{ X1(n, m) <- suc(X1(n, m)) }", sig).unwrap();
    assert!(!ssubst::is_normal(&theta1, sig).unwrap(), "self-referential is not normal");
    // theta1' = { X1(n,m) <- X2(n,m) } and theta2' = { X2(m,n) <- X1(m,n) } are normal
    let t1p = srk_core::dsl::parse_ssubst_text("{ X1(n, m) <- X2(n, m) }", sig).unwrap();
    let t2p = srk_core::dsl::parse_ssubst_text("{ X2(m, n) <- X1(m, n) }", sig).unwrap();
    assert!(ssubst::is_normal(&t1p, sig).unwrap());
    assert!(ssubst::is_normal(&t2p, sig).unwrap());
    // ... but not composable (domain of the first meets range variables of
    // the second under assignments identifying n and m).
    assert!(!ssubst::composable(&t1p, &t2p, sig).unwrap());

    // Composition law on randomized normal, composable pairs.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0usize;
    while checked < 200 {
        let (t1, t2) = random_pair(&mut rng);
        if ssubst::validate(&t1, sig).is_err() || ssubst::validate(&t2, sig).is_err() {
            continue;
        }
        if !ssubst::is_normal(&t1, sig).unwrap_or(false)
            || !ssubst::is_normal(&t2, sig).unwrap_or(false)
        {
            continue;
        }
        if !ssubst::composable(&t1, &t2, sig).unwrap_or(false) {
            continue;
        }
        let composed = ssubst::compose(&t1, &t2, sig).unwrap();
        assert!(
            ssubst::is_normal(&composed, sig).unwrap(),
            "composition of normal substitutions is normal"
        );
        let mut sigma = ParameterAssignment::new();
        sigma.set("n", rng.gen_range(0..=4));
        sigma.set("m", rng.gen_range(0..=4));
        let left = instantiate(&composed, &sigma, sig).unwrap();
        let right = instantiate(&t1, &sigma, sig)
            .unwrap()
            .compose(&instantiate(&t2, &sigma, sig).unwrap());
        assert_eq!(left, right, "composition law at {}", sigma);
        checked += 1;
    }
    pass("8 s-substitution algebra (200 triples, 0 violations)");
}

fn random_pair(rng: &mut impl rand::Rng) -> (SSubstitution, SSubstitution) {
    // Domains over X1/X2 with tuples from a small pool; ranges over X3 and
    // the constant a.
    let tuples = [
        vec![NumericTerm::param("n"), NumericTerm::param("m")],
        vec![NumericTerm::succ(NumericTerm::param("n")), NumericTerm::param("m")],
        vec![NumericTerm::numeral(0), NumericTerm::numeral(0)],
        vec![NumericTerm::param("n"), NumericTerm::numeral(1)],
        vec![
            NumericTerm::succ(NumericTerm::succ(NumericTerm::param("n"))),
            NumericTerm::numeral(2),
        ],
    ];
    let ranges = [
        IotaTerm::cst("a"),
        IotaTerm::var("X3", vec![NumericTerm::param("m")]),
        IotaTerm::var("X3", vec![NumericTerm::numeral(3)]),
        IotaTerm::fun("suc", vec![IotaTerm::cst("a")]),
    ];
    let mut mk = |gvar: &str| {
        let count = rng.gen_range(1..=2);
        let mut pairs = Vec::new();
        for _ in 0..count {
            let dom = IotaTerm::var(gvar, tuples[rng.gen_range(0..tuples.len())].clone());
            let rng_term = ranges[rng.gen_range(0..ranges.len())].clone();
            if !pairs.iter().any(|(d, _)| *d == dom) {
                pairs.push((dom, rng_term));
            }
        }
        SSubstitution::of(pairs)
    };
    (mk("X1"), mk("X2"))
}

/// Criterion 9: global unifiers turn every fixture component derivation into
/// a cut-derivation, with global variables contained in the derivation's.
#[test]
fn criterion_09_global_unifier() {
    for name in ["qhat.srk", "graded.srk"] {
        let p = fixture(name);
        let schema = &p.schemas[0];
        for (sym, comp) in &schema.components {
            for (idx, cell) in comp.cells.iter().enumerate() {
                let (renamed, _, _) = rename_apart(&cell.derivation);
                let theta = global_unifier(&renamed, &p.signature).unwrap_or_else(|e| {
                    panic!("{} {} cell {}: {}", name, sym, idx, e)
                });
                let applied =
                    srk_core::rpl0_psi::apply_to_derivation(&renamed, &theta, &p.signature)
                        .unwrap_or_else(|e| panic!("{} {} cell {}: {}", name, sym, idx, e));
                assert!(
                    is_cut_derivation(&applied, &p.signature),
                    "{} {} cell {}: residual unifier not empty",
                    name,
                    sym,
                    idx
                );
                let dvars = renamed.gvars();
                for v in theta.gvars() {
                    assert!(
                        dvars.contains(&v),
                        "{} {} cell {}: unifier variable {} outside the derivation",
                        name,
                        sym,
                        idx,
                        v
                    );
                }
            }
        }
    }
    pass("9 global unifier (0 violations)");
}

/// Criterion 10: clausification preserves satisfiability on 100 random
/// ground formulas over at most 12 atoms, against the truth-table oracle.
#[test]
fn criterion_10_clausification() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let f = random_ground_formula(&mut rng, 0);
        let direct = truth_table_satisfiable(&f);
        let chains = clausify(&f);
        let clauses: Vec<Sequent> = chains.iter().map(|c| c.clause.clone()).collect();
        let via_clauses = truth_table_satisfiable_clauses(&clauses);
        assert_eq!(direct, via_clauses, "case {}: {}", case, f);
        // The decomposition chains must be rule-valid.
        for chain in &chains {
            let mut node = srk_core::rpl0::Derivation::leaf(Sequent::assert(f.clone()), Rule::Axiom);
            for (rule, seq) in &chain.chain {
                node = srk_core::rpl0::Derivation::node(seq.clone(), rule.clone(), vec![node]);
            }
            let sig = srk_core::signature::Signature::new();
            let policy = LeafPolicy {
                axioms: None,
                hypotheses: &[],
                allow_labels: false,
                allow_extra_tautologies: false,
            };
            check_derivation(&node, &sig, &policy).unwrap();
        }
    }
    // Spot examples: a refutable pair and a satisfiable unit.
    let sig = srk_core::signature::Signature::new();
    let px = Formula::atom("P", vec![IotaTerm::ivar("x", &[0])]);
    let py = Formula::atom("P", vec![IotaTerm::ivar("y", &[0])]);
    let clauses = vec![Sequent::assert(px), Sequent::new(vec![py], vec![])];
    match refute(&clauses, RefuteLimits::default(), &sig) {
        RefuteResult::Refutation(d) => {
            let policy = LeafPolicy {
                axioms: None,
                hypotheses: &clauses,
                allow_labels: false,
                allow_extra_tautologies: false,
            };
            check_derivation(&d, &sig, &policy).unwrap();
        }
        other => panic!("expected refutation, got {:?}", other),
    }
    let sat = vec![Sequent::assert(Formula::atom(
        "P",
        vec![IotaTerm::cst("a")],
    ))];
    assert!(matches!(
        refute(&sat, RefuteLimits::default(), &sig),
        RefuteResult::Saturated
    ));
    pass("10 clausification correctness (100 formulas, 0 mismatches)");
}

fn random_ground_formula(rng: &mut impl rand::Rng, depth: usize) -> Formula {
    let atoms = 12usize;
    if depth >= 4 || rng.gen_bool(0.35) {
        let i = rng.gen_range(0..atoms);
        return Formula::atom(&format!("A{}", i), vec![]);
    }
    match rng.gen_range(0..3) {
        0 => Formula::not(random_ground_formula(rng, depth + 1)),
        1 => Formula::and(
            random_ground_formula(rng, depth + 1),
            random_ground_formula(rng, depth + 1),
        ),
        _ => Formula::or(
            random_ground_formula(rng, depth + 1),
            random_ground_formula(rng, depth + 1),
        ),
    }
}

/// The worked s-unifier claim: the substitution repaired to target the two
/// V-terms verifies at bound 4.
#[test]
fn sunifier_verification_example() {
    let p = fixture("graded.srk");
    let sig = &p.signature;
    let theta = srk_core::dsl::parse_ssubst_text(
        "{ X1(0, m) <- Shat(X3(m), n), X2(0, m) <- Shat(X3(m), n) }",
        sig,
    )
    .unwrap();
    let t1 = parse_term_text("X1(0, m)", sig).unwrap();
    let t2 = parse_term_text("X2(0, m)", sig).unwrap();
    match ssubst::verify_sunifier(&theta, &t1, &t2, 4, sig).unwrap() {
        ssubst::UnifierVerdict::Verified => {}
        other => panic!("expected Verified, got {:?}", other),
    }
    // Distinct constants cannot be unified.
    let theta = srk_core::dsl::parse_ssubst_text("{ X1(0, 0) <- a }", sig).unwrap();
    let t1 = parse_term_text("X1(0, 0)", sig).unwrap();
    let t2 = parse_term_text("zero", sig).unwrap();
    match ssubst::verify_sunifier(&theta, &t1, &t2, 4, sig).unwrap() {
        ssubst::UnifierVerdict::CounterexampleAt(_) => {}
        other => panic!("expected a counterexample, got {:?}", other),
    }
    // The empty substitution unifies syntactically equal terms.
    let empty = SSubstitution::empty();
    let t = parse_term_text("Shat(X3(n), m)", sig).unwrap();
    match ssubst::verify_sunifier(&empty, &t, &t, 4, sig).unwrap() {
        ssubst::UnifierVerdict::Verified => {}
        other => panic!("expected Verified, got {:?}", other),
    }
}

/// Unification schemata: triples built from global unifiers evaluate to the
/// combined substitution, and applying it to the cut skeleton of the graded
/// evaluation yields empty residual unifiers everywhere.
#[test]
fn unification_schema_on_graded() {
    let p = fixture("graded.srk");
    let schema = &p.schemas[0];
    let uschema = proof_schema::build_unification_schema(schema, &p.signature).unwrap();
    for n in 0..=2usize {
        for m in 0..=2usize {
            let sigma = assignment(&[("n", n), ("m", m)]);
            let combined = proof_schema::evaluate_unifier(
                &uschema,
                schema,
                &schema.main,
                &sigma,
                100_000,
                &p.signature,
            )
            .unwrap();
            let d = evaluate(schema, &schema.main, &sigma, 1_000_000, &p.signature).unwrap();
            let skeleton = proof_schema::cut_skeleton(&d);
            let applied = proof_schema::apply_fo_to_derivation(&skeleton, &combined);
            assert!(
                proof_schema::all_res_atoms_equal(&applied, &p.signature),
                "cut property at ({}, {})",
                n,
                m
            );
        }
    }
    pass("unification schema cut property");
}
