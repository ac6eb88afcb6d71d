//! Behavioural tests of the schematic calculus against the fixture
//! signatures: rule checking, normality, regularity, renaming, and
//! admissibility.

use srk_core::dsl::{parse, parse_ssubst_text, ProblemFile};
use srk_core::formula::{count_distinct_variables, eval_formula, Formula};
use srk_core::iota::IotaTerm;
use srk_core::numeric::{NumericTerm, ParameterAssignment};
use srk_core::rpl0::{
    check_step, CheckError, DefDir, Derivation, Rule, Sequent, Side, TautologyId,
};
use srk_core::rpl0_psi::{
    admissible, apply_to_derivation, check_normal, check_psi_step, check_regular,
    global_unifier, rename_apart, unfold_pred_atom_schematic,
};
use srk_core::ssubst::SSubstitution;

fn fixture(name: &str) -> ProblemFile {
    let path = format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn flat_definitions_unfold_at_any_argument() {
    // The step-style tag on a flat definition unfolds at the zero instance.
    let p = fixture("graded.srk");
    let atom = Formula::def_atom(
        "Fhat1",
        &["X1", "X2", "X3"],
        vec![NumericTerm::numeral(0), NumericTerm::numeral(0)],
    );
    let rhs = unfold_pred_atom_schematic(&atom, &p.signature).unwrap();
    let expected = Formula::and(
        Formula::def_atom(
            "Fhat2",
            &["X1", "X2", "X3"],
            vec![NumericTerm::numeral(0), NumericTerm::numeral(0)],
        ),
        Formula::def_atom(
            "Fhat3",
            &["X1", "X2", "X3"],
            vec![NumericTerm::numeral(0), NumericTerm::numeral(0)],
        ),
    );
    assert_eq!(rhs, expected);
    let premise = Sequent::assert(atom);
    let concl = Sequent::assert(expected);
    let rule = Rule::DefPred {
        sym: "Fhat1".into(),
        side: Side::Right,
        pos: 0,
        dir: DefDir::Elim,
    };
    check_psi_step(&rule, &[&premise], &concl, &p.signature).unwrap();
}

#[test]
fn shape_mismatch_detected() {
    // A base-form unfolding where the argument has successor shape must be
    // rejected: the schematic unfolding follows the argument shape, so a
    // conclusion carrying the base right-hand side does not match.
    let p = fixture("graded.srk");
    let step_atom = Formula::def_atom(
        "Fhat5",
        &["X1", "X2", "X3"],
        vec![
            NumericTerm::param("n"),
            NumericTerm::succ(NumericTerm::param("m")),
        ],
    );
    let base_rhs = unfold_pred_atom_schematic(
        &Formula::def_atom(
            "Fhat5",
            &["X1", "X2", "X3"],
            vec![NumericTerm::param("n"), NumericTerm::Zero],
        ),
        &p.signature,
    )
    .unwrap();
    let rule = Rule::DefPred {
        sym: "Fhat5".into(),
        side: Side::Right,
        pos: 0,
        dir: DefDir::Elim,
    };
    let premise = Sequent::assert(step_atom);
    let concl = Sequent::assert(base_rhs);
    assert!(matches!(
        check_psi_step(&rule, &[&premise], &concl, &p.signature),
        Err(CheckError::Mismatch { .. })
    ));
    // an open argument (neither zero nor successor) cannot unfold at all
    let open_atom = Formula::def_atom(
        "Fhat5",
        &["X1", "X2", "X3"],
        vec![
            NumericTerm::param("n"),
            NumericTerm::DefApp("phat".into(), vec![NumericTerm::param("m")]),
        ],
    );
    assert!(unfold_pred_atom_schematic(&open_atom, &p.signature).is_err());
}

#[test]
fn tautology_schema_instances() {
    let p = fixture("graded.srk");
    let xi1 = Formula::atom("le", vec![IotaTerm::cst("a"), IotaTerm::cst("zero")]);
    let xi2 = Formula::atom("eq", vec![IotaTerm::cst("a"), IotaTerm::cst("a")]);
    let seq = TautologyId::AndIntro.instance(&xi1, Some(&xi2)).unwrap();
    assert!(seq.same_as(&Sequent::new(
        vec![xi1.clone(), xi2.clone()],
        vec![Formula::and(xi1.clone(), xi2.clone())],
    )));
    let leaf = Derivation::leaf(
        seq,
        Rule::Taut {
            id: TautologyId::AndIntro,
            xi1: xi1.clone(),
            xi2: Some(xi2),
        },
    );
    let policy = srk_core::rpl0::LeafPolicy {
        axioms: None,
        hypotheses: &[],
        allow_labels: false,
        allow_extra_tautologies: false,
    };
    srk_core::rpl0::check_derivation(&leaf, &p.signature, &policy).unwrap();
    // a wrong instance is rejected
    let bad = Derivation::leaf(
        Sequent::assert(xi1.clone()),
        Rule::Taut {
            id: TautologyId::Excluded,
            xi1,
            xi2: None,
        },
    );
    assert!(srk_core::rpl0::check_derivation(&bad, &p.signature, &policy).is_err());
}

/// Two-branch resolution sharing a V-term is irregular; renaming apart
/// restores regularity and the witness substitution replays the original.
#[test]
fn regularity_and_rename_apart() {
    let p = fixture("graded.srk");
    let sig = &p.signature;
    let shared = Formula::atom("eq", vec![IotaTerm::ivar("X3", &[0]), IotaTerm::cst("a")]);
    let left = Derivation::leaf(
        Sequent::new(vec![], vec![shared.clone()]),
        Rule::Axiom,
    );
    // also mention X3(0) in a side formula of the right branch
    let right = Derivation::leaf(
        Sequent::new(
            vec![shared.clone()],
            vec![Formula::atom(
                "le",
                vec![IotaTerm::ivar("X3", &[0]), IotaTerm::cst("a")],
            )],
        ),
        Rule::Hypothesis,
    );
    let res = Derivation::node(
        Sequent::new(
            vec![],
            vec![Formula::atom(
                "le",
                vec![IotaTerm::ivar("X3", &[0]), IotaTerm::cst("a")],
            )],
        ),
        Rule::Res {
            theta: SSubstitution::empty(),
            left_atoms: vec![0],
            right_atoms: vec![0],
        },
        vec![left, right],
    );
    assert!(!check_regular(&res));
    let (renamed, witness, gvar_map) = rename_apart(&res);
    assert!(check_regular(&renamed));
    // idempotent on already-regular derivations
    let (again, _, _) = rename_apart(&renamed);
    assert_eq!(again, renamed);
    // the witness substitution plus the bare-variable map replays the
    // original node for node
    let replayed = srk_core::rpl0_psi::apply_to_derivation(&renamed, &witness, sig)
        .expect("witness admissible");
    fn sequents(d: &Derivation, out: &mut Vec<Sequent>) {
        out.push(d.sequent.clone());
        for c in &d.children {
            sequents(c, out);
        }
    }
    let mut orig = Vec::new();
    sequents(&res, &mut orig);
    let mut replay = Vec::new();
    sequents(&replayed, &mut replay);
    assert_eq!(orig.len(), replay.len());
    for (a, b) in orig.iter().zip(replay.iter()) {
        let b2 = b.rename_gvars(&gvar_map);
        assert!(a.same_as(&b2), "{} vs {}", a, b2);
    }
}

#[test]
fn normality_of_fixture_components() {
    for name in ["qhat.srk", "graded.srk"] {
        let p = fixture(name);
        for comp in p.schemas[0].components.values() {
            for cell in &comp.cells {
                assert!(check_normal(&cell.derivation, &p.signature));
                assert!(check_regular(&cell.derivation));
            }
        }
    }
    // a resolution-free derivation is trivially normal
    let leaf = Derivation::leaf(
        Sequent::assert(Formula::atom("P", vec![])),
        Rule::Axiom,
    );
    let p = fixture("qhat.srk");
    assert!(check_normal(&leaf, &p.signature));
    // a non-normal unifier is detected
    let theta = parse_ssubst_text("{ X(0) <- g(X(0)) }", &p.signature).unwrap();
    let px = Formula::atom("P", vec![IotaTerm::ivar("X", &[0]), IotaTerm::cst("a")]);
    let py = Formula::atom("P", vec![IotaTerm::fun("g", vec![IotaTerm::ivar("X", &[0])]), IotaTerm::cst("a")]);
    let res = Derivation::node(
        Sequent::empty(),
        Rule::Res {
            theta,
            left_atoms: vec![0],
            right_atoms: vec![0],
        },
        vec![
            Derivation::leaf(Sequent::assert(py), Rule::Hypothesis),
            Derivation::leaf(Sequent::new(vec![px], vec![]), Rule::Hypothesis),
        ],
    );
    assert!(!check_normal(&res, &p.signature));
}

/// Admissibility: the empty substitution is always admissible; a
/// substitution sending the two resolved variables to distinct constants
/// blocks the resolution.
#[test]
fn admissibility_examples() {
    let p = fixture("qhat.srk");
    let sig = &p.signature;
    let a1 = Formula::atom("P", vec![IotaTerm::ivar("X1", &[0]), IotaTerm::cst("a")]);
    let a2 = Formula::atom("P", vec![IotaTerm::ivar("Y1", &[0]), IotaTerm::cst("a")]);
    let theta = parse_ssubst_text("{ Y1(0) <- X1(0) }", sig).unwrap();
    let res = Derivation::node(
        Sequent::empty(),
        Rule::Res {
            theta,
            left_atoms: vec![0],
            right_atoms: vec![0],
        },
        vec![
            Derivation::leaf(Sequent::assert(a1), Rule::Hypothesis),
            Derivation::leaf(Sequent::new(vec![a2], vec![]), Rule::Hypothesis),
        ],
    );
    assert!(admissible(&res, &SSubstitution::empty(), sig));
    // blocking substitution: X1(0) <- fhat(a, 0) evaluated against
    // Y1(0) <- g(a) can no longer be unified
    let blocker = parse_ssubst_text("{ X1(0) <- a, Y1(0) <- g(a) }", sig).unwrap();
    assert!(!admissible(&res, &blocker, sig));
    // a compatible substitution keeps the resolution unifiable
    let fine = parse_ssubst_text("{ X1(0) <- a, Y1(0) <- a }", sig).unwrap();
    assert!(admissible(&res, &fine, sig));
    let applied = apply_to_derivation(&res, &fine, sig).unwrap();
    assert!(applied.sequent.is_empty());
}

/// The spec-pinned graded evaluation example: the formula at (1, 1)
/// unfolds to the two-disjunct chain over the third global variable.
#[test]
fn graded_f5_unfolding_example() {
    let p = fixture("graded.srk");
    let f5 = p.formula("F5").unwrap();
    let sigma = ParameterAssignment::from_pairs(&[("n", 1), ("m", 1)]);
    let ground = eval_formula(f5, &sigma, &p.signature).unwrap();
    // atoms over constants have no variables at all
    assert_eq!(
        count_distinct_variables(&Formula::atom("le", vec![IotaTerm::cst("a"), IotaTerm::cst("zero")])),
        0
    );
    let suc = |t: IotaTerm| IotaTerm::fun("suc", vec![t]);
    let one = suc(IotaTerm::cst("zero"));
    let x31 = IotaTerm::ivar("X3", &[1]);
    let expected = Formula::or(
        Formula::not(Formula::atom("eq", vec![suc(x31.clone()), one.clone()])),
        Formula::not(Formula::atom("eq", vec![x31, one])),
    );
    assert_eq!(ground, expected);
    assert_eq!(count_distinct_variables(&ground), 1);
}

/// Global unifier requires normality and regularity.
#[test]
fn global_unifier_preconditions() {
    let p = fixture("qhat.srk");
    let sig = &p.signature;
    let shared = Formula::atom("P", vec![IotaTerm::ivar("X1", &[0]), IotaTerm::cst("a")]);
    let irregular = Derivation::node(
        Sequent::empty(),
        Rule::Res {
            theta: SSubstitution::empty(),
            left_atoms: vec![0],
            right_atoms: vec![0],
        },
        vec![
            Derivation::leaf(Sequent::assert(shared.clone()), Rule::Hypothesis),
            Derivation::leaf(Sequent::new(vec![shared], vec![]), Rule::Hypothesis),
        ],
    );
    assert!(matches!(
        global_unifier(&irregular, sig),
        Err(srk_core::rpl0_psi::PsiError::NotRegular)
    ));
    // resolution-free derivations have the empty global unifier
    let leaf = Derivation::leaf(
        Sequent::assert(Formula::atom("P", vec![IotaTerm::cst("a"), IotaTerm::cst("a")])),
        Rule::Axiom,
    );
    assert_eq!(global_unifier(&leaf, sig).unwrap(), SSubstitution::empty());
}

/// The base checker and the schematic checker agree on base-rule tags.
#[test]
fn psi_agrees_with_base_on_base_rules() {
    let p = fixture("qhat.srk");
    let sig = &p.signature;
    let f = Formula::and(
        Formula::atom("P", vec![IotaTerm::cst("a"), IotaTerm::cst("a")]),
        Formula::atom("P", vec![IotaTerm::cst("a"), IotaTerm::cst("a")]),
    );
    let premise = Sequent::assert(f);
    let concl = Sequent::assert(Formula::atom(
        "P",
        vec![IotaTerm::cst("a"), IotaTerm::cst("a")],
    ));
    let rule = Rule::AndR1 { pos: 0 };
    assert_eq!(
        check_step(&rule, &[&premise], &concl, sig).is_ok(),
        check_psi_step(&rule, &[&premise], &concl, sig).is_ok()
    );
}

/// Per-instance unsatisfiability oracle verdicts.
#[test]
fn unsat_instance_verdicts() {
    use srk_core::rpl0::{unsat_instance, RefuteLimits, UnsatVerdict};
    let p = fixture("qhat.srk");
    let qf = p.formula("QF").unwrap();
    let sigma = ParameterAssignment::from_pairs(&[("n", 3), ("m", 2)]);
    match unsat_instance(qf, &sigma, RefuteLimits::default(), &p.signature).unwrap() {
        UnsatVerdict::Refuted(d) => assert!(d.sequent.is_empty()),
        _ => panic!("expected a refutation"),
    }
    // a satisfiable atom saturates without the empty sequent
    let sat = Formula::atom("P", vec![IotaTerm::cst("a"), IotaTerm::cst("a")]);
    match unsat_instance(&sat, &sigma, RefuteLimits::default(), &p.signature).unwrap() {
        UnsatVerdict::Saturated => {}
        _ => panic!("expected saturation"),
    }
    let g = fixture("graded.srk");
    let f1 = g.formula("F1").unwrap();
    let sigma = ParameterAssignment::from_pairs(&[("n", 1), ("m", 1)]);
    match unsat_instance(f1, &sigma, RefuteLimits::default(), &g.signature).unwrap() {
        UnsatVerdict::Refuted(_) => {}
        _ => panic!("expected a refutation of the graded instance"),
    }
}

/// The printed evaluation of the two-parameter schema at (3, 2), end to end
/// through the evaluator.
#[test]
fn qhat_display_at_three_two() {
    let p = fixture("qhat.srk");
    let qf = p.formula("QF").unwrap();
    let sigma = ParameterAssignment::from_pairs(&[("n", 3), ("m", 2)]);
    let ground = eval_formula(qf, &sigma, &p.signature).unwrap();
    assert!(ground.is_ground());
    assert_eq!(count_distinct_variables(&ground), 6);
    let sigma0 = ParameterAssignment::from_pairs(&[("n", 3)]);
    let ground0 = eval_formula(qf, &sigma0, &p.signature).unwrap();
    assert_eq!(count_distinct_variables(&ground0), 5);
}

/// User-declared tautology leaves are rejected by default and accepted
/// under the extra-tautologies policy exactly when propositionally valid.
#[test]
fn extra_tautology_policy() {
    let p = fixture("qhat.srk");
    let a = Formula::atom("P", vec![IotaTerm::cst("a"), IotaTerm::cst("a")]);
    let valid = Derivation::leaf(
        Sequent::new(vec![a.clone()], vec![a.clone()]),
        Rule::Taut {
            id: TautologyId::Extra,
            xi1: a.clone(),
            xi2: None,
        },
    );
    let strict = srk_core::rpl0::LeafPolicy::default();
    assert!(srk_core::rpl0::check_derivation(&valid, &p.signature, &strict).is_err());
    let lax = srk_core::rpl0::LeafPolicy {
        allow_extra_tautologies: true,
        ..Default::default()
    };
    srk_core::rpl0::check_derivation(&valid, &p.signature, &lax).unwrap();
    // an invalid declared tautology stays rejected
    let invalid = Derivation::leaf(
        Sequent::assert(a.clone()),
        Rule::Taut {
            id: TautologyId::Extra,
            xi1: a,
            xi2: None,
        },
    );
    assert!(srk_core::rpl0::check_derivation(&invalid, &p.signature, &lax).is_err());
}

/// The first-order m.g.u. behind the two-parameter fixture's first
/// resolution arises from unifying its instantiated atoms.
#[test]
fn fo_unifier_of_instantiated_resolution() {
    use srk_core::ssubst::fo_unify_formulas;
    let p = fixture("qhat.srk");
    let sigma = ParameterAssignment::from_pairs(&[("m", 2)]);
    // the P-clause atom at m = 2 and the peeled negative atom at index 0
    let left = eval_formula(
        &Formula::atom(
            "P",
            vec![
                IotaTerm::def(
                    "fhat",
                    vec![srk_core::iota::DefArg::Term(IotaTerm::var(
                        "Y",
                        vec![NumericTerm::Zero],
                    ))],
                    vec![NumericTerm::param("m")],
                ),
                IotaTerm::ivar("Y", &[1]),
            ],
        ),
        &sigma,
        &p.signature,
    )
    .unwrap();
    let right = eval_formula(
        &Formula::atom(
            "P",
            vec![
                IotaTerm::ivar("X", &[0]),
                IotaTerm::def(
                    "fhat",
                    vec![srk_core::iota::DefArg::Term(IotaTerm::cst("a"))],
                    vec![NumericTerm::Zero],
                ),
            ],
        ),
        &sigma,
        &p.signature,
    )
    .unwrap();
    let mgu = fo_unify_formulas(&[left.clone(), right.clone()]).unwrap();
    let g2y = IotaTerm::fun(
        "g",
        vec![IotaTerm::fun("g", vec![IotaTerm::ivar("Y", &[0])])],
    );
    assert_eq!(mgu.apply(&IotaTerm::ivar("X", &[0])), g2y);
    assert_eq!(mgu.apply(&IotaTerm::ivar("Y", &[1])), IotaTerm::cst("a"));
    // idempotent m.g.u.: re-unifying the unified atoms is the identity
    let u = mgu.apply_formula(&left);
    let again = fo_unify_formulas(&[u.clone(), mgu.apply_formula(&right)]).unwrap();
    assert!(again.map.is_empty());
}
