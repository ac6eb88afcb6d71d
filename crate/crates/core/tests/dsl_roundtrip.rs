//! Parser and printer round-trips plus diagnostics.

use proptest::prelude::*;
use srk_core::dsl::{parse, print_problem};
use srk_core::numeric::NumericTerm;

const FIXTURES: &[&str] = &[
    "plus-times.srk",
    "fhat-eval.srk",
    "prim-rec-graph.srk",
    "nested-graph.srk",
    "callgraphex.srk",
    "qhat.srk",
    "graded.srk",
];

fn fixture_text(name: &str) -> String {
    let path = format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(path).unwrap()
}

/// parse(print(parse(text))) reproduces every section of every fixture.
#[test]
fn fixtures_round_trip() {
    for name in FIXTURES {
        let p1 = parse(&fixture_text(name)).unwrap_or_else(|e| panic!("{}: {}", name, e));
        let printed = print_problem(&p1);
        let p2 = parse(&printed).unwrap_or_else(|e| panic!("{} (reprint): {}\n{}", name, e, printed));
        assert_eq!(p1.signature.params, p2.signature.params, "{}", name);
        assert_eq!(p1.signature.consts, p2.signature.consts, "{}", name);
        assert_eq!(p1.signature.funcs, p2.signature.funcs, "{}", name);
        assert_eq!(p1.signature.preds, p2.signature.preds, "{}", name);
        assert_eq!(p1.signature.gvars, p2.signature.gvars, "{}", name);
        assert_eq!(p1.signature.numeric_defs, p2.signature.numeric_defs, "{}", name);
        assert_eq!(p1.signature.iota_defs, p2.signature.iota_defs, "{}", name);
        assert_eq!(p1.signature.pred_defs, p2.signature.pred_defs, "{}", name);
        assert_eq!(p1.signature.proof_params, p2.signature.proof_params, "{}", name);
        assert_eq!(p1.formulas, p2.formulas, "{}", name);
        assert_eq!(p1.schemas.len(), p2.schemas.len(), "{}", name);
        for (a, b) in p1.schemas.iter().zip(&p2.schemas) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.main, b.main);
            assert_eq!(a.top_symbol, b.top_symbol);
            assert_eq!(a.components, b.components, "{}", name);
        }
        assert_eq!(p1.graphs, p2.graphs, "{}", name);
    }
}

#[test]
fn diagnostics_carry_positions() {
    // empty input
    let err = parse("").unwrap_err();
    assert!(err.message.contains("empty"));
    // unclosed brace
    let err = parse("signature {\n  param n\n").unwrap_err();
    assert_eq!(err.line, 3);
    // unknown rule tag inside a proof block reports its line
    let text = "signature { param n }\nformula F = bad(n)\n";
    let err = parse(text).unwrap_err();
    assert_eq!(err.line, 2);
}

/// Numeral printing: decimal in the surface syntax, successor chains on
/// demand.
#[test]
fn numeral_styles() {
    let t = NumericTerm::numeral(3);
    assert_eq!(t.to_string(), "3");
    assert_eq!(srk_core::cli::render_term(&t, false), "num:3");
    assert_eq!(srk_core::cli::render_term(&t, true), "s(s(s(0)))");
}

proptest! {
    /// Round-trip of randomly generated numeric definitions through the
    /// printer and parser.
    #[test]
    fn random_numeric_defs_round_trip(base in omega_term(), step in omega_term()) {
        let mut sig = srk_core::signature::Signature::new();
        sig.params.extend(["n".to_string(), "m".to_string()]);
        let def = srk_core::signature::NumericDef {
            params: vec!["n".into()],
            rec_param: "m".into(),
            base,
            step,
        };
        // only definitions accepted by the registry are printable
        if sig.register_numeric("h", def).is_ok() {
            let file = srk_core::dsl::ProblemFile {
                signature: sig,
                formulas: vec![],
                schemas: vec![],
                graphs: vec![],
            };
            let printed = print_problem(&file);
            let back = parse(&printed).unwrap();
            prop_assert_eq!(file.signature.numeric_defs, back.signature.numeric_defs);
        }
    }
}

fn omega_term() -> impl Strategy<Value = NumericTerm> {
    let leaf = prop_oneof![
        Just(NumericTerm::Zero),
        Just(NumericTerm::param("n")),
        Just(NumericTerm::param("m")),
        Just(NumericTerm::Rec),
        (0usize..4).prop_map(NumericTerm::numeral),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![inner.clone().prop_map(NumericTerm::succ),]
    })
}
