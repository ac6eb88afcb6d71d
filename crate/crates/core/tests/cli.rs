//! End-to-end runs of the command-line binary: commands, emit formats,
//! exit codes, and the sampling-bound environment variable.

use std::process::Command;

fn srk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_srk"))
}

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name)
}

#[test]
fn check_ok_and_parse_error_exit_codes() {
    let out = srk().args(["check", &fixture("qhat.srk")]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);

    // parse error: exit 2
    let dir = std::env::temp_dir().join("srk-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let broken = dir.join("broken.srk");
    std::fs::write(&broken, "signature {\n  param n\n").unwrap();
    let out = srk().args(["check", broken.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // check failure: exit 1 (a partition with a hole)
    let invalid = dir.join("invalid.srk");
    std::fs::write(
        &invalid,
        "signature {\n  param n\n  proofsym d (n)\n}\ngraph G order lex {\n  flow P source (d; n) {\n    cell n > 0 {\n    }\n  }\n}\n",
    )
    .unwrap();
    let out = srk().args(["check", invalid.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn instantiate_emits_text_json_tptp() {
    let out = srk()
        .args([
            "instantiate",
            &fixture("qhat.srk"),
            "--formula",
            "QF",
            "--at",
            "n=3,m=2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("P(g(g(Y(0))),Y(1))"), "{}", text);
    assert!(text.contains("distinct variables: num:6"), "{}", text);

    // the variable-count law at the default assignment for the second slot
    let out = srk()
        .args([
            "instantiate",
            &fixture("qhat.srk"),
            "--formula",
            "QF",
            "--at",
            "n=3",
        ])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("distinct variables: num:5"), "{}", text);

    let out = srk()
        .args([
            "instantiate",
            &fixture("qhat.srk"),
            "--formula",
            "QF",
            "--at",
            "n=1,m=0",
            "--emit",
            "json",
        ])
        .output()
        .unwrap();
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("well-formed JSON");
    assert_eq!(json["srk-json"], 1);

    let out = srk()
        .args([
            "instantiate",
            &fixture("qhat.srk"),
            "--formula",
            "QF",
            "--at",
            "n=1,m=0",
            "--emit",
            "tptp",
        ])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("fof(QF, axiom,"), "{}", text);
}

#[test]
fn normalize_trace_refute_round() {
    let out = srk()
        .args([
            "normalize",
            &fixture("graded.srk"),
            "--schema",
            "D",
            "--at",
            "n=1,m=1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("ending in the empty sequent"));

    let out = srk()
        .args([
            "trace",
            &fixture("callgraphex.srk"),
            "--graph",
            "G",
            "--flow",
            "P1",
            "--at",
            "n=3",
            "--emit",
            "dot",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let dot = String::from_utf8_lossy(&out.stdout);
    assert!(dot.contains("digraph trace"));
    assert!(dot.contains("(deltap,3,2,3,0)"));

    let out = srk()
        .args([
            "refute",
            &fixture("qhat.srk"),
            "--formula",
            "QF",
            "--at",
            "n=2,m=1",
            "--max-steps",
            "100000",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("refuted"));

    // resource exhaustion: exit 3
    let out = srk()
        .args([
            "refute",
            &fixture("qhat.srk"),
            "--formula",
            "QF",
            "--at",
            "n=4,m=4",
            "--max-steps",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_and_suggest_unifier() {
    let out = srk()
        .args([
            "verify-unifier",
            &fixture("graded.srk"),
            "--theta",
            "{ X1(0, m) <- Shat(X3(m), n), X2(0, m) <- Shat(X3(m), n) }",
            "--terms",
            "X1(0, m)",
            "X2(0, m)",
            "--bound",
            "4",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("verified"));

    // a counterexample produces exit 1
    let out = srk()
        .args([
            "verify-unifier",
            &fixture("graded.srk"),
            "--theta",
            "{ X1(0, 0) <- a }",
            "--terms",
            "X1(0, 0)",
            "zero",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("counterexample"));

    // the environment variable supplies the default bound
    let out = srk()
        .env("SRK_BOUND", "2")
        .args([
            "verify-unifier",
            &fixture("graded.srk"),
            "--theta",
            "{ }",
            "--terms",
            "X3(n)",
            "X3(n)",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("bound 2"));

    // suggestion is advisory: exit 0 either way
    let out = srk()
        .args([
            "suggest-unifier",
            &fixture("graded.srk"),
            "--terms",
            "X1(0, 0)",
            "suc(a)",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("candidate"));
}

#[test]
fn suggest_graph_prints_flows() {
    let out = srk()
        .args(["suggest-graph", &fixture("qhat.srk"), "--schema", "D"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("flow C_delta0"));
    assert!(text.contains("(delta1b; phat(n), m, 0, phat(m))"), "{}", text);
}
