//! JSON, TPTP-style, and DOT exporters. JSON documents carry a schema
//! version under the key "srk-json".

use crate::callgraph::Trace;
use crate::formula::Formula;
use crate::iota::IotaTerm;
use crate::rpl0::{Derivation, Rule, Sequent};
use serde_json::{json, Value};

pub const JSON_VERSION: u64 = 1;

pub fn versioned(payload: Value) -> Value {
    json!({ "srk-json": JSON_VERSION, "data": payload })
}

pub fn formula_json(f: &Formula) -> Value {
    versioned(serde_json::to_value(f).unwrap_or(Value::Null))
}

pub fn derivation_json(d: &Derivation) -> Value {
    versioned(serde_json::to_value(d).unwrap_or(Value::Null))
}

pub fn trace_json(t: &Trace) -> Value {
    versioned(serde_json::to_value(t).unwrap_or(Value::Null))
}

/// TPTP-like rendering of a ground formula, for eyeballing against external
/// provers. Individual variables print as upper-cased names.
pub fn formula_tptp(name: &str, f: &Formula) -> String {
    format!("fof({}, axiom, {}).", name, tptp_formula(f))
}

fn tptp_formula(f: &Formula) -> String {
    match f {
        Formula::Atom(p, args) => {
            if args.is_empty() {
                sanitize_lower(p)
            } else {
                let parts: Vec<String> = args.iter().map(tptp_term).collect();
                format!("{}({})", sanitize_lower(p), parts.join(","))
            }
        }
        Formula::DefAtom {
            sym, omega_args, ..
        } => {
            let parts: Vec<String> = omega_args
                .iter()
                .map(|t| t.as_numeral().map(|n| n.to_string()).unwrap_or_else(|| t.to_string()))
                .collect();
            format!("{}({})", sanitize_lower(sym), parts.join(","))
        }
        Formula::Not(g) => format!("~ {}", tptp_paren(g)),
        Formula::And(a, b) => format!("{} & {}", tptp_paren(a), tptp_paren(b)),
        Formula::Or(a, b) => format!("{} | {}", tptp_paren(a), tptp_paren(b)),
        Formula::FormulaVar(x) => sanitize_lower(x),
        Formula::Rec => "rec".into(),
    }
}

fn tptp_paren(f: &Formula) -> String {
    match f {
        Formula::And(..) | Formula::Or(..) => format!("({})", tptp_formula(f)),
        _ => tptp_formula(f),
    }
}

fn tptp_term(t: &IotaTerm) -> String {
    match t {
        IotaTerm::Const(c) => sanitize_lower(c),
        IotaTerm::VTerm(x, args) => {
            let mut name = x.to_uppercase().to_string();
            for a in args {
                name.push('_');
                match a.as_numeral() {
                    Some(n) => name.push_str(&n.to_string()),
                    None => name.push_str(&sanitize_lower(&a.to_string())),
                }
            }
            name
        }
        IotaTerm::FunApp(g, args) => {
            let parts: Vec<String> = args.iter().map(tptp_term).collect();
            format!("{}({})", sanitize_lower(g), parts.join(","))
        }
        other => sanitize_lower(&other.to_string()),
    }
}

fn sanitize_lower(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if let Some(first) = out.chars().next() {
        if first.is_ascii_uppercase() {
            out = format!("{}{}", first.to_ascii_lowercase(), &out[1..]);
        }
    }
    out
}

/// DOT rendering of a derivation DAG (tree).
pub fn derivation_dot(d: &Derivation) -> String {
    let mut out = String::from("digraph derivation {\n  node [shape=box];\n");
    let mut counter = 0usize;
    dot_walk(d, &mut counter, &mut out);
    out.push_str("}\n");
    out
}

fn dot_walk(d: &Derivation, counter: &mut usize, out: &mut String) -> usize {
    let id = *counter;
    *counter += 1;
    let label = format!("{} [{}]", d.sequent, rule_name(&d.rule))
        .replace('\\', "\\\\")
        .replace('"', "\\\"");
    out.push_str(&format!("  n{} [label=\"{}\"];\n", id, label));
    for c in &d.children {
        let cid = dot_walk(c, counter, out);
        out.push_str(&format!("  n{} -> n{};\n", cid, id));
    }
    id
}

fn rule_name(r: &Rule) -> &'static str {
    match r {
        Rule::Axiom => "axiom",
        Rule::Hypothesis => "hyp",
        Rule::Taut { .. } => "taut",
        Rule::Labeled { .. } => "label",
        Rule::AndR1 { .. } => "andr1",
        Rule::AndR2 { .. } => "andr2",
        Rule::AndL { .. } => "andl",
        Rule::OrR { .. } => "orr",
        Rule::OrL1 { .. } => "orl1",
        Rule::OrL2 { .. } => "orl2",
        Rule::NegR { .. } => "negr",
        Rule::NegL { .. } => "negl",
        Rule::Res { .. } => "res",
        Rule::DefPred { .. } => "def",
        Rule::DefFun { .. } => "rw",
        Rule::GlobalRename { .. } => "rename",
    }
}

/// DOT rendering of a trace tree.
pub fn trace_dot(t: &Trace) -> String {
    let mut out = String::from("digraph trace {\n  node [shape=ellipse];\n");
    let mut counter = 0usize;
    trace_walk(t, &mut counter, &mut out);
    out.push_str("}\n");
    out
}

fn trace_walk(t: &Trace, counter: &mut usize, out: &mut String) -> usize {
    let id = *counter;
    *counter += 1;
    out.push_str(&format!("  n{} [label=\"{}\"];\n", id, t.root));
    for c in &t.children {
        let cid = trace_walk(c, counter, out);
        out.push_str(&format!("  n{} -> n{};\n", id, cid));
    }
    id
}

/// Pretty text for a sequent list.
pub fn clauses_text(clauses: &[Sequent]) -> String {
    clauses
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Indented text rendering of a derivation, premises above conclusions.
pub fn derivation_text(d: &Derivation) -> String {
    let mut out = String::new();
    fn walk(d: &Derivation, indent: usize, out: &mut String) {
        for c in &d.children {
            walk(c, indent + 1, out);
        }
        out.push_str(&"  ".repeat(indent));
        out.push_str(&format!("[{}] {}\n", rule_name(&d.rule), d.sequent));
    }
    walk(d, 0, &mut out);
    out
}
