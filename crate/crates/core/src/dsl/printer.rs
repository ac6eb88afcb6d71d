//! Printer producing the concrete syntax the parser reads back. Round-trip
//! is part of the contract: `parse(print(p))` reproduces the problem file.

use super::ProblemFile;
use crate::callgraph::{CallGraph, Flow, Junction, PointOrder};
use crate::formula::Formula;
use crate::iota::{DefArg, IotaTerm};
use crate::numeric::{Guard, GuardAtom, NumericTerm};
use crate::proof_schema::ProofSchema;
use crate::rpl0::{DefDir, Derivation, Rule, Sequent, Side};
use crate::signature::{PredBody, Signature};
use crate::ssubst::SSubstitution;
use std::collections::BTreeMap;
use std::fmt::Write;

pub fn print_problem(p: &ProblemFile) -> String {
    let mut out = String::new();
    print_signature(&p.signature, &mut out);
    print_definitions(&p.signature, &mut out);
    for (name, f) in &p.formulas {
        let _ = writeln!(out, "formula {} = {}", name, fmt_formula(f));
    }
    for s in &p.schemas {
        print_schema(s, &mut out);
    }
    for g in &p.graphs {
        print_graph(g, &mut out);
    }
    out
}

fn print_signature(sig: &Signature, out: &mut String) {
    let _ = writeln!(out, "signature {{");
    if !sig.params.is_empty() {
        let names: Vec<&str> = sig.params.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "  param {}", names.join(" "));
    }
    if !sig.consts.is_empty() {
        let names: Vec<&str> = sig.consts.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "  const {}", names.join(" "));
    }
    for (name, arity) in &sig.funcs {
        let _ = writeln!(out, "  func {} {}", name, arity);
    }
    for (name, arity) in &sig.preds {
        let _ = writeln!(out, "  pred {} {}", name, arity);
    }
    for (name, arity) in &sig.gvars {
        let _ = writeln!(out, "  gvar {} {}", name, arity);
    }
    if !sig.fvars.is_empty() {
        let names: Vec<&str> = sig.fvars.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "  fvar {}", names.join(" "));
    }
    for (name, params) in &sig.proof_params {
        let _ = writeln!(out, "  proofsym {} ({})", name, params.join(", "));
    }
    for (a, b) in &sig.order_f {
        let _ = writeln!(out, "  orderf {} < {}", a, b);
    }
    for (a, b) in &sig.order_p {
        let _ = writeln!(out, "  orderp {} < {}", a, b);
    }
    let _ = writeln!(out, "}}");
}

fn print_definitions(sig: &Signature, out: &mut String) {
    // Definitions must respect the precedence; smaller symbols first.
    let mut fnames: Vec<&String> = sig.numeric_defs.keys().collect();
    fnames.sort_by_key(|n| precedence_rank(n, &sig.order_f));
    for name in fnames {
        let def = &sig.numeric_defs[name];
        let _ = writeln!(
            out,
            "define numeric {}({}) rec {} {{",
            name,
            def.params.join(", "),
            def.rec_param
        );
        let _ = writeln!(out, "  base {}", fmt_omega(&def.base));
        let _ = writeln!(out, "  step {}", fmt_omega(&def.step));
        let _ = writeln!(out, "}}");
    }
    let mut inames: Vec<&String> = sig.iota_defs.keys().collect();
    inames.sort_by_key(|n| precedence_rank(n, &sig.order_f));
    for name in inames {
        let def = &sig.iota_defs[name];
        let mut sig_parts: Vec<String> = def
            .formals
            .iter()
            .map(|f| format!("{}:{}", f.name, f.arity))
            .collect();
        let mut head = sig_parts.join(", ");
        if !def.params.is_empty() {
            sig_parts = def.params.clone();
            head = format!("{}; {}", head, sig_parts.join(", "));
        }
        let _ = writeln!(out, "define iota {}({}) rec {} {{", name, head, def.rec_param);
        let _ = writeln!(out, "  base {}", fmt_iota(&def.base));
        let _ = writeln!(out, "  step {}", fmt_iota(&def.step));
        let _ = writeln!(out, "}}");
    }
    let mut pnames: Vec<&String> = sig.pred_defs.keys().collect();
    pnames.sort_by_key(|n| precedence_rank(n, &sig.order_p));
    for name in pnames {
        let def = &sig.pred_defs[name];
        let formals: Vec<String> = def
            .formals
            .iter()
            .map(|f| format!("{}:{}", f.name, f.arity))
            .collect();
        let mut head = formals.join(", ");
        if !def.params.is_empty() {
            head = format!("{}; {}", head, def.params.join(", "));
        }
        match &def.body {
            PredBody::Recursive {
                rec_param,
                base,
                step,
            } => {
                let _ = writeln!(out, "define pred {}({}) rec {} {{", name, head, rec_param);
                let _ = writeln!(out, "  base {}", fmt_formula(base));
                let _ = writeln!(out, "  step {}", fmt_formula(step));
                let _ = writeln!(out, "}}");
            }
            PredBody::Flat { last_param, rhs } => {
                let _ = writeln!(out, "define pred {}({}) flat {} {{", name, head, last_param);
                let _ = writeln!(out, "  rhs {}", fmt_formula(rhs));
                let _ = writeln!(out, "}}");
            }
        }
    }
}

/// Rank for topological printing: number of symbols strictly below.
fn precedence_rank(name: &str, edges: &[(String, String)]) -> usize {
    let mut rank = 0;
    let mut frontier = vec![name.to_string()];
    let mut seen = vec![name.to_string()];
    while let Some(cur) = frontier.pop() {
        for (a, b) in edges {
            if *b == cur && !seen.contains(a) {
                seen.push(a.clone());
                frontier.push(a.clone());
                rank += 1;
            }
        }
    }
    rank
}

pub fn fmt_omega(t: &NumericTerm) -> String {
    match t.as_numeral() {
        Some(n) => n.to_string(),
        None => match t {
            NumericTerm::Zero => "0".into(),
            NumericTerm::Succ(u) => format!("s({})", fmt_omega(u)),
            NumericTerm::Param(p) => p.clone(),
            NumericTerm::DefApp(f, args) => {
                let parts: Vec<String> = args.iter().map(fmt_omega).collect();
                format!("{}({})", f, parts.join(", "))
            }
            NumericTerm::Rec => "rec".into(),
        },
    }
}

pub fn fmt_iota(t: &IotaTerm) -> String {
    match t {
        IotaTerm::Const(c) => c.clone(),
        IotaTerm::VTerm(x, args) => {
            if args.is_empty() {
                x.clone()
            } else {
                let parts: Vec<String> = args.iter().map(fmt_omega).collect();
                format!("{}({})", x, parts.join(", "))
            }
        }
        IotaTerm::FunApp(f, args) => {
            let parts: Vec<String> = args.iter().map(fmt_iota).collect();
            format!("{}({})", f, parts.join(", "))
        }
        IotaTerm::DefApp {
            sym,
            args,
            omega_args,
        } => {
            let mut parts: Vec<String> = args
                .iter()
                .map(|a| match a {
                    DefArg::Gvar(g) => g.clone(),
                    DefArg::Term(u) => fmt_iota(u),
                })
                .collect();
            parts.extend(omega_args.iter().map(fmt_omega));
            format!("{}({})", sym, parts.join(", "))
        }
        IotaTerm::Rec(shift) => {
            if shift.is_empty() {
                "rec".into()
            } else {
                let parts: Vec<String> = shift.iter().map(fmt_omega).collect();
                format!("rec({})", parts.join(", "))
            }
        }
    }
}

pub fn fmt_formula(f: &Formula) -> String {
    match f {
        Formula::Or(a, b) => format!("{} | {}", fmt_formula(a), fmt_or_operand(b)),
        _ => fmt_or_operand(f),
    }
}

fn fmt_or_operand(f: &Formula) -> String {
    match f {
        Formula::Or(..) => format!("({})", fmt_formula(f)),
        Formula::And(a, b) => format!("{} & {}", fmt_and_operand(a), fmt_and_operand(b)),
        _ => fmt_and_operand(f),
    }
}

fn fmt_and_operand(f: &Formula) -> String {
    match f {
        Formula::Or(..) | Formula::And(..) => format!("({})", fmt_formula(f)),
        Formula::Not(g) => format!("!{}", fmt_and_operand(g)),
        Formula::FormulaVar(x) => x.clone(),
        Formula::Rec => "rec".into(),
        Formula::Atom(p, args) => {
            let parts: Vec<String> = args.iter().map(fmt_iota).collect();
            format!("{}({})", p, parts.join(", "))
        }
        Formula::DefAtom {
            sym,
            gvars,
            omega_args,
        } => {
            let mut parts: Vec<String> = gvars.clone();
            parts.extend(omega_args.iter().map(fmt_omega));
            format!("{}({})", sym, parts.join(", "))
        }
    }
}

pub fn fmt_sequent(s: &Sequent) -> String {
    let ante: Vec<String> = s.ante.iter().map(fmt_formula).collect();
    let succ: Vec<String> = s.succ.iter().map(fmt_formula).collect();
    format!("{} |- {}", ante.join(", "), succ.join(", "))
        .trim()
        .to_string()
}

pub fn fmt_guard(g: &Guard) -> String {
    if g.atoms.is_empty() {
        return "true".into();
    }
    let parts: Vec<String> = g
        .atoms
        .iter()
        .map(|a| match a {
            GuardAtom::Eq(p, c) => format!("{} = {}", p, c),
            GuardAtom::Gt(p, c) => format!("{} > {}", p, c),
        })
        .collect();
    parts.join(" /\\ ")
}

pub fn fmt_ssubst(theta: &SSubstitution) -> String {
    let parts: Vec<String> = theta
        .pairs
        .iter()
        .map(|(d, r)| format!("{} <- {}", fmt_iota(d), fmt_iota(r)))
        .collect();
    format!("{{ {} }}", parts.join(", "))
}

fn fmt_param_subst(map: &BTreeMap<String, NumericTerm>) -> String {
    let parts: Vec<String> = map
        .iter()
        .map(|(p, t)| format!("{} <- {}", p, fmt_omega(t)))
        .collect();
    format!("{{ {} }}", parts.join(", "))
}

fn fmt_rename_map(map: &BTreeMap<String, String>) -> String {
    let parts: Vec<String> = map
        .iter()
        .map(|(a, b)| format!("{} -> {}", a, b))
        .collect();
    format!("{{ {} }}", parts.join(", "))
}

fn print_schema(s: &ProofSchema, out: &mut String) {
    let _ = writeln!(
        out,
        "schema {} main {} top {} {{",
        s.name, s.main, s.top_symbol
    );
    for comp in s.components.values() {
        let _ = writeln!(
            out,
            "  component {} ({}) ends {} {{",
            comp.sym,
            comp.params.join(", "),
            fmt_sequent(&comp.end_sequent)
        );
        for cell in &comp.cells {
            let _ = writeln!(out, "    cell {} {{", fmt_guard(&cell.guard));
            let mut counter = 0usize;
            let root = print_derivation(&cell.derivation, out, &mut counter);
            let _ = writeln!(out, "      conclude {}", root);
            let _ = writeln!(out, "    }}");
        }
        let _ = writeln!(out, "  }}");
    }
    let _ = writeln!(out, "}}");
}

/// Post-order printing of a derivation tree as named inference lines.
/// Returns the name of the line holding the root.
fn print_derivation(d: &Derivation, out: &mut String, counter: &mut usize) -> String {
    let children: Vec<String> = d
        .children
        .iter()
        .map(|c| print_derivation(c, out, counter))
        .collect();
    *counter += 1;
    let name = format!("l{}", counter);
    let rule = fmt_rule(&d.rule, &children);
    let _ = writeln!(out, "      {} = {} : {}", name, rule, fmt_sequent(&d.sequent));
    name
}

fn fmt_rule(rule: &Rule, children: &[String]) -> String {
    let prems = format!("({})", children.join(", "));
    match rule {
        Rule::Axiom => "axiom".into(),
        Rule::Hypothesis => "hyp".into(),
        Rule::Labeled { sym, subst } => format!("label {} {}", sym, fmt_param_subst(subst)),
        Rule::Taut { id, xi1, xi2 } => {
            let mut inner = fmt_formula(xi1);
            if let Some(x2) = xi2 {
                inner = format!("{}, {}", inner, fmt_formula(x2));
            }
            format!("taut {} [{}]", id.name(), inner)
        }
        Rule::AndR1 { pos } => format!("andr1@{} {}", pos, prems),
        Rule::AndR2 { pos } => format!("andr2@{} {}", pos, prems),
        Rule::AndL { pos } => format!("andl@{} {}", pos, prems),
        Rule::OrR { pos } => format!("orr@{} {}", pos, prems),
        Rule::OrL1 { pos } => format!("orl1@{} {}", pos, prems),
        Rule::OrL2 { pos } => format!("orl2@{} {}", pos, prems),
        Rule::NegR { pos } => format!("negr@{} {}", pos, prems),
        Rule::NegL { pos } => format!("negl@{} {}", pos, prems),
        Rule::Res {
            theta,
            left_atoms,
            right_atoms,
        } => {
            let li: Vec<String> = left_atoms.iter().map(|i| i.to_string()).collect();
            let ri: Vec<String> = right_atoms.iter().map(|i| i.to_string()).collect();
            format!(
                "res {} [{}] [{}] {}",
                fmt_ssubst(theta),
                li.join(", "),
                ri.join(", "),
                prems
            )
        }
        Rule::DefPred {
            sym,
            side,
            pos,
            dir,
        } => {
            let tag = match side {
                Side::Right => "defr",
                Side::Left => "defl",
            };
            let plus = match dir {
                DefDir::Elim => "",
                DefDir::Intro => " +",
            };
            format!("{} {}{}@{} {}", tag, sym, plus, pos, prems)
        }
        Rule::DefFun {
            sym,
            side,
            pos,
            dir,
        } => {
            let tag = match side {
                Side::Right => "rwr",
                Side::Left => "rwl",
            };
            let plus = match dir {
                DefDir::Elim => "",
                DefDir::Intro => " +",
            };
            format!("{} {}{}@{} {}", tag, sym, plus, pos, prems)
        }
        Rule::GlobalRename { map } => format!("rename {} {}", fmt_rename_map(map), prems),
    }
}

fn print_graph(g: &CallGraph, out: &mut String) {
    let order = match g.order {
        PointOrder::Lex => "lex",
        PointOrder::RevLex => "revlex",
    };
    let _ = writeln!(out, "graph {} order {} {{", g.name, order);
    for flow in &g.flows {
        print_flow(flow, out);
    }
    let _ = writeln!(out, "}}");
}

fn print_flow(f: &Flow, out: &mut String) {
    let _ = writeln!(
        out,
        "  flow {} source {} {{",
        f.name,
        fmt_junction(&f.source)
    );
    for cell in &f.cells {
        let _ = writeln!(out, "    cell {} {{", fmt_guard(&cell.guard));
        for j in &cell.junctions {
            if *j == f.source {
                continue;
            }
            let _ = writeln!(out, "      {}", fmt_junction(j));
        }
        let _ = writeln!(out, "    }}");
    }
    let _ = writeln!(out, "  }}");
}

pub fn fmt_junction(j: &Junction) -> String {
    let parts: Vec<String> = j.point.iter().map(fmt_omega).collect();
    format!("({}; {})", j.sym, parts.join(", "))
}
