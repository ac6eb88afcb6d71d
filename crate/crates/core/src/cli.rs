//! Command-line surface: check, instantiate, normalize, trace, refute,
//! verify-unifier, and the best-effort suggest commands.
//!
//! Exit codes: 0 success, 1 check failure, 2 parse error, 3 resource
//! exhaustion.

use crate::callgraph::{trace, trace_stats, validate_call_graph};
use crate::dsl::{self, ProblemFile};
use crate::export;
use crate::formula::{count_distinct_variables, eval_formula};
use crate::numeric::{NumericTerm, ParameterAssignment};
use crate::proof_schema::{self, check_refutation_instance};
use crate::rpl0::{refute_formula, RefuteLimits, RefuteResult};
use crate::ssubst::{suggest_unifier, verify_sunifier, UnifierVerdict};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "srk", about = "schematic refutation kit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem file
    file: String,
    /// Parameter assignment, e.g. n=2,m=1
    #[arg(long = "at", value_parser = parse_assignment)]
    at: Option<ParameterAssignment>,
    /// Print numerals as s(...s(0)...) instead of num:k
    #[arg(long)]
    succ_numerals: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate everything in the file
    Check {
        file: String,
        /// Accept user-declared tautology leaves when propositionally valid
        #[arg(long)]
        allow_extra_tautologies: bool,
    },
    /// Evaluate a formula schema at an assignment
    Instantiate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        formula: String,
        /// Output format: text, json, or tptp
        #[arg(long, default_value = "text")]
        emit: String,
    },
    /// Evaluate a proof schema at an assignment and check the result
    Normalize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        schema: Option<String>,
        #[arg(long, default_value = "text")]
        emit: String,
    },
    /// Compute a call-graph trace
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        graph: Option<String>,
        #[arg(long)]
        flow: Option<String>,
        #[arg(long, default_value = "text")]
        emit: String,
    },
    /// Refute a formula instance by saturation
    Refute {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        #[arg(long, default_value = "text")]
        emit: String,
    },
    /// Verify a candidate s-unifier of two terms
    VerifyUnifier {
        file: String,
        /// The substitution, in problem-file syntax
        #[arg(long)]
        theta: String,
        /// The two terms
        #[arg(long, num_args = 2)]
        terms: Vec<String>,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Best-effort search for an s-unifier of two terms
    SuggestUnifier {
        file: String,
        #[arg(long, num_args = 2)]
        terms: Vec<String>,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Best-effort call graph read off a schema's labels
    SuggestGraph {
        file: String,
        #[arg(long)]
        schema: Option<String>,
    },
}

fn parse_assignment(s: &str) -> Result<ParameterAssignment, String> {
    let mut sigma = ParameterAssignment::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, got {}", part))?;
        let value: usize = v
            .trim()
            .parse()
            .map_err(|_| format!("bad value in {}", part))?;
        sigma.set(k.trim(), value);
    }
    Ok(sigma)
}

fn sampling_bound(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| {
            std::env::var("SRK_BOUND")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(4)
}

fn load(path: &str) -> Result<ProblemFile, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {}", path, e);
            return Err(2);
        }
    };
    match dsl::parse(&text) {
        Ok(p) => Ok(p),
        Err(e) => {
            eprintln!("{}: {}", path, e);
            Err(2)
        }
    }
}

fn render_numeral(n: usize, succ: bool) -> String {
    if succ {
        let mut s = "0".to_string();
        for _ in 0..n {
            s = format!("s({})", s);
        }
        s
    } else {
        format!("num:{}", n)
    }
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

fn run(cli: Cli) -> Result<(), i32> {
    match cli.command {
        Command::Check {
            file,
            allow_extra_tautologies,
        } => {
            let p = load(&file)?;
            let mut failures = 0usize;
            for e in p.signature.validate() {
                eprintln!("signature: {}", e);
                failures += 1;
            }
            for schema in &p.schemas {
                for e in proof_schema::validate_schema_ext(
                    schema,
                    &p.signature,
                    allow_extra_tautologies,
                ) {
                    eprintln!("schema {}: {}", schema.name, e);
                    failures += 1;
                }
            }
            let bound = sampling_bound(None);
            for g in &p.graphs {
                if let Err(e) = validate_call_graph(g, bound, &p.signature) {
                    eprintln!("graph {}: {}", g.name, e);
                    failures += 1;
                }
                // Cross-check schema/graph well-formedness when both exist.
                for schema in &p.schemas {
                    if g.flows.len() == schema.components.len()
                        && !proof_schema::well_formed(g, schema, bound.min(3), &p.signature)
                    {
                        eprintln!(
                            "graph {} does not model schema {}",
                            g.name, schema.name
                        );
                        failures += 1;
                    }
                }
            }
            if failures == 0 {
                println!("ok");
                Ok(())
            } else {
                Err(1)
            }
        }
        Command::Instantiate {
            common,
            formula,
            emit,
        } => {
            let p = load(&common.file)?;
            let f = p.formula(&formula).ok_or_else(|| {
                eprintln!("no formula named {}", formula);
                1
            })?;
            let sigma = common.at.clone().unwrap_or_default();
            let ground = eval_formula(f, &sigma, &p.signature).map_err(|e| {
                eprintln!("evaluation failed: {}", e);
                1
            })?;
            match emit.as_str() {
                "json" => println!(
                    "{}",
                    serde_json::to_string_pretty(&export::formula_json(&ground)).unwrap()
                ),
                "tptp" => println!("{}", export::formula_tptp(&formula, &ground)),
                _ => {
                    println!("{}", ground);
                    println!(
                        "distinct variables: {}",
                        render_numeral(count_distinct_variables(&ground), common.succ_numerals)
                    );
                }
            }
            Ok(())
        }
        Command::Normalize {
            common,
            schema,
            emit,
        } => {
            let p = load(&common.file)?;
            let s = match schema {
                Some(name) => p.schema(&name),
                None => p.schemas.first(),
            }
            .ok_or_else(|| {
                eprintln!("no schema found");
                1
            })?;
            let sigma = common.at.clone().unwrap_or_default();
            let d = proof_schema::evaluate(s, &s.main, &sigma, 1_000_000, &p.signature)
                .map_err(|e| {
                    eprintln!("evaluation failed: {}", e);
                    3
                })?;
            check_refutation_instance(&d, s, &p.signature).map_err(|e| {
                eprintln!("instance check failed: {}", e);
                1
            })?;
            match emit.as_str() {
                "json" => println!(
                    "{}",
                    serde_json::to_string_pretty(&export::derivation_json(&d)).unwrap()
                ),
                "dot" => println!("{}", export::derivation_dot(&d)),
                _ => {
                    print!("{}", export::derivation_text(&d));
                    println!(
                        "derivation with {} nodes ending in the empty sequent",
                        d.size()
                    );
                }
            }
            Ok(())
        }
        Command::Trace {
            common,
            graph,
            flow,
            emit,
        } => {
            let p = load(&common.file)?;
            let g = match graph {
                Some(name) => p.graph(&name),
                None => p.graphs.first(),
            }
            .ok_or_else(|| {
                eprintln!("no graph found");
                1
            })?;
            let fl = match flow {
                Some(name) => g.flow_named(&name),
                None => g.flows.first(),
            }
            .ok_or_else(|| {
                eprintln!("no flow found");
                1
            })?;
            let sigma = common.at.clone().unwrap_or_default();
            let t = trace(g, fl, &sigma, 1_000_000, &p.signature).map_err(|e| {
                eprintln!("trace failed: {}", e);
                3
            })?;
            match emit.as_str() {
                "json" => println!(
                    "{}",
                    serde_json::to_string_pretty(&export::trace_json(&t)).unwrap()
                ),
                "dot" => println!("{}", export::trace_dot(&t)),
                _ => {
                    let mut text = String::new();
                    t.render_text(0, &mut text);
                    print!("{}", text);
                    let stats = trace_stats(&t);
                    println!(
                        "size {} depth {} sink {}",
                        render_numeral(stats.size, common.succ_numerals),
                        render_numeral(stats.depth, common.succ_numerals),
                        stats.sink
                    );
                }
            }
            Ok(())
        }
        Command::Refute {
            common,
            formula,
            max_steps,
            emit,
        } => {
            let p = load(&common.file)?;
            let f = p.formula(&formula).ok_or_else(|| {
                eprintln!("no formula named {}", formula);
                1
            })?;
            let sigma = common.at.clone().unwrap_or_default();
            let ground = eval_formula(f, &sigma, &p.signature).map_err(|e| {
                eprintln!("evaluation failed: {}", e);
                1
            })?;
            let limits = RefuteLimits {
                max_steps,
                ..Default::default()
            };
            let (result, clauses) = refute_formula(&ground, limits, &p.signature);
            match result {
                RefuteResult::Refutation(d) => {
                    match emit.as_str() {
                        "json" => println!(
                            "{}",
                            serde_json::to_string_pretty(&export::derivation_json(&d)).unwrap()
                        ),
                        "dot" => println!("{}", export::derivation_dot(&d)),
                        _ => println!(
                            "refuted: {} clauses, derivation of {} nodes",
                            clauses.len(),
                            d.size()
                        ),
                    }
                    Ok(())
                }
                RefuteResult::Saturated => {
                    println!("saturated without the empty sequent (consistent)");
                    Err(1)
                }
                RefuteResult::Exhausted => {
                    println!("exhausted resource limits");
                    Err(3)
                }
            }
        }
        Command::VerifyUnifier {
            file,
            theta,
            terms,
            bound,
        } => {
            let p = load(&file)?;
            let theta = dsl::parse_ssubst_text(&theta, &p.signature).map_err(|e| {
                eprintln!("theta: {}", e);
                2
            })?;
            let t1 = dsl::parse_term_text(&terms[0], &p.signature).map_err(|e| {
                eprintln!("term 1: {}", e);
                2
            })?;
            let t2 = dsl::parse_term_text(&terms[1], &p.signature).map_err(|e| {
                eprintln!("term 2: {}", e);
                2
            })?;
            let b = sampling_bound(bound);
            match verify_sunifier(&theta, &t1, &t2, b, &p.signature) {
                Ok(UnifierVerdict::Verified) => {
                    println!("verified (bound {})", b);
                    Ok(())
                }
                Ok(UnifierVerdict::CounterexampleAt(sigma)) => {
                    println!("counterexample at {}", sigma);
                    Err(1)
                }
                Ok(UnifierVerdict::Unknown) => {
                    println!("unknown: bounded check passed, symbolic pass inapplicable");
                    Ok(())
                }
                Err(e) => {
                    eprintln!("invalid substitution: {}", e);
                    Err(1)
                }
            }
        }
        Command::SuggestUnifier { file, terms, bound } => {
            let p = load(&file)?;
            let t1 = dsl::parse_term_text(&terms[0], &p.signature).map_err(|e| {
                eprintln!("term 1: {}", e);
                2
            })?;
            let t2 = dsl::parse_term_text(&terms[1], &p.signature).map_err(|e| {
                eprintln!("term 2: {}", e);
                2
            })?;
            let b = sampling_bound(bound);
            match suggest_unifier(&t1, &t2, b, &p.signature) {
                Some(theta) => println!("candidate (best-effort): {}", theta),
                None => println!("no candidate found (best-effort)"),
            }
            Ok(())
        }
        Command::SuggestGraph { file, schema } => {
            let p = load(&file)?;
            let s = match schema {
                Some(name) => p.schema(&name),
                None => p.schemas.first(),
            }
            .ok_or_else(|| {
                eprintln!("no schema found");
                1
            })?;
            let g = proof_schema::suggest_graph(s, crate::callgraph::PointOrder::Lex);
            let pf = ProblemFile {
                signature: p.signature.clone(),
                formulas: vec![],
                schemas: vec![],
                graphs: vec![g],
            };
            // print only the graph section
            let text = dsl::print_problem(&pf);
            if let Some(idx) = text.find("graph ") {
                print!("{}", &text[idx..]);
            }
            Ok(())
        }
    }
}

/// Render a numeric term per the chosen numeral style (used by tests).
pub fn render_term(t: &NumericTerm, succ: bool) -> String {
    match t.as_numeral() {
        Some(n) => render_numeral(n, succ),
        None => t.to_string(),
    }
}
