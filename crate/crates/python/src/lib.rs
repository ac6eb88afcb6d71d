//! Python bindings: load problem files, evaluate terms and formulas,
//! normalize schemata, compute traces, and run the refuter.

#![allow(clippy::useless_conversion)] // pyo3 macro expansion

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use srk_core::dsl;
use srk_core::formula::{count_distinct_variables, eval_formula};
use srk_core::numeric::{normalize_omega, ParameterAssignment};
use srk_core::proof_schema;
use srk_core::rpl0::{refute_formula, RefuteLimits, RefuteResult};
use srk_core::ssubst::{self, UnifierVerdict};

fn to_assignment(at: Vec<(String, usize)>) -> ParameterAssignment {
    let mut sigma = ParameterAssignment::new();
    for (k, v) in at {
        sigma.set(&k, v);
    }
    sigma
}

/// A parsed problem file.
#[pyclass]
struct Problem {
    inner: dsl::ProblemFile,
}

#[pymethods]
impl Problem {
    /// Parse a problem file from text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Problem> {
        dsl::parse(text)
            .map(|inner| Problem { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Parse a problem file from a path.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Problem> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("{}: {}", path, e)))?;
        Problem::parse(&text)
    }

    /// Signature and schema validation findings; empty for a valid file.
    fn check(&self) -> Vec<String> {
        let mut report: Vec<String> = self
            .inner
            .signature
            .validate()
            .into_iter()
            .map(|e| e.to_string())
            .collect();
        for schema in &self.inner.schemas {
            report.extend(
                proof_schema::validate_schema(schema, &self.inner.signature)
                    .into_iter()
                    .map(|e| e.to_string()),
            );
        }
        for graph in &self.inner.graphs {
            if let Err(e) =
                srk_core::callgraph::validate_call_graph(graph, 4, &self.inner.signature)
            {
                report.push(e.to_string());
            }
        }
        report
    }

    /// Normalize an omega term given in surface syntax, e.g. "fhat(2, 3)".
    #[pyo3(signature = (term, at = vec![]))]
    fn eval_omega(&self, term: &str, at: Vec<(String, usize)>) -> PyResult<usize> {
        let wrapped = format!("X__om({})", term);
        let parsed = dsl::parse_term_text(&wrapped, &self.inner.signature)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let srk_core::iota::IotaTerm::VTerm(_, args) = parsed else {
            return Err(PyValueError::new_err("not an omega term"));
        };
        if args.len() != 1 {
            return Err(PyValueError::new_err("expected one omega term"));
        }
        let sigma = to_assignment(at);
        normalize_omega(&args[0], &sigma, &self.inner.signature)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Evaluate an iota term to its ordinary first-order form, rendered in
    /// the surface syntax.
    #[pyo3(signature = (term, at = vec![]))]
    fn eval_term(&self, term: &str, at: Vec<(String, usize)>) -> PyResult<String> {
        let parsed = dsl::parse_term_text(term, &self.inner.signature)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let sigma = to_assignment(at);
        srk_core::iota::eval_iota(&parsed, &sigma, &self.inner.signature)
            .map(|t| t.to_string())
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Evaluate a named formula schema at an assignment; returns the ground
    /// formula rendered as text.
    #[pyo3(signature = (name, at = vec![]))]
    fn instantiate(&self, name: &str, at: Vec<(String, usize)>) -> PyResult<String> {
        let f = self
            .inner
            .formula(name)
            .ok_or_else(|| PyValueError::new_err(format!("no formula named {}", name)))?;
        let sigma = to_assignment(at);
        eval_formula(f, &sigma, &self.inner.signature)
            .map(|g| g.to_string())
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Distinct individual variables of a named formula at an assignment.
    #[pyo3(signature = (name, at = vec![]))]
    fn distinct_variables(&self, name: &str, at: Vec<(String, usize)>) -> PyResult<usize> {
        let f = self
            .inner
            .formula(name)
            .ok_or_else(|| PyValueError::new_err(format!("no formula named {}", name)))?;
        let sigma = to_assignment(at);
        eval_formula(f, &sigma, &self.inner.signature)
            .map(|g| count_distinct_variables(&g))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Evaluate the first schema at its main symbol; returns the instance
    /// derivation as JSON after checking it ends in the empty sequent.
    #[pyo3(signature = (at = vec![], step_cap = 1_000_000))]
    fn normalize(&self, at: Vec<(String, usize)>, step_cap: usize) -> PyResult<String> {
        let schema = self
            .inner
            .schemas
            .first()
            .ok_or_else(|| PyValueError::new_err("no schema in this problem"))?;
        let sigma = to_assignment(at);
        let d = proof_schema::evaluate(
            schema,
            &schema.main,
            &sigma,
            step_cap,
            &self.inner.signature,
        )
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        proof_schema::check_refutation_instance(&d, schema, &self.inner.signature)
            .map_err(PyRuntimeError::new_err)?;
        Ok(srk_core::export::derivation_json(&d).to_string())
    }

    /// Refute a named formula instance; returns the number of derivation
    /// nodes, or None when the clause set saturates.
    #[pyo3(signature = (name, at = vec![], max_steps = 100_000))]
    fn refute(
        &self,
        name: &str,
        at: Vec<(String, usize)>,
        max_steps: usize,
    ) -> PyResult<Option<usize>> {
        let f = self
            .inner
            .formula(name)
            .ok_or_else(|| PyValueError::new_err(format!("no formula named {}", name)))?;
        let sigma = to_assignment(at);
        let ground = eval_formula(f, &sigma, &self.inner.signature)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let limits = RefuteLimits {
            max_steps,
            ..Default::default()
        };
        match refute_formula(&ground, limits, &self.inner.signature).0 {
            RefuteResult::Refutation(d) => Ok(Some(d.size())),
            RefuteResult::Saturated => Ok(None),
            RefuteResult::Exhausted => Err(PyRuntimeError::new_err("resource limits exhausted")),
        }
    }

    /// Compute a trace of the named graph's flow; returns the concrete
    /// junctions of the leftmost chain.
    #[pyo3(signature = (graph, flow, at = vec![]))]
    fn trace_sink(
        &self,
        graph: &str,
        flow: &str,
        at: Vec<(String, usize)>,
    ) -> PyResult<(usize, usize, String)> {
        let g = self
            .inner
            .graph(graph)
            .ok_or_else(|| PyValueError::new_err(format!("no graph named {}", graph)))?;
        let fl = g
            .flow_named(flow)
            .ok_or_else(|| PyValueError::new_err(format!("no flow named {}", flow)))?;
        let sigma = to_assignment(at);
        let t = srk_core::callgraph::trace(g, fl, &sigma, 1_000_000, &self.inner.signature)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let stats = srk_core::callgraph::trace_stats(&t);
        Ok((stats.size, stats.depth, stats.sink.to_string()))
    }

    /// Verify a candidate s-unifier given in surface syntax. Returns
    /// "verified", "unknown", or the counterexample assignment.
    #[pyo3(signature = (theta, t1, t2, bound = 4))]
    fn verify_unifier(
        &self,
        theta: &str,
        t1: &str,
        t2: &str,
        bound: usize,
    ) -> PyResult<String> {
        let theta = dsl::parse_ssubst_text(theta, &self.inner.signature)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let t1 = dsl::parse_term_text(t1, &self.inner.signature)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let t2 = dsl::parse_term_text(t2, &self.inner.signature)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        match ssubst::verify_sunifier(&theta, &t1, &t2, bound, &self.inner.signature) {
            Ok(UnifierVerdict::Verified) => Ok("verified".into()),
            Ok(UnifierVerdict::Unknown) => Ok("unknown".into()),
            Ok(UnifierVerdict::CounterexampleAt(sigma)) => Ok(format!("counterexample {}", sigma)),
            Err(e) => Err(PyValueError::new_err(e.to_string())),
        }
    }

    /// Round-trip the problem through the printer.
    fn pretty(&self) -> String {
        dsl::print_problem(&self.inner)
    }
}

#[pymodule]
fn srk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    Ok(())
}
