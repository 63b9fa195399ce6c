//! Browser bindings. Every entry point returns text ready to drop into the page.

use dynmcx::qasm;
use dynmcx::resources::{analyze_result, generate_table, DepthMode, OutcomeAssumption};
use dynmcx::sim::{check_cnx_equivalence, InputSet};
use dynmcx::synth::{synthesize, Strategy, SynthesisResult};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest n the page will simulate; larger circuits take too long in a tab.
pub const MAX_VERIFY_N: usize = 6;
/// Largest n the page will synthesize.
pub const MAX_SYNTH_N: usize = 32;

fn build(n: usize, strategy: &str) -> Result<SynthesisResult, String> {
    let strategy: Strategy = strategy.parse().map_err(|e| format!("{e}"))?;
    if n > MAX_SYNTH_N {
        return Err(format!("n is limited to {MAX_SYNTH_N} here"));
    }
    if !strategy.supports(n) {
        return Err(format!("{strategy} does not support n = {n}"));
    }
    synthesize(n, strategy).map_err(|e| e.to_string())
}

/// The static versus dynamic table as an HTML-free markdown or CSV string.
pub fn table_text(n_max: usize, csv: bool) -> Result<String, String> {
    let t = generate_table(n_max).map_err(|e| e.to_string())?;
    Ok(if csv { t.to_csv() } else { t.to_markdown() })
}

#[derive(Serialize)]
struct Analysis {
    n: usize,
    strategy: Strategy,
    qubits: usize,
    static_cost: Option<[usize; 3]>,
    worst: Option<[usize; 3]>,
    best: Option<[usize; 3]>,
    gate_level_t_depth: usize,
    qasm: String,
}

/// Costs under every applicable outcome assumption, plus the circuit as QASM.
pub fn analyze_json(n: usize, strategy: &str) -> Result<String, String> {
    let r = build(n, strategy)?;
    let cost = |a| analyze_result(&r, a, DepthMode::Block).map(|x| x.cost().as_array()).map_err(|e| e.to_string());
    let (static_cost, worst, best, gate_assumption) = if r.circuit.has_measurements() {
        (
            None,
            Some(cost(Some(OutcomeAssumption::AllOnes))?),
            Some(cost(Some(OutcomeAssumption::AllZeros))?),
            Some(OutcomeAssumption::AllOnes),
        )
    } else {
        (Some(cost(None)?), None, None, None)
    };
    let gate = analyze_result(&r, gate_assumption, DepthMode::Gate).map_err(|e| e.to_string())?;
    let out = Analysis {
        n,
        strategy: r.strategy,
        qubits: r.circuit.num_qubits(),
        static_cost,
        worst,
        best,
        gate_level_t_depth: gate.t_depth,
        qasm: qasm::emit_result(&r),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Exhaustive branch simulation for small n.
pub fn verify_json(n: usize, strategy: &str) -> Result<String, String> {
    if n > MAX_VERIFY_N {
        return Err(format!("in-browser verification is limited to n <= {MAX_VERIFY_N}"));
    }
    let r = build(n, strategy)?;
    let rep = check_cnx_equivalence(&r, InputSet::ExhaustiveBasis).map_err(|e| e.to_string())?;
    serde_json::to_string(&rep).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn table(n_max: usize, csv: bool) -> Result<String, JsValue> {
    table_text(n_max, csv).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn analyze(n: usize, strategy: &str) -> Result<String, JsValue> {
    analyze_json(n, strategy).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn verify(n: usize, strategy: &str) -> Result<String, JsValue> {
    verify_json(n, strategy).map_err(|e| JsValue::from_str(&e))
}
