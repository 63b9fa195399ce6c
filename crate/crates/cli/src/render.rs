//! Text renderings of reports.

use std::fmt::Write as _;

use anyhow::Result;
use dynmcx::blocks::{BlockReport, Certificate};
use dynmcx::resources::{analyze_result, DepthMode, OutcomeAssumption, ResourceReport};
use dynmcx::sim::EquivalenceReport;
use dynmcx::synth::{ComputePlan, SynthesisResult};
use dynmcx::BlockKind;
use serde::Serialize;

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct SynthMetadata<'a> {
    n: usize,
    strategy: String,
    qubits: usize,
    clbits: usize,
    ancillas: Vec<usize>,
    /// (ancilla, measurement bit) pairs.
    clbit_map: Vec<(usize, usize)>,
    instructions: usize,
    plan: &'a ComputePlan,
    resources: Vec<ResourceReport>,
}

impl<'a> SynthMetadata<'a> {
    pub fn new(result: &'a SynthesisResult) -> Result<Self> {
        let assumptions: &[Option<OutcomeAssumption>] = if result.circuit.has_measurements() {
            &[Some(OutcomeAssumption::AllOnes), Some(OutcomeAssumption::AllZeros)]
        } else {
            &[None]
        };
        let resources = assumptions
            .iter()
            .map(|&a| analyze_result(result, a, DepthMode::Block))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SynthMetadata {
            n: result.n,
            strategy: result.strategy.to_string(),
            qubits: result.circuit.num_qubits(),
            clbits: result.circuit.num_clbits(),
            ancillas: result.ancillas.iter().map(|q| q.0).collect(),
            clbit_map: result.clbit_map.iter().map(|(q, c)| (q.0, c.0)).collect(),
            instructions: result.circuit.len(),
            plan: &result.plan,
            resources,
        })
    }
}

fn case_label(report: &ResourceReport) -> &'static str {
    match report.case.assumption() {
        None => "static",
        Some(OutcomeAssumption::AllOnes) => "worst (all outcomes 1)",
        Some(OutcomeAssumption::AllZeros) => "best (all outcomes 0)",
    }
}

pub fn report_markdown(result: &SynthesisResult, r: &ResourceReport, mode: DepthMode) -> String {
    let depth = match mode {
        DepthMode::Block => "block",
        DepthMode::Gate => "gate",
    };
    let mut s = String::new();
    writeln!(s, "# C{}X, {}", result.n, result.strategy).unwrap();
    writeln!(s).unwrap();
    writeln!(s, "| quantity | value |").unwrap();
    writeln!(s, "|---|---|").unwrap();
    let depth_label = format!("t-depth ({depth})");
    let rows: [(&str, String); 9] = [
        ("case", case_label(r).to_string()),
        ("cx", r.cx_count.to_string()),
        ("t", r.t_count.to_string()),
        (&depth_label, r.t_depth.to_string()),
        ("ancillas", r.ancillas.to_string()),
        ("measurements", r.measurements.to_string()),
        ("conditional gates", r.conditional_gates.to_string()),
        ("unconditional cx/t/td", r.static_part.to_string()),
        ("conditional cx/t/td", r.dynamic_part.to_string()),
    ];
    for (k, v) in rows {
        writeln!(s, "| {k} | {v} |").unwrap();
    }
    s
}

pub fn report_csv(result: &SynthesisResult, r: &ResourceReport) -> String {
    let mut s = String::from("n,strategy,case,cx,t,t_depth,ancillas,measurements,conditional_gates\n");
    let case = match r.case.assumption() {
        None => "static",
        Some(OutcomeAssumption::AllOnes) => "worst",
        Some(OutcomeAssumption::AllZeros) => "best",
    };
    writeln!(
        s,
        "{},{},{},{},{},{},{},{},{}",
        result.n, result.strategy, case, r.cx_count, r.t_count, r.t_depth, r.ancillas, r.measurements, r.conditional_gates
    )
    .unwrap();
    s
}

pub fn equivalence_markdown(result: &SynthesisResult, r: &EquivalenceReport) -> String {
    let mut s = String::new();
    writeln!(s, "# Equivalence of C{}X, {}", result.n, result.strategy).unwrap();
    writeln!(s).unwrap();
    writeln!(s, "- inputs: {}", r.inputs).unwrap();
    writeln!(s, "- branches: {}", r.branches).unwrap();
    writeln!(s, "- worst deviation: {:.3e}", r.worst_deviation).unwrap();
    writeln!(s, "- worst probability error: {:.3e}", r.worst_probability_error).unwrap();
    writeln!(s, "- worst ancilla leak: {:.3e}", r.worst_ancilla_leak).unwrap();
    writeln!(s, "- failing inputs: {}", r.failures).unwrap();
    writeln!(s, "- result: {}", if r.passed { "PASS" } else { "FAIL" }).unwrap();
    s
}

pub fn equivalence_diff(r: &EquivalenceReport) -> String {
    format!(
        "verification failed: {} of {} inputs out of tolerance (deviation {:.3e}, probability error {:.3e}, ancilla leak {:.3e})",
        r.failures, r.inputs, r.worst_deviation, r.worst_probability_error, r.worst_ancilla_leak
    )
}

#[derive(Serialize)]
pub struct BlockCheck {
    #[serde(flatten)]
    report: BlockReport,
    /// Measured minus certified (CX, T-count, T-depth).
    deltas: [i64; 3],
    pub passed: bool,
}

impl From<BlockReport> for BlockCheck {
    fn from(report: BlockReport) -> Self {
        BlockCheck { deltas: report.deltas(), passed: report.passed, report }
    }
}

impl BlockCheck {
    pub fn describe_failure(&self) -> String {
        let r = &self.report;
        format!(
            "{}: matrix diff {:.3e}, certified {}, measured {}",
            r.kind,
            r.max_abs_diff,
            cert(r.certificate),
            cert(r.measured)
        )
    }
}

#[derive(Serialize)]
pub struct CorrectionCheck {
    kind: BlockKind,
    outcome: u8,
    expected: Certificate,
    derived: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    pub passed: bool,
}

impl CorrectionCheck {
    pub fn new(
        kind: BlockKind,
        outcome: bool,
        expected: Certificate,
        derived: Option<Certificate>,
        error: Option<String>,
    ) -> Self {
        let passed = derived == Some(expected);
        CorrectionCheck { kind, outcome: u8::from(outcome), expected, derived, error, passed }
    }

    pub fn describe_failure(&self) -> String {
        match (&self.error, self.derived) {
            (Some(e), _) => format!("{} outcome {}: {e}", self.kind, self.outcome),
            (None, d) => format!(
                "{} outcome {}: expected {}, derived {}",
                self.kind,
                self.outcome,
                cert(self.expected),
                d.map(cert).unwrap_or_else(|| "-".into())
            ),
        }
    }
}

#[derive(Serialize)]
pub struct BlocksReport<'a> {
    pub blocks: &'a [BlockCheck],
    pub corrections: &'a [CorrectionCheck],
}

fn cert(c: Certificate) -> String {
    format!("{}/{}/{}", c.cx, c.t_count, c.t_depth)
}

pub fn blocks_markdown(blocks: &[BlockCheck], corrections: &[CorrectionCheck]) -> String {
    let mut s = String::from("# Blocks\n\n| block | matrix diff | certified | measured | result |\n|---|---|---|---|---|\n");
    for b in blocks {
        let r = &b.report;
        writeln!(
            s,
            "| {} | {:.2e} | {} | {} | {} |",
            r.kind,
            r.max_abs_diff,
            cert(r.certificate),
            cert(r.measured),
            if b.passed { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    s.push_str("\n# Corrections\n\n| block | outcome | expected | derived | result |\n|---|---|---|---|---|\n");
    for c in corrections {
        writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            c.kind,
            c.outcome,
            cert(c.expected),
            c.derived.map(cert).unwrap_or_else(|| "-".into()),
            if c.passed { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    s
}
