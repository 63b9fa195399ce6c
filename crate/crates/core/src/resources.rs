//! Resource analysis: CX-count, T-count and T-depth of circuits, the
//! closed-form cost model of the four strategies, and the resource table.
//!
//! "CX count" counts every two-qubit gate, so CZ contributes one unit.
//! T and T† both contribute to the T-count; Clifford single-qubit gates are
//! free. Dynamic circuits are costed under an [`OutcomeAssumption`]: every
//! conditional body waiting for the assumed bit value is materialized, the
//! others are dropped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::BlockSpan;
use crate::circuit::{BodySelection, Circuit, Instruction};
use crate::synth::{Strategy, SynthError, SynthesisResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeAssumption {
    /// Every ancilla measurement returns 1.
    AllOnes,
    /// Every ancilla measurement returns 0.
    AllZeros,
}

impl OutcomeAssumption {
    pub fn bit(self) -> bool {
        self == OutcomeAssumption::AllOnes
    }

    fn selection(self) -> BodySelection {
        match self {
            OutcomeAssumption::AllOnes => BodySelection::OnOne,
            OutcomeAssumption::AllZeros => BodySelection::OnZero,
        }
    }
}

/// Which cost a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostCase {
    StaticOnly,
    DynamicWorst,
    DynamicBest,
}

impl CostCase {
    pub fn assumption(self) -> Option<OutcomeAssumption> {
        match self {
            CostCase::StaticOnly => None,
            CostCase::DynamicWorst => Some(OutcomeAssumption::AllOnes),
            CostCase::DynamicBest => Some(OutcomeAssumption::AllZeros),
        }
    }

    pub fn from_assumption(a: Option<OutcomeAssumption>) -> CostCase {
        match a {
            None => CostCase::StaticOnly,
            Some(OutcomeAssumption::AllOnes) => CostCase::DynamicWorst,
            Some(OutcomeAssumption::AllZeros) => CostCase::DynamicBest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthMode {
    /// ASAP layering of individual T/T† gates.
    Gate,
    /// Longest path through the annotated blocks, each weighted by its
    /// certified T-depth.
    Block,
}

impl FromStr for DepthMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gate" => Ok(DepthMode::Gate),
            "block" => Ok(DepthMode::Block),
            _ => Err(format!("unknown T-depth mode '{s}' (expected gate or block)")),
        }
    }
}

/// A (CX, T-count, T-depth) triple.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cost {
    pub cx: usize,
    pub t_count: usize,
    pub t_depth: usize,
}

impl Cost {
    pub const fn new(cx: usize, t_count: usize, t_depth: usize) -> Cost {
        Cost { cx, t_count, t_depth }
    }

    pub fn as_array(self) -> [usize; 3] {
        [self.cx, self.t_count, self.t_depth]
    }

    /// Componentwise `self − rhs`, saturating at zero.
    pub fn saturating_sub(self, rhs: Cost) -> Cost {
        Cost {
            cx: self.cx.saturating_sub(rhs.cx),
            t_count: self.t_count.saturating_sub(rhs.t_count),
            t_depth: self.t_depth.saturating_sub(rhs.t_depth),
        }
    }
}

impl std::ops::Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        Cost::new(self.cx + rhs.cx, self.t_count + rhs.t_count, self.t_depth + rhs.t_depth)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.cx, self.t_count, self.t_depth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub case: CostCase,
    pub cx_count: usize,
    pub t_count: usize,
    pub t_depth: usize,
    pub ancillas: usize,
    pub measurements: usize,
    /// Conditional gates materialized under the assumption.
    pub conditional_gates: usize,
    /// Cost without any conditional body.
    pub static_part: Cost,
    /// `total − static_part`.
    pub dynamic_part: Cost,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl ResourceReport {
    pub fn cost(&self) -> Cost {
        Cost::new(self.cx_count, self.t_count, self.t_depth)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResourceError {
    #[error("the circuit measures qubits; an outcome assumption is required")]
    MissingAssumption,
    #[error("block-level T-depth needs block annotations")]
    MissingAnnotations,
    #[error("annotation {index} ({start}..{end}) is out of range or overlaps an earlier one")]
    BadAnnotation { index: usize, start: usize, end: usize },
    #[error("{kind:?} is not a cost case of {strategy}")]
    InvalidCase { strategy: Strategy, kind: CostCase },
    #[error("improvement is undefined when a static metric is zero")]
    ZeroStatic,
    #[error("the table needs n_max ≥ 3, got {0}")]
    TableRange(usize),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

fn includes(condition: Option<(crate::circuit::Clbit, bool)>, assumption: Option<OutcomeAssumption>) -> bool {
    match (condition, assumption) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some((_, v)), Some(a)) => v == a.bit(),
    }
}

/// A conditional body that is not taken still holds its qubits until the
/// bit it tests is known, at no T cost.
fn hold(level: &mut [usize], qubits: &[crate::circuit::Qubit], floor: usize) {
    let start = qubits.iter().map(|q| level[q.0]).max().unwrap_or(0).max(floor);
    for q in qubits {
        level[q.0] = start;
    }
}

/// Gate-level T-depth: ASAP layering where two-qubit gates synchronize their
/// operands and T/T† advance their qubit by one layer. Conditional bodies
/// count when their condition matches `assumption` and wait for the
/// measurement that wrote their bit; bodies that are not taken only wait.
pub fn gate_t_depth_under(circuit: &Circuit, assumption: Option<OutcomeAssumption>) -> usize {
    let mut level = vec![0usize; circuit.num_qubits()];
    let mut bit_level = vec![0usize; circuit.num_clbits()];
    for instr in circuit.instructions() {
        let (gate, floor) = match *instr {
            Instruction::Unitary(g) => (g, 0),
            Instruction::Conditional { clbit, value, gate } => {
                if !includes(Some((clbit, value)), assumption) {
                    hold(&mut level, gate.qubits(), bit_level[clbit.0]);
                    continue;
                }
                (gate, bit_level[clbit.0])
            }
            Instruction::Measure { qubit, clbit } => {
                bit_level[clbit.0] = level[qubit.0];
                continue;
            }
            Instruction::Reset(_) => continue,
        };
        let qs = gate.qubits();
        let start = qs.iter().map(|q| level[q.0]).max().unwrap_or(0).max(floor);
        let end = start + usize::from(gate.kind().is_t());
        for q in qs {
            level[q.0] = end;
        }
    }
    level.into_iter().max().unwrap_or(0)
}

/// Gate-level T-depth of a unitary circuit, or of a dynamic one with every
/// outcome-1 body included.
pub fn gate_t_depth(circuit: &Circuit) -> usize {
    gate_t_depth_under(circuit, Some(OutcomeAssumption::AllOnes))
}

/// Block-level T-depth: instructions covered by a span advance together,
/// every qubit of the span leaving at `start + certified depth`. Correction
/// spans wait for the measurement of their bit; those whose condition
/// disagrees with `assumption` add no depth. Uncovered instructions are
/// layered at gate level.
pub fn block_t_depth(
    circuit: &Circuit,
    spans: &[BlockSpan],
    assumption: Option<OutcomeAssumption>,
) -> Result<usize, ResourceError> {
    let instrs = circuit.instructions();
    let mut sorted: Vec<(usize, &BlockSpan)> = spans.iter().enumerate().collect();
    sorted.sort_by_key(|(_, s)| s.range.start);
    let mut prev_end = 0;
    for &(index, s) in &sorted {
        if s.range.start < prev_end || s.range.end > instrs.len() || s.range.start > s.range.end {
            return Err(ResourceError::BadAnnotation {
                index,
                start: s.range.start,
                end: s.range.end,
            });
        }
        prev_end = s.range.end;
    }
    let mut level = vec![0usize; circuit.num_qubits()];
    let mut bit_level = vec![0usize; circuit.num_clbits()];
    let mut next_span = sorted.into_iter().map(|(_, s)| s).peekable();
    let mut pc = 0;
    while pc < instrs.len() {
        if let Some(span) = next_span.next_if(|s| s.range.start == pc && !s.range.is_empty()) {
            pc = span.range.end;
            let floor = span.condition.map(|(c, _)| bit_level[c.0]).unwrap_or(0);
            if !includes(span.condition, assumption) {
                hold(&mut level, &span.qubits, floor);
                continue;
            }
            let start = span.qubits.iter().map(|q| level[q.0]).max().unwrap_or(0).max(floor);
            for q in &span.qubits {
                level[q.0] = start + span.certificate.t_depth;
            }
            continue;
        }
        while next_span.next_if(|s| s.range.is_empty() && s.range.start <= pc).is_some() {}
        match instrs[pc] {
            Instruction::Unitary(g) => {
                let start = g.qubits().iter().map(|q| level[q.0]).max().unwrap_or(0);
                for q in g.qubits() {
                    level[q.0] = start + usize::from(g.kind().is_t());
                }
            }
            Instruction::Conditional { clbit, value, gate } => {
                if !includes(Some((clbit, value)), assumption) {
                    hold(&mut level, gate.qubits(), bit_level[clbit.0]);
                } else {
                    let start = gate
                        .qubits()
                        .iter()
                        .map(|q| level[q.0])
                        .max()
                        .unwrap_or(0)
                        .max(bit_level[clbit.0]);
                    for q in gate.qubits() {
                        level[q.0] = start + usize::from(gate.kind().is_t());
                    }
                }
            }
            Instruction::Measure { qubit, clbit } => bit_level[clbit.0] = level[qubit.0],
            Instruction::Reset(_) => {}
        }
        pc += 1;
    }
    Ok(level.into_iter().max().unwrap_or(0))
}

/// Costs a circuit. `spans` is required for block-level depth; `assumption`
/// is required for circuits that measure and ignored (with a warning) for
/// unitary ones.
pub fn analyze(
    circuit: &Circuit,
    spans: Option<&[BlockSpan]>,
    assumption: Option<OutcomeAssumption>,
    mode: DepthMode,
) -> Result<ResourceReport, ResourceError> {
    let dynamic = circuit.has_measurements();
    let mut warnings = Vec::new();
    let assumption = match (dynamic, assumption) {
        (true, None) => return Err(ResourceError::MissingAssumption),
        (false, Some(_)) => {
            warnings.push("outcome assumption ignored for a circuit without measurements".to_string());
            None
        }
        (_, a) => a,
    };
    let counts = circuit.count_primitives();
    let selection = assumption.map(OutcomeAssumption::selection).unwrap_or(BodySelection::None);
    let depth = |a: Option<OutcomeAssumption>| -> Result<usize, ResourceError> {
        match mode {
            DepthMode::Gate => Ok(gate_t_depth_under(circuit, a)),
            DepthMode::Block => block_t_depth(circuit, spans.ok_or(ResourceError::MissingAnnotations)?, a),
        }
    };
    let total = Cost::new(counts.two_qubit(selection), counts.t_count(selection), depth(assumption)?);
    let static_part = Cost::new(
        counts.two_qubit(BodySelection::None),
        counts.t_count(BodySelection::None),
        depth(None)?,
    );
    let conditional_gates = match assumption {
        Some(OutcomeAssumption::AllOnes) => counts.conditional_on_one.values().sum(),
        Some(OutcomeAssumption::AllZeros) => counts.conditional_on_zero.values().sum(),
        None => 0,
    };
    let ancillas = circuit.qubits_with_role(crate::circuit::Role::Ancilla).len();
    Ok(ResourceReport {
        case: CostCase::from_assumption(assumption),
        cx_count: total.cx,
        t_count: total.t_count,
        t_depth: total.t_depth,
        ancillas,
        measurements: counts.measurements,
        conditional_gates,
        static_part,
        dynamic_part: total.saturating_sub(static_part),
        warnings,
    })
}

/// [`analyze`] on a synthesized circuit with its own annotations.
pub fn analyze_result(
    result: &SynthesisResult,
    assumption: Option<OutcomeAssumption>,
    mode: DepthMode,
) -> Result<ResourceReport, ResourceError> {
    analyze(&result.circuit, Some(&result.spans), assumption, mode)
}

/// Closed-form costs of one (n, strategy): the part always executed and the
/// extra cost of the conditional corrections in the worst and best case.
/// For static strategies both extras are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaParts {
    pub static_part: Cost,
    pub worst_extra: Cost,
    pub best_extra: Cost,
}

pub fn formula_parts(n: usize, strategy: Strategy) -> Result<FormulaParts, ResourceError> {
    if !strategy.supports(n) {
        return Err(SynthError::UnsupportedN { n, strategy }.into());
    }
    let zero = Cost::default();
    let ceil_half = n.div_ceil(2);
    let quarter = n / 4;
    let parts = match strategy {
        Strategy::StaticFull => FormulaParts {
            static_part: Cost::new(6 * (n - 1), 8 * n - 9, 8 * ceil_half - 5),
            worst_extra: zero,
            best_extra: zero,
        },
        Strategy::DynamicFull => FormulaParts {
            static_part: Cost::new(3 * n, 4 * n - 1, 4 * ceil_half - 1),
            worst_extra: Cost::new(n - 2, 0, 0),
            best_extra: zero,
        },
        Strategy::StaticHalf if n % 2 == 0 => FormulaParts {
            static_part: Cost::new(6 * (n - 1), 8 * n - 9, 16 * quarter + 3),
            worst_extra: zero,
            best_extra: zero,
        },
        Strategy::StaticHalf => FormulaParts {
            static_part: Cost::new(6 * (n - 1), 8 * n - 9, 4 * n - 1),
            worst_extra: zero,
            best_extra: zero,
        },
        Strategy::DynamicHalf if n % 2 == 0 => FormulaParts {
            static_part: Cost::new(3 * n, 4 * n - 1, 8 * quarter + 3),
            worst_extra: Cost::new(2 * n - 4, 2 * n - 4, 4 * quarter),
            best_extra: Cost::new(n - 2, 3 * (n - 2) / 2, 2 * quarter),
        },
        Strategy::DynamicHalf => FormulaParts {
            static_part: Cost::new(3 * n, 4 * n - 1, 2 * n + 1),
            worst_extra: Cost::new(2 * n - 5, 2 * n - 6, n - 1),
            best_extra: Cost::new(n - 3, 3 * (n - 3) / 2, 2 * ((n - 1) / 4)),
        },
    };
    Ok(parts)
}

pub fn formula_cost(n: usize, strategy: Strategy, case: CostCase) -> Result<ResourceReport, ResourceError> {
    let parts = formula_parts(n, strategy)?;
    let dynamic_part = match (strategy.is_dynamic(), case) {
        (false, CostCase::StaticOnly) => Cost::default(),
        (true, CostCase::DynamicWorst) => parts.worst_extra,
        (true, CostCase::DynamicBest) => parts.best_extra,
        _ => return Err(ResourceError::InvalidCase { strategy, kind: case }),
    };
    let total = parts.static_part + dynamic_part;
    let ancillas = crate::synth::ancilla_requirement(n, strategy)?;
    Ok(ResourceReport {
        case,
        cx_count: total.cx,
        t_count: total.t_count,
        t_depth: total.t_depth,
        ancillas,
        measurements: if strategy.is_dynamic() { ancillas } else { 0 },
        conditional_gates: 0,
        static_part: parts.static_part,
        dynamic_part,
        warnings: Vec::new(),
    })
}

/// A percentage held as an integer number of hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "f64")]
pub struct Percent(pub i64);

impl From<Percent> for f64 {
    fn from(p: Percent) -> f64 {
        p.0 as f64 / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let v = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", v / 100, v % 100)
    }
}

/// 100·(s − d)/s rounded half-up to two decimals, computed exactly.
pub fn percent_reduction(s: usize, d: usize) -> Result<Percent, ResourceError> {
    if s == 0 {
        return Err(ResourceError::ZeroStatic);
    }
    let (s, d) = (s as i64, d as i64);
    Ok(Percent((20_000 * (s - d) + s).div_euclid(2 * s)))
}

/// Per-metric reduction of `dynamic` relative to `static_cost`.
pub fn improvement(static_cost: Cost, dynamic: Cost) -> Result<[Percent; 3], ResourceError> {
    Ok([
        percent_reduction(static_cost.cx, dynamic.cx)?,
        percent_reduction(static_cost.t_count, dynamic.t_count)?,
        percent_reduction(static_cost.t_depth, dynamic.t_depth)?,
    ])
}

/// One ancilla regime of a table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub static_cost: Cost,
    pub dynamic_worst: Cost,
    pub improvement: [Percent; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub full: RegimeRow,
    /// Absent where the half regime has no construction (n = 3).
    pub half: Option<RegimeRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceTable {
    pub rows: Vec<TableRow>,
}

fn regime(n: usize, static_s: Strategy) -> Result<RegimeRow, ResourceError> {
    let s = formula_cost(n, static_s, CostCase::StaticOnly)?.cost();
    let d = formula_cost(n, static_s.counterpart(), CostCase::DynamicWorst)?.cost();
    Ok(RegimeRow {
        static_cost: s,
        dynamic_worst: d,
        improvement: improvement(s, d)?,
    })
}

/// Static vs worst-case dynamic costs for n = 3..=n_max in both regimes.
pub fn generate_table(n_max: usize) -> Result<ResourceTable, ResourceError> {
    if !(3..=crate::synth::MAX_CONTROLS).contains(&n_max) {
        return Err(ResourceError::TableRange(n_max));
    }
    let rows = (3..=n_max)
        .map(|n| {
            Ok(TableRow {
                n,
                full: regime(n, Strategy::StaticFull)?,
                half: if Strategy::StaticHalf.supports(n) {
                    Some(regime(n, Strategy::StaticHalf)?)
                } else {
                    None
                },
            })
        })
        .collect::<Result<Vec<_>, ResourceError>>()?;
    Ok(ResourceTable { rows })
}

/// Column names shared by the CSV and JSON renderings.
pub const TABLE_COLUMNS: [&str; 19] = [
    "n",
    "full_static_cx",
    "full_static_t_count",
    "full_static_t_depth",
    "full_dyn_cx",
    "full_dyn_t_count",
    "full_dyn_t_depth",
    "full_impr_cx",
    "full_impr_t",
    "full_impr_td",
    "half_static_cx",
    "half_static_t_count",
    "half_static_t_depth",
    "half_dyn_cx",
    "half_dyn_t_count",
    "half_dyn_t_depth",
    "half_impr_cx",
    "half_impr_t",
    "half_impr_td",
];

fn regime_cells(r: Option<&RegimeRow>) -> Vec<String> {
    match r {
        None => vec!["-".to_string(); 9],
        Some(r) => r
            .static_cost
            .as_array()
            .iter()
            .chain(r.dynamic_worst.as_array().iter())
            .map(|v| v.to_string())
            .chain(r.improvement.iter().map(|p| p.to_string()))
            .collect(),
    }
}

impl TableRow {
    /// Cells in [`TABLE_COLUMNS`] order; missing regimes render as "-".
    pub fn cells(&self) -> Vec<String> {
        let mut out = vec![self.n.to_string()];
        out.extend(regime_cells(Some(&self.full)));
        out.extend(regime_cells(self.half.as_ref()));
        out
    }
}

impl ResourceTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(TABLE_COLUMNS).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.cells()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII cells")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(
            "| n | Full static CX | T | Td | Full dyn. CX | T | Td | Impr. CX % | T % | Td % \
             | Half static CX | T | Td | Half dyn. CX | T | Td | Impr. CX % | T % | Td % |\n",
        );
        out.push('|');
        out.push_str(&"---|".repeat(TABLE_COLUMNS.len()));
        out.push('\n');
        for row in &self.rows {
            out.push_str("| ");
            out.push_str(&row.cells().join(" | "));
            out.push_str(" |\n");
        }
        out
    }

    /// JSON array of objects keyed by [`TABLE_COLUMNS`]; numbers for present
    /// cells (percentages as two-decimal floats), `null` for missing ones.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (col, cell) in TABLE_COLUMNS.iter().zip(row.cells()) {
                    let v = if cell == "-" {
                        serde_json::Value::Null
                    } else if col.contains("impr") {
                        serde_json::Value::from(cell.parse::<f64>().expect("percentage cell"))
                    } else {
                        serde_json::Value::from(cell.parse::<u64>().expect("integer cell"))
                    };
                    obj.insert((*col).to_string(), v);
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("serializable");
        s.push('\n');
        s
    }
}
