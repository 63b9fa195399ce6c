//! Certified composite-gate library.
//!
//! Each [`BlockKind`] has a defining unitary, a Clifford+T realization and a
//! resource certificate `(cx, t_count, t_depth)`. [`verify_block`] checks the
//! realization against both. The module also derives the measurement-based
//! uncomputation of the AND-computing blocks: after `S†; H; measure` on the
//! ancilla, the control register is left with a diagonal residual that
//! [`derive_correction`] computes by simulation and cancels with a library
//! correction.
//!
//! Operand convention: operand `k` of a block is local qubit `k`, and local
//! qubit 0 is the most significant bit of the matrix index. The last operand
//! of CCX/CC(±iX)/C³(±iX) is the target.

use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Clbit, Gate, GateKind, Instruction, Qubit, Role};
use crate::matrix::Matrix;
use crate::resources::gate_t_depth;
use crate::sim::{extract_unitary, Statevector};

/// Matrix agreement tolerance for realizations.
pub const MATRIX_TOLERANCE: f64 = 1e-10;
/// Unitarity tolerance for definitions.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockKind {
    /// Toffoli.
    CCX,
    /// Doubly-controlled iX.
    CCiX,
    /// Doubly-controlled −iX, the adjoint of [`BlockKind::CCiX`].
    CCmiX,
    /// Triply-controlled relative-phase X.
    C3iX,
    /// Adjoint of [`BlockKind::C3iX`].
    C3miX,
    /// A single CZ.
    CZBlock,
    /// Controlled-S†, diag(1, 1, 1, −i).
    CSdg,
    /// Three-qubit diagonal diag(1,…,1, −i, i) on |110⟩, |111⟩.
    DiagCorr3,
}

impl BlockKind {
    pub const ALL: [BlockKind; 8] = [
        BlockKind::CCX,
        BlockKind::CCiX,
        BlockKind::CCmiX,
        BlockKind::C3iX,
        BlockKind::C3miX,
        BlockKind::CZBlock,
        BlockKind::CSdg,
        BlockKind::DiagCorr3,
    ];

    pub fn arity(self) -> usize {
        match self {
            BlockKind::C3iX | BlockKind::C3miX => 4,
            BlockKind::CZBlock | BlockKind::CSdg => 2,
            _ => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockKind::CCX => "CCX",
            BlockKind::CCiX => "CC(iX)",
            BlockKind::CCmiX => "CC(-iX)",
            BlockKind::C3iX => "C3(iX)",
            BlockKind::C3miX => "C3(-iX)",
            BlockKind::CZBlock => "CZ",
            BlockKind::CSdg => "CS†",
            BlockKind::DiagCorr3 => "Diag3",
        }
    }

    /// The adjoint kind for the relative-phase AND blocks.
    pub fn adjoint(self) -> Option<BlockKind> {
        match self {
            BlockKind::CCiX => Some(BlockKind::CCmiX),
            BlockKind::CCmiX => Some(BlockKind::CCiX),
            BlockKind::C3iX => Some(BlockKind::C3miX),
            BlockKind::C3miX => Some(BlockKind::C3iX),
            _ => None,
        }
    }

    /// Number of control operands of an AND-computing block.
    pub fn controls(self) -> usize {
        match self {
            BlockKind::CCX | BlockKind::CCiX | BlockKind::CCmiX => 2,
            BlockKind::C3iX | BlockKind::C3miX => 3,
            other => other.arity(),
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Resource certificate: two-qubit gate count (CX and CZ), T-count, T-depth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Certificate {
    pub cx: usize,
    pub t_count: usize,
    pub t_depth: usize,
}

impl Certificate {
    pub const fn new(cx: usize, t_count: usize, t_depth: usize) -> Certificate {
        Certificate { cx, t_count, t_depth }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} CX / {} T / T-depth {}", self.cx, self.t_count, self.t_depth)
    }
}

pub fn certificate(kind: BlockKind) -> Certificate {
    match kind {
        // Toffoli at the scheduled-gate level: depth 3 (see `verify_block`).
        BlockKind::CCX => Certificate::new(6, 7, 3),
        BlockKind::CCiX | BlockKind::CCmiX => Certificate::new(3, 4, 4),
        BlockKind::C3iX | BlockKind::C3miX => Certificate::new(6, 8, 8),
        BlockKind::CZBlock => Certificate::new(1, 0, 0),
        BlockKind::CSdg => Certificate::new(2, 3, 2),
        BlockKind::DiagCorr3 => Certificate::new(4, 4, 4),
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Frozen action of the CC(iX) realization on |c1 c2 t⟩: `(output basis,
/// power of i)`. On t = 0 it is exactly controlled-controlled iX; on t = 1 it
/// carries the extra phase of a CZ(c1, t) applied first.
const CCIX_TABLE: [(usize, u32); 8] = [
    (0b000, 0),
    (0b001, 0),
    (0b010, 0),
    (0b011, 0),
    (0b100, 0),
    (0b101, 2),
    (0b111, 1),
    (0b110, 3),
];

/// Frozen action of the C³(iX) realization: `(output basis, power of i)` for
/// each input basis state |x y z t⟩. On t = 0 it computes t ⊕ xyz with the
/// control phase i^(xy + xyz).
const C3IX_TABLE: [(usize, u32); 16] = [
    (0b0000, 0),
    (0b0001, 0),
    (0b0010, 0),
    (0b0011, 0),
    (0b0100, 0),
    (0b0101, 0),
    (0b0110, 0),
    (0b0111, 0),
    (0b1000, 0),
    (0b1001, 0),
    (0b1010, 0),
    (0b1011, 0),
    (0b1100, 1),
    (0b1101, 3),
    (0b1111, 2),
    (0b1110, 0),
];

/// The defining unitary of `kind`.
pub fn block_definition(kind: BlockKind) -> Matrix {
    match kind {
        BlockKind::CCX => Matrix::monomial(8, |c| {
            let row = if c >> 1 == 0b11 { c ^ 1 } else { c };
            (row, i_pow(0))
        }),
        BlockKind::CCiX => Matrix::monomial(8, |c| {
            let (row, k) = CCIX_TABLE[c];
            (row, i_pow(k))
        }),
        BlockKind::C3iX => Matrix::monomial(16, |c| {
            let (row, k) = C3IX_TABLE[c];
            (row, i_pow(k))
        }),
        BlockKind::CCmiX | BlockKind::C3miX => {
            block_definition(kind.adjoint().expect("adjoint pair")).adjoint()
        }
        BlockKind::CZBlock => Matrix::monomial(4, |c| (c, if c == 0b11 { i_pow(2) } else { i_pow(0) })),
        BlockKind::CSdg => Matrix::monomial(4, |c| (c, if c == 0b11 { i_pow(3) } else { i_pow(0) })),
        BlockKind::DiagCorr3 => Matrix::monomial(8, |c| {
            let k = match c {
                0b110 => 3,
                0b111 => 1,
                _ => 0,
            };
            (c, i_pow(k))
        }),
    }
}

fn build(arity: usize, gates: &[(GateKind, &[usize])]) -> Circuit {
    let mut c = Circuit::uniform(arity, Role::Ancilla).expect("arity > 0");
    for &(kind, ops) in gates {
        let ops: Vec<Qubit> = ops.iter().map(|&i| Qubit(i)).collect();
        c.apply(kind, &ops).expect("static realization is well formed");
    }
    c
}

/// The Clifford+T realization of `kind` over local qubits `0..arity`.
pub fn block_realization(kind: BlockKind) -> Circuit {
    use GateKind::*;
    match kind {
        // (a, b, t): CCZ phase polynomial between Hadamards on the target.
        BlockKind::CCX => build(
            3,
            &[
                (H, &[2]),
                (T, &[2]),
                (CX, &[0, 1]),
                (T, &[0]),
                (Tdg, &[1]),
                (CX, &[0, 1]),
                (T, &[1]),
                (CX, &[0, 2]),
                (Tdg, &[2]),
                (CX, &[1, 2]),
                (T, &[2]),
                (CX, &[0, 2]),
                (Tdg, &[2]),
                (CX, &[1, 2]),
                (H, &[2]),
            ],
        ),
        BlockKind::CCiX => build(
            3,
            &[
                (H, &[2]),
                (T, &[2]),
                (CX, &[1, 2]),
                (Tdg, &[2]),
                (CX, &[0, 2]),
                (T, &[2]),
                (CX, &[1, 2]),
                (Tdg, &[2]),
                (H, &[2]),
            ],
        ),
        BlockKind::C3iX => build(
            4,
            &[
                (H, &[3]),
                (T, &[3]),
                (CX, &[2, 3]),
                (Tdg, &[3]),
                (H, &[3]),
                (CX, &[0, 3]),
                (T, &[3]),
                (CX, &[1, 3]),
                (Tdg, &[3]),
                (CX, &[0, 3]),
                (T, &[3]),
                (CX, &[1, 3]),
                (Tdg, &[3]),
                (H, &[3]),
                (T, &[3]),
                (CX, &[2, 3]),
                (Tdg, &[3]),
                (H, &[3]),
            ],
        ),
        BlockKind::CCmiX | BlockKind::C3miX => block_realization(kind.adjoint().expect("adjoint pair"))
            .adjoint()
            .expect("realizations are unitary"),
        BlockKind::CZBlock => build(2, &[(CZ, &[0, 1])]),
        BlockKind::CSdg => build(2, &[(Tdg, &[0]), (Tdg, &[1]), (CX, &[0, 1]), (T, &[1]), (CX, &[0, 1])]),
        // Accumulates z, x⊕z, x⊕y⊕z, y⊕z on operand 2.
        BlockKind::DiagCorr3 => build(
            3,
            &[
                (T, &[2]),
                (CX, &[0, 2]),
                (Tdg, &[2]),
                (CX, &[1, 2]),
                (T, &[2]),
                (CX, &[0, 2]),
                (Tdg, &[2]),
                (CX, &[1, 2]),
            ],
        ),
    }
}

#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub definition: Matrix,
    pub realization: Circuit,
    pub certificate: Certificate,
}

impl BlockSpec {
    pub fn build(kind: BlockKind) -> BlockSpec {
        BlockSpec {
            kind,
            definition: block_definition(kind),
            realization: block_realization(kind),
            certificate: certificate(kind),
        }
    }
}

/// Shared, immutable block library.
pub fn library() -> &'static [BlockSpec] {
    static LIB: OnceLock<Vec<BlockSpec>> = OnceLock::new();
    LIB.get_or_init(|| BlockKind::ALL.iter().map(|&k| BlockSpec::build(k)).collect())
}

pub fn spec(kind: BlockKind) -> &'static BlockSpec {
    library()
        .iter()
        .find(|s| s.kind == kind)
        .expect("every kind is in the library")
}

/// Outcome of checking a realization against its definition and certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub kind: BlockKind,
    pub max_abs_diff: f64,
    pub unitarity_error: f64,
    pub certificate: Certificate,
    /// What the realization actually uses (T-depth: gate-level ASAP).
    pub measured: Certificate,
    pub passed: bool,
}

impl BlockReport {
    pub fn deltas(&self) -> [i64; 3] {
        let d = |a: usize, b: usize| a as i64 - b as i64;
        [
            d(self.measured.cx, self.certificate.cx),
            d(self.measured.t_count, self.certificate.t_count),
            d(self.measured.t_depth, self.certificate.t_depth),
        ]
    }
}

/// Measured resources of a unitary circuit.
pub fn measure_certificate(circuit: &Circuit) -> Certificate {
    let counts = circuit.count_primitives();
    Certificate {
        cx: counts.two_qubit(crate::circuit::BodySelection::None),
        t_count: counts.t_count(crate::circuit::BodySelection::None),
        t_depth: gate_t_depth(circuit),
    }
}

pub fn verify_spec(spec: &BlockSpec) -> BlockReport {
    let unitarity_error = spec.definition.unitarity_error();
    let max_abs_diff = match extract_unitary(&spec.realization) {
        Ok(m) if m.dim() == spec.definition.dim() => m.max_abs_diff(&spec.definition),
        _ => f64::INFINITY,
    };
    let measured = measure_certificate(&spec.realization);
    BlockReport {
        kind: spec.kind,
        max_abs_diff,
        unitarity_error,
        certificate: spec.certificate,
        measured,
        passed: max_abs_diff < MATRIX_TOLERANCE
            && unitarity_error < UNITARY_TOLERANCE
            && measured == spec.certificate,
    }
}

/// Checks the library realization of `kind`.
pub fn verify_block(kind: BlockKind) -> BlockReport {
    verify_spec(spec(kind))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlockError {
    #[error("{0} is not an AND-computing block with a measurement-based uncompute")]
    NotUncomputable(BlockKind),
    #[error("residual of {kind} (outcome {outcome}) is not diagonal up to a global phase (off-diagonal {off_diagonal:e}, modulus spread {spread:e})")]
    ResidualNotDiagonal {
        kind: BlockKind,
        outcome: bool,
        off_diagonal: f64,
        spread: f64,
    },
    #[error("no library correction cancels the residual of {kind} (outcome {outcome})")]
    NoCorrection { kind: BlockKind, outcome: bool },
    #[error("correction for {kind} (outcome {outcome}) costs {found}, contract is {expected}")]
    ContractViolation {
        kind: BlockKind,
        outcome: bool,
        expected: Certificate,
        found: Certificate,
    },
    #[error("expected {expected} operands for {kind}, got {found}")]
    OperandCount {
        kind: BlockKind,
        expected: usize,
        found: usize,
    },
    #[error("no free classical bit for the uncompute measurement")]
    NoFreeClbit,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Cost contract of the correction applied after measuring a block's ancilla.
pub fn correction_contract(kind: BlockKind, outcome: bool) -> Option<Certificate> {
    match (kind, outcome) {
        (BlockKind::CCiX, false) => Some(Certificate::default()),
        (BlockKind::CCiX, true) => Some(certificate(BlockKind::CZBlock)),
        (BlockKind::C3iX, false) => Some(certificate(BlockKind::CSdg)),
        (BlockKind::C3iX, true) => Some(certificate(BlockKind::DiagCorr3)),
        _ => None,
    }
}

/// Diagonal operator left on the controls of `kind` after computing onto a
/// clean ancilla, applying `S†; H` to it and projecting it onto `outcome`.
/// Rows and columns index the control register; the ancilla factor (1/√2)
/// is divided out.
pub fn residual(kind: BlockKind, outcome: bool) -> Result<Matrix, BlockError> {
    if correction_contract(kind, outcome).is_none() {
        return Err(BlockError::NotUncomputable(kind));
    }
    let k = kind.controls();
    let anc = Qubit(k);
    let mut circuit = spec(kind).realization.clone();
    circuit.apply(GateKind::Sdg, &[anc])?;
    circuit.apply(GateKind::H, &[anc])?;
    let columns: Vec<Vec<Complex64>> = (0..1usize << k)
        .map(|ctrl| {
            let mut s = Statevector::basis(k + 1, ctrl << 1);
            crate::sim::run_unitary(&circuit, &mut s).expect("unitary block");
            (0..1usize << k)
                .map(|row| s.amplitudes()[(row << 1) | usize::from(outcome)] * std::f64::consts::SQRT_2)
                .collect()
        })
        .collect();
    Ok(Matrix::from_columns(&columns))
}

/// A measured-ancilla correction for one block kind and outcome.
#[derive(Debug, Clone)]
pub struct CorrectionRule {
    pub source: BlockKind,
    pub outcome: bool,
    /// Library block used, `None` for the identity.
    pub block: Option<BlockKind>,
    /// Circuit over the source block's control operands (local indices).
    pub correction: Circuit,
    pub certificate: Certificate,
}

/// Candidate corrections on `k` controls: identity, then every placement of
/// CZ, CS† and the three-qubit diagonal.
fn candidates(k: usize) -> Vec<(Option<BlockKind>, Vec<usize>)> {
    let mut out = vec![(None, vec![])];
    for kind in [BlockKind::CZBlock, BlockKind::CSdg] {
        for a in 0..k {
            for b in a + 1..k {
                out.push((Some(kind), vec![a, b]));
            }
        }
    }
    if k == 3 {
        for z in 0..3 {
            let rest: Vec<usize> = (0..3).filter(|&i| i != z).collect();
            out.push((Some(BlockKind::DiagCorr3), vec![rest[0], rest[1], z]));
        }
    }
    out.sort_by_key(|(kind, _)| kind.map(certificate).map(|c| (c.t_count, c.cx)).unwrap_or((0, 0)));
    out
}

fn embed(k: usize, block: Option<BlockKind>, operands: &[usize]) -> Circuit {
    let mut c = Circuit::uniform(k, Role::Control).expect("k > 0");
    if let Some(kind) = block {
        let map: Vec<Qubit> = operands.iter().map(|&i| Qubit(i)).collect();
        c.append_mapped(&spec(kind).realization, &map)
            .expect("candidate placement is valid");
    }
    c
}

/// Derives, by simulation, the correction that restores the control register
/// after measurement-based uncomputation of `kind` with result `outcome`.
pub fn derive_correction(kind: BlockKind, outcome: bool) -> Result<CorrectionRule, BlockError> {
    let contract = correction_contract(kind, outcome).ok_or(BlockError::NotUncomputable(kind))?;
    let res = residual(kind, outcome)?;
    let diag = res.diagonal();
    let moduli: Vec<f64> = diag.iter().map(|d| d.norm()).collect();
    let spread = moduli.iter().fold(0.0_f64, |m, &v| m.max((v - 1.0).abs()));
    let off_diagonal = res.off_diagonal_norm();
    if off_diagonal > MATRIX_TOLERANCE || spread > MATRIX_TOLERANCE {
        return Err(BlockError::ResidualNotDiagonal {
            kind,
            outcome,
            off_diagonal,
            spread,
        });
    }
    let k = kind.controls();
    let identity = Matrix::identity(1 << k);
    for (block, operands) in candidates(k) {
        let circuit = embed(k, block, &operands);
        let m = extract_unitary(&circuit).expect("candidate is unitary");
        if m.mul(&res).diff_up_to_phase(&identity) < MATRIX_TOLERANCE {
            let cert = block.map(certificate).unwrap_or_default();
            if cert != contract {
                return Err(BlockError::ContractViolation {
                    kind,
                    outcome,
                    expected: contract,
                    found: cert,
                });
            }
            return Ok(CorrectionRule {
                source: kind,
                outcome,
                block,
                correction: circuit,
                certificate: cert,
            });
        }
    }
    Err(BlockError::NoCorrection { kind, outcome })
}

/// Cached correction rules for the two uncomputable kinds.
pub fn correction(kind: BlockKind, outcome: bool) -> Result<&'static CorrectionRule, BlockError> {
    static RULES: OnceLock<Result<Vec<CorrectionRule>, BlockError>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        [BlockKind::CCiX, BlockKind::C3iX]
            .into_iter()
            .flat_map(|k| [false, true].map(|b| (k, b)))
            .map(|(k, b)| derive_correction(k, b))
            .collect()
    });
    let rules = rules.as_ref().map_err(Clone::clone)?;
    rules
        .iter()
        .find(|r| r.source == kind && r.outcome == outcome)
        .ok_or(BlockError::NotUncomputable(kind))
}

/// What an annotated instruction range stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpanKind {
    Block(BlockKind),
    Correction { source: BlockKind, outcome: bool },
}

/// Instruction range of a synthesized circuit that forms one block or one
/// conditional correction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpan {
    pub kind: SpanKind,
    pub range: Range<usize>,
    pub qubits: Vec<Qubit>,
    pub certificate: Certificate,
    /// Set for corrections: the span runs iff `clbit == value`.
    pub condition: Option<(Clbit, bool)>,
}

/// Appends the realization of `kind` on `operands` and returns its span.
pub fn emit_block(circuit: &mut Circuit, kind: BlockKind, operands: &[Qubit]) -> Result<BlockSpan, BlockError> {
    if operands.len() != kind.arity() {
        return Err(BlockError::OperandCount {
            kind,
            expected: kind.arity(),
            found: operands.len(),
        });
    }
    let start = circuit.len();
    circuit.append_mapped(&spec(kind).realization, operands)?;
    Ok(BlockSpan {
        kind: SpanKind::Block(kind),
        range: start..circuit.len(),
        qubits: operands.to_vec(),
        certificate: certificate(kind),
        condition: None,
    })
}

/// Emits the measurement-based uncompute of an AND block whose ancilla holds
/// the block's output: `S†(a); H(a); measure a → clbit`, the outcome-1 and
/// outcome-0 corrections as conditionals on `controls`, then `reset a`.
pub fn dynamic_uncompute(
    circuit: &mut Circuit,
    kind: BlockKind,
    ancilla: Qubit,
    controls: &[Qubit],
    clbit: Option<Clbit>,
) -> Result<Vec<BlockSpan>, BlockError> {
    if controls.len() != kind.controls() {
        return Err(BlockError::OperandCount {
            kind,
            expected: kind.controls(),
            found: controls.len(),
        });
    }
    let clbit = clbit
        .filter(|c| c.0 < circuit.num_clbits())
        .ok_or(BlockError::NoFreeClbit)?;
    circuit.apply(GateKind::Sdg, &[ancilla])?;
    circuit.apply(GateKind::H, &[ancilla])?;
    circuit.push(Instruction::Measure { qubit: ancilla, clbit })?;
    let mut spans = Vec::new();
    for outcome in [true, false] {
        let rule = correction(kind, outcome)?;
        if rule.correction.is_empty() {
            continue;
        }
        let start = circuit.len();
        for instr in rule.correction.instructions() {
            let Instruction::Unitary(g) = instr else {
                unreachable!("corrections are unitary")
            };
            circuit.push(Instruction::Conditional {
                clbit,
                value: outcome,
                gate: g.remap(controls),
            })?;
        }
        let mut qubits: Vec<Qubit> = rule
            .correction
            .instructions()
            .iter()
            .flat_map(|i| i.qubits().iter().map(|q| controls[q.0]))
            .collect();
        qubits.sort();
        qubits.dedup();
        spans.push(BlockSpan {
            kind: SpanKind::Correction { source: kind, outcome },
            range: start..circuit.len(),
            qubits,
            certificate: rule.certificate,
            condition: Some((clbit, outcome)),
        });
    }
    circuit.push(Instruction::Reset(ancilla))?;
    Ok(spans)
}

/// Gates of a realization, for callers that want them without a circuit.
pub fn realization_gates(kind: BlockKind) -> Vec<Gate> {
    spec(kind)
        .realization
        .instructions()
        .iter()
        .filter_map(|i| match i {
            Instruction::Unitary(g) => Some(*g),
            _ => None,
        })
        .collect()
}
