//! Intermediate representation for dynamic Clifford+T circuits.
//!
//! A [`Circuit`] is an ordered list of [`Instruction`]s over a fixed number of
//! qubits and classical bits. Every instruction is validated on insertion, so a
//! circuit value always satisfies the IR invariants:
//!
//! * operand indices are in range and two-qubit operands are distinct,
//! * every classical bit is written by at most one measurement,
//! * a conditional only reads a bit that an earlier measurement wrote,
//! * a measured qubit is left alone until it is reset.
//!
//! Instruction order is the only scheduling information stored. Layering is
//! recomputed by the analyzers in [`crate::resources`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Range};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a qubit inside a [`Circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Qubit(pub usize);

/// Index of a classical bit inside a [`Circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clbit(pub usize);

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl fmt::Display for Clbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Control,
    Target,
    Ancilla,
}

/// The eight primitive gate kinds of the IR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    X,
    H,
    S,
    Sdg,
    T,
    Tdg,
    CX,
    CZ,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::X,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::CX,
        GateKind::CZ,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ => 2,
            _ => 1,
        }
    }

    /// T and T† are the only non-Clifford kinds.
    pub fn is_t(self) -> bool {
        matches!(self, GateKind::T | GateKind::Tdg)
    }

    pub fn is_two_qubit(self) -> bool {
        self.arity() == 2
    }

    pub fn inverse(self) -> GateKind {
        match self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            other => other,
        }
    }

    /// Lower-case mnemonic, as used in OpenQASM.
    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
        }
    }

    pub fn from_mnemonic(name: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.mnemonic() == name)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// A primitive gate applied to concrete qubits.
///
/// For `CX` the first operand is the control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    kind: GateKind,
    operands: [Qubit; 2],
}

impl Gate {
    pub fn new(kind: GateKind, operands: &[Qubit]) -> Result<Gate, CircuitError> {
        if operands.len() != kind.arity() {
            return Err(CircuitError::Arity {
                kind,
                expected: kind.arity(),
                found: operands.len(),
            });
        }
        if kind.arity() == 2 && operands[0] == operands[1] {
            return Err(CircuitError::DuplicateOperand(kind, operands[0]));
        }
        let second = if kind.arity() == 2 { operands[1] } else { operands[0] };
        Ok(Gate {
            kind,
            operands: [operands[0], second],
        })
    }

    pub fn single(kind: GateKind, qubit: Qubit) -> Gate {
        assert_eq!(kind.arity(), 1, "{kind} is not a single-qubit gate");
        Gate {
            kind,
            operands: [qubit, qubit],
        }
    }

    pub fn two(kind: GateKind, a: Qubit, b: Qubit) -> Gate {
        assert_eq!(kind.arity(), 2, "{kind} is not a two-qubit gate");
        assert_ne!(a, b, "two-qubit gate on a single qubit");
        Gate {
            kind,
            operands: [a, b],
        }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[Qubit] {
        &self.operands[..self.kind.arity()]
    }

    pub fn inverse(&self) -> Gate {
        Gate {
            kind: self.kind.inverse(),
            operands: self.operands,
        }
    }

    /// Relabels the operands through `map` (local index → circuit qubit).
    pub fn remap(&self, map: &[Qubit]) -> Gate {
        Gate {
            kind: self.kind,
            operands: [map[self.operands[0].0], map[self.operands[1].0]],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.qubits() {
            [a] => write!(f, "{} {a}", self.kind),
            [a, b] => write!(f, "{} {a},{b}", self.kind),
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Instruction {
    Unitary(Gate),
    /// Computational-basis measurement of `qubit` into `clbit`.
    Measure { qubit: Qubit, clbit: Clbit },
    Reset(Qubit),
    /// `gate` is applied iff `clbit == value`.
    Conditional { clbit: Clbit, value: bool, gate: Gate },
}

impl Instruction {
    pub fn is_unitary(&self) -> bool {
        matches!(self, Instruction::Unitary(_))
    }

    pub fn qubits(&self) -> &[Qubit] {
        match self {
            Instruction::Unitary(g) | Instruction::Conditional { gate: g, .. } => g.qubits(),
            Instruction::Measure { qubit, .. } | Instruction::Reset(qubit) => {
                std::slice::from_ref(qubit)
            }
        }
    }
}

impl From<Gate> for Instruction {
    fn from(gate: Gate) -> Self {
        Instruction::Unitary(gate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("a circuit needs at least one qubit")]
    NoQubits,
    #[error("role map covers {found} qubits but the circuit has {expected}")]
    RoleCount { expected: usize, found: usize },
    #[error("{kind} takes {expected} operand(s), got {found}")]
    Arity {
        kind: GateKind,
        expected: usize,
        found: usize,
    },
    #[error("{0} applied twice to {1}")]
    DuplicateOperand(GateKind, Qubit),
    #[error("{0} is out of range for a {1}-qubit circuit")]
    QubitOutOfRange(Qubit, usize),
    #[error("{0} is out of range for a circuit with {1} classical bits")]
    ClbitOutOfRange(Clbit, usize),
    #[error("{0} is already written by an earlier measurement")]
    ClbitRewritten(Clbit),
    #[error("conditional reads {0} before any measurement writes it")]
    ReadBeforeWrite(Clbit),
    #[error("{0} was measured and must be reset before further gates")]
    MeasuredQubitReused(Qubit),
    #[error("segment {start}..{end} is out of range for {len} instructions")]
    SegmentRange { start: usize, end: usize, len: usize },
    #[error("instruction {0} is not unitary; only unitary segments have an adjoint")]
    NonUnitarySegment(usize),
    #[error("qubit map has {found} entries, expected {expected}")]
    MapSize { expected: usize, found: usize },
}

/// An ordered, validated instruction list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    roles: Vec<Role>,
    instructions: Vec<Instruction>,
    written: Vec<bool>,
    measured: Vec<bool>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize, roles: Vec<Role>) -> Result<Circuit, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        if roles.len() != num_qubits {
            return Err(CircuitError::RoleCount {
                expected: num_qubits,
                found: roles.len(),
            });
        }
        Ok(Circuit {
            num_qubits,
            num_clbits,
            roles,
            instructions: Vec::new(),
            written: vec![false; num_clbits],
            measured: vec![false; num_qubits],
        })
    }

    /// A circuit whose qubits all carry `role`; handy for block realizations.
    pub fn uniform(num_qubits: usize, role: Role) -> Result<Circuit, CircuitError> {
        Circuit::new(num_qubits, 0, vec![role; num_qubits])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role(&self, q: Qubit) -> Role {
        self.roles[q.0]
    }

    pub fn qubits_with_role(&self, role: Role) -> Vec<Qubit> {
        (0..self.num_qubits)
            .filter(|&i| self.roles[i] == role)
            .map(Qubit)
            .collect()
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn is_unitary(&self) -> bool {
        self.instructions.iter().all(Instruction::is_unitary)
    }

    pub fn has_measurements(&self) -> bool {
        self.instructions
            .iter()
            .any(|i| matches!(i, Instruction::Measure { .. }))
    }

    fn check_qubit(&self, q: Qubit) -> Result<(), CircuitError> {
        if q.0 >= self.num_qubits {
            return Err(CircuitError::QubitOutOfRange(q, self.num_qubits));
        }
        if self.measured[q.0] {
            return Err(CircuitError::MeasuredQubitReused(q));
        }
        Ok(())
    }

    fn check_clbit(&self, c: Clbit) -> Result<(), CircuitError> {
        if c.0 >= self.num_clbits {
            return Err(CircuitError::ClbitOutOfRange(c, self.num_clbits));
        }
        Ok(())
    }

    fn check_gate(&self, gate: &Gate) -> Result<(), CircuitError> {
        for &q in gate.qubits() {
            self.check_qubit(q)?;
        }
        Ok(())
    }

    /// Validates `instr` against the current state and appends it.
    pub fn push(&mut self, instr: impl Into<Instruction>) -> Result<(), CircuitError> {
        let instr = instr.into();
        match instr {
            Instruction::Unitary(gate) => self.check_gate(&gate)?,
            Instruction::Measure { qubit, clbit } => {
                self.check_qubit(qubit)?;
                self.check_clbit(clbit)?;
                if self.written[clbit.0] {
                    return Err(CircuitError::ClbitRewritten(clbit));
                }
                self.written[clbit.0] = true;
                self.measured[qubit.0] = true;
            }
            Instruction::Reset(qubit) => {
                if qubit.0 >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange(qubit, self.num_qubits));
                }
                self.measured[qubit.0] = false;
            }
            Instruction::Conditional { clbit, gate, .. } => {
                self.check_clbit(clbit)?;
                if !self.written[clbit.0] {
                    return Err(CircuitError::ReadBeforeWrite(clbit));
                }
                self.check_gate(&gate)?;
            }
        }
        self.instructions.push(instr);
        Ok(())
    }

    /// Appends a unitary gate built from `kind` and `operands`.
    pub fn apply(&mut self, kind: GateKind, operands: &[Qubit]) -> Result<(), CircuitError> {
        let gate = Gate::new(kind, operands)?;
        self.push(gate)
    }

    /// Appends every instruction of `other`, relabelling its qubits through
    /// `map` (index in `other` → qubit of `self`). `other` must not use
    /// classical bits.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[Qubit]) -> Result<(), CircuitError> {
        if map.len() != other.num_qubits {
            return Err(CircuitError::MapSize {
                expected: other.num_qubits,
                found: map.len(),
            });
        }
        for (idx, instr) in other.instructions.iter().enumerate() {
            let mapped = match instr {
                Instruction::Unitary(g) => Instruction::Unitary(g.remap(map)),
                Instruction::Reset(q) => Instruction::Reset(map[q.0]),
                _ => return Err(CircuitError::NonUnitarySegment(idx)),
            };
            self.push(mapped)?;
        }
        Ok(())
    }

    /// Appends the instructions of `other` unchanged (same qubit and bit
    /// indices).
    pub fn extend_from(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        for &instr in &other.instructions {
            self.push(instr)?;
        }
        Ok(())
    }

    /// The inverse of instructions `range`, as a new circuit over the same
    /// registers: order reversed, S↔S†, T↔T†, everything else self-inverse.
    pub fn adjoint_segment(&self, range: Range<usize>) -> Result<Circuit, CircuitError> {
        if range.start > range.end || range.end > self.instructions.len() {
            return Err(CircuitError::SegmentRange {
                start: range.start,
                end: range.end,
                len: self.instructions.len(),
            });
        }
        let mut out = Circuit::new(self.num_qubits, self.num_clbits, self.roles.clone())?;
        for idx in range.rev() {
            match self.instructions[idx] {
                Instruction::Unitary(g) => out.push(g.inverse())?,
                _ => return Err(CircuitError::NonUnitarySegment(idx)),
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Result<Circuit, CircuitError> {
        self.adjoint_segment(0..self.instructions.len())
    }

    pub fn count_primitives(&self) -> GateCounts {
        let mut counts = GateCounts::default();
        for instr in &self.instructions {
            match instr {
                Instruction::Unitary(g) => *counts.unconditional.entry(g.kind()).or_default() += 1,
                Instruction::Conditional { value, gate, .. } => {
                    let map = if *value {
                        &mut counts.conditional_on_one
                    } else {
                        &mut counts.conditional_on_zero
                    };
                    *map.entry(gate.kind()).or_default() += 1;
                }
                Instruction::Measure { .. } => counts.measurements += 1,
                Instruction::Reset(_) => counts.resets += 1,
            }
        }
        counts
    }
}

/// Which conditional bodies a count should include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodySelection {
    /// Unconditional gates only.
    None,
    /// Unconditional gates plus bodies guarded by `bit == 1`.
    OnOne,
    /// Unconditional gates plus bodies guarded by `bit == 0`.
    OnZero,
}

/// Per-kind gate totals. Conditional bodies are kept apart, keyed by the bit
/// value they wait for, so best- and worst-case totals can be formed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub unconditional: BTreeMap<GateKind, usize>,
    pub conditional_on_one: BTreeMap<GateKind, usize>,
    pub conditional_on_zero: BTreeMap<GateKind, usize>,
    pub measurements: usize,
    pub resets: usize,
}

impl GateCounts {
    pub fn get(&self, kind: GateKind) -> usize {
        self.unconditional.get(&kind).copied().unwrap_or(0)
    }

    fn total(&self, sel: BodySelection, pred: impl Fn(GateKind) -> bool) -> usize {
        let sum = |m: &BTreeMap<GateKind, usize>| -> usize {
            m.iter().filter(|(k, _)| pred(**k)).map(|(_, v)| v).sum()
        };
        let extra = match sel {
            BodySelection::None => 0,
            BodySelection::OnOne => sum(&self.conditional_on_one),
            BodySelection::OnZero => sum(&self.conditional_on_zero),
        };
        sum(&self.unconditional) + extra
    }

    /// CX + CZ, each counted as one two-qubit gate.
    pub fn two_qubit(&self, sel: BodySelection) -> usize {
        self.total(sel, GateKind::is_two_qubit)
    }

    /// T + T†.
    pub fn t_count(&self, sel: BodySelection) -> usize {
        self.total(sel, GateKind::is_t)
    }

    pub fn is_zero(&self) -> bool {
        self.unconditional.values().all(|&v| v == 0)
            && self.conditional_on_one.values().all(|&v| v == 0)
            && self.conditional_on_zero.values().all(|&v| v == 0)
            && self.measurements == 0
            && self.resets == 0
    }
}

fn merge(into: &mut BTreeMap<GateKind, usize>, from: &BTreeMap<GateKind, usize>) {
    for (&k, &v) in from {
        *into.entry(k).or_default() += v;
    }
}

impl AddAssign<&GateCounts> for GateCounts {
    fn add_assign(&mut self, rhs: &GateCounts) {
        merge(&mut self.unconditional, &rhs.unconditional);
        merge(&mut self.conditional_on_one, &rhs.conditional_on_one);
        merge(&mut self.conditional_on_zero, &rhs.conditional_on_zero);
        self.measurements += rhs.measurements;
        self.resets += rhs.resets;
    }
}

impl Add for GateCounts {
    type Output = GateCounts;

    fn add(mut self, rhs: GateCounts) -> GateCounts {
        self += &rhs;
        self
    }
}
