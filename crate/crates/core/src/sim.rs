//! Dense statevector simulation with exhaustive measurement branching.
//!
//! Basis ordering: qubit 0 is the most significant bit of a basis index, so a
//! gate's operand list reads left to right as the binary expansion of the
//! matrix index. Block definitions use the same convention.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind, Instruction, Qubit};
use crate::matrix::Matrix;
use crate::synth::SynthesisResult;

/// Resource guard for dense simulation.
pub const MAX_QUBITS: usize = 24;
/// Largest unitary [`extract_unitary`] will build.
pub const MAX_UNITARY_QUBITS: usize = 12;
/// Branches whose absolute probability falls below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-14;
/// Per-branch tolerance used by [`check_cnx_equivalence`].
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;
/// Largest control count accepted for exhaustive basis verification.
pub const MAX_EXHAUSTIVE_CONTROLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("state has {found} qubits but the circuit has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} qubits exceeds the simulation limit of {1}")]
    TooManyQubits(usize, usize),
    #[error("instruction {0} is not unitary")]
    NotUnitary(usize),
    #[error("exhaustive verification is limited to n <= {MAX_EXHAUSTIVE_CONTROLS}, got n = {0}")]
    ExhaustiveTooLarge(usize),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn phase_eighth(k: i32) -> Complex64 {
    Complex64::from_polar(1.0, f64::from(k) * std::f64::consts::FRAC_PI_4)
}

impl Statevector {
    /// |0…0⟩ on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Statevector {
        Statevector::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Statevector {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Statevector { num_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Statevector, SimError> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(SimError::BadLength(len));
        }
        Ok(Statevector {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn random(num_qubits: usize, rng: &mut impl Rng) -> Statevector {
        let mut amps: Vec<Complex64> = (0..1usize << num_qubits)
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Statevector { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Tensor product `self ⊗ |0…0⟩` with `extra` fresh qubits appended.
    pub fn with_zero_qubits(&self, extra: usize) -> Statevector {
        let mut amps = vec![ZERO; 1 << (self.num_qubits + extra)];
        for (i, &a) in self.amps.iter().enumerate() {
            amps[i << extra] = a;
        }
        Statevector {
            num_qubits: self.num_qubits + extra,
            amps,
        }
    }

    fn mask(&self, q: Qubit) -> usize {
        1 << (self.num_qubits - 1 - q.0)
    }

    fn scale_where_set(&mut self, bit: usize, phase: Complex64) {
        for chunk in self.amps.chunks_mut(2 * bit) {
            for a in &mut chunk[bit..] {
                *a *= phase;
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let qs = gate.qubits();
        let bit = self.mask(qs[0]);
        match gate.kind() {
            GateKind::X => {
                for chunk in self.amps.chunks_mut(2 * bit) {
                    let (lo, hi) = chunk.split_at_mut(bit);
                    lo.swap_with_slice(hi);
                }
            }
            GateKind::H => {
                for chunk in self.amps.chunks_mut(2 * bit) {
                    let (lo, hi) = chunk.split_at_mut(bit);
                    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = (x + y) * FRAC_1_SQRT_2;
                        *b = (x - y) * FRAC_1_SQRT_2;
                    }
                }
            }
            GateKind::S => self.scale_where_set(bit, phase_eighth(2)),
            GateKind::Sdg => self.scale_where_set(bit, phase_eighth(-2)),
            GateKind::T => self.scale_where_set(bit, phase_eighth(1)),
            GateKind::Tdg => self.scale_where_set(bit, phase_eighth(-1)),
            GateKind::CX => {
                let tbit = self.mask(qs[1]);
                for i in 0..self.amps.len() {
                    if i & bit != 0 && i & tbit == 0 {
                        self.amps.swap(i, i | tbit);
                    }
                }
            }
            GateKind::CZ => {
                let other = self.mask(qs[1]);
                let both = bit | other;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & both == both {
                        *a = -*a;
                    }
                }
            }
        }
    }

    /// Probability of reading 1 on `q`.
    pub fn probability_one(&self, q: Qubit) -> f64 {
        let bit = self.mask(q);
        self.amps
            .chunks(2 * bit)
            .flat_map(|c| &c[bit..])
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// Projects `q` onto `outcome` and renormalizes with the given branch
    /// probability.
    fn project(&mut self, q: Qubit, outcome: bool, probability: f64) {
        let bit = self.mask(q);
        let scale = 1.0 / probability.sqrt();
        for chunk in self.amps.chunks_mut(2 * bit) {
            let (lo, hi) = chunk.split_at_mut(bit);
            let (keep, kill) = if outcome { (hi, lo) } else { (lo, hi) };
            kill.fill(ZERO);
            for a in keep {
                *a *= scale;
            }
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// One leaf of the measurement tree.
#[derive(Debug, Clone)]
pub struct BranchState {
    /// Recorded value of each classical bit; `None` if never written on this
    /// path.
    pub outcomes: Vec<Option<bool>>,
    pub probability: f64,
    /// Post-selected state, renormalized.
    pub state: Statevector,
}

#[derive(Debug, Clone)]
pub struct BranchRun {
    pub branches: Vec<BranchState>,
    /// Total probability of branches dropped below [`PRUNE_THRESHOLD`].
    pub pruned_probability: f64,
}

impl BranchRun {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

fn check_dims(circuit: &Circuit, state: &Statevector) -> Result<(), SimError> {
    if circuit.num_qubits() > MAX_QUBITS {
        return Err(SimError::TooManyQubits(circuit.num_qubits(), MAX_QUBITS));
    }
    if circuit.num_qubits() != state.num_qubits {
        return Err(SimError::DimensionMismatch {
            expected: circuit.num_qubits(),
            found: state.num_qubits,
        });
    }
    Ok(())
}

/// Applies a unitary-only circuit in place.
pub fn run_unitary(circuit: &Circuit, state: &mut Statevector) -> Result<(), SimError> {
    check_dims(circuit, state)?;
    for (idx, instr) in circuit.instructions().iter().enumerate() {
        match instr {
            Instruction::Unitary(g) => state.apply_gate(g),
            _ => return Err(SimError::NotUnitary(idx)),
        }
    }
    Ok(())
}

/// Runs `circuit` on `input`, following every measurement outcome with
/// non-negligible probability (depth first).
pub fn run_branches(circuit: &Circuit, input: &Statevector) -> Result<BranchRun, SimError> {
    check_dims(circuit, input)?;
    let mut run = BranchRun {
        branches: Vec::new(),
        pruned_probability: 0.0,
    };
    explore(
        circuit.instructions(),
        0,
        input.clone(),
        vec![None; circuit.num_clbits()],
        1.0,
        &mut run,
    );
    Ok(run)
}

fn explore(
    instrs: &[Instruction],
    mut pc: usize,
    mut state: Statevector,
    outcomes: Vec<Option<bool>>,
    probability: f64,
    run: &mut BranchRun,
) {
    while pc < instrs.len() {
        match instrs[pc] {
            Instruction::Unitary(g) => state.apply_gate(&g),
            Instruction::Conditional { clbit, value, gate } => {
                if outcomes[clbit.0] == Some(value) {
                    state.apply_gate(&gate);
                }
            }
            Instruction::Measure { qubit, clbit } => {
                let p1 = state.probability_one(qubit);
                let splits = [(false, 1.0 - p1), (true, p1)];
                let live: Vec<_> = splits
                    .into_iter()
                    .filter(|&(_, p)| {
                        let keep = probability * p >= PRUNE_THRESHOLD;
                        if !keep && p > 0.0 {
                            run.pruned_probability += probability * p;
                        }
                        keep
                    })
                    .collect();
                let last = live.len().saturating_sub(1);
                for (i, &(outcome, p)) in live.iter().enumerate() {
                    let mut branch = if i == last {
                        std::mem::replace(&mut state, Statevector { num_qubits: 0, amps: Vec::new() })
                    } else {
                        state.clone()
                    };
                    branch.project(qubit, outcome, p);
                    let mut rec = outcomes.clone();
                    rec[clbit.0] = Some(outcome);
                    explore(instrs, pc + 1, branch, rec, probability * p, run);
                }
                return;
            }
            Instruction::Reset(qubit) => {
                let p1 = state.probability_one(qubit);
                if p1 < PRUNE_THRESHOLD {
                    // already |0⟩
                } else if 1.0 - p1 < PRUNE_THRESHOLD {
                    state.apply_gate(&Gate::single(GateKind::X, qubit));
                } else {
                    // Unmeasured superposition: reset is an unrecorded
                    // measurement followed by a flip on the 1 branch.
                    let mut one = state.clone();
                    one.project(qubit, true, p1);
                    one.apply_gate(&Gate::single(GateKind::X, qubit));
                    explore(instrs, pc + 1, one, outcomes.clone(), probability * p1, run);
                    state.project(qubit, false, 1.0 - p1);
                    explore(instrs, pc + 1, state, outcomes, probability * (1.0 - p1), run);
                    return;
                }
            }
        }
        pc += 1;
    }
    run.branches.push(BranchState {
        outcomes,
        probability,
        state,
    });
}

/// Matrix of a unitary-only circuit: column `j` is the circuit applied to
/// basis state `j`.
pub fn extract_unitary(circuit: &Circuit) -> Result<Matrix, SimError> {
    if circuit.num_qubits() > MAX_UNITARY_QUBITS {
        return Err(SimError::TooManyQubits(circuit.num_qubits(), MAX_UNITARY_QUBITS));
    }
    if let Some(idx) = circuit.instructions().iter().position(|i| !i.is_unitary()) {
        return Err(SimError::NotUnitary(idx));
    }
    let n = circuit.num_qubits();
    let columns = (0..1usize << n)
        .map(|j| {
            let mut s = Statevector::basis(n, j);
            run_unitary(circuit, &mut s)?;
            Ok(s.amps)
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(Matrix::from_columns(&columns))
}

/// Which main-register inputs to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputSet {
    /// Every computational basis state of controls ⊗ target.
    ExhaustiveBasis,
    /// Haar-random superpositions over controls ⊗ target.
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub inputs: usize,
    pub branches: usize,
    /// Largest per-branch deviation from C^nX·ψ after phase alignment.
    pub worst_deviation: f64,
    /// Largest |Σ p − 1| over inputs (pruned mass included).
    pub worst_probability_error: f64,
    /// Largest amplitude norm left on ancilla ≠ 0 states.
    pub worst_ancilla_leak: f64,
    pub pruned_probability: f64,
    pub failures: usize,
    pub passed: bool,
}

/// Applies the ideal C^nX to a main-register state (controls first, target
/// last).
pub fn ideal_cnx(n: usize, input: &Statevector) -> Statevector {
    let mut out = input.clone();
    let all_ones = ((1usize << n) - 1) << 1;
    out.amps.swap(all_ones, all_ones | 1);
    out
}

struct InputOutcome {
    branches: usize,
    worst_deviation: f64,
    probability_error: f64,
    leak: f64,
    pruned: f64,
}

fn check_one(result: &SynthesisResult, main: &Statevector) -> Result<InputOutcome, SimError> {
    let ancillas = result.ancillas.len();
    let input = main.with_zero_qubits(ancillas);
    let run = run_branches(&result.circuit, &input)?;
    let ideal = ideal_cnx(result.n, main);
    let low = (1usize << ancillas) - 1;
    let mut worst_deviation: f64 = 0.0;
    let mut leak: f64 = 0.0;
    for branch in &run.branches {
        let amps = branch.state.amplitudes();
        let stray: f64 = amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & low != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        leak = leak.max(stray.sqrt());
        let reduced: Vec<Complex64> = (0..ideal.amps.len()).map(|j| amps[j << ancillas]).collect();
        worst_deviation = worst_deviation.max(phase_aligned_deviation(&ideal.amps, &reduced));
    }
    let total = run.total_probability() + run.pruned_probability;
    Ok(InputOutcome {
        branches: run.branches.len(),
        worst_deviation,
        probability_error: (total - 1.0).abs(),
        leak,
        pruned: run.pruned_probability,
    })
}

/// max_i |e^{-iθ}·actual_i − ideal_i| with θ the phase of ⟨ideal|actual⟩.
pub fn phase_aligned_deviation(ideal: &[Complex64], actual: &[Complex64]) -> f64 {
    let overlap: Complex64 = ideal.iter().zip(actual).map(|(a, b)| a.conj() * b).sum();
    if overlap.norm() < 1e-12 {
        return f64::INFINITY;
    }
    let phase = (overlap / overlap.norm()).conj();
    ideal
        .iter()
        .zip(actual)
        .map(|(a, b)| (b * phase - a).norm())
        .fold(0.0, f64::max)
}

/// Checks every measurement branch of a synthesized C^nX circuit against the
/// ideal gate, up to a per-branch global phase.
pub fn check_cnx_equivalence(result: &SynthesisResult, inputs: InputSet) -> Result<EquivalenceReport, SimError> {
    let n = result.n;
    let main_qubits = n + 1;
    if result.circuit.num_qubits() > MAX_QUBITS {
        return Err(SimError::TooManyQubits(result.circuit.num_qubits(), MAX_QUBITS));
    }
    let states: Vec<Statevector> = match inputs {
        InputSet::ExhaustiveBasis => {
            if n > MAX_EXHAUSTIVE_CONTROLS {
                return Err(SimError::ExhaustiveTooLarge(n));
            }
            (0..1usize << main_qubits)
                .map(|i| Statevector::basis(main_qubits, i))
                .collect()
        }
        InputSet::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| Statevector::random(main_qubits, &mut rng)).collect()
        }
    };
    let outcomes = states
        .par_iter()
        .map(|s| check_one(result, s))
        .collect::<Result<Vec<_>, SimError>>()?;

    let mut report = EquivalenceReport {
        n,
        inputs: outcomes.len(),
        branches: 0,
        worst_deviation: 0.0,
        worst_probability_error: 0.0,
        worst_ancilla_leak: 0.0,
        pruned_probability: 0.0,
        failures: 0,
        passed: true,
    };
    for o in outcomes {
        report.branches += o.branches;
        report.worst_deviation = report.worst_deviation.max(o.worst_deviation);
        report.worst_probability_error = report.worst_probability_error.max(o.probability_error);
        report.worst_ancilla_leak = report.worst_ancilla_leak.max(o.leak);
        report.pruned_probability += o.pruned;
        if !(o.worst_deviation < EQUIVALENCE_TOLERANCE
            && o.probability_error < EQUIVALENCE_TOLERANCE
            && o.leak < EQUIVALENCE_TOLERANCE)
        {
            report.failures += 1;
        }
    }
    report.passed = report.failures == 0;
    Ok(report)
}
