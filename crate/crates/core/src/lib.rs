//! Clifford+T synthesis and verification of multi-controlled Toffoli gates.
//!
//! * [`circuit`]: validated instruction lists with measurement, reset and
//!   classically conditioned gates.
//! * [`blocks`]: certified composite gates and measurement-based uncompute.
//! * [`synth`]: plans and circuits for the static and dynamic strategies.
//! * [`resources`]: counts, T-depth, closed-form costs and the cost table.
//! * [`sim`]: branch-enumerating statevector simulation and equivalence checks.
//! * [`qasm`]: OpenQASM 3 subset emitter and parser.

pub mod blocks;
pub mod circuit;
pub mod matrix;
pub mod qasm;
pub mod resources;
pub mod sim;
pub mod synth;

pub use blocks::{BlockKind, BlockReport, BlockSpan, Certificate};
pub use circuit::{Circuit, Clbit, Gate, GateKind, Instruction, Qubit, Role};
pub use resources::{Cost, CostCase, DepthMode, OutcomeAssumption, ResourceReport};
pub use sim::{EquivalenceReport, InputSet, Statevector};
pub use synth::{synthesize, Strategy, SynthesisResult};
