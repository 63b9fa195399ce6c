use dynmcx::circuit::{Circuit, CircuitError, Clbit, Gate, GateKind, Instruction, Qubit, Role};
use dynmcx::matrix::Matrix;
use dynmcx::qasm::{emit, parse};
use dynmcx::sim::{extract_unitary, run_unitary, Statevector};
use proptest::prelude::*;

fn gate_strategy(nq: usize) -> impl Strategy<Value = Gate> {
    (0..GateKind::ALL.len(), 0..nq, 1..nq).prop_map(move |(k, a, off)| {
        let kind = GateKind::ALL[k];
        if kind.arity() == 1 {
            Gate::single(kind, Qubit(a))
        } else {
            Gate::two(kind, Qubit(a), Qubit((a + off) % nq))
        }
    })
}

fn unitary_circuit() -> impl Strategy<Value = Circuit> {
    (2usize..=6).prop_flat_map(|nq| {
        prop::collection::vec(gate_strategy(nq), 0..40).prop_map(move |gates| {
            let mut c = Circuit::uniform(nq, Role::Ancilla).unwrap();
            for g in gates {
                c.push(g).unwrap();
            }
            c
        })
    })
}

/// Random dynamic circuit over ctrl/tgt/anc registers: gates anywhere, and
/// every ancilla may be measured, used as a condition, then reset.
fn dynamic_circuit() -> impl Strategy<Value = Circuit> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(nc, na)| {
        let nq = nc + 1 + na;
        (
            prop::collection::vec(gate_strategy(nq), 0..20),
            prop::collection::vec((0..na, any::<bool>(), gate_strategy(nc + 1)), 0..4),
        )
            .prop_map(move |(gates, feeds)| {
                let mut roles = vec![Role::Control; nc];
                roles.push(Role::Target);
                roles.extend(std::iter::repeat(Role::Ancilla).take(na));
                let mut c = Circuit::new(nq, feeds.len(), roles).unwrap();
                for g in gates {
                    c.push(g).unwrap();
                }
                for (k, (a, value, gate)) in feeds.into_iter().enumerate() {
                    let q = Qubit(nc + 1 + a);
                    c.push(Instruction::Measure { qubit: q, clbit: Clbit(k) }).unwrap();
                    c.push(Instruction::Conditional { clbit: Clbit(k), value, gate }).unwrap();
                    c.push(Instruction::Reset(q)).unwrap();
                }
                c
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_undoes_circuit(c in unitary_circuit()) {
        let mut both = c.clone();
        both.extend_from(&c.adjoint().unwrap()).unwrap();
        let m = extract_unitary(&both).unwrap();
        prop_assert!(m.max_abs_diff(&Matrix::identity(1 << c.num_qubits())) < 1e-10);
    }

    #[test]
    fn counts_add_under_concatenation(a in unitary_circuit(), b in unitary_circuit()) {
        let nq = a.num_qubits().max(b.num_qubits());
        let widen = |c: &Circuit| {
            let mut w = Circuit::uniform(nq, Role::Ancilla).unwrap();
            w.extend_from(c).unwrap();
            w
        };
        let (a, b) = (widen(&a), widen(&b));
        let mut ab = a.clone();
        ab.extend_from(&b).unwrap();
        prop_assert_eq!(ab.count_primitives(), a.count_primitives() + b.count_primitives());
    }

    #[test]
    fn unitary_gates_preserve_norm(c in unitary_circuit(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = Statevector::random(c.num_qubits(), &mut rng);
        run_unitary(&c, &mut s).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qasm_round_trip(c in dynamic_circuit()) {
        let text = emit(&c);
        prop_assert_eq!(parse(&text).unwrap(), c);
        prop_assert_eq!(emit(&parse(&text).unwrap()), text);
    }

    #[test]
    fn conditional_before_measure_is_rejected(nq in 2usize..5, value in any::<bool>()) {
        let mut c = Circuit::new(nq, 1, vec![Role::Ancilla; nq]).unwrap();
        let err = c.push(Instruction::Conditional {
            clbit: Clbit(0),
            value,
            gate: Gate::two(GateKind::CZ, Qubit(0), Qubit(1)),
        });
        prop_assert_eq!(err, Err(CircuitError::ReadBeforeWrite(Clbit(0))));
        prop_assert!(c.is_empty());
    }
}
