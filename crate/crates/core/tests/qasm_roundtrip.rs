use dynmcx::qasm::{emit, emit_result, parse};
use dynmcx::synth::synthesize;
use dynmcx::Strategy;

#[test]
fn round_trip_every_synthesized_circuit() {
    for s in Strategy::ALL {
        for n in 3..=10 {
            if !s.supports(n) {
                continue;
            }
            let r = synthesize(n, s).unwrap();
            let text = emit(&r.circuit);
            assert_eq!(parse(&text).unwrap(), r.circuit, "{s} n={n}");
            assert_eq!(parse(&emit_result(&r)).unwrap(), r.circuit, "{s} n={n}");
        }
    }
}

#[test]
fn emission_is_byte_stable() {
    for s in Strategy::ALL {
        let a = emit_result(&synthesize(6, s).unwrap());
        let b = emit_result(&synthesize(6, s).unwrap());
        assert_eq!(a, b);
        assert!(!a.contains('\r'));
    }
}

fn count(text: &str, needle: &str) -> usize {
    text.lines().filter(|l| l.contains(needle)).count()
}

#[test]
fn dynamic_full_three_has_one_feedforward() {
    let text = emit(&synthesize(3, Strategy::DynamicFull).unwrap().circuit);
    assert_eq!(count(&text, "measure"), 1);
    assert_eq!(count(&text, "if ("), 1);
    assert_eq!(count(&text, "reset"), 1);
    assert!(text.contains("qubit[3] ctrl;\nqubit[1] tgt;\nqubit[1] anc;\nbit[1] mbit;\n"));
}

#[test]
fn static_half_four_has_no_feedforward() {
    let text = emit(&synthesize(4, Strategy::StaticHalf).unwrap().circuit);
    assert_eq!(count(&text, "measure"), 0);
    assert_eq!(count(&text, "if ("), 0);
    assert!(!text.lines().any(|l| l.starts_with("bit[")));
}
