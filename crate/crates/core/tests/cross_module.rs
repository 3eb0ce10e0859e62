//! Gate-level circuits checked against the abstract representations and
//! against plain integer arithmetic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aep_core::aep::Decoded;
use aep_core::circuit::{
    build_piecewise_adder, build_ripple_adder, build_runway_init, count_costs, read_bits_value,
    simulate_addition_sequence, write_bits_value,
};
use aep_core::rep::{make_multi_runway_aep, make_runway_aep, LayoutParams, RunwayParams};

#[test]
fn ripple_adder_exhaustive_small() {
    for n in 1..=6usize {
        let circuit = build_ripple_adder(n);
        let tally = count_costs(&circuit);
        assert!(tally.toffoli_count <= 2 * n as u64);
        assert!(tally.toffoli_depth <= tally.toffoli_count);
        for a in 0..1u64 << n {
            for b in 0..1u64 << n {
                let mut state = vec![false; circuit.num_bits()];
                write_bits_value(&mut state, 0..n, a);
                write_bits_value(&mut state, n..2 * n, b);
                let out = circuit.apply(&state).unwrap();
                assert_eq!(read_bits_value(&out, n..2 * n), (a + b) & ((1 << n) - 1));
                assert_eq!(read_bits_value(&out, 0..n), a);
            }
        }
    }
}

#[test]
fn ripple_adder_random_wide() {
    let n = 64usize;
    let circuit = build_ripple_adder(n);
    assert!(count_costs(&circuit).toffoli_count <= 2 * n as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..10_000 {
        let a: u64 = rng.gen();
        let b: u64 = rng.gen();
        let mut state = vec![false; circuit.num_bits()];
        write_bits_value(&mut state, 0..n, a);
        write_bits_value(&mut state, n..2 * n, b);
        let out = circuit.apply(&state).unwrap();
        assert_eq!(read_bits_value(&out, n..2 * n), a.wrapping_add(b));
        assert_eq!(read_bits_value(&out, 0..n), a);
        assert!(!out[2 * n]);
    }
}

#[test]
fn ripple_toffoli_count_linear() {
    for n in 1..=64usize {
        assert!(count_costs(&build_ripple_adder(n)).toffoli_count <= 2 * n as u64);
    }
}

#[test]
fn runway_init_matches_encode() {
    // All (g, c) at n=5, p=2, m=2 produce exactly the packed encoding.
    let (n, p, m) = (5usize, 2usize, 2usize);
    let aep = make_runway_aep(RunwayParams {
        register_bits: n as u32,
        position: p as u32,
        runway_bits: m as u32,
        offset: 0,
    })
    .unwrap();
    let circuit = build_runway_init(n, p, m).unwrap();
    for g in 0..1u64 << n {
        for c in 0..1u64 << m {
            let mut state = vec![false; circuit.num_bits()];
            write_bits_value(&mut state, 0..p, g & ((1 << p) - 1));
            write_bits_value(&mut state, p..p + m, c);
            write_bits_value(&mut state, p + m..n + m, g >> p);
            let out = circuit.apply(&state).unwrap();
            assert_eq!(
                read_bits_value(&out, 0..n + m),
                aep.encode(g, c).unwrap(),
                "g={g} c={c}"
            );
            assert!(out[n + m..].iter().all(|&b| !b), "ancillas restored");
        }
    }
}

#[test]
fn runway_init_reversible() {
    let circuit = build_runway_init(6, 3, 2).unwrap();
    let inverse = circuit.reversed();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let mut state = vec![false; circuit.num_bits()];
        write_bits_value(&mut state, 0..8, rng.gen::<u64>() & 0xff);
        let round = inverse.apply(&circuit.apply(&state).unwrap()).unwrap();
        assert_eq!(round, state);
    }
}

/// Applies a circuit with scratch space to every packed data value and
/// checks it agrees with the abstract encoded permutation.
fn assert_circuit_matches_encoded_perm(layout: &LayoutParams, k: u64) {
    let aep = make_multi_runway_aep(layout, k as i64).unwrap();
    let circuit = build_piecewise_adder(layout, k).unwrap();
    let data_bits = layout.encoded_bits() as usize;
    for e in 0..aep.encoded_size() {
        let mut state = vec![false; circuit.num_bits()];
        write_bits_value(&mut state, 0..data_bits, e);
        let out = circuit.apply(&state).unwrap();
        assert_eq!(
            read_bits_value(&out, 0..data_bits),
            aep.apply_encoded(e).unwrap(),
            "layout={layout:?} k={k} e={e}"
        );
        assert!(out[data_bits..].iter().all(|&b| !b));
    }
}

#[test]
fn piecewise_adder_matches_single_runway() {
    // Single runway n=4, p=2, m=2: circuit equals the encoded permutation for
    // every k and every packed encoding.
    let layout = LayoutParams::new(4, vec![2], 2).unwrap();
    for k in 0..16u64 {
        assert_circuit_matches_encoded_perm(&layout, k);
    }
}

#[test]
fn piecewise_adder_matches_two_runways() {
    let layout = LayoutParams::new(6, vec![2, 4], 1).unwrap();
    for k in 0..64u64 {
        assert_circuit_matches_encoded_perm(&layout, k);
    }
}

#[test]
fn piecewise_adder_no_cross_piece_gates() {
    let layout = LayoutParams::new(8, vec![3, 6], 2).unwrap();
    let circuit = build_piecewise_adder(&layout, 0b10110101).unwrap();
    let mut regions: Vec<std::ops::Range<usize>> = Vec::new();
    for i in 0.. {
        match (circuit.find_label(&format!("piece{i}")), circuit.find_label(&format!("piece{i}_scratch"))) {
            (Some(data), Some(scratch)) => regions.push(data.start..data.end.max(scratch.end)),
            _ => break,
        }
    }
    // Piece data and its scratch are not contiguous, so check membership of
    // every gate index against one piece's pair of ranges.
    let mut piece_ranges: Vec<(std::ops::Range<usize>, std::ops::Range<usize>)> = Vec::new();
    for i in 0..regions.len() {
        piece_ranges.push((
            circuit.find_label(&format!("piece{i}")).unwrap(),
            circuit.find_label(&format!("piece{i}_scratch")).unwrap(),
        ));
    }
    for gate in circuit.gates() {
        let idx: Vec<usize> = match *gate {
            aep_core::circuit::Gate::Not { target } => vec![target],
            aep_core::circuit::Gate::Cnot { control, target } => vec![control, target],
            aep_core::circuit::Gate::Toffoli { control0, control1, target } => {
                vec![control0, control1, target]
            }
        };
        let within_one_piece = piece_ranges.iter().any(|(data, scratch)| {
            idx.iter().all(|i| data.contains(i) || scratch.contains(i))
        });
        assert!(within_one_piece, "gate {gate:?} spans pieces");
    }
}

#[test]
fn piecewise_toffoli_counts_match_formula() {
    // Sum of per-piece ripple tallies: 2 * width per piece with a nonzero
    // slice, bounded by 2 * (n + m*r).
    let layout = LayoutParams::new(8, vec![3, 6], 2).unwrap();
    let full = count_costs(&build_piecewise_adder(&layout, 0xb5).unwrap());
    let budget: u64 = 2 * (8 + 2 * 2);
    assert!(full.toffoli_count <= budget);
    // All slices nonzero for k = 0b10110101 (slices 5, 6, 2), so equality.
    assert_eq!(full.toffoli_count, budget);
}

#[test]
fn addition_sequence_examples() {
    let layout = LayoutParams::new(6, vec![3], 2).unwrap();
    let decoded = simulate_addition_sequence(&layout, &[1, 1, 1], 0, 0).unwrap();
    assert!(matches!(decoded, Decoded::Value { value: 3, .. }));
    // Empty constants: the value and coset come back untouched.
    for c in 0..4 {
        assert_eq!(
            simulate_addition_sequence(&layout, &[], 9, c).unwrap(),
            Decoded::Value { value: 9, coset: c }
        );
    }
}

#[test]
fn addition_sequence_matches_integer_oracle_when_not_deviated() {
    let layout = LayoutParams::new(6, vec![3], 2).unwrap();
    let constants = [7u64, 12, 1];
    let total: u64 = constants.iter().sum();
    for g in (0..64).step_by(5) {
        let mut wrong = 0u64;
        for c in 0..4u64 {
            let decoded = simulate_addition_sequence(&layout, &constants, g, c).unwrap();
            match decoded {
                Decoded::Value { value, .. } if value == (g + total) % 64 => {}
                _ => wrong += 1,
            }
        }
        // k_count * r * 2^-m = 3 * 1 / 4 of the coset values may go wrong.
        assert!(wrong as f64 / 4.0 <= 3.0 * 1.0 / 4.0, "g={g} wrong={wrong}");
    }
}

#[test]
fn addition_sequence_error_fraction_bound() {
    // Two additions, one runway of length 2: at most k*r*2^-m = 1/2 of the
    // coset values give a wrong sum.
    let layout = LayoutParams::new(6, vec![3], 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let constants = [rng.gen::<u64>() % 64, rng.gen::<u64>() % 64];
        let total: u64 = constants.iter().sum();
        let g = rng.gen::<u64>() % 64;
        let wrong = (0..4u64)
            .filter(|&c| {
                !matches!(
                    simulate_addition_sequence(&layout, &constants, g, c).unwrap(),
                    Decoded::Value { value, .. } if value == (g + total) % 64
                )
            })
            .count();
        assert!(wrong as f64 / 4.0 <= 0.5, "constants={constants:?} g={g} wrong={wrong}");
    }
}

#[test]
fn addition_sequence_multi_runway_cross_check() {
    // The simulated pipeline agrees with the abstract model: decode of
    // (piecewise-add ∘ encode) equals decode of the encoded permutation.
    let layout = LayoutParams::new(7, vec![2, 4], 1).unwrap();
    let aep_k = |k: u64| make_multi_runway_aep(&layout, k as i64).unwrap();
    for k in [3u64, 25, 100] {
        let aep = aep_k(k);
        for g in (0..128).step_by(7) {
            for c in 0..aep.coset_size() {
                let simulated = simulate_addition_sequence(&layout, &[k], g, c).unwrap();
                let abstract_result =
                    aep.decode(aep.apply_encoded(aep.encode(g, c).unwrap()).unwrap()).unwrap();
                assert_eq!(simulated, abstract_result, "k={k} g={g} c={c}");
            }
        }
    }
}
