use polycode::bits::BitString;
use polycode::codebook::{
    verify_code, CodeParams, Codebook, DeriveOptions, SegmentParams, VerifyMode, EXHAUSTIVE_CODEWORD_LIMIT,
};
use polycode::ffpoly::{is_prime, PolyFn};
use polycode::Error;
use proptest::prelude::*;

/// Elementary codeword of mode `i` built straight from its polynomial graph.
fn graph_codeword(i: u64, d: usize, lp: u64, l: u64) -> Vec<usize> {
    let f = PolyFn::from_index(i, d, lp).unwrap();
    (0..l).map(|x| (x * lp + f.eval(x)) as usize).collect()
}

#[test]
fn small_layout_is_literal() {
    let book = Codebook::new(CodeParams::with_lprime(125, 1, 2, 5).unwrap()).unwrap();
    let rows = [
        (0usize, "10000 10000 10000 10000 10000"),
        (5, "10000 01000 00100 00010 00001"),
        (7, "00100 00010 00001 10000 01000"),
        (25, "10000 01000 00001 00001 01000"),
    ];
    for (mode, expected) in rows {
        assert_eq!(book.format_codeword(&book.elementary_codeword(mode).unwrap()), expected);
    }
}

#[test]
fn supports_are_polynomial_graphs() {
    for (m, g, d, lp) in [
        (9u64, 1u64, 1usize, 3u64),
        (25, 2, 1, 5),
        (125, 1, 2, 5),
        (343, 1, 2, 7),
    ] {
        let p = CodeParams::with_lprime(m, g, d, lp).unwrap();
        let book = Codebook::new(p.clone()).unwrap();
        for i in 0..m {
            assert_eq!(book.support(i as usize).unwrap(), graph_codeword(i, d, lp, p.l));
        }
    }
}

#[test]
fn holders_invert_supports() {
    for (m, g, d, lp) in [
        (9u64, 1u64, 1usize, 3u64),
        (20, 2, 1, 5),
        (125, 1, 2, 5),
        (300, 1, 2, 7),
    ] {
        let book = Codebook::new(CodeParams::with_lprime(m, g, d, lp).unwrap()).unwrap();
        let mut by_qubit = vec![Vec::new(); book.qubits()];
        for mode in 0..book.modes() {
            for q in book.support(mode).unwrap() {
                by_qubit[q].push(mode);
            }
        }
        for (q, expected) in by_qubit.iter().enumerate() {
            let mut got: Vec<usize> = book.holders(q).collect();
            got.sort_unstable();
            assert_eq!(&got, expected, "M={m} L'={lp} q={q}");
        }
    }
}

#[test]
fn every_small_code_passes_exhaustive_checks() {
    let mut checked = 0;
    for d in 1usize..=4 {
        for g in 1u64..=20 {
            let l = 2 * d as u64 * g + 1;
            for lp in (l..)
                .filter(|&p| is_prime(p))
                .take_while(|&p| p.pow(d as u32 + 1) <= EXHAUSTIVE_CODEWORD_LIMIT)
            {
                let p = CodeParams::with_lprime(lp.pow(d as u32 + 1), g, d, lp).unwrap();
                let r = verify_code(&p, VerifyMode::Exhaustive).unwrap();
                assert!(r.passed(), "D={d} G={g} L'={lp}: {r:?}");
                assert!(r.max_overlap <= d);
                checked += 1;
            }
        }
    }
    assert!(checked >= 10, "{checked}");
}

#[test]
fn large_code_passes_sampled_checks() {
    let p = CodeParams::with_lprime(37u64.pow(3), 3, 2, 37).unwrap();
    let r = verify_code(
        &p,
        VerifyMode::Sampled {
            trials: 10_000,
            seed: 11,
        },
    )
    .unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn parameter_errors() {
    assert!(matches!(
        CodeParams::with_lprime(100, 1, 1, 4),
        Err(Error::InvalidParams(_))
    ));
    assert!(CodeParams::with_lprime(10, 1, 1, 3).is_err());
    assert!(matches!(
        CodeParams::derive(
            1000,
            10,
            1,
            DeriveOptions {
                max_qubits: Some(1000),
                ..DeriveOptions::default()
            }
        ),
        Err(Error::Capacity(_))
    ));
    assert!(matches!(
        SegmentParams::new(5, 2),
        Err(Error::NoSegmentAdvantage { .. })
    ));
}

#[test]
fn margin_adds_four_fermions() {
    let raw = CodeParams::derive(1000, 6, 1, DeriveOptions::default()).unwrap();
    let margin = CodeParams::derive(1000, 6, 1, DeriveOptions::hamiltonian()).unwrap();
    assert_eq!(raw.g, 6 * 10);
    assert_eq!(margin.g, 10 * 10);
    assert_eq!(margin.fermions, Some(10));
}

#[test]
fn record_round_trip() {
    let p = CodeParams::derive(1_000_000, 10, 1, DeriveOptions::default()).unwrap();
    assert_eq!(CodeParams::from_record(&p.to_record()).unwrap(), p);
}

fn book_l5() -> Codebook {
    Codebook::new(CodeParams::with_lprime(49, 2, 1, 7).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn encode_decode_round_trip(modes in prop::collection::btree_set(0usize..49, 0..=2)) {
        let book = book_l5();
        let b = BitString::from_indices(49, modes.iter().copied()).unwrap();
        let w = book.encode(&b).unwrap();
        prop_assert_eq!(book.decode(&w).unwrap(), b);
        let overlaps = book.overlaps(&w);
        for (i, o) in overlaps.iter().enumerate() {
            if modes.contains(&i) {
                prop_assert!(2 * o > 5);
            } else {
                prop_assert!(2 * o < 5);
            }
        }
    }

    #[test]
    fn distinct_codewords_overlap_at_most_degree(a in 0usize..49, b in 0usize..49) {
        prop_assume!(a != b);
        let book = book_l5();
        let (wa, wb) = (book.elementary_codeword(a).unwrap(), book.elementary_codeword(b).unwrap());
        prop_assert_eq!(wa.weight(), 5);
        prop_assert!(wa.dot(&wb) <= 1);
    }

    #[test]
    fn overweight_input_is_rejected(modes in prop::collection::btree_set(0usize..49, 3..6)) {
        let b = BitString::from_indices(49, modes.iter().copied()).unwrap();
        let is_weight_error = matches!(book_l5().encode(&b), Err(Error::WeightExceeded { .. }));
        prop_assert!(is_weight_error);
    }
}
