use polycode::codebook::{CodeParams, DeriveOptions};
use polycode::estimate::{
    compare_encodings, degree_scan, max_scan_degree, min_qubits, optimal_degree, plot_data, rows_csv, rows_text,
    sim_cost, threshold_k, threshold_scan, worst_term_rotation_cost, CostConstants, GateColumn, SimKind,
    ESTIMATE_CSV_HEADER,
};
use polycode::synth::asymptotic_term_cost;
use polycode::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn prime_at_least(n: u64) -> u64 {
    (n..).find(|&p| prime(p)).unwrap()
}

fn root_ceil(m: u64, k: u32) -> u64 {
    (1..).find(|r: &u64| r.checked_pow(k).map_or(true, |v| v >= m)).unwrap()
}

/// Qubits of the degree-D code from first principles; `D = 0` is `M`.
fn oracle_q(m: u64, f: u64, d: u64) -> Option<u64> {
    if d == 0 {
        return Some(m);
    }
    let g = f * (64 - m.leading_zeros()) as u64;
    let l = 2 * d * g + 1;
    let lp = prime_at_least(root_ceil(m, d as u32 + 1).max(l));
    (d < lp).then(|| lp * l)
}

fn binomial(m: u128, f: u128) -> u128 {
    (0..f).fold(1, |c, i| c * (m - i) / (i + 1))
}

#[test]
fn information_floor_small_cases() {
    assert!((min_qubits(4, 2).unwrap() - 6f64.log2()).abs() < 1e-12);
    assert_eq!(min_qubits(1000, 0).unwrap(), 0.0);
    assert_eq!(min_qubits(7, 7).unwrap(), 0.0);
    assert!(matches!(min_qubits(3, 4), Err(Error::InvalidArgument(_))));
}

#[test]
fn information_floor_large_arguments_match_exact_binomials() {
    for (m, f) in [(5000u64, 10u64), (100_000, 6), (4097, 12)] {
        let exact = (binomial(m as u128, f as u128) as f64).log2();
        assert!((min_qubits(m, f).unwrap() - exact).abs() < 1e-9 * exact, "M={m} F={f}");
    }
}

#[test]
fn information_floor_many_fermions() {
    // symmetric to F = 70000; summed factor by factor here
    let (m, f) = (1_000_000u64, 930_000u64);
    let direct: f64 = (0..m - f)
        .map(|i| ((m - i) as f64).log2() - ((m - f - i) as f64).log2())
        .sum();
    assert!((min_qubits(m, f).unwrap() - direct).abs() < 1e-9 * direct);
}

#[test]
fn information_floor_approaches_f_log_m() {
    let ratio = |m: u64| min_qubits(m, 3).unwrap() / (3.0 * (m as f64).log2());
    let rs: Vec<f64> = [1e3, 1e6, 1e9, 1e15].iter().map(|&m| ratio(m as u64)).collect();
    assert!(rs.windows(2).all(|w| w[0] < w[1]));
    assert!(rs[3] > 0.95 && rs[3] < 1.0);
}

#[test]
fn water_example_degrees() {
    let p = optimal_degree(1_000_000, 10).unwrap();
    assert_eq!((p.degree, p.qubits), (1, 404_609));
    let p = optimal_degree(10_000_000, 10).unwrap();
    assert_eq!(p.degree, 2);
    assert!((p.qubits as f64 / 9e5 - 1.0).abs() < 0.1, "{}", p.qubits);
    assert_eq!(optimal_degree(1000, 10).unwrap().degree, 0);
}

#[test]
fn water_threshold_is_118328() {
    let least = (118_320u64..=118_340)
        .find(|&m| CodeParams::derive(m, 10, 1, DeriveOptions::default()).unwrap().qubits < m)
        .unwrap();
    assert_eq!(least, 118_328);
}

#[test]
fn optimizer_matches_brute_force_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let m = 10f64.powf(rng.gen_range(1.0..9.0)) as u64;
        let f = rng.gen_range(1..=20u64);
        let best = optimal_degree(m, f).unwrap();
        let dmax = max_scan_degree(m) as u64;
        let oracle = (0..=dmax)
            .filter_map(|d| oracle_q(m, f, d).map(|q| (q, d)))
            .min()
            .unwrap();
        assert_eq!((best.qubits, best.degree as u64), oracle, "M={m} F={f}");
        for p in degree_scan(m, f, DeriveOptions::default()).unwrap() {
            assert!(best.qubits <= p.qubits);
            assert!(p.qubits as f64 >= min_qubits(m, f.min(m)).unwrap());
        }
    }
}

#[test]
fn optimal_qubits_grow_like_f_squared_log_to_the_fourth() {
    let f = 10u64;
    let ratios: Vec<f64> = (4..=8)
        .map(|e| {
            let m = 10u64.pow(e);
            let q = optimal_degree(m, f).unwrap().qubits as f64;
            q / ((f * f) as f64 * (m as f64).log2().powi(4))
        })
        .collect();
    assert!(ratios.iter().all(|&r| r > 0.0 && r < 1.0), "{ratios:?}");
}

#[test]
fn encoding_table_rows() {
    let rows = compare_encodings(118_328, 10).unwrap();
    let get = |rows: &[polycode::estimate::EstimateRow], name: &str| {
        rows.iter().find(|r| r.encoding == name).cloned().unwrap()
    };
    assert_eq!(get(&rows, "degree-1").qubits, 118_327);
    assert_eq!(get(&rows, "jordan-wigner").qubits, 118_328);

    let rows = compare_encodings(1_000_000, 10).unwrap();
    let seg = get(&rows, "segment");
    assert_eq!(seg.qubit_formula, 950_000.0);
    // 45454 segments of 22 modes, each stored in 21 qubits, plus 12 leftover modes
    assert_eq!(seg.qubits, 45_454 * 21 + 12);
    assert_eq!(get(&rows, "degree-1").qubits, 1009 * 401);
    assert!(get(&rows, "optimal-degree").minimum);
    assert!(matches!(get(&rows, "jordan-wigner").gates, GateColumn::Asymptotic(_)));

    let rows = compare_encodings(100, 2).unwrap();
    let seg = get(&rows, "segment");
    assert_eq!(seg.qubits, 84);
    assert!(seg.minimum);
    assert!(rows
        .iter()
        .filter(|r| r.encoding.starts_with("degree-"))
        .all(|r| r.qubits > 84));
}

#[test]
fn table_output_formats() {
    let rows = compare_encodings(1_000_000, 10).unwrap();
    let csv = rows_csv(&rows);
    assert!(csv.starts_with(ESTIMATE_CSV_HEADER));
    assert_eq!(csv.lines().count(), rows.len() + 1);
    let text = rows_text(&rows);
    assert_eq!(text.lines().count(), rows.len() + 1);
    assert!(text
        .lines()
        .any(|l| l.starts_with("optimal-degree") && l.ends_with('*')));
    let plot = plot_data(&[1000, 10_000, 100_000], 4).unwrap();
    assert!(plot.lines().any(|l| l == "jordan-wigner,10000,10000"));
    assert_eq!(plot, plot_data(&[1000, 10_000, 100_000], 4).unwrap());
}

/// Largest k among the first 64 with `p_k² < L·p_{k+1}`, no early stop.
fn threshold_oracle(g: u64) -> usize {
    let l = 2 * g + 1;
    let primes: Vec<u64> = (l + 1..).filter(|&p| prime(p)).take(65).collect();
    (1..=64)
        .filter(|&k| primes[k - 1] * primes[k - 1] < l * primes[k])
        .max()
        .unwrap_or(0)
}

#[test]
fn threshold_matches_direct_prime_arithmetic() {
    // L = 3: 5² = 25 vs 3·7 = 21, 7² = 49 vs 3·11 = 33
    assert_eq!(threshold_k(1).unwrap(), 0);
    for g in 1..=250 {
        assert_eq!(threshold_k(g).unwrap(), threshold_oracle(g), "G={g}");
    }
}

#[test]
fn threshold_scan_never_exceeds_four() {
    let rows = threshold_scan(501).unwrap();
    assert_eq!(rows.len(), 250);
    assert!(rows.iter().all(|r| r.max_k <= 4));
    assert!(rows.iter().any(|r| r.max_k > 0));
    assert!(threshold_scan(500).is_err());
}

fn water() -> CodeParams {
    CodeParams::derive(1_000_000, 10, 1, DeriveOptions::default()).unwrap()
}

#[test]
fn qdrift_rotation_count_scales() {
    let k = CostConstants::default();
    let base = sim_cost(SimKind::Qdrift { t: 1.0, eps: 1e-3 }, 10.0, &water(), k).unwrap();
    let dbl = sim_cost(SimKind::Qdrift { t: 1.0, eps: 1e-3 }, 20.0, &water(), k).unwrap();
    let half = sim_cost(SimKind::Qdrift { t: 1.0, eps: 5e-4 }, 10.0, &water(), k).unwrap();
    assert_eq!(base.rotations, 200_000);
    assert_eq!(dbl.rotations, 4 * base.rotations);
    assert_eq!(half.rotations, 2 * base.rotations);
    assert_eq!(
        base.total_doubly_controlled,
        200_000 * base.per_rotation.doubly_controlled as u128
    );
}

#[test]
fn rpe_counts_and_input_validation() {
    let c = sim_cost(
        SimKind::Rpe { delta: 0.1, eta: 0.5 },
        3.0,
        &water(),
        CostConstants::default(),
    )
    .unwrap();
    assert_eq!((c.rotations, c.circuits), (1800, 4));
    for bad in [
        SimKind::Qdrift { t: 0.0, eps: 1e-3 },
        SimKind::Qdrift { t: 1.0, eps: -1.0 },
        SimKind::Rpe {
            delta: 0.1,
            eta: f64::NAN,
        },
    ] {
        assert!(sim_cost(bad, 1.0, &water(), CostConstants::default()).is_err());
    }
    assert!(sim_cost(
        SimKind::Rpe { delta: 0.1, eta: 0.5 },
        0.0,
        &water(),
        CostConstants::default()
    )
    .is_err());
}

#[test]
fn per_rotation_cost_tracks_asymptotic_formula() {
    let f = 10;
    let ratios: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&m| {
            let d = optimal_degree(m, f).unwrap().degree.max(1);
            let p = CodeParams::derive(m, f, d, DeriveOptions::default()).unwrap();
            worst_term_rotation_cost(&p).doubly_controlled as f64 / asymptotic_term_cost(&p)
        })
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 2.0, "{ratios:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qubits_non_decreasing_in_g(m in 2u64..1_000_000, d in 1usize..4, g in 1u64..60) {
        let a = CodeParams::derive(m, g, d, DeriveOptions::raw_g());
        let b = CodeParams::derive(m, g + 1, d, DeriveOptions::raw_g());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(a.qubits <= b.qubits);
        }
    }

    #[test]
    fn every_code_respects_the_information_floor(m in 2u64..100_000_000, f in 1u64..30, d in 1usize..5) {
        if let Ok(p) = CodeParams::derive(m, f, d, DeriveOptions::default()) {
            prop_assert!(p.qubits as f64 >= min_qubits(m, f.min(m)).unwrap());
        }
    }
}
