use nalgebra::DMatrix;
use num_complex::Complex64;
use polycode::bits::BitString;
use polycode::bk::{
    bk_decode, bk_encode, majorana_support, number_parity_support, occupation_flip_support, occupation_set,
    parity_range, prefix_set, transform_matrix, update_set, MajoranaKind, PauliSupport,
};
use proptest::prelude::*;

type Mat = DMatrix<Complex64>;

fn all_majoranas(m: usize) -> Vec<Mat> {
    (0..m)
        .flat_map(|j| [MajoranaKind::Even, MajoranaKind::Odd].map(|k| majorana_support(m, j, k).unwrap().dense(m)))
        .collect()
}

fn max_abs(a: &Mat) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn majoranas_anticommute_exactly() {
    for m in 1..=5 {
        let g = all_majoranas(m);
        let dim = 1 << m;
        let id = Mat::identity(dim, dim);
        for (a, ga) in g.iter().enumerate() {
            for (b, gb) in g.iter().enumerate() {
                let anti = ga * gb + gb * ga;
                let expect = if a == b {
                    &id * Complex64::new(2.0, 0.0)
                } else {
                    Mat::zeros(dim, dim)
                };
                assert_eq!(max_abs(&(anti - expect)), 0.0, "M={m} a={a} b={b}");
            }
            assert_eq!(max_abs(&(ga.adjoint() - ga)), 0.0);
        }
    }
}

#[test]
fn products_of_majoranas_build_number_parity() {
    for m in 1..=5 {
        for j in 0..m {
            let c = majorana_support(m, j, MajoranaKind::Even).unwrap();
            let d = majorana_support(m, j, MajoranaKind::Odd).unwrap();
            // (-1)^{n_j} = -i c d
            let mut p = c.mul(&d);
            p.phase = (p.phase + 3) % 4;
            let z = number_parity_support(m, j).unwrap();
            assert_eq!(max_abs(&(p.dense(m) - z.dense(m))), 0.0, "M={m} j={j}");
        }
    }
}

fn occ(m: usize, bits: usize) -> BitString {
    BitString::from_indices(m, (0..m).filter(|j| bits >> j & 1 == 1)).unwrap()
}

#[test]
fn encoded_operators_act_on_occupations() {
    let m = 6;
    for s in 0..1usize << m {
        let o = occ(m, s);
        let b = bk_encode(&o);
        for j in 0..m {
            let (img, amp) = number_parity_support(m, j).unwrap().apply_basis(&b);
            assert_eq!(img, b);
            assert_eq!(amp.re, if o.get(j) { -1.0 } else { 1.0 });
            let (img, _) = occupation_flip_support(m, j).unwrap().apply_basis(&b);
            let mut flipped = o.clone();
            flipped.flip(j);
            assert_eq!(bk_decode(&img), flipped);
        }
    }
}

#[test]
fn annihilator_image_has_jordan_wigner_sign() {
    let m = 5;
    for s in 0..1usize << m {
        let o = occ(m, s);
        let b = bk_encode(&o);
        for j in 0..m {
            // a_j = (c + i d)/2 on |o⟩
            let (bc, ac) = majorana_support(m, j, MajoranaKind::Even).unwrap().apply_basis(&b);
            let (bd, ad) = majorana_support(m, j, MajoranaKind::Odd).unwrap().apply_basis(&b);
            assert_eq!(bc, bd);
            let amp = (ac + Complex64::i() * ad) / 2.0;
            let below = (0..j).filter(|&k| o.get(k)).count();
            let expect = if o.get(j) {
                if below % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            };
            assert!((amp - Complex64::new(expect, 0.0)).norm() < 1e-15, "s={s:b} j={j}");
        }
    }
}

#[test]
fn weights_are_logarithmic() {
    for m in [7usize, 64, 100, 1000, 4097] {
        let bound = (usize::BITS - m.leading_zeros()) as usize;
        for j in 0..m {
            assert!(update_set(m, j).len() <= bound);
            assert!(prefix_set(j).len() <= bound);
            assert!(occupation_set(j).len() <= bound + 1);
        }
    }
}

#[test]
fn pauli_text_round_trip() {
    let p = PauliSupport::new(vec![0, 3], vec![3, 5], 1);
    let q: PauliSupport = p.to_string().parse().unwrap();
    assert_eq!(p, q);
}

proptest! {
    #[test]
    fn sets_follow_from_parity_ranges(m in 1usize..200, j in 0usize..200) {
        prop_assume!(j < m);
        let by_range: Vec<usize> = (0..m).filter(|&k| parity_range(k).contains(&j)).collect();
        prop_assert_eq!(update_set(m, j), by_range);
        // prefix nodes tile 0..=j exactly
        let mut covered = vec![0u8; m];
        for k in prefix_set(j + 1) {
            for i in parity_range(k) {
                covered[i] += 1;
            }
        }
        prop_assert!(covered[..=j].iter().all(|&c| c == 1) && covered[j + 1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn encode_is_the_transform_matrix_and_decode_inverts(m in 1usize..130, seed in any::<u64>()) {
        let o = BitString::from_indices(m, (0..m).filter(|j| seed.rotate_left(*j as u32) & 1 == 1)).unwrap();
        let t = transform_matrix(m);
        let b = bk_encode(&o);
        for (j, row) in t.iter().enumerate() {
            prop_assert_eq!(b.get(j), row.dot(&o) % 2 == 1);
        }
        prop_assert_eq!(bk_decode(&b), o);
    }
}
