mod common;

use common::*;
use fermat_lattice::modular;
use fermat_lattice::snf::{self, elementary_divisors, left_kernel_basis, smith_decomposition, unimodular_sign};
use fermat_lattice::IntMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn small_matrix() -> impl Strategy<Value = IntMatrix> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-9i64..=9, r * c).prop_map(move |e| matrix(r, c, &e))
    })
}

fn is_diagonal(s: &IntMatrix) -> bool {
    (0..s.rows()).all(|i| (0..s.cols()).all(|j| i == j || s[(i, j)].is_zero()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1200))]

    #[test]
    fn decomposition_invariants(a in small_matrix()) {
        let dec = smith_decomposition(&a).unwrap();
        let s = dec.u.mul(&a).unwrap().mul(&dec.t).unwrap();
        prop_assert_eq!(&s, &dec.s);
        prop_assert!(is_diagonal(&s));
        prop_assert!(det(&dec.u).abs().is_one());
        prop_assert!(det(&dec.t).abs().is_one());

        let diag: Vec<BigInt> = (0..a.rows().min(a.cols())).map(|i| s[(i, i)].clone()).collect();
        prop_assert!(diag.iter().all(|x| !x.is_negative()));
        prop_assert_eq!(&diag[..dec.rank], &dec.divisors[..]);
        prop_assert!(diag[dec.rank..].iter().all(Zero::is_zero));
        for w in dec.divisors.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero(), "{} does not divide {}", w[0], w[1]);
        }

        // d_1 ... d_k is the gcd of the k x k minors
        prop_assert_eq!(dec.rank, minor_rank(&a));
        let mut prefix = BigInt::one();
        for (k, d) in dec.divisors.iter().enumerate() {
            prefix *= d;
            prop_assert_eq!(&prefix, &minor_gcd(&a, k + 1));
        }
        prop_assert_eq!(elementary_divisors(&a), dec.divisors);
    }

    #[test]
    fn divisors_invariant_under_unimodular_change(a in small_matrix(), seed in any::<u64>()) {
        let mut rng = Lcg(seed);
        let p = random_unimodular(a.rows(), 12, &mut rng);
        let q = random_unimodular(a.cols(), 12, &mut rng);
        let paq = p.mul(&a).unwrap().mul(&q).unwrap();
        prop_assert_eq!(elementary_divisors(&paq), elementary_divisors(&a));
    }

    #[test]
    fn unimodular_sign_matches_cofactor_determinant(n in 1usize..=5, seed in any::<u64>()) {
        let u = random_unimodular(n, 25, &mut Lcg(seed));
        let expected = if det(&u).is_positive() { 1 } else { -1 };
        prop_assert_eq!(unimodular_sign(&u).unwrap(), expected);
    }

    #[test]
    fn non_unimodular_is_rejected(a in (1usize..=5).prop_flat_map(|n| {
        proptest::collection::vec(-9i64..=9, n * n).prop_map(move |e| matrix(n, n, &e))
    })) {
        let d = det(&a);
        prop_assume!(!d.abs().is_one());
        prop_assert!(unimodular_sign(&a).is_err());
    }

    #[test]
    fn kernel_basis_is_saturated(a in small_matrix()) {
        let k = left_kernel_basis(&a).unwrap();
        let rank = minor_rank(&a);
        prop_assert_eq!(k.rows(), a.rows() - rank);
        if k.rows() > 0 {
            prop_assert!(k.mul(&a).unwrap().is_zero());
            prop_assert_eq!(minor_rank(&k), k.rows());
            // saturated: the maximal minors are coprime
            prop_assert!(minor_gcd(&k, k.rows()).is_one());
        }
    }
}

#[test]
fn kernel_saturation_brute_force_3x2() {
    let mut rng = Lcg(0x5eed);
    let mut checked = 0;
    for trial in 0..60 {
        let a: Vec<i64> = if trial < 4 {
            // a few forced degenerate shapes
            [[0, 0, 0, 0, 0, 0], [2, 4, 1, 2, 3, 6], [2, 0, 4, 0, 6, 0], [1, 1, 1, 1, 1, 1]][trial].to_vec()
        } else {
            (0..6).map(|_| rng.range(-5, 5)).collect()
        };
        let am = matrix(3, 2, &a);
        let k = left_kernel_basis(&am).unwrap();
        for c0 in -5..=5i64 {
            for c1 in -5..=5i64 {
                for c2 in -5..=5i64 {
                    let c = [c0, c1, c2];
                    let in_kernel = (0..2).all(|j| c[0] * a[j] + c[1] * a[2 + j] + c[2] * a[4 + j] == 0);
                    if in_kernel && c != [0, 0, 0] {
                        assert!(in_integer_row_span(&c, &k), "{c:?} in ker {a:?} but not in span of {k:?}");
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 1000, "only {checked} kernel vectors exercised");
}

#[test]
fn determinant_mod_prime_matches_cofactor() {
    let mut rng = Lcg(7);
    for n in 1..=5 {
        for _ in 0..40 {
            let e: Vec<i64> = (0..n * n).map(|_| rng.range(-9, 9)).collect();
            let m = matrix(n, n, &e);
            let exact = det(&m);
            let p = modular::PRIME;
            assert_eq!(modular::det(&m, p), modular::residue(&exact, p));
        }
    }
}

#[test]
fn textbook_example() {
    let a = matrix(3, 3, &[2, 4, 4, -6, 6, 12, 10, -4, -16]);
    assert_eq!(elementary_divisors(&a), big(&[2, 6, 12]));
    assert_eq!(snf::smith_left(&a).unwrap().divisors, big(&[2, 6, 12]));
}
