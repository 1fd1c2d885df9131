use fermat_lattice::cycles::{enumerate_linear_cycles, full_intersection_matrix, primitive_from_full, FermatParams};
use fermat_lattice::gram::gram_invariants;
use fermat_lattice::hodge::primitive_hodge_matrix;
use fermat_lattice::lattice::{quotient_sign, rank_mod_p, DivisorMultiset};
use fermat_lattice::modular;
use fermat_lattice::snf::smith_left;
use fermat_lattice::IntMatrix;
use num_bigint::BigInt;

const PRIMES: [u64; 4] = [1_000_000_007, 998_244_353, 2_305_843_009_213_693_951, 4_294_967_291];

fn gram_matrices(n: u32, d: u32) -> Vec<(&'static str, IntMatrix)> {
    let p = FermatParams::new(n, d).unwrap();
    let full = full_intersection_matrix(&p, &enumerate_linear_cycles(&p, 1000).unwrap());
    let prim = primitive_from_full(&full);
    let a3 = primitive_hodge_matrix(&p).unwrap().a3;
    vec![("full", full), ("primitive", prim), ("hodge", a3)]
}

/// The leading rows of the left transform span a complement of the radical,
/// so their Gram matrix is that of `V / V^perp` and its determinant is the
/// signed product of the divisors.
#[test]
fn quotient_determinant_is_signed_divisor_product() {
    for (n, d) in [(2, 3), (2, 4), (2, 5), (2, 6), (2, 7), (4, 3)] {
        for (name, a) in gram_matrices(n, d) {
            let left = smith_left(&a).unwrap();
            let m = left.divisors.len();
            let um = left.u.row_block(0..m);
            let g = um.mul(&a).unwrap().mul(&um.transpose()).unwrap();
            let sign = quotient_sign(&a, &left.u, &left.divisors).unwrap();
            let signed: BigInt = BigInt::from(sign) * left.divisors.iter().product::<BigInt>();
            for p in PRIMES {
                assert_eq!(modular::det(&g, p), modular::residue(&signed, p), "({n},{d}) {name} mod {p}");
            }
            // rank over F_p of the Gram matrix is the mod-p rank read off the divisors
            let ms = DivisorMultiset::from_list(&left.divisors);
            for p in [2u64, 3, 5, 7] {
                assert_eq!(modular::rank(&a, p), rank_mod_p(&ms, p).unwrap(), "({n},{d}) {name} rank mod {p}");
            }
        }
    }
}

#[test]
fn local_route_agrees_on_fermat_lattices() {
    for (n, d) in [(2, 4), (2, 5), (2, 6), (4, 3)] {
        for (name, a) in gram_matrices(n, d) {
            let left = smith_left(&a).unwrap();
            let g = gram_invariants(&a).unwrap();
            assert_eq!(g.divisors, left.divisors, "({n},{d}) {name}");
            assert_eq!(g.sign, quotient_sign(&a, &left.u, &left.divisors).unwrap(), "({n},{d}) {name}");
        }
    }
}
