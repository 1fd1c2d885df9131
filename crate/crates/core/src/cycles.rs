//! Linear algebraic cycles on the Fermat variety `x_0^d + ... + x_{n+1}^d = 0`.
//!
//! Each cycle is cut out by `n/2 + 1` equations
//! `x_{b_{2i}} = zeta_{2d}^{1 + 2 a_i} x_{b_{2i+1}}` where `b` pairs up the
//! coordinates `0..=n+1`. Intersections are computed combinatorially: the
//! union of two cycles' equations is a binomial linear system, solved by a
//! union-find whose edge labels live in `Z / 2d`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FermatParams {
    n: u32,
    d: u32,
}

impl FermatParams {
    pub fn new(n: u32, d: u32) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("dimension n = {n} must be even and positive")));
        }
        if d < 2 {
            return Err(Error::InvalidParams(format!("degree d = {d} must be at least 2")));
        }
        Ok(FermatParams { n, d })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `n / 2`, the dimension of each linear cycle.
    pub fn half(&self) -> u32 {
        self.n / 2
    }

    /// Number of coordinates `n + 2`.
    pub fn coords(&self) -> usize {
        self.n as usize + 2
    }

    /// Whether `d` is prime, `d = 4`, or `gcd(d, (n+1)!) = 1`; in those
    /// cases the linear Hodge lattice is the full Hodge lattice.
    pub fn hodge_condition(&self) -> bool {
        let d = u64::from(self.d);
        if d == 4 || crate::modular::is_prime(d) {
            return true;
        }
        (2..=u64::from(self.n) + 1).all(|k| d.gcd(&k) == 1)
    }

    /// `1 * 3 * ... * (n+1) * d^(n/2+1)` without enumerating anything.
    pub fn cycle_count(&self) -> BigInt {
        let odd: BigInt = (1..=self.n + 1).step_by(2).map(BigInt::from).product();
        odd * BigInt::from(self.d).pow(self.half() + 1)
    }

    /// `(d-1)^(n+1)`, the number of vanishing cycles.
    pub fn mu(&self) -> BigInt {
        BigInt::from(self.d - 1).pow(self.n + 1)
    }
}

/// One linear cycle: the coordinate pairing and the root-of-unity exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinearCycleSpec {
    /// `(b_{2i}, b_{2i+1})` for `i = 0..=n/2`, first entries increasing.
    pub b: Vec<[u32; 2]>,
    /// `a_i` in `0..d`; equation `i` has coefficient `zeta_{2d}^{1+2a_i}`.
    pub a: Vec<u32>,
}

impl LinearCycleSpec {
    pub fn validate(&self, p: &FermatParams) -> Result<()> {
        let pairs = p.half() as usize + 1;
        if self.b.len() != pairs || self.a.len() != pairs {
            return Err(Error::InvalidParams(format!("a cycle needs {pairs} pairs")));
        }
        let mut used = vec![false; p.coords()];
        for [u, v] in &self.b {
            let smallest_unused = used.iter().position(|x| !x).unwrap() as u32;
            if *u != smallest_unused || *v as usize >= used.len() || used[*v as usize] || u == v {
                return Err(Error::InvalidParams(format!("pairing {:?} is not canonical", self.b)));
            }
            used[*u as usize] = true;
            used[*v as usize] = true;
        }
        if self.a.iter().any(|&x| x >= p.d()) {
            return Err(Error::InvalidParams(format!("exponents {:?} out of range", self.a)));
        }
        Ok(())
    }

    /// Directed equations `x_u = zeta_{2d}^e x_v` with `e` mod `2d`.
    fn equations(&self, d: u32) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.b
            .iter()
            .zip(&self.a)
            .map(move |([u, v], a)| (*u as usize, *v as usize, (1 + 2 * a) % (2 * d)))
    }
}

/// All canonical pairings of `0..m` (`m` even), in lexicographic order.
pub fn canonical_pairings(m: usize) -> Vec<Vec<[u32; 2]>> {
    fn go(free: &mut Vec<u32>, cur: &mut Vec<[u32; 2]>, out: &mut Vec<Vec<[u32; 2]>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let first = free.remove(0);
        for k in 0..free.len() {
            let partner = free.remove(k);
            cur.push([first, partner]);
            go(free, cur, out);
            cur.pop();
            free.insert(k, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    go(&mut (0..m as u32).collect(), &mut Vec::new(), &mut out);
    out
}

/// Every linear cycle, sorted lexicographically on `(b, a)`.
///
/// Refuses when the count exceeds `max_cycles`.
pub fn enumerate_linear_cycles(p: &FermatParams, max_cycles: usize) -> Result<Vec<LinearCycleSpec>> {
    let count = p.cycle_count();
    if count > BigInt::from(max_cycles) {
        return Err(Error::ResourceCap(format!(
            "(n,d)=({},{}) has N = {count} linear cycles, above the cap of {max_cycles}",
            p.n(),
            p.d()
        )));
    }
    let pairs = p.half() as usize + 1;
    let d = p.d();
    let exps: Vec<Vec<u32>> = (0..d.pow(pairs as u32))
        .map(|mut k| {
            let mut a = vec![0; pairs];
            for slot in a.iter_mut().rev() {
                *slot = k % d;
                k /= d;
            }
            a
        })
        .collect();
    let mut out = Vec::with_capacity(count.try_into().unwrap_or(0));
    for b in canonical_pairings(p.coords()) {
        for a in &exps {
            out.push(LinearCycleSpec { b: b.clone(), a: a.clone() });
        }
    }
    Ok(out)
}

/// Union-find over coordinates with potentials in `Z / modulus`:
/// `pot[u]` is the exponent `e` with `x_u = zeta^e x_root`.
struct PotentialDsu {
    parent: Vec<usize>,
    pot: Vec<u32>,
    dead: Vec<bool>,
    modulus: u32,
}

impl PotentialDsu {
    fn new(size: usize, modulus: u32) -> Self {
        PotentialDsu { parent: (0..size).collect(), pot: vec![0; size], dead: vec![false; size], modulus }
    }

    fn find(&mut self, u: usize) -> (usize, u32) {
        let parent = self.parent[u];
        if parent == u {
            return (u, 0);
        }
        let (root, up) = self.find(parent);
        self.parent[u] = root;
        self.pot[u] = (self.pot[u] + up) % self.modulus;
        (root, self.pot[u])
    }

    /// Records `x_u = zeta^e x_v`.
    fn relate(&mut self, u: usize, v: usize, e: u32) {
        let (ru, pu) = self.find(u);
        let (rv, pv) = self.find(v);
        let m = self.modulus;
        if ru == rv {
            // x_u = zeta^pu x_r and x_u = zeta^(e+pv) x_r
            if pu != (e + pv) % m {
                self.dead[ru] = true;
            }
            return;
        }
        // attach ru below rv: x_ru = zeta^w x_rv with w = e + pv - pu
        self.parent[ru] = rv;
        self.pot[ru] = (e + pv + m - pu) % m;
        self.dead[rv] |= self.dead[ru];
    }

    fn surviving_components(&mut self) -> usize {
        (0..self.parent.len()).filter(|&u| self.parent[u] == u && !self.dead[u]).count()
    }
}

/// Projective dimension of `P ∩ Q`; `-1` when the intersection is empty.
pub fn intersection_dimension(pc: &LinearCycleSpec, qc: &LinearCycleSpec, p: &FermatParams) -> i32 {
    let mut dsu = PotentialDsu::new(p.coords(), 2 * p.d());
    for (u, v, e) in pc.equations(p.d()).chain(qc.equations(p.d())) {
        dsu.relate(u, v, e);
    }
    dsu.surviving_components() as i32 - 1
}

/// `P_i . P_j = (1 - (1-d)^(m+1)) / d` for an `m`-dimensional intersection.
pub fn intersection_number(m: i32, p: &FermatParams) -> BigInt {
    assert!(m >= -1 && m <= p.half() as i32, "intersection dimension {m} out of range");
    let d = BigInt::from(p.d());
    let num = BigInt::from(1) - (BigInt::from(1) - &d).pow((m + 1) as u32);
    let (q, r) = num.div_rem(&d);
    debug_assert!(r == BigInt::from(0));
    q
}

/// Lookup for `intersection_number` over the possible dimensions `-1..=n/2`.
fn number_table(p: &FermatParams) -> Vec<BigInt> {
    (-1..=p.half() as i32).map(|m| intersection_number(m, p)).collect()
}

/// `[P_i . P_j]` over all linear cycles, in enumeration order.
pub fn full_intersection_matrix(p: &FermatParams, cycles: &[LinearCycleSpec]) -> IntMatrix {
    let table = number_table(p);
    let n = cycles.len();
    IntMatrix::from_fn(n, n, |i, j| table[(intersection_dimension(&cycles[i], &cycles[j], p) + 1) as usize].clone())
}

/// `[(P_i - P_1) . (P_j - P_1)]` for `i, j >= 2`, derived from the full
/// matrix by bilinearity.
pub fn primitive_from_full(full: &IntMatrix) -> IntMatrix {
    let n = full.rows();
    assert!(n >= 1 && full.is_square());
    let m = n - 1;
    IntMatrix::from_fn(m, m, |i, j| {
        let (i, j) = (i + 1, j + 1);
        &full[(i, j)] - &full[(i, 0)] - &full[(0, j)] + &full[(0, 0)]
    })
}

pub fn primitive_intersection_matrix(p: &FermatParams, cycles: &[LinearCycleSpec]) -> IntMatrix {
    primitive_from_full(&full_intersection_matrix(p, cycles))
}

/// The `d` cycles whose sum is the polarization class: pairing
/// `(0,1),(2,3),...` with all exponents zero except the first.
pub fn polarization_family(p: &FermatParams) -> Vec<LinearCycleSpec> {
    let pairs = p.half() as usize + 1;
    let b: Vec<[u32; 2]> = (0..pairs as u32).map(|i| [2 * i, 2 * i + 1]).collect();
    (0..p.d())
        .map(|a0| {
            let mut a = vec![0; pairs];
            a[0] = a0;
            LinearCycleSpec { b: b.clone(), a }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32, d: u32) -> FermatParams {
        FermatParams::new(n, d).unwrap()
    }

    fn cyc(b: &[[u32; 2]], a: &[u32]) -> LinearCycleSpec {
        LinearCycleSpec { b: b.to_vec(), a: a.to_vec() }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FermatParams::new(3, 3).is_err());
        assert!(FermatParams::new(0, 3).is_err());
        assert!(FermatParams::new(2, 1).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_linear_cycles(&params(2, 3), 20000).unwrap().len(), 27);
        assert_eq!(enumerate_linear_cycles(&params(2, 4), 20000).unwrap().len(), 48);
        assert_eq!(enumerate_linear_cycles(&params(4, 3), 20000).unwrap().len(), 405);
        assert_eq!(params(10, 3).cycle_count(), BigInt::from(7_577_955));
    }

    #[test]
    fn enumeration_is_sorted_distinct_and_valid() {
        let p = params(4, 2);
        let cycles = enumerate_linear_cycles(&p, 20000).unwrap();
        assert!(cycles.windows(2).all(|w| w[0] < w[1]));
        for c in &cycles {
            c.validate(&p).unwrap();
        }
        assert_eq!(cycles[0], cyc(&[[0, 1], [2, 3], [4, 5]], &[0, 0, 0]));
    }

    #[test]
    fn cap_refuses() {
        let err = enumerate_linear_cycles(&params(10, 3), 20000).unwrap_err();
        assert!(matches!(err, Error::ResourceCap(_)));
    }

    #[test]
    fn validation_catches_noncanonical_pairing() {
        let p = params(2, 3);
        assert!(cyc(&[[1, 0], [2, 3]], &[0, 0]).validate(&p).is_err());
        assert!(cyc(&[[0, 1], [2, 3]], &[0, 3]).validate(&p).is_err());
        assert!(cyc(&[[0, 1], [2, 2]], &[0, 0]).validate(&p).is_err());
    }

    #[test]
    fn dimension_examples() {
        let p = params(2, 3);
        let base = cyc(&[[0, 1], [2, 3]], &[0, 0]);
        assert_eq!(intersection_dimension(&base, &base, &p), 1);
        assert_eq!(intersection_dimension(&base, &cyc(&[[0, 1], [2, 3]], &[0, 1]), &p), 0);
        assert_eq!(intersection_dimension(&base, &cyc(&[[0, 2], [1, 3]], &[1, 0]), &p), -1);
    }

    #[test]
    fn numbers() {
        let p = params(2, 3);
        assert_eq!(intersection_number(-1, &p), BigInt::from(0));
        assert_eq!(intersection_number(0, &p), BigInt::from(1));
        assert_eq!(intersection_number(1, &p), BigInt::from(-1));
        for d in 2..12 {
            assert_eq!(intersection_number(0, &params(2, d)), BigInt::from(1));
        }
    }

    #[test]
    fn cubic_surface_lines() {
        let p = params(2, 3);
        let cycles = enumerate_linear_cycles(&p, 100).unwrap();
        let full = full_intersection_matrix(&p, &cycles);
        assert!(full.is_symmetric());
        assert!((0..27).all(|i| full[(i, i)] == BigInt::from(-1)));
        // every line meets exactly 10 others
        for i in 0..27 {
            let meets = (0..27).filter(|&j| full[(i, j)] == BigInt::from(1)).count();
            assert_eq!(meets, 10);
        }
        let prim = primitive_from_full(&full);
        assert_eq!(prim.rows(), 26);
        assert!(prim.is_symmetric());
        for i in 0..26 {
            assert!(prim[(i, i)] <= BigInt::from(-2));
        }
    }

    #[test]
    fn primitive_entry_by_bilinearity() {
        let p = params(2, 3);
        let cycles = enumerate_linear_cycles(&p, 100).unwrap();
        let full = full_intersection_matrix(&p, &cycles);
        let prim = primitive_from_full(&full);
        let j = (1..27).find(|&j| full[(0, j)] == BigInt::from(0)).unwrap();
        assert_eq!(prim[(j - 1, j - 1)], BigInt::from(-2));
    }

    #[test]
    fn hodge_condition_flags() {
        assert!(params(2, 3).hodge_condition());
        assert!(params(2, 4).hodge_condition());
        assert!(!params(2, 6).hodge_condition());
        assert!(params(4, 5).hodge_condition());
        assert!(!params(4, 6).hodge_condition());
        assert!(!params(4, 9).hodge_condition());
        assert!(params(2, 25).hodge_condition());
        assert!(!params(2, 8).hodge_condition());
    }
}
