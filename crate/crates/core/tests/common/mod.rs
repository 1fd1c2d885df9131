//! Independent oracles shared by the integration tests. Nothing here calls
//! into the reduction code it is used to check.
#![allow(dead_code)]

use fermat_lattice::IntMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    match n {
        0 => BigInt::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        _ => {
            let mut acc = BigInt::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<BigInt>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect()).collect();
                let term = &m[0][j] * cofactor_det(&minor);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

pub fn to_rows(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn det(m: &IntMatrix) -> BigInt {
    cofactor_det(&to_rows(m))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// gcd of all `k x k` minors; zero when they all vanish.
pub fn minor_gcd(m: &IntMatrix, k: usize) -> BigInt {
    let rows = to_rows(m);
    let mut g = BigInt::zero();
    for rs in subsets(m.rows(), k) {
        for cs in subsets(m.cols(), k) {
            let sub: Vec<Vec<BigInt>> = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j].clone()).collect()).collect();
            g = g.gcd(&cofactor_det(&sub));
            if g.is_one() {
                return g;
            }
        }
    }
    g
}

/// Rank over the rationals: the largest `k` with a nonzero `k`-minor.
pub fn minor_rank(m: &IntMatrix) -> usize {
    (1..=m.rows().min(m.cols())).rev().find(|&k| !minor_gcd(m, k).is_zero()).unwrap_or(0)
}

/// Tiny deterministic generator so oracles do not depend on the crate under test.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }
}

/// Product of `steps` random elementary operations: row additions,
/// swaps and negations.
pub fn random_unimodular(n: usize, steps: usize, rng: &mut Lcg) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    if n == 0 {
        return m;
    }
    for _ in 0..steps {
        let i = rng.below(n as u64) as usize;
        let j = rng.below(n as u64) as usize;
        match rng.below(4) {
            0 | 1 if i != j => {
                let c = BigInt::from(rng.range(-3, 3));
                for k in 0..n {
                    let v = &m[(j, k)] * &c;
                    m[(i, k)] += v;
                }
            }
            2 if i != j => {
                for k in 0..n {
                    let t = m[(i, k)].clone();
                    m[(i, k)] = m[(j, k)].clone();
                    m[(j, k)] = t;
                }
            }
            _ => {
                for k in 0..n {
                    m[(i, k)] = -m[(i, k)].clone();
                }
            }
        }
    }
    m
}

pub fn matrix(rows: usize, cols: usize, entries: &[i64]) -> IntMatrix {
    IntMatrix::from_entries(rows, cols, entries.iter().map(|&x| BigInt::from(x)).collect()).unwrap()
}

pub fn symmetric(n: usize, upper: &[i64]) -> IntMatrix {
    let mut m = IntMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = BigInt::from(upper[k]);
            m[(j, i)] = BigInt::from(upper[k]);
            k += 1;
        }
    }
    m
}

pub fn big(list: &[i64]) -> Vec<BigInt> {
    list.iter().map(|&x| BigInt::from(x)).collect()
}

/// Solves `c = y K` over the integers, if possible, via Cramer's rule on a
/// nonsingular maximal column subset of `K`.
pub fn in_integer_row_span(c: &[i64], k: &IntMatrix) -> bool {
    let r = k.rows();
    let rows = to_rows(k);
    let cols: Vec<usize> = (0..k.cols()).collect();
    for pick in subsets_of(&cols, r) {
        let m: Vec<Vec<BigInt>> = (0..r).map(|i| pick.iter().map(|&j| rows[i][j].clone()).collect()).collect();
        let dm = cofactor_det(&m);
        if dm.is_zero() {
            continue;
        }
        // y M = c_pick, so y_i = det(M with row i replaced by c_pick) / det M
        let mut y = Vec::with_capacity(r);
        for i in 0..r {
            let mut mi = m.clone();
            mi[i] = pick.iter().map(|&j| BigInt::from(c[j])).collect();
            let num = cofactor_det(&mi);
            if !(&num % &dm).is_zero() {
                return false;
            }
            y.push(num / &dm);
        }
        return (0..k.cols()).all(|j| {
            let s: BigInt = (0..r).map(|i| &y[i] * &rows[i][j]).sum();
            s == BigInt::from(c[j])
        });
    }
    false
}

pub fn subsets_of(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in subsets_of(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}
