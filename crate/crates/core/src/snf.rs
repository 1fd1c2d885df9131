//! Smith normal form over the integers with transformation matrices, and
//! the operations built on it: elementary divisors, saturated left kernels,
//! signs of unimodular matrices and congruence transforms.
//!
//! The reduction always pivots on the entry of smallest absolute value in
//! the remaining submatrix and uses rounded quotients, which keeps
//! intermediate entries small on the intersection matrices this crate
//! deals with.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{abs_cmp, is_unit, IntMatrix};
use crate::modular;

/// `U * A * T = S` with `U`, `T` unimodular and `S` diagonal.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub t: IntMatrix,
    pub rank: usize,
    /// Nonzero diagonal of `S`, each dividing the next.
    pub divisors: Vec<BigInt>,
}

/// Result of a reduction that only tracked row operations: `U * A * T = S`
/// for some unimodular `T` that was not recorded.
#[derive(Clone, Debug)]
pub struct LeftSmith {
    pub u: IntMatrix,
    pub rank: usize,
    pub divisors: Vec<BigInt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Track {
    left: bool,
    right: bool,
}

struct Reducer {
    rows: usize,
    cols: usize,
    a: Vec<BigInt>,
    u: Option<Vec<BigInt>>,
    t: Option<Vec<BigInt>>,
    budget_bits: Option<u64>,
}

/// `x <- round(x / y)` style quotient: `a = q*b + r` with `|r| <= |b|/2`.
fn rounded_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    let twice: BigInt = r.abs() << 1usize;
    if twice > b.abs() {
        if r.is_negative() == b.is_negative() {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

/// `dst -= q * src`, skipping zero sources.
fn sub_mul_row(dst: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    for (x, y) in dst.iter_mut().zip(src) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

fn identity_entries(n: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = BigInt::one();
    }
    v
}

impl Reducer {
    fn new(a: &IntMatrix, track: Track) -> Self {
        Reducer {
            rows: a.rows(),
            cols: a.cols(),
            a: a.entries().to_vec(),
            u: track.left.then(|| identity_entries(a.rows())),
            t: track.right.then(|| identity_entries(a.cols())),
            budget_bits: None,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.a[i * self.cols + j]
    }

    fn swap_rows(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        let c = self.cols;
        for j in 0..c {
            self.a.swap(i * c + j, k * c + j);
        }
        if let Some(u) = self.u.as_mut() {
            let r = self.rows;
            for j in 0..r {
                u.swap(i * r + j, k * r + j);
            }
        }
    }

    fn swap_cols(&mut self, j: usize, k: usize) {
        if j == k {
            return;
        }
        let c = self.cols;
        for i in 0..self.rows {
            self.a.swap(i * c + j, i * c + k);
        }
        if let Some(t) = self.t.as_mut() {
            for i in 0..c {
                t.swap(i * c + j, i * c + k);
            }
        }
    }

    /// row_i -= q * row_k. Columns before `from` are zero in row `k` of A.
    fn row_sub(&mut self, i: usize, k: usize, q: &BigInt, from: usize) {
        debug_assert_ne!(i, k);
        let c = self.cols;
        let (dst, src) = split_two(&mut self.a, i * c + from, k * c + from, c - from);
        sub_mul_row(dst, src, q);
        if let Some(u) = self.u.as_mut() {
            let r = self.rows;
            let (dst, src) = split_two(u, i * r, k * r, r);
            sub_mul_row(dst, src, q);
        }
    }

    /// col_j -= q * col_k. Rows before `from` are zero in column `k` of A.
    fn col_sub(&mut self, j: usize, k: usize, q: &BigInt, from: usize) {
        debug_assert_ne!(j, k);
        let c = self.cols;
        for i in from..self.rows {
            let y = &self.a[i * c + k];
            if !y.is_zero() {
                let prod = q * y;
                self.a[i * c + j] -= prod;
            }
        }
        if let Some(t) = self.t.as_mut() {
            for i in 0..c {
                let y = &t[i * c + k];
                if !y.is_zero() {
                    let prod = q * y;
                    t[i * c + j] -= prod;
                }
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        let c = self.cols;
        for x in &mut self.a[i * c..(i + 1) * c] {
            *x = -std::mem::take(x);
        }
        if let Some(u) = self.u.as_mut() {
            let r = self.rows;
            for x in &mut u[i * r..(i + 1) * r] {
                *x = -std::mem::take(x);
            }
        }
    }

    /// Position of the smallest nonzero entry in the lower-right block
    /// starting at `(t, t)`; stops early on a unit.
    fn smallest_from(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = self.at(i, j);
                if x.is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| abs_cmp(x, self.at(bi, bj)).is_lt()) {
                    best = Some((i, j));
                    if is_unit(x) {
                        return best;
                    }
                }
            }
        }
        best
    }

    /// Clears row and column `t` with pivot at `(t, t)` and enforces that
    /// the pivot divides every entry of the remaining block.
    fn settle_pivot(&mut self, t: usize) {
        loop {
            let pivot = self.at(t, t).clone();
            let mut residue_left = false;
            for i in t + 1..self.rows {
                if self.at(i, t).is_zero() {
                    continue;
                }
                let q = rounded_quotient(self.at(i, t), &pivot);
                self.row_sub(i, t, &q, t);
                residue_left |= !self.at(i, t).is_zero();
            }
            for j in t + 1..self.cols {
                if self.at(t, j).is_zero() {
                    continue;
                }
                let q = rounded_quotient(self.at(t, j), &pivot);
                self.col_sub(j, t, &q, t);
                residue_left |= !self.at(t, j).is_zero();
            }
            if residue_left {
                self.promote_smaller_remainder(t);
                continue;
            }
            if !is_unit(&pivot) {
                let offender = (t + 1..self.rows).find(|&i| {
                    (t + 1..self.cols).any(|j| !self.at(i, j).is_multiple_of(&pivot))
                });
                if let Some(i) = offender {
                    // row_t += row_i brings a non-multiple into row t
                    self.row_sub(t, i, &BigInt::from(-1), t);
                    continue;
                }
            }
            break;
        }
        if self.at(t, t).is_negative() {
            self.negate_row(t);
        }
    }

    /// Moves the smallest nonzero entry of row/column `t` onto the pivot.
    fn promote_smaller_remainder(&mut self, t: usize) {
        let mut best_row: Option<usize> = None;
        for i in t + 1..self.rows {
            let x = self.at(i, t);
            if !x.is_zero() && best_row.is_none_or(|b| abs_cmp(x, self.at(b, t)).is_lt()) {
                best_row = Some(i);
            }
        }
        let mut best_col: Option<usize> = None;
        for j in t + 1..self.cols {
            let x = self.at(t, j);
            if !x.is_zero() && best_col.is_none_or(|b| abs_cmp(x, self.at(t, b)).is_lt()) {
                best_col = Some(j);
            }
        }
        match (best_row, best_col) {
            (Some(i), Some(j)) => {
                if abs_cmp(self.at(i, t), self.at(t, j)).is_le() {
                    self.swap_rows(t, i)
                } else {
                    self.swap_cols(t, j)
                }
            }
            (Some(i), None) => self.swap_rows(t, i),
            (None, Some(j)) => self.swap_cols(t, j),
            (None, None) => {}
        }
    }

    /// Places pivots until the remaining block is zero. With a bit budget,
    /// gives up as soon as an entry of the working matrix outgrows it.
    fn run(&mut self) -> Result<usize> {
        let mut t = 0;
        while t < self.rows.min(self.cols) {
            let Some((i, j)) = self.smallest_from(t) else {
                break;
            };
            self.swap_rows(t, i);
            self.swap_cols(t, j);
            self.settle_pivot(t);
            t += 1;
            if let Some(budget) = self.budget_bits {
                if t % 8 == 0 {
                    let bits = self.a[t * self.cols..].iter().map(|x| x.bits()).max().unwrap_or(0);
                    if bits > budget {
                        return Err(Error::CoefficientGrowth { bits, pivots: t, budget });
                    }
                }
            }
            if t % 64 == 0 {
                log::debug!("SNF: {t} pivots placed ({}x{})", self.rows, self.cols);
            }
        }
        Ok(t)
    }

    fn divisors(&self, rank: usize) -> Vec<BigInt> {
        (0..rank).map(|k| self.at(k, k).clone()).collect()
    }
}

/// Borrow two disjoint windows of the same slice, the first mutably.
fn split_two<T>(v: &mut [T], dst: usize, src: usize, len: usize) -> (&mut [T], &[T]) {
    if dst < src {
        let (lo, hi) = v.split_at_mut(src);
        (&mut lo[dst..dst + len], &hi[..len])
    } else {
        let (lo, hi) = v.split_at_mut(dst);
        (&mut hi[..len], &lo[src..src + len])
    }
}

fn check_nonempty(a: &IntMatrix) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::DimensionMismatch("matrix must have at least one row and one column".into()));
    }
    Ok(())
}

/// Full Smith decomposition `U * A * T = S`.
pub fn smith_decomposition(a: &IntMatrix) -> Result<SmithDecomposition> {
    check_nonempty(a)?;
    let mut r = Reducer::new(a, Track { left: true, right: true });
    let rank = r.run()?;
    let divisors = r.divisors(rank);
    let (rows, cols) = (r.rows, r.cols);
    let u = IntMatrix::from_entries(rows, rows, r.u.take().unwrap())?;
    let t = IntMatrix::from_entries(cols, cols, r.t.take().unwrap())?;
    let s = IntMatrix::from_entries(rows, cols, r.a)?;
    Ok(SmithDecomposition { u, s, t, rank, divisors })
}

/// Smith reduction that records only the left transform.
pub fn smith_left(a: &IntMatrix) -> Result<LeftSmith> {
    smith_left_reduce(a, None)
}

/// As [`smith_left`], but fails with [`Error::CoefficientGrowth`] once an entry of
/// the working matrix exceeds `budget_bits`.
pub fn smith_left_within(a: &IntMatrix, budget_bits: u64) -> Result<LeftSmith> {
    smith_left_reduce(a, Some(budget_bits))
}

fn smith_left_reduce(a: &IntMatrix, budget_bits: Option<u64>) -> Result<LeftSmith> {
    check_nonempty(a)?;
    let mut r = Reducer::new(a, Track { left: true, right: false });
    r.budget_bits = budget_bits;
    let rank = r.run()?;
    let divisors = r.divisors(rank);
    let u = IntMatrix::from_entries(r.rows, r.rows, r.u.take().unwrap())?;
    Ok(LeftSmith { u, rank, divisors })
}

/// Elementary divisors (nonzero Smith invariants) in divisibility order.
/// The empty or zero matrix has none.
pub fn elementary_divisors(a: &IntMatrix) -> Vec<BigInt> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    let mut r = Reducer::new(a, Track { left: false, right: false });
    let rank = r.run().expect("reduction without a budget always completes");
    r.divisors(rank)
}

/// A basis of the saturated integral left kernel `{c : c * A = 0}` as rows.
pub fn left_kernel_basis(a: &IntMatrix) -> Result<IntMatrix> {
    if a.cols() == 0 {
        return Ok(IntMatrix::identity(a.rows()));
    }
    if a.rows() == 0 {
        return Ok(IntMatrix::zeros(0, 0));
    }
    let dec = smith_left(a)?;
    Ok(kernel_rows(&dec.u, dec.rank))
}

/// The trailing `rows - rank` rows of a left transform.
pub fn kernel_rows(u: &IntMatrix, rank: usize) -> IntMatrix {
    u.row_block(rank..u.rows())
}

/// Determinant of a matrix known to be unimodular, via its residue modulo
/// a large prime.
pub fn unimodular_sign(u: &IntMatrix) -> Result<i32> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", u.rows(), u.cols())));
    }
    sign_of_unit_residue(modular::det(u, modular::PRIME), modular::PRIME)
}

pub(crate) fn sign_of_unit_residue(residue: u64, prime: u64) -> Result<i32> {
    if residue == 1 {
        Ok(1)
    } else if residue == prime - 1 {
        Ok(-1)
    } else {
        Err(Error::NotUnimodular { residue, prime })
    }
}

/// `X * Psi * X^T`. When `Psi` is symmetric only the upper triangle is
/// computed and mirrored.
pub fn congruent_transform(x: &IntMatrix, psi: &IntMatrix) -> Result<IntMatrix> {
    if !psi.is_square() || x.cols() != psi.rows() {
        return Err(Error::DimensionMismatch(format!(
            "X is {}x{}, Psi is {}x{}",
            x.rows(),
            x.cols(),
            psi.rows(),
            psi.cols()
        )));
    }
    let xp = x.mul(psi)?;
    let k = x.rows();
    let symmetric = psi.is_symmetric();
    let rows: Vec<Vec<BigInt>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let lhs = xp.row(i);
            let start = if symmetric { i } else { 0 };
            let mut out = vec![BigInt::zero(); k];
            for j in start..k {
                let mut acc = BigInt::zero();
                for (a, b) in lhs.iter().zip(x.row(j)) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                out[j] = acc;
            }
            out
        })
        .collect();
    let mut m = IntMatrix::from_entries(k, k, rows.into_iter().flatten().collect())?;
    if symmetric {
        for i in 0..k {
            for j in 0..i {
                m[(i, j)] = m[(j, i)].clone();
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn check(a: &IntMatrix, dec: &SmithDecomposition) {
        assert_eq!(dec.u.mul(a).unwrap().mul(&dec.t).unwrap(), dec.s);
        assert_eq!(unimodular_sign(&dec.u).unwrap().abs(), 1);
        assert_eq!(unimodular_sign(&dec.t).unwrap().abs(), 1);
    }

    #[test]
    fn coprime_diagonal_merges() {
        let a = m(&[vec![2, 0], vec![0, 3]]);
        let dec = smith_decomposition(&a).unwrap();
        check(&a, &dec);
        assert_eq!(dec.s, m(&[vec![1, 0], vec![0, 6]]));
        assert_eq!(dec.rank, 2);
    }

    #[test]
    fn zero_matrix() {
        let a = IntMatrix::zeros(2, 2);
        let dec = smith_decomposition(&a).unwrap();
        assert_eq!(dec.rank, 0);
        assert!(dec.s.is_zero());
        assert_eq!(dec.u, IntMatrix::identity(2));
        assert_eq!(dec.t, IntMatrix::identity(2));
    }

    #[test]
    fn rank_one() {
        let a = m(&[vec![2, 4], vec![4, 8]]);
        let dec = smith_decomposition(&a).unwrap();
        check(&a, &dec);
        assert_eq!(dec.s, m(&[vec![2, 0], vec![0, 0]]));
        assert_eq!(dec.rank, 1);
    }

    #[test]
    fn rejects_empty() {
        assert!(smith_decomposition(&IntMatrix::zeros(0, 3)).is_err());
    }

    #[test]
    fn divisors_trivial_cases() {
        assert_eq!(elementary_divisors(&IntMatrix::identity(4)), big(&[1, 1, 1, 1]));
        assert!(elementary_divisors(&m(&[vec![0]])).is_empty());
    }

    #[test]
    fn rectangular_with_negative_entries() {
        let a = m(&[vec![-6, 4, 0], vec![10, -14, 8]]);
        let dec = smith_decomposition(&a).unwrap();
        check(&a, &dec);
        // gcd of entries 2, gcd of 2x2 minors: 84-40=44, -48, 32 -> 4; so 2, 2
        assert_eq!(dec.divisors, big(&[2, 2]));
    }

    #[test]
    fn kernel_of_sum() {
        let k = left_kernel_basis(&m(&[vec![1], vec![1]])).unwrap();
        assert_eq!(k.rows(), 1);
        let row: Vec<BigInt> = k.row(0).to_vec();
        assert!(row == big(&[1, -1]) || row == big(&[-1, 1]));
    }

    #[test]
    fn kernel_extremes() {
        assert_eq!(left_kernel_basis(&IntMatrix::identity(3)).unwrap().rows(), 0);
        let k = left_kernel_basis(&IntMatrix::zeros(2, 2)).unwrap();
        assert_eq!(k.rows(), 2);
        assert_eq!(unimodular_sign(&k).unwrap().abs(), 1);
    }

    #[test]
    fn signs() {
        assert_eq!(unimodular_sign(&IntMatrix::identity(3)).unwrap(), 1);
        assert_eq!(unimodular_sign(&m(&[vec![0, 1], vec![1, 0]])).unwrap(), -1);
        assert_eq!(unimodular_sign(&IntMatrix::diagonal(&[1i64, 1, -1])).unwrap(), -1);
        assert!(matches!(
            unimodular_sign(&IntMatrix::diagonal(&[2i64, 1])),
            Err(Error::NotUnimodular { residue: 2, .. })
        ));
    }

    #[test]
    fn congruence() {
        let psi = IntMatrix::diagonal(&[-2i64, -2]);
        assert_eq!(congruent_transform(&IntMatrix::identity(2), &psi).unwrap(), psi);
        assert_eq!(congruent_transform(&m(&[vec![1, 1]]), &psi).unwrap(), m(&[vec![-4]]));
        let x = m(&[vec![1, 2, 3], vec![-1, 0, 5]]);
        let psi = m(&[vec![1, 2, 0], vec![2, -3, 1], vec![0, 1, 4]]);
        let a3 = congruent_transform(&x, &psi).unwrap();
        assert!(a3.is_symmetric());
        assert_eq!(a3, x.mul(&psi).unwrap().mul(&x.transpose()).unwrap());
        assert!(congruent_transform(&x, &IntMatrix::identity(2)).is_err());
    }

    #[test]
    fn rounded_quotients() {
        let q = |a: i64, b: i64| rounded_quotient(&BigInt::from(a), &BigInt::from(b));
        assert_eq!(q(7, 3), BigInt::from(2));
        assert_eq!(q(8, 3), BigInt::from(3));
        assert_eq!(q(-8, 3), BigInt::from(-3));
        assert_eq!(q(8, -3), BigInt::from(-3));
        assert_eq!(q(-7, -3), BigInt::from(2));
    }
}
