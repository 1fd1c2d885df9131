//! The vanishing-cycle side: Pham's basis `delta_beta`, the index sets that
//! cut out the linear Hodge cycles, the period matrix `Q` over `Z[zeta_d]`
//! and the Hodge-cycle intersection matrix `A3 = X * Psi * X^T`.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cycles::FermatParams;
use crate::cyclotomic::{CyclotomicInt, ZetaTable};
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::snf;

/// `beta = (beta_1, ..., beta_{n+1})` with entries in `0..=d-2`.
pub type BetaIndex = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeIndexSets {
    /// All of `{0..=d-2}^(n+1)` in lexicographic order.
    pub all: Vec<BetaIndex>,
    pub i1: Vec<BetaIndex>,
    pub i2: Vec<BetaIndex>,
}

impl HodgeIndexSets {
    /// `I1 ∪ I2` sorted lexicographically; the column order of `Q`.
    pub fn columns(&self) -> Vec<BetaIndex> {
        let mut cols: Vec<BetaIndex> = self.i1.iter().chain(&self.i2).cloned().collect();
        cols.sort();
        cols
    }

    pub fn mu(&self) -> usize {
        self.all.len()
    }

    pub fn mu_check(&self) -> usize {
        self.i1.len() + self.i2.len()
    }
}

/// Lexicographic enumeration of `{0..=d-2}^(n+1)`.
pub fn beta_indices(p: &FermatParams) -> Vec<BetaIndex> {
    let len = p.n() as usize + 1;
    let base = p.d() - 1;
    let total = (base as usize).pow(len as u32);
    (0..total)
        .map(|mut k| {
            let mut beta = vec![0; len];
            for slot in beta.iter_mut().rev() {
                *slot = (k % base as usize) as u32;
                k /= base as usize;
            }
            beta
        })
        .collect()
}

fn weight(beta: &[u32]) -> u32 {
    beta.iter().map(|b| b + 1).sum()
}

/// `sum (beta_i + 1) / d` is not an integer and is below `n/2`.
pub fn in_i1(beta: &[u32], p: &FermatParams) -> bool {
    let w = weight(beta);
    !w.is_multiple_of(p.d()) && w < p.d() * p.half()
}

/// The unique `beta_0` completing `beta` to weight `d (n/2 + 1)`, if it
/// lies in `0..=d-2`.
pub fn completing_beta0(beta: &[u32], p: &FermatParams) -> Option<u32> {
    let target = p.d() * (p.half() + 1);
    let w = weight(beta);
    let b0 = target.checked_sub(w + 1)?;
    (b0 <= p.d() - 2).then_some(b0)
}

/// Whether the entries of `full` can be perfectly matched into pairs
/// summing to `target`.
pub fn has_complementary_matching(full: &[u32], target: u32) -> bool {
    fn go(used: &mut [bool], full: &[u32], target: u32) -> bool {
        let Some(i) = used.iter().position(|u| !u) else {
            return true;
        };
        used[i] = true;
        for j in i + 1..full.len() {
            if !used[j] && full[i] + full[j] == target {
                used[j] = true;
                if go(used, full, target) {
                    return true;
                }
                used[j] = false;
            }
        }
        used[i] = false;
        false
    }
    full.len().is_multiple_of(2) && go(&mut vec![false; full.len()], full, target)
}

/// The two defining conditions taken literally: a completing `beta_0`
/// exists and the completed tuple has no complementary pairing.
pub fn in_i2_literal(beta: &[u32], p: &FermatParams) -> bool {
    completed(beta, p).is_some_and(|full| !has_complementary_matching(&full, p.d() - 2))
}

fn completed(beta: &[u32], p: &FermatParams) -> Option<Vec<u32>> {
    let b0 = completing_beta0(beta, p)?;
    let mut full = Vec::with_capacity(beta.len() + 1);
    full.push(b0);
    full.extend_from_slice(beta);
    Some(full)
}

/// Every Galois conjugate `t * (beta_i + 1) mod d`, `gcd(t, d) = 1`, of the
/// completed tuple again has weight `d (n/2 + 1)`.
pub fn conjugates_stay_middle(full: &[u32], p: &FermatParams) -> bool {
    let d = p.d();
    let target = d * (p.half() + 1);
    (1..d)
        .filter(|t| num_integer::Integer::gcd(t, &d) == 1)
        .all(|t| full.iter().map(|b| (t * (b + 1)) % d).sum::<u32>() == target)
}

/// Membership in `I2`: the literal conditions, restricted to tuples whose
/// conjugates all stay in the middle. A tuple with a conjugate outside the
/// middle has a conjugate in `I1`, and since conjugation permutes the
/// columns of `Q` its condition is implied for integral cycles.
pub fn in_i2(beta: &[u32], p: &FermatParams) -> bool {
    completed(beta, p)
        .is_some_and(|full| conjugates_stay_middle(&full, p) && !has_complementary_matching(&full, p.d() - 2))
}

pub fn build_index_sets(p: &FermatParams) -> HodgeIndexSets {
    let all = beta_indices(p);
    let i1 = all.iter().filter(|b| in_i1(b, p)).cloned().collect();
    let i2 = all.iter().filter(|b| in_i2(b, p)).cloned().collect();
    HodgeIndexSets { all, i1, i2 }
}

/// Dense matrix of cyclotomic integers, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicMatrix {
    pub d: u32,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<CyclotomicInt>,
}

impl CyclotomicMatrix {
    pub fn get(&self, i: usize, j: usize) -> &CyclotomicInt {
        &self.entries[i * self.cols + j]
    }
}

/// One entry of `Q`: `prod_i (zeta^((b_i+1)(b'_i+1)) - zeta^(b_i (b'_i+1)))`.
pub fn q_entry(beta: &[u32], beta_col: &[u32], zeta: &ZetaTable) -> CyclotomicInt {
    let mut acc = CyclotomicInt::one(zeta.modulus());
    for (&b, &c) in beta.iter().zip(beta_col) {
        let hi = i64::from((b + 1) * (c + 1));
        let lo = i64::from(b * (c + 1));
        let factor = zeta.power(hi) - zeta.power(lo);
        acc = zeta.mul(&acc, &factor);
    }
    acc
}

/// `Q` with rows indexed by `I` and columns by `I1 ∪ I2`. Returns `None`
/// when `I1 ∪ I2` is empty, in which case every primitive class is a
/// linear Hodge class.
pub fn q_matrix(p: &FermatParams, sets: &HodgeIndexSets) -> Option<CyclotomicMatrix> {
    use rayon::prelude::*;
    let cols = sets.columns();
    if cols.is_empty() {
        return None;
    }
    let zeta = ZetaTable::new(p.d());
    let entries = sets
        .all
        .par_iter()
        .flat_map_iter(|beta| cols.iter().map(|c| q_entry(beta, c, &zeta)).collect::<Vec<_>>())
        .collect();
    Some(CyclotomicMatrix { d: p.d(), rows: sets.all.len(), cols: cols.len(), entries })
}

/// `[Q_0 | Q_1 | ... | Q_{phi(d)-1}]` where `Q = sum_i Q_i zeta^i`.
pub fn a2_concatenation(q: &CyclotomicMatrix) -> Result<IntMatrix> {
    let phi = crate::cyclotomic::euler_phi(q.d) as usize;
    let width = q.cols * phi;
    let mut out = IntMatrix::zeros(q.rows, width);
    for i in 0..q.rows {
        for j in 0..q.cols {
            let e = q.get(i, j);
            if e.modulus() != q.d {
                return Err(Error::ModulusMismatch(e.modulus(), q.d));
            }
            for (k, c) in e.coeffs().iter().enumerate() {
                out[(i, k * q.cols + j)] = c.clone();
            }
        }
    }
    Ok(out)
}

/// Pham's intersection form on the vanishing cycles.
///
/// Diagonal `(-1)^(n(n-1)/2) (1 + (-1)^n)`; for `beta <= beta' <= beta + 1`
/// coordinatewise, `(-1)^(n(n+1)/2) (-1)^(sum beta'_k - beta_k)`, and the
/// transposed pairs follow from `<a,b> = (-1)^n <b,a>`. Everything else is 0.
pub fn pham_entry(beta: &[u32], other: &[u32], n: u32) -> i64 {
    let n = i64::from(n);
    let sign = |e: i64| if e.rem_euclid(2) == 0 { 1 } else { -1 };
    if beta == other {
        return sign(n * (n - 1) / 2) * (1 + sign(n));
    }
    let forward = beta.iter().zip(other).all(|(&b, &c)| b <= c && c <= b + 1);
    let backward = beta.iter().zip(other).all(|(&b, &c)| c <= b && b <= c + 1);
    let base = |lo: &[u32], hi: &[u32]| {
        let diff: i64 = hi.iter().zip(lo).map(|(&h, &l)| i64::from(h) - i64::from(l)).sum();
        sign(n * (n + 1) / 2) * sign(diff)
    };
    if forward {
        base(beta, other)
    } else if backward {
        sign(n) * base(other, beta)
    } else {
        0
    }
}

pub fn pham_intersection_matrix(p: &FermatParams, betas: &[BetaIndex]) -> IntMatrix {
    let mu = betas.len();
    IntMatrix::from_fn(mu, mu, |i, j| BigInt::from(pham_entry(&betas[i], &betas[j], p.n())))
}

/// Everything the Hodge branch produces on the way to `A3`.
#[derive(Clone, Debug)]
pub struct HodgeMatrices {
    pub sets: HodgeIndexSets,
    /// `None` in the degenerate case `I1 ∪ I2 = ∅`.
    pub a2: Option<IntMatrix>,
    pub x: IntMatrix,
    pub psi: IntMatrix,
    pub a3: IntMatrix,
}

/// Integral basis of `{c : c * A2 = 0}`, or the identity if `A2` is absent.
pub fn hodge_basis(mu: usize, a2: Option<&IntMatrix>) -> Result<IntMatrix> {
    match a2 {
        None => Ok(IntMatrix::identity(mu)),
        Some(a2) => snf::left_kernel_basis(a2),
    }
}

pub fn primitive_hodge_matrix(p: &FermatParams) -> Result<HodgeMatrices> {
    let sets = build_index_sets(p);
    let a2 = match q_matrix(p, &sets) {
        Some(q) => Some(a2_concatenation(&q)?),
        None => None,
    };
    let x = hodge_basis(sets.mu(), a2.as_ref())?;
    let psi = pham_intersection_matrix(p, &sets.all);
    let a3 = snf::congruent_transform(&x, &psi)?;
    Ok(HodgeMatrices { sets, a2, x, psi, a3 })
}

/// Recomputes `c * Q` in `Z[zeta_d]` for one row `c`; used to cross-check
/// the integer kernel against the cyclotomic one.
pub fn row_times_q(c: &[BigInt], q: &CyclotomicMatrix) -> Vec<CyclotomicInt> {
    let zeta = ZetaTable::new(q.d);
    (0..q.cols)
        .map(|j| {
            let mut acc = CyclotomicInt::zero(q.d);
            for (i, ci) in c.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                let term = zeta.mul(&CyclotomicInt::from_int(q.d, ci.clone()), q.get(i, j));
                acc = &acc + &term;
            }
            acc
        })
        .collect()
}
