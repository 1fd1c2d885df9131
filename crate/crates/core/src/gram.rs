//! Invariants of symmetric Gram matrices whose Smith reduction over ℤ runs
//! into coefficient growth.
//!
//! The rank is certified by ranks modulo enough word-sized primes to exceed a
//! Hadamard bound on the minors one size up. The principal minor on a row
//! basis is rebuilt exactly by Chinese remaindering: it is nonzero, its sign is
//! the sign of the discriminant, and it is a multiple of every elementary
//! divisor. For each prime factor ℓ of that minor a Smith reduction over
//! ℤ/ℓ^e is run, raising e until all local invariants show up below ℓ^e.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::modular::{self, Montgomery};

/// Trial division bound for the prime factors of the principal minor.
const FACTOR_BOUND: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramInvariants {
    pub rank: usize,
    /// Nonzero elementary divisors, each dividing the next.
    pub divisors: Vec<BigInt>,
    /// Sign of the discriminant of the nondegenerate quotient.
    pub sign: i32,
    /// Determinant of the principal submatrix on the certified row basis.
    pub principal_minor: BigInt,
    pub basis: Vec<usize>,
}

/// Upper bounds, in bits, of the Euclidean norms of the rows.
fn row_norm_bits(a: &IntMatrix) -> Vec<u64> {
    (0..a.rows())
        .map(|i| {
            let sq: BigInt = a.row(i).iter().map(|x| x * x).sum();
            sq.bits().div_ceil(2)
        })
        .collect()
}

/// Bits of the Hadamard bound on any `k x k` minor.
fn hadamard_bits(norms: &[u64], k: usize) -> u64 {
    let mut sorted = norms.to_vec();
    sorted.sort_unstable_by(|x, y| y.cmp(x));
    sorted.iter().take(k).sum()
}

fn residues(a: &IntMatrix, m: &Montgomery) -> Vec<u64> {
    a.entries()
        .iter()
        .map(|x| match x.to_i64() {
            Some(v) => m.to_form(v.rem_euclid(m.p as i64) as u64),
            None => m.residue(x),
        })
        .collect()
}

/// Row-echelon reduction in place; returns the pivot columns.
fn pivot_columns(a: &mut [u64], rows: usize, cols: usize, m: &Montgomery) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if piv != r {
            for j in c..cols {
                a.swap(r * cols + j, piv * cols + j);
            }
        }
        let pinv = m.inv(a[r * cols + c]);
        let (top, rest) = a.split_at_mut((r + 1) * cols);
        let prow = &top[r * cols..];
        for row in rest.chunks_mut(cols) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            let f = m.mul(f, pinv);
            for j in c..cols {
                row[j] = m.sub(row[j], m.mul(f, prow[j]));
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn det_mod(mut a: Vec<u64>, n: usize, m: &Montgomery) -> u64 {
    let mut det = m.to_form(1);
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| a[i * n + k] != 0) else {
            return 0;
        };
        if piv != k {
            for j in k..n {
                a.swap(k * n + j, piv * n + j);
            }
            det = m.sub(0, det);
        }
        let pv = a[k * n + k];
        det = m.mul(det, pv);
        let pinv = m.inv(pv);
        let (top, rest) = a.split_at_mut((k + 1) * n);
        let prow = &top[k * n..];
        for row in rest.chunks_mut(n) {
            let f = row[k];
            if f == 0 {
                continue;
            }
            let f = m.mul(f, pinv);
            for j in k..n {
                row[j] = m.sub(row[j], m.mul(f, prow[j]));
            }
        }
    }
    m.from_form(det)
}

fn submatrix(res: &[u64], cols: usize, idx: &[usize]) -> Vec<u64> {
    let mut out = Vec::with_capacity(idx.len() * idx.len());
    for &i in idx {
        out.extend(idx.iter().map(|&j| res[i * cols + j]));
    }
    out
}

/// Incremental Chinese remaindering into the symmetric range.
struct Crt {
    value: BigInt,
    modulus: BigInt,
}

impl Crt {
    fn new() -> Self {
        Crt { value: BigInt::zero(), modulus: BigInt::one() }
    }

    fn push(&mut self, r: u64, p: u64) {
        let cur = modular::residue(&self.value, p);
        let minv = modular::inv(modular::residue(&self.modulus, p), p);
        let t = modular::mul(modular::sub(r, cur, p), minv, p);
        self.value += &self.modulus * BigInt::from(t);
        self.modulus *= BigInt::from(p);
    }

    fn symmetric(&self) -> BigInt {
        if &self.value * 2 > self.modulus {
            &self.value - &self.modulus
        } else {
            self.value.clone()
        }
    }
}

/// Exact rank, a row basis and the principal minor on it.
fn certified_rank_and_minor(a: &IntMatrix) -> (Vec<usize>, BigInt) {
    let n = a.rows();
    let norms = row_norm_bits(a);
    let mut primes = modular::large_primes();
    let first = Montgomery::new(primes.next().expect("infinitely many primes"));
    let mut basis = pivot_columns(&mut residues(a, &first), n, n, &first);
    'restart: loop {
        let r = basis.len();
        let needed = if r < n { hadamard_bits(&norms, r + 1) } else { hadamard_bits(&norms, r) } + 2;
        let mut crt = Crt::new();
        let mut covered = 0u64;
        let mut used = 0usize;
        for p in modular::large_primes() {
            let m = Montgomery::new(p);
            let res = residues(a, &m);
            if r < n {
                let profile = pivot_columns(&mut res.clone(), n, n, &m);
                if profile.len() > r {
                    log::debug!("rank certification: rank rises to {} modulo {p}", profile.len());
                    basis = profile;
                    continue 'restart;
                }
            }
            crt.push(det_mod(submatrix(&res, n, &basis), r, &m), p);
            covered += 61;
            used += 1;
            if covered > needed {
                break;
            }
        }
        log::debug!("rank {r} certified with {used} primes against a {needed}-bit bound");
        return (basis, crt.symmetric());
    }
}

/// Valuations below `e` of the local Smith invariants of `a` at `ell`.
fn local_valuations(a: &IntMatrix, ell: u64, e: u32) -> Result<Vec<u32>> {
    let q = ell
        .checked_pow(e)
        .filter(|&q| q < 1 << 63)
        .ok_or_else(|| Error::ResourceCap(format!("local modulus {ell}^{e} exceeds a machine word")))?;
    let (rows, cols) = (a.rows(), a.cols());
    let qb = BigInt::from(q);
    let mut b: Vec<u64> = a.entries().iter().map(|x| x.mod_floor(&qb).to_u64().expect("reduced")).collect();
    let valuation = |mut x: u64| {
        let mut v = 0;
        while x.is_multiple_of(ell) {
            x /= ell;
            v += 1;
        }
        v
    };
    let mulq = |x: u64, y: u64| ((x as u128 * y as u128) % q as u128) as u64;
    let mut vals = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        'scan: for i in t..rows {
            for j in t..cols {
                let x = b[i * cols + j];
                if x == 0 {
                    continue;
                }
                let v = valuation(x);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                    if v == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        if i != t {
            for c in 0..cols {
                b.swap(t * cols + c, i * cols + c);
            }
        }
        if j != t {
            for r in t..rows {
                b.swap(r * cols + t, r * cols + j);
            }
        }
        let lv = ell.pow(v);
        let unit = b[t * cols + t] / lv;
        let inv = BigInt::from(unit)
            .extended_gcd(&qb)
            .x
            .mod_floor(&qb)
            .to_u64()
            .expect("reduced");
        let (top, rest) = b.split_at_mut((t + 1) * cols);
        let prow = &top[t * cols..];
        for row in rest.chunks_mut(cols) {
            let x = row[t];
            if x == 0 {
                continue;
            }
            let f = q - mulq(x / lv, inv);
            for c in t..cols {
                row[c] = ((row[c] as u128 + f as u128 * prow[c] as u128) % q as u128) as u64;
            }
        }
        vals.push(v);
    }
    Ok(vals)
}

fn small_primes(bound: u64) -> Vec<u64> {
    let mut composite = vec![false; bound as usize];
    let mut primes = Vec::new();
    for k in 2..bound as usize {
        if !composite[k] {
            primes.push(k as u64);
            for m in (k * k..bound as usize).step_by(k) {
                composite[m] = true;
            }
        }
    }
    primes
}

/// A nontrivial factor of the odd composite `n` (Brent's variant of rho).
fn rho(n: u64) -> u64 {
    let f = |x: u64, c: u64| ((u128::from(x) * u128::from(x) + u128::from(c)) % u128::from(n)) as u64;
    for c in 1.. {
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        while g == 1 {
            x = f(x, c);
            y = f(f(y, c), c);
            g = x.abs_diff(y).gcd(&n);
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

/// Prime factors of `n` with repetition; `n` has no factors below the trial bound.
fn split_word(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if modular::is_prime(n) {
        out.push(n);
        return;
    }
    let g = rho(n);
    split_word(g, out);
    split_word(n / g, out);
}

/// Elementary divisors, rank and discriminant sign of a symmetric matrix
/// without elimination over ℤ.
pub fn gram_invariants(a: &IntMatrix) -> Result<GramInvariants> {
    if !a.is_symmetric() {
        return Err(Error::Asymmetric);
    }
    let (basis, minor) = certified_rank_and_minor(a);
    let r = basis.len();
    if r == 0 {
        return Ok(GramInvariants { rank: 0, divisors: Vec::new(), sign: 1, principal_minor: BigInt::one(), basis });
    }
    if minor.is_zero() {
        return Err(Error::Structural("principal minor on a row basis vanished".into()));
    }
    let mut rest = minor.abs();
    let mut local: Vec<(u64, u32)> = Vec::new();
    for ell in small_primes(FACTOR_BOUND) {
        if rest.is_one() {
            break;
        }
        let lb = BigInt::from(ell);
        let mut v = 0;
        while rest.is_multiple_of(&lb) {
            rest /= &lb;
            v += 1;
        }
        if v > 0 {
            local.push((ell, v));
        }
    }
    if !rest.is_one() {
        // whatever survives trial division must fit a machine word to be split
        let big = rest.to_u64().ok_or_else(|| {
            Error::ResourceCap(format!(
                "principal minor has a {}-bit cofactor without prime factors below {FACTOR_BOUND}",
                rest.bits()
            ))
        })?;
        let mut factors = Vec::new();
        split_word(big, &mut factors);
        factors.sort_unstable();
        for chunk in factors.chunk_by(|x, y| x == y) {
            local.push((chunk[0], chunk.len() as u32));
        }
    }
    let mut divisors = vec![BigInt::one(); r];
    for (ell, v_minor) in local {
        let mut e = 2.min(v_minor + 1);
        let vals = loop {
            let vals = local_valuations(a, ell, e)?;
            if vals.len() == r {
                break vals;
            }
            if vals.len() > r || e > v_minor {
                return Err(Error::Structural(format!(
                    "{} local invariants at {ell} against rank {r}",
                    vals.len()
                )));
            }
            e = (2 * e).min(v_minor + 1);
        };
        let mut vals = vals;
        vals.sort_unstable();
        for (slot, v) in divisors.iter_mut().zip(vals) {
            *slot *= BigInt::from(ell).pow(v);
        }
    }
    let product: BigInt = divisors.iter().product();
    let (index_sq, rem) = minor.abs().div_rem(&product);
    if !rem.is_zero() || index_sq.sqrt().pow(2) != index_sq {
        return Err(Error::Structural("principal minor is not the discriminant times a square".into()));
    }
    Ok(GramInvariants { rank: r, divisors, sign: if minor.is_positive() { 1 } else { -1 }, principal_minor: minor, basis })
}
