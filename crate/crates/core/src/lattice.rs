//! Invariants of the nondegenerate quotient `V / V^perp` of a lattice given
//! by a (possibly degenerate) Gram matrix.
//!
//! With `U * A * T = S` and `w = U v`, the Gram matrix in the basis `w` is
//! `S * R` with `R` unimodular and block diagonal, so the first `rank`
//! vectors of `w` span the quotient, its elementary divisors are the
//! Smith invariants of `A`, and the sign of its discriminant is `det` of the
//! leading block of `R`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram;
use crate::matrix::IntMatrix;
use crate::modular::{self, PRIME};
use crate::snf::{self, SmithDecomposition};

/// Elementary divisors as `(value, multiplicity)` in increasing order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DivisorMultiset(Vec<(BigInt, usize)>);

impl DivisorMultiset {
    /// Groups a divisibility chain (or any list) into a sorted multiset.
    pub fn from_list(list: &[BigInt]) -> Self {
        let mut sorted = list.to_vec();
        sorted.sort();
        let mut out: Vec<(BigInt, usize)> = Vec::new();
        for x in sorted {
            match out.last_mut() {
                Some((v, m)) if *v == x => *m += 1,
                _ => out.push((x, 1)),
            }
        }
        DivisorMultiset(out)
    }

    pub fn from_pairs<T: Into<BigInt>>(pairs: impl IntoIterator<Item = (T, usize)>) -> Self {
        let list: Vec<BigInt> = pairs
            .into_iter()
            .flat_map(|(v, m)| {
                let v: BigInt = v.into();
                std::iter::repeat_n(v, m)
            })
            .collect();
        Self::from_list(&list)
    }

    pub fn pairs(&self) -> &[(BigInt, usize)] {
        &self.0
    }

    pub fn to_list(&self) -> Vec<BigInt> {
        self.0.iter().flat_map(|(v, m)| std::iter::repeat_n(v.clone(), *m)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|(_, m)| m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn multiplicity(&self, value: &BigInt) -> usize {
        self.0.iter().find(|(v, _)| v == value).map_or(0, |(_, m)| *m)
    }

    pub fn is_divisibility_chain(&self) -> bool {
        self.0.iter().all(|(v, _)| *v > BigInt::zero())
            && self.0.windows(2).all(|w| w[1].0.is_multiple_of(&w[0].0))
    }

    /// Product of all divisors.
    pub fn product(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, (v, m)| acc * num_traits::pow(v.clone(), *m))
    }
}

impl fmt::Display for DivisorMultiset {
    /// Table notation `1^7·3^1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, m)| format!("{v}^{m}")).collect();
        write!(f, "{}", parts.join("·"))
    }
}

impl Serialize for DivisorMultiset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<(String, usize)> = self.0.iter().map(|(v, m)| (v.to_string(), *m)).collect();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DivisorMultiset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<(String, usize)> = Vec::deserialize(d)?;
        let pairs = raw
            .into_iter()
            .map(|(v, m)| v.parse::<BigInt>().map(|v| (v, m)).map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(DivisorMultiset::from_pairs(pairs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeSource {
    FullLinear,
    PrimitiveLinear,
    PrimitiveHodge,
}

impl fmt::Display for LatticeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeSource::FullLinear => "full-linear",
            LatticeSource::PrimitiveLinear => "primitive-linear",
            LatticeSource::PrimitiveHodge => "primitive-hodge",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub n: u32,
    pub d: u32,
    pub source: LatticeSource,
    pub rank: usize,
    pub divisors: DivisorMultiset,
    pub sign: i32,
    pub mod_p_ranks: BTreeMap<u64, usize>,
}

impl LatticeReport {
    /// Discriminant of `V / V^perp` expanded, as a decimal string.
    pub fn discriminant(&self) -> String {
        (BigInt::from(self.sign) * self.divisors.product()).to_string()
    }

    /// Table notation with the sign in front, e.g. `+1^26·5^10·25^1`.
    pub fn signed_divisors(&self) -> String {
        format!("{}{}", if self.sign < 0 { '-' } else { '+' }, self.divisors)
    }
}

/// Which lattice a Gram matrix describes.
#[derive(Clone, Copy, Debug)]
pub struct LatticeMeta {
    pub n: u32,
    pub d: u32,
    pub source: LatticeSource,
}

fn mat_mul_mod(a: &[u64], b: &[u64], n: usize, k: usize, m: usize, p: u64) -> Vec<u64> {
    let mut out = vec![0u64; n * m];
    out.par_chunks_mut(m.max(1)).enumerate().for_each(|(i, row)| {
        let mut acc = vec![0u128; m];
        for l in 0..k {
            let x = a[i * k + l];
            if x == 0 {
                continue;
            }
            for (slot, &y) in acc.iter_mut().zip(&b[l * m..(l + 1) * m]) {
                *slot = (*slot + x as u128 * y as u128) % p as u128;
            }
        }
        for (o, v) in row.iter_mut().zip(acc) {
            *o = v as u64;
        }
    });
    out
}

/// Sign of the discriminant of `V / V^perp` given the left transform of a
/// Smith reduction of the symmetric Gram matrix `a`.
pub fn quotient_sign(a: &IntMatrix, u: &IntMatrix, divisors: &[BigInt]) -> Result<i32> {
    let m = divisors.len();
    if m == 0 {
        return Ok(1);
    }
    let mu = a.rows();
    let um: Vec<u64> = modular::reduce(&u.row_block(0..m), PRIME);
    let am = modular::reduce(a, PRIME);
    let ua = mat_mul_mod(&um, &am, m, mu, mu, PRIME);
    let mut ut = vec![0u64; mu * m];
    for i in 0..m {
        for j in 0..mu {
            ut[j * m + i] = um[i * mu + j];
        }
    }
    let mut gram = mat_mul_mod(&ua, &ut, m, mu, m, PRIME);
    for (i, a_i) in divisors.iter().enumerate() {
        let r = modular::residue(a_i, PRIME);
        if r == 0 {
            return Err(Error::Structural(format!("divisor {a_i} vanishes modulo the working prime")));
        }
        let inv = modular::inv(r, PRIME);
        for x in &mut gram[i * m..(i + 1) * m] {
            *x = modular::mul(*x, inv, PRIME);
        }
    }
    let det = modular::det_in_place(&mut gram, m, PRIME);
    snf::sign_of_unit_residue(det, PRIME)
}

/// Discriminant sign from a full Smith decomposition of `a`.
pub fn discriminant_sign(a: &IntMatrix, dec: &SmithDecomposition) -> Result<i32> {
    quotient_sign(a, &dec.u, &dec.divisors)
}

/// Number of elementary divisors not divisible by the prime `p`, i.e. the
/// rank of the reduction mod `p` of the quotient lattice.
pub fn rank_mod_p(divisors: &DivisorMultiset, p: u64) -> Result<usize> {
    if !modular::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let p = BigInt::from(p);
    Ok(divisors.pairs().iter().filter(|(v, _)| !v.is_multiple_of(&p)).map(|(_, m)| m).sum())
}

/// Primes dividing `d` or any divisor, found by trial division up to `bound`.
fn relevant_primes(d: u32, divisors: &DivisorMultiset) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut push_factors = |x: &BigInt| {
        let mut x = x.clone();
        let mut q = 2u64;
        while x > BigInt::one() && q < 10_000 {
            let qb = BigInt::from(q);
            if x.is_multiple_of(&qb) {
                primes.push(q);
                while x.is_multiple_of(&qb) {
                    x /= &qb;
                }
            }
            q += 1;
        }
    };
    push_factors(&BigInt::from(d));
    if let Some((top, _)) = divisors.pairs().last() {
        push_factors(top);
    }
    primes.sort_unstable();
    primes.dedup();
    primes
}

/// Entry size at which Smith reduction of a Gram matrix is abandoned in
/// favour of [`gram::gram_invariants`].
pub const GROWTH_BUDGET_BITS: u64 = 128;

/// Invariants of `V / V^perp` for the symmetric Gram matrix `a`.
///
/// Smith reduction over ℤ is tried first; if its entries outgrow
/// [`GROWTH_BUDGET_BITS`] the certified multi-modular route takes over.
pub fn nondegenerate_quotient(a: &IntMatrix, meta: LatticeMeta) -> Result<LatticeReport> {
    if !a.is_symmetric() {
        return Err(Error::Asymmetric);
    }
    match snf::smith_left_within(a, GROWTH_BUDGET_BITS) {
        Ok(dec) => report_from_left(a, &dec.u, &dec.divisors, meta),
        Err(why @ Error::CoefficientGrowth { .. }) => {
            log::info!("SNF: {why}; switching to local Smith forms");
            let g = gram::gram_invariants(a)?;
            Ok(report_from_parts(&g.divisors, g.sign, meta))
        }
        Err(e) => Err(e),
    }
}

/// Report assembly from a Smith left transform computed elsewhere.
pub fn report_from_left(a: &IntMatrix, u: &IntMatrix, divisors: &[BigInt], meta: LatticeMeta) -> Result<LatticeReport> {
    let sign = quotient_sign(a, u, divisors)?;
    Ok(report_from_parts(divisors, sign, meta))
}

pub fn report_from_parts(divisors: &[BigInt], sign: i32, meta: LatticeMeta) -> LatticeReport {
    let divisors = DivisorMultiset::from_list(divisors);
    let mod_p_ranks = relevant_primes(meta.d, &divisors)
        .into_iter()
        .map(|p| (p, rank_mod_p(&divisors, p).expect("trial-division factors are prime")))
        .collect();
    LatticeReport {
        n: meta.n,
        d: meta.d,
        source: meta.source,
        rank: divisors.len(),
        divisors,
        sign,
        mod_p_ranks,
    }
}

/// Predicted divisors of the primitive sublattice from those of the full
/// lattice: two fewer 1s and one more `d`.
pub fn table_relation(full: &DivisorMultiset, d: u32) -> Result<DivisorMultiset> {
    let ones = full.multiplicity(&BigInt::one());
    if ones < 2 {
        return Err(Error::Structural(format!("divisor 1 occurs {ones} times, need at least 2")));
    }
    let mut list = full.to_list();
    let first_one = list.iter().position(|v| v.is_one()).expect("counted above");
    list.drain(first_one..first_one + 2);
    list.push(BigInt::from(d));
    Ok(DivisorMultiset::from_list(&list))
}

/// Parses table notation such as `1^18·8^2` (also accepts `*` or `.`).
pub fn parse_divisors(s: &str) -> Result<DivisorMultiset> {
    let mut pairs = Vec::new();
    for part in s.split(['·', '*', '.']).map(str::trim).filter(|p| !p.is_empty()) {
        let (v, m) = part.split_once('^').unwrap_or((part, "1"));
        let v: BigInt = v.parse().map_err(|_| Error::Format(format!("bad divisor {v:?}")))?;
        let m: usize = m.parse().map_err(|_| Error::Format(format!("bad multiplicity {m:?}")))?;
        pairs.push((v, m));
    }
    Ok(DivisorMultiset::from_pairs(pairs))
}

impl LatticeReport {
    pub fn rank_mod(&self, p: u64) -> Option<usize> {
        self.mod_p_ranks.get(&p).copied()
    }

}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> LatticeMeta {
        LatticeMeta { n: 2, d: 3, source: LatticeSource::FullLinear }
    }

    fn ms(s: &str) -> DivisorMultiset {
        parse_divisors(s).unwrap()
    }

    #[test]
    fn degenerate_diagonal() {
        let r = nondegenerate_quotient(&IntMatrix::diagonal(&[-2i64, 0]), meta()).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.divisors, ms("2^1"));
        assert_eq!(r.sign, -1);
        assert_eq!(r.discriminant(), "-2");
    }

    #[test]
    fn rejects_asymmetric() {
        let a = IntMatrix::from_rows(&[vec![0i64, 1], vec![0, 0]]);
        assert!(matches!(nondegenerate_quotient(&a, meta()), Err(Error::Asymmetric)));
    }

    #[test]
    fn signs_of_small_forms() {
        let dec = snf::smith_decomposition(&IntMatrix::identity(3)).unwrap();
        assert_eq!(discriminant_sign(&IntMatrix::identity(3), &dec).unwrap(), 1);
        let h = IntMatrix::from_rows(&[vec![0i64, 1], vec![1, 0]]);
        let dec = snf::smith_decomposition(&h).unwrap();
        assert_eq!(discriminant_sign(&h, &dec).unwrap(), -1);
        assert_eq!(nondegenerate_quotient(&h, meta()).unwrap().divisors, ms("1^2"));
    }

    #[test]
    fn sign_survives_radical() {
        // hyperbolic plane plus a radical vector mixed in by a unimodular change
        let a = IntMatrix::from_rows(&[vec![0i64, 1, 0], vec![1, 0, 0], vec![0, 0, 0]]);
        let p = IntMatrix::from_rows(&[vec![1i64, 0, 0], vec![3, 1, 0], vec![-2, 5, 1]]);
        let g = p.mul(&a).unwrap().mul(&p.transpose()).unwrap();
        let r = nondegenerate_quotient(&g, meta()).unwrap();
        assert_eq!((r.rank, r.sign), (2, -1));
    }

    #[test]
    fn mod_p_ranks() {
        let dv = ms("1^18·8^2");
        assert_eq!(rank_mod_p(&dv, 2).unwrap(), 18);
        assert_eq!(rank_mod_p(&dv, 3).unwrap(), 20);
        assert_eq!(rank_mod_p(&ms("1^5"), 7).unwrap(), 5);
        assert!(matches!(rank_mod_p(&dv, 4), Err(Error::NotPrime(4))));
    }

    #[test]
    fn relation_examples() {
        assert_eq!(table_relation(&ms("1^7"), 3).unwrap(), ms("1^5·3"));
        assert_eq!(table_relation(&ms("1^18·8^2"), 4).unwrap(), ms("1^16·4·8^2"));
        assert_eq!(table_relation(&ms("1^26·5^10·25"), 5).unwrap(), ms("1^24·5^11·25"));
        assert!(matches!(table_relation(&ms("1·3"), 3), Err(Error::Structural(_))));
    }

    #[test]
    fn multiset_display_and_json() {
        let dv = ms("1^26·5^10·25^1");
        assert_eq!(dv.to_string(), "1^26·5^10·25^1");
        assert!(dv.is_divisibility_chain());
        assert_eq!(serde_json::to_string(&dv).unwrap(), r#"[["1",26],["5",10],["25",1]]"#);
        let back: DivisorMultiset = serde_json::from_str(r#"[["1",26],["5",10],["25",1]]"#).unwrap();
        assert_eq!(back, dv);
        assert!(!ms("2·3").is_divisibility_chain());
    }

    #[test]
    fn report_json_schema() {
        let r = report_from_parts(&[BigInt::from(1), BigInt::from(3)], 1, meta());
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["source"], "full-linear");
        assert_eq!(v["divisors"][1][0], "3");
        assert_eq!(v["mod_p_ranks"]["3"], 1);
        assert_eq!(r.signed_divisors(), "+1^1·3^1");
    }
}
