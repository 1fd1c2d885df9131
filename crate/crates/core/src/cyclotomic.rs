//! Exact arithmetic in `Z[zeta_d]` on the power basis `1, zeta, ..., zeta^(phi(d)-1)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub fn euler_phi(mut d: u32) -> u32 {
    let mut phi = d;
    let mut p = 2;
    while p * p <= d {
        if d.is_multiple_of(p) {
            while d.is_multiple_of(p) {
                d /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if d > 1 {
        phi -= phi / d;
    }
    phi
}

/// Coefficients of the `d`-th cyclotomic polynomial, constant term first.
///
/// Built from `x^d - 1` by exact division through `Phi_e` for every proper
/// divisor `e` of `d`.
pub fn cyclotomic_polynomial(d: u32) -> Vec<BigInt> {
    assert!(d >= 1, "cyclotomic polynomial needs d >= 1");
    let mut poly = vec![BigInt::zero(); d as usize + 1];
    poly[0] = BigInt::from(-1);
    poly[d as usize] = BigInt::one();
    for e in (1..d).filter(|e| d.is_multiple_of(*e)) {
        poly = exact_div_monic(&poly, &cyclotomic_polynomial(e));
    }
    poly
}

/// Quotient of `num` by monic `den`; panics if the division is not exact.
fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dd = den.len() - 1;
    debug_assert!(den[dd].is_one());
    let mut rem = num.to_vec();
    let qlen = num.len() - dd;
    let mut quot = vec![BigInt::zero(); qlen];
    for k in (0..qlen).rev() {
        let c = rem[k + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (i, b) in den.iter().enumerate() {
            rem[k + i] -= &c * b;
        }
        quot[k] = c;
    }
    assert!(rem.iter().all(Zero::is_zero), "division was not exact");
    quot
}

/// An element of `Z[zeta_d]` in canonical power-basis form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CyclotomicInt {
    d: u32,
    coeffs: Vec<BigInt>,
}

impl CyclotomicInt {
    pub fn zero(d: u32) -> Self {
        CyclotomicInt { d, coeffs: vec![BigInt::zero(); euler_phi(d) as usize] }
    }

    pub fn one(d: u32) -> Self {
        Self::from_int(d, BigInt::one())
    }

    pub fn from_int(d: u32, c: BigInt) -> Self {
        let mut z = Self::zero(d);
        z.coeffs[0] = c;
        z
    }

    /// Builds an element from power-basis coefficients (length `phi(d)`).
    pub fn from_coeffs(d: u32, coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() != euler_phi(d) as usize {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for phi({d}) = {}",
                coeffs.len(),
                euler_phi(d)
            )));
        }
        Ok(CyclotomicInt { d, coeffs })
    }

    /// Reduces an arbitrary polynomial in `zeta` onto the power basis.
    pub fn from_polynomial(d: u32, poly: &[BigInt]) -> Self {
        Self::reduce_with(d, poly.to_vec(), &cyclotomic_polynomial(d))
    }

    fn reduce_with(d: u32, mut poly: Vec<BigInt>, phi_d: &[BigInt]) -> Self {
        let deg = phi_d.len() - 1;
        for k in (deg..poly.len()).rev() {
            let c = std::mem::take(&mut poly[k]);
            if c.is_zero() {
                continue;
            }
            for (i, b) in phi_d[..deg].iter().enumerate() {
                poly[k - deg + i] -= &c * b;
            }
        }
        poly.resize(deg, BigInt::zero());
        CyclotomicInt { d, coeffs: poly }
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::ModulusMismatch(self.d, other.d));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CyclotomicInt { d: self.d, coeffs })
    }

    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(CyclotomicInt { d: self.d, coeffs })
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(ZetaTable::new(self.d).mul(self, other))
    }

    /// Value at `exp(2 pi i / d)` as `(re, im)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let theta = std::f64::consts::TAU / f64::from(self.d);
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let c: f64 = c.to_string().parse().unwrap_or(f64::NAN);
            re += c * (theta * k as f64).cos();
            im += c * (theta * k as f64).sin();
        }
        (re, im)
    }
}

impl fmt::Debug for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => c.to_string(),
                1 => format!("{c}*z"),
                _ => format!("{c}*z^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0 (d={})", self.d)
        } else {
            write!(f, "{} (d={})", terms.join(" + "), self.d)
        }
    }
}

impl Add for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn add(self, rhs: Self) -> CyclotomicInt {
        self.try_add(rhs).expect("cyclotomic moduli must agree")
    }
}

impl Sub for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn sub(self, rhs: Self) -> CyclotomicInt {
        self.subtract(rhs).expect("cyclotomic moduli must agree")
    }
}

impl Mul for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn mul(self, rhs: Self) -> CyclotomicInt {
        self.multiply(rhs).expect("cyclotomic moduli must agree")
    }
}

impl Neg for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn neg(self) -> CyclotomicInt {
        CyclotomicInt { d: self.d, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

/// `zeta_d^k` on the power basis; `k` is reduced modulo `d` first.
pub fn zeta_power(k: i64, d: u32) -> CyclotomicInt {
    let k = k.rem_euclid(i64::from(d)) as usize;
    let mut poly = vec![BigInt::zero(); k + 1];
    poly[k] = BigInt::one();
    CyclotomicInt::from_polynomial(d, &poly)
}

/// Precomputed reductions of every power of `zeta_d`, for bulk work.
#[derive(Clone, Debug)]
pub struct ZetaTable {
    d: u32,
    phi: Vec<BigInt>,
    powers: Vec<CyclotomicInt>,
}

impl ZetaTable {
    pub fn new(d: u32) -> Self {
        let phi = cyclotomic_polynomial(d);
        let powers = (0..d as usize)
            .map(|k| {
                let mut poly = vec![BigInt::zero(); k + 1];
                poly[k] = BigInt::one();
                CyclotomicInt::reduce_with(d, poly, &phi)
            })
            .collect();
        ZetaTable { d, phi, powers }
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn power(&self, k: i64) -> &CyclotomicInt {
        &self.powers[k.rem_euclid(i64::from(self.d)) as usize]
    }

    pub fn mul(&self, a: &CyclotomicInt, b: &CyclotomicInt) -> CyclotomicInt {
        debug_assert!(a.d == self.d && b.d == self.d);
        let n = self.degree();
        let mut prod = vec![BigInt::zero(); (2 * n).saturating_sub(1).max(1)];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        CyclotomicInt::reduce_with(self.d, prod, &self.phi)
    }
}
