//! Arithmetic modulo a single word-sized prime.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::matrix::IntMatrix;

/// The Mersenne prime 2^61 - 1.
pub const PRIME: u64 = (1 << 61) - 1;

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p { s - p } else { s }
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b { a - b } else { a + p - b }
}

pub fn pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base, p);
        }
        base = mul(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse by Fermat's little theorem; `a` must be nonzero mod `p`.
pub fn inv(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow(a, p - 2, p)
}

pub fn residue(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits in u64")
}

/// Row-major residues of a matrix.
pub fn reduce(m: &IntMatrix, p: u64) -> Vec<u64> {
    m.entries().iter().map(|x| residue(x, p)).collect()
}

/// Determinant of an `n x n` row-major residue matrix, destroying the input.
pub fn det_in_place(a: &mut [u64], n: usize, p: u64) -> u64 {
    assert_eq!(a.len(), n * n);
    let mut det = 1u64;
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| a[i * n + k] != 0) else {
            return 0;
        };
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            det = sub(0, det, p);
        }
        let pv = a[k * n + k];
        det = mul(det, pv, p);
        let pinv = inv(pv, p);
        for i in k + 1..n {
            let f = a[i * n + k];
            if f == 0 {
                continue;
            }
            let f = mul(f, pinv, p);
            for j in k..n {
                let t = mul(f, a[k * n + j], p);
                a[i * n + j] = sub(a[i * n + j], t, p);
            }
        }
    }
    det
}

/// Determinant of a square integer matrix modulo `p`.
pub fn det(m: &IntMatrix, p: u64) -> u64 {
    assert!(m.is_square());
    let mut a = reduce(m, p);
    det_in_place(&mut a, m.rows(), p)
}

/// Rank of an integer matrix over the field with `p` elements.
pub fn rank(m: &IntMatrix, p: u64) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = reduce(m, p);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        for j in 0..cols {
            a.swap(r * cols + j, piv * cols + j);
        }
        let pinv = inv(a[r * cols + c], p);
        for i in r + 1..rows {
            let f = a[i * cols + c];
            if f == 0 {
                continue;
            }
            let f = mul(f, pinv, p);
            for j in c..cols {
                let t = mul(f, a[r * cols + j], p);
                a[i * cols + j] = sub(a[i * cols + j], t, p);
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &w in &WITNESSES {
        let mut x = pow(w, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Montgomery arithmetic modulo an odd `p < 2^63`. Values handled by
/// [`Montgomery::mul`] are in Montgomery form.
#[derive(Clone, Copy, Debug)]
pub struct Montgomery {
    pub p: u64,
    inv: u64,
    r2: u64,
}

impl Montgomery {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p < 1 << 63, "Montgomery modulus must be odd and below 2^63");
        let mut inv = p;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Montgomery { p, inv, r2 }
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.inv);
        let hi = (t >> 64) as u64;
        let mp = ((m as u128 * self.p as u128) >> 64) as u64;
        if hi >= mp { hi - mp } else { hi + self.p - mp }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline]
    pub fn to_form(&self, x: u64) -> u64 {
        self.mul(x % self.p, self.r2)
    }

    #[inline]
    pub fn from_form(&self, x: u64) -> u64 {
        self.redc(x as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        add(a, b, self.p)
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        sub(a, b, self.p)
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = self.to_form(1);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero element in Montgomery form.
    pub fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }

    /// Residue of an arbitrary integer, in Montgomery form.
    pub fn residue(&self, x: &BigInt) -> u64 {
        self.to_form(residue(x, self.p))
    }
}

/// Primes just below 2^62 in decreasing order.
pub fn large_primes() -> impl Iterator<Item = u64> {
    ((1u64 << 61)..(1u64 << 62)).rev().filter(|&q| q % 2 == 1 && is_prime(q))
}
