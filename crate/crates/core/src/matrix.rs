//! Dense matrices of arbitrary-precision integers.
//!
//! Two serializations are provided: a compact self-describing binary
//! format and a JSON form `{"rows":r,"cols":c,"entries":["..",..]}` with
//! entries as decimal strings.

use std::fmt;
use std::io::{Read, Write};
use std::ops::{Index, IndexMut};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FLMX";
const FORMAT_VERSION: u8 = 1;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    /// Builds a matrix from rows of machine integers. Panics on ragged input.
    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&x| x.into()));
        }
        IntMatrix { rows: r, cols: c, entries }
    }

    pub fn from_fn<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> BigInt + Sync,
    {
        let entries = (0..rows * cols).into_par_iter().map(|k| f(k / cols.max(1), k % cols.max(1))).collect();
        IntMatrix { rows, cols, entries }
    }

    pub fn diagonal<T: Into<BigInt> + Clone>(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, x) in diag.iter().enumerate() {
            m.entries[i * n + i] = x.clone().into();
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.entries
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Rows `range` as a new matrix.
    pub fn row_block(&self, range: std::ops::Range<usize>) -> Self {
        assert!(range.end <= self.rows);
        IntMatrix {
            rows: range.len(),
            cols: self.cols,
            entries: self.entries[range.start * self.cols..range.end * self.cols].to_vec(),
        }
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &IntMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {} columns",
                self.cols, other.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(IntMatrix { rows: self.rows + other.rows, cols: self.cols, entries })
    }

    /// Exact product, parallel over output rows.
    pub fn mul(&self, rhs: &IntMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let cols = rhs.cols;
        let mut entries = vec![BigInt::zero(); self.rows * cols];
        if cols > 0 {
            entries.par_chunks_mut(cols).enumerate().for_each(|(i, out)| {
                for (k, a) in self.row(i).iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (o, b) in out.iter_mut().zip(rhs.row(k)) {
                        if !b.is_zero() {
                            *o += a * b;
                        }
                    }
                }
            });
        }
        Ok(IntMatrix { rows: self.rows, cols, entries })
    }

    /// Largest bit length of any entry; a cheap size diagnostic.
    pub fn max_bits(&self) -> u64 {
        self.entries.iter().map(BigInt::bits).max().unwrap_or(0)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[FORMAT_VERSION])?;
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        for x in &self.entries {
            let (sign, mag) = x.to_bytes_le();
            let tag = match sign {
                Sign::NoSign => 0u8,
                Sign::Plus => 1,
                Sign::Minus => 2,
            };
            let mag: &[u8] = if tag == 0 { &[] } else { &mag };
            w.write_all(&[tag])?;
            w.write_all(&(mag.len() as u32).to_le_bytes())?;
            w.write_all(mag)?;
        }
        Ok(())
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_binary(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", version[0])));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let rows = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let cols = u64::from_le_bytes(word) as usize;
        let count = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format("dimension overflow".into()))?;
        let mut entries = Vec::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            let mut tag = [0u8; 1];
            r.read_exact(&mut tag)?;
            let mut len = [0u8; 4];
            r.read_exact(&mut len)?;
            let len = u32::from_le_bytes(len) as usize;
            let mut mag = vec![0u8; len];
            r.read_exact(&mut mag)?;
            let sign = match tag[0] {
                0 if len == 0 => Sign::NoSign,
                1 => Sign::Plus,
                2 => Sign::Minus,
                t => return Err(Error::Format(format!("bad sign tag {t}"))),
            };
            entries.push(BigInt::from_bytes_le(sign, &mag));
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixJson::from(self)).expect("matrix JSON is always serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: MatrixJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Wire form of a matrix. Entries are decimal strings because they
/// routinely exceed 64 bits.
#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<String>,
}

impl From<&IntMatrix> for MatrixJson {
    fn from(m: &IntMatrix) -> Self {
        MatrixJson { rows: m.rows, cols: m.cols, entries: m.entries.iter().map(ToString::to_string).collect() }
    }
}

impl TryFrom<MatrixJson> for IntMatrix {
    type Error = Error;

    fn try_from(raw: MatrixJson) -> Result<Self> {
        let entries = raw
            .entries
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|e| Error::Format(format!("entry {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        IntMatrix::from_entries(raw.rows, raw.cols, entries)
    }
}

pub(crate) fn abs_cmp(a: &BigInt, b: &BigInt) -> std::cmp::Ordering {
    a.magnitude().cmp(b.magnitude())
}

pub(crate) fn is_unit(x: &BigInt) -> bool {
    x.magnitude().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_with_large_entries() {
        let big: BigInt = "-123456789012345678901234567890".parse().unwrap();
        let mut m = IntMatrix::from_rows(&[vec![0i64, 1, -1], vec![i64::MAX, i64::MIN, 7]]);
        m[(1, 2)] = big.clone();
        let back = IntMatrix::read_binary(&m.to_binary()[..]).unwrap();
        assert_eq!(back, m);
        assert_eq!(back[(1, 2)], big);
    }

    #[test]
    fn json_uses_decimal_strings() {
        let m = IntMatrix::from_rows(&[vec![1i64, -2]]);
        assert_eq!(m.to_json(), r#"{"rows":1,"cols":2,"entries":["1","-2"]}"#);
        assert_eq!(IntMatrix::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn json_rejects_wrong_entry_count() {
        let err = IntMatrix::from_json(r#"{"rows":2,"cols":2,"entries":["1"]}"#).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
        assert!(IntMatrix::from_json(r#"{"rows":1,"cols":1,"entries":["x"]}"#).is_err());
    }

    #[test]
    fn truncated_binary_is_an_error() {
        let m = IntMatrix::identity(3);
        let bytes = m.to_binary();
        assert!(IntMatrix::read_binary(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(IntMatrix::read_binary(&bad[..]), Err(Error::Format(_))));
    }

    #[test]
    fn product_and_transpose() {
        let a = IntMatrix::from_rows(&[vec![1i64, 2], vec![3, 4], vec![5, 6]]);
        let at = a.transpose();
        let g = at.mul(&a).unwrap();
        assert_eq!(g, IntMatrix::from_rows(&[vec![35i64, 44], vec![44, 56]]));
        assert!(g.is_symmetric());
        assert!(a.mul(&a).is_err());
    }
}
