//! Dense complex matrices sized for a handful of qubits.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// |v><v| for a column vector v.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut err: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                err = err.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        err
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product `a ⊗ b`; `a` is the more significant factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a
        .rows
        .checked_mul(b.rows)
        .expect("kron: row count overflow");
    let cols = a
        .cols
        .checked_mul(b.cols)
        .expect("kron: column count overflow");
    ComplexMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    })
}

/// Kronecker product of two column vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_basis_projectors() {
        let p0 = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        assert_eq!(
            kron(&p0, &p1),
            ComplexMatrix::from_real_diag(&[0.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn double_bit_flip() {
        let xx = kron(&pauli_x(), &pauli_x());
        let ket00 = vec![ONE, ZERO, ZERO, ZERO];
        assert_eq!(xx.apply(&ket00), vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn rejects_non_finite_entries() {
        let err = ComplexMatrix::from_vec(1, 1, vec![C64::new(f64::NAN, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        assert!(ComplexMatrix::from_vec(2, 2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn dagger_and_product() {
        let a = ComplexMatrix::from_vec(
            2,
            2,
            vec![C64::new(1.0, 1.0), C64::new(0.0, 2.0), ONE, C64::new(0.0, -1.0)],
        )
        .unwrap();
        let h = &a * &a.dagger();
        assert!(h.hermiticity_error() < 1e-15);
        assert!((h.trace().re - a.data().iter().map(|z| z.norm_sqr()).sum::<f64>()).abs() < 1e-14);
    }
}
