//! Small dense complex vectors and Hermitian matrices.
//!
//! Dimensions here are the number of reflecting elements (tens), so plain
//! row-major `Vec` storage is all that is needed.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Real;

/// Non-empty vector of finite complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector<T> {
    entries: Vec<Complex<T>>,
}

impl<T: Real> ComplexVector<T> {
    pub fn new(entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput(
                "complex vector must be non-empty".into(),
            ));
        }
        if let Some(i) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput(format!("entry {i} is not finite")));
        }
        Ok(Self { entries })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "complex vector must be non-empty");
        Self {
            entries: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    /// Vector of `n` ones.
    pub fn ones(n: usize) -> Self {
        assert!(n > 0, "complex vector must be non-empty");
        Self {
            entries: vec![Complex::new(T::one(), T::zero()); n],
        }
    }

    /// Unit-modulus vector `exp(j * angles[n])`.
    pub fn from_angles(angles: &[T]) -> Result<Self> {
        Self::new(
            angles
                .iter()
                .map(|&a| Complex::from_polar(T::one(), a))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex<T>> {
        self.entries.iter()
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.entries
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Sum of entry magnitudes.
    pub fn l1_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm()).sum()
    }

    /// Bilinear product `sum_n self[n] * other[n]` (row vector times column vector).
    pub fn dot(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.len(), other.len(), "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a * b
            })
    }

    /// Element-wise product, i.e. `diag(self) * other`.
    pub fn hadamard(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "dimension mismatch");
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }
}

impl<T> Index<usize> for ComplexVector<T> {
    type Output = Complex<T>;

    fn index(&self, i: usize) -> &Complex<T> {
        &self.entries[i]
    }
}

impl<T> IndexMut<usize> for ComplexVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut Complex<T> {
        &mut self.entries[i]
    }
}

/// Dense `N x N` Hermitian matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> HermitianMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        Self {
            n,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diagonal(&vec![T::one(); n])
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.n + i] = Complex::new(d, T::zero());
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting input that is not
    /// conjugate-symmetric to within `1e3 * eps * max|entry|`.
    pub fn from_row_major(n: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let scale = data.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        let tol = T::lit(1e3) * T::epsilon() * scale.max(T::min_positive_value());
        for i in 0..n {
            for j in i..n {
                if (data[i * n + j] - data[j * n + i].conj()).norm() > tol {
                    return Err(Error::InvalidInput(format!(
                        "entry ({i},{j}) breaks Hermitian symmetry"
                    )));
                }
            }
        }
        let mut m = Self { n, data };
        m.symmetrize();
        Ok(m)
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        let half = T::lit(0.5);
        for i in 0..n {
            self.data[i * n + i].im = T::zero();
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * half;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    /// Accumulates `weight * v * v^H`.
    pub fn add_outer(&mut self, weight: T, v: &ComplexVector<T>) {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        let n = self.n;
        for i in 0..n {
            let vi = v[i] * weight;
            for j in 0..n {
                self.data[i * n + j] = self.data[i * n + j] + vi * v[j].conj();
            }
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| -z).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        self.data
            .chunks_exact(self.n)
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                        acc + a * b
                    })
            })
            .collect()
    }

    /// Real quadratic form `v^H M v`.
    pub fn quadratic_form(&self, v: &[Complex<T>]) -> T {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Gershgorin lower bound on the smallest eigenvalue.
    pub fn gershgorin_lower(&self) -> T {
        (0..self.n)
            .map(|i| self.get(i, i).re - self.off_diagonal_radius(i))
            .fold(T::infinity(), T::min)
    }

    /// Gershgorin upper bound on the largest eigenvalue.
    pub fn gershgorin_upper(&self) -> T {
        (0..self.n)
            .map(|i| self.get(i, i).re + self.off_diagonal_radius(i))
            .fold(T::neg_infinity(), T::max)
    }

    fn off_diagonal_radius(&self, i: usize) -> T {
        (0..self.n)
            .filter(|&j| j != i)
            .map(|j| self.get(i, j).norm())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(ComplexVector::<f64>::new(vec![]).is_err());
        assert!(ComplexVector::new(vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn bilinear_dot_does_not_conjugate() {
        let u = ComplexVector::new(vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(u.dot(&u), c(-1.0, 0.0));
    }

    #[test]
    fn outer_product_is_hermitian() {
        let v = ComplexVector::new(vec![c(1.0, 2.0), c(-0.5, 0.25), c(0.0, -1.0)]).unwrap();
        let mut m = HermitianMatrix::zeros(3);
        m.add_outer(2.0, &v);
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.get(i, j) - m.get(j, i).conj()).norm() < 1e-15);
            }
        }
        assert!((m.quadratic_form(v.as_slice()) - 2.0 * v.norm_sq().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let data = vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)];
        assert!(HermitianMatrix::from_row_major(2, data).is_err());
    }

    #[test]
    fn gershgorin_brackets_diagonal() {
        let m = HermitianMatrix::from_real_diagonal(&[1.0, -2.0, 3.0]);
        assert_eq!(m.gershgorin_lower(), -2.0);
        assert_eq!(m.gershgorin_upper(), 3.0);
    }
}
