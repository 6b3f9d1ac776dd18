//! Algebraically largest eigenpair of a Hermitian matrix.
//!
//! Power iteration on `H + c I` with `c` taken from the Gershgorin lower
//! bound, so that `H + c I` is positive semidefinite and its dominant
//! eigenvalue is `lambda_max(H) + c` even when `H` is indefinite or negative
//! semidefinite.

use num_complex::Complex;

use super::linalg::{ComplexVector, HermitianMatrix};
use crate::error::{Error, Result};
use crate::Real;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 200_000;

#[derive(Debug, Clone)]
pub struct Eigenpair<T> {
    pub value: T,
    /// Unit-norm eigenvector.
    pub vector: ComplexVector<T>,
    pub iterations: usize,
    /// `||H v - lambda v||` at exit.
    pub residual: T,
}

/// Largest eigenvalue of `h` and its eigenvector.
///
/// Stops once `||H v - lambda v|| <= tol * ||H||_F`.
pub fn max_eigenpair<T: Real>(
    h: &HermitianMatrix<T>,
    tol: T,
    max_iter: usize,
) -> Result<Eigenpair<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput(
            "eigen tolerance must be positive".into(),
        ));
    }
    let n = h.dim();
    let norm = h.frobenius_norm();
    if norm == T::zero() {
        let mut e1 = ComplexVector::zeros(n);
        e1[0] = Complex::new(T::one(), T::zero());
        return Ok(Eigenpair {
            value: T::zero(),
            vector: e1,
            iterations: 0,
            residual: T::zero(),
        });
    }
    let shift = (-h.gershgorin_lower()).max(T::zero());
    let threshold = tol * norm;

    let mut v = start_vector::<T>(n);
    let mut residual = T::infinity();
    for iter in 0..=max_iter {
        let hv = h.mul_vec(&v);
        let lambda: T = v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum();
        residual = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<T>()
            .sqrt();
        if residual <= threshold {
            return Ok(Eigenpair {
                value: lambda,
                vector: ComplexVector::new(v)?,
                iterations: iter,
                residual,
            });
        }
        let w: Vec<Complex<T>> = hv.iter().zip(&v).map(|(a, b)| a + b * shift).collect();
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if wn == T::zero() {
            break;
        }
        v = w.into_iter().map(|z| z / wn).collect();
    }
    Err(Error::NoConvergence {
        what: "max_eigenpair",
        iterations: max_iter,
        residual: residual.as_f64(),
    })
}

/// Deterministic start with generic phases so it is not orthogonal to the
/// dominant eigenspace of structured inputs.
fn start_vector<T: Real>(n: usize) -> Vec<Complex<T>> {
    let v: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let i = T::count(i);
            let mag = T::one() + T::lit(0.5) * (i * T::lit(1.3) + T::one()).sin();
            Complex::from_polar(mag, i * T::lit(2.399_963_229_728_653))
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let e = max_eigenpair(&HermitianMatrix::<f64>::identity(3), 1e-12, 1000).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let d = HermitianMatrix::from_real_diagonal(&[1.0f64, 2.0, 3.0]);
        let e = max_eigenpair(&d, 1e-12, 10_000).unwrap();
        assert!((e.value - 3.0).abs() < 1e-10);
        assert!((e.vector[2].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn finds_largest_value_not_largest_magnitude() {
        let d = HermitianMatrix::from_real_diagonal(&[-5.0f64, -1.0, -3.0]);
        let e = max_eigenpair(&d, 1e-12, 10_000).unwrap();
        assert!((e.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn rank_one_outer_product() {
        let a = ComplexVector::new(vec![
            Complex::new(0.3f64, -1.1),
            Complex::new(2.0, 0.4),
            Complex::new(-0.7, 0.9),
            Complex::new(0.1, 0.0),
        ])
        .unwrap();
        let mut m = HermitianMatrix::zeros(4);
        m.add_outer(1.0, &a);
        let e = max_eigenpair(&m, 1e-12, 10_000).unwrap();
        assert!((e.value - a.norm_sq()).abs() < 1e-10 * a.norm_sq());
    }

    #[test]
    fn negative_semidefinite_rank_deficient() {
        let a = ComplexVector::new(vec![
            Complex::new(1.0f64, 1.0),
            Complex::new(0.5, -2.0),
            Complex::new(0.0, 1.0),
        ])
        .unwrap();
        let mut m = HermitianMatrix::zeros(3);
        m.add_outer(1.0, &a);
        let e = max_eigenpair(&m.neg(), 1e-12, 10_000).unwrap();
        assert!(e.value.abs() < 1e-10);
    }

    #[test]
    fn reports_non_convergence() {
        let d = HermitianMatrix::from_real_diagonal(&[1.0f64, 1.0 - 1e-9, 0.0]);
        assert!(matches!(
            max_eigenpair(&d, 1e-15, 3),
            Err(Error::NoConvergence { .. })
        ));
    }
}
