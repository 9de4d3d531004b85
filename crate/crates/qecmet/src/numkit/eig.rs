//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use super::matrix::ComplexMatrix;
use super::scalar::{cast, Scalar};
use crate::{Error, Result};
use num_complex::Complex;

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and an
/// eigenvector matrix whose columns are orthonormal. Column phases are fixed
/// by making the largest-magnitude component of each eigenvector real and
/// positive, so decompositions are deterministic.
#[derive(Clone, Debug)]
pub struct HermitianEigenSystem<T: Scalar> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Scalar> HermitianEigenSystem<T> {
    /// Reconstruct V diag(λ) V†.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut d = ComplexMatrix::zeros(n, n);
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            d[(i, i)] = Complex::new(l, T::zero());
        }
        &(v * &d) * &v.dagger()
    }

    pub fn eigenvector(&self, i: usize) -> ComplexMatrix<T> {
        self.eigenvectors.column(i)
    }
}

/// Eigendecompose a Hermitian matrix.
///
/// The input is symmetrized as (m + m†)/2 before factorization; inputs whose
/// Hermiticity deviation exceeds the tolerance are rejected.
pub fn herm_eig<T: Scalar>(m: &ComplexMatrix<T>) -> Result<HermitianEigenSystem<T>> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let tol = cast::<T>(1e-10).max(T::epsilon() * cast::<T>(64.0) * m.max_abs());
    let dev = m.hermiticity_deviation();
    if dev > tol {
        return Err(Error::NotHermitian { deviation: dev.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(herm_eig_of_hermitian(&m.hermitize()))
}

/// Jacobi eigendecomposition of an (already Hermitian) matrix.
pub(crate) fn herm_eig_of_hermitian<T: Scalar>(m: &ComplexMatrix<T>) -> HermitianEigenSystem<T> {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = ComplexMatrix::<T>::identity(n);
    if n <= 1 {
        let vals = (0..n).map(|i| a[(i, i)].re).collect();
        return HermitianEigenSystem { eigenvalues: vals, eigenvectors: v };
    }

    let scale = a.frob_norm().max(T::min_positive_value());
    let stop = T::epsilon() * scale;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n - 1 {
            for q in p + 1..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= stop {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag; // e^{iφ}
                // zero the off-diagonal: t² - 2τt - 1 = 0, smaller-magnitude root
                let tau = (aqq - app) / (mag + mag);
                let t = if tau >= T::zero() {
                    -T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // unitary differs from identity at (p,q):
                //   U_pp = c, U_pq = -s, U_qp = s e^{-iφ}, U_qq = c e^{-iφ}
                let u_qp = phase.conj() * s;
                let u_qq = phase.conj() * c;
                // A <- A·U on columns p, q
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * u_qp;
                    a[(i, q)] = -aip * s + aiq * u_qq;
                }
                // A <- U†·A on rows p, q
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c + aqj * u_qp.conj();
                    a[(q, j)] = -apj * s + aqj * u_qq.conj();
                }
                // V <- V·U
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * u_qp;
                    v[(i, q)] = -vip * s + viq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());

    let eigenvalues: Vec<T> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::<T>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        // phase: largest-magnitude component made real positive
        let mut best = 0;
        let mut best_mag = T::zero();
        for r in 0..n {
            let mag = v[(r, src)].norm();
            if mag > best_mag {
                best_mag = mag;
                best = r;
            }
        }
        let anchor = v[(best, src)];
        let rot = if best_mag > T::zero() {
            anchor.conj() / best_mag
        } else {
            Complex::new(T::one(), T::zero())
        };
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)] * rot;
        }
    }

    HermitianEigenSystem { eigenvalues, eigenvectors: vectors }
}
