//! Rank-revealing orthonormalization by one-sided Jacobi.
//!
//! The singular value decomposition of the matrix whose columns are the input
//! vectors is computed by orthogonalizing column pairs with unitary rotations;
//! the surviving columns (singular values above a relative cutoff) are the
//! orthonormal basis of the span.

use super::scalar::Scalar;
use crate::numkit::matrix::ComplexMatrix;
use num_complex::Complex;

/// Orthonormal span basis together with the retained singular values
/// (descending).
#[derive(Clone, Debug)]
pub struct SpanSvd<T: Scalar> {
    pub basis: Vec<Vec<Complex<T>>>,
    pub singular_values: Vec<T>,
}

/// Orthonormalize `vectors` (all of equal length), dropping directions whose
/// singular value falls below `rel_cutoff` times the largest.
pub fn span_basis<T: Scalar>(vectors: &[Vec<Complex<T>>], rel_cutoff: T) -> SpanSvd<T> {
    if vectors.is_empty() {
        return SpanSvd { basis: vec![], singular_values: vec![] };
    }
    let n = vectors[0].len();
    assert!(vectors.iter().all(|v| v.len() == n), "span vectors of unequal length");
    let mut cols: Vec<Vec<Complex<T>>> = vectors.to_vec();
    let k = cols.len();

    let inner = |a: &[Complex<T>], b: &[Complex<T>]| -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (x, y) in a.iter().zip(b.iter()) {
            acc = acc + x.conj() * *y;
        }
        acc
    };

    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..k.saturating_sub(1) {
            for j in i + 1..k {
                let a = inner(&cols[i], &cols[i]).re;
                let b = inner(&cols[j], &cols[j]).re;
                let c = inner(&cols[i], &cols[j]);
                let mag = c.norm();
                if mag <= eps * (a * b).sqrt().max(T::min_positive_value()) {
                    continue;
                }
                rotated = true;
                let phase = c / mag;
                let tau = (b - a) / (mag + mag);
                let t = if tau >= T::zero() {
                    -T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let ct = T::one() / (T::one() + t * t).sqrt();
                let st = t * ct;
                let r_ji = phase.conj() * st;
                let r_jj = phase.conj() * ct;
                for l in 0..n {
                    let wi = cols[i][l];
                    let wj = cols[j][l];
                    cols[i][l] = wi * ct + wj * r_ji;
                    cols[j][l] = -wi * st + wj * r_jj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<(usize, T)> =
        cols.iter().enumerate().map(|(i, c)| (i, inner(c, c).re.sqrt())).collect();
    sigma.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let sigma_max = sigma.first().map_or(T::zero(), |s| s.1);
    if sigma_max <= T::min_positive_value() {
        return SpanSvd { basis: vec![], singular_values: vec![] };
    }

    let mut basis = Vec::new();
    let mut values = Vec::new();
    for (idx, s) in sigma {
        if s > rel_cutoff * sigma_max {
            let inv = T::one() / s;
            basis.push(cols[idx].iter().map(|z| *z * inv).collect());
            values.push(s);
        }
    }
    SpanSvd { basis, singular_values: values }
}

/// Convenience wrapper: orthonormalize a set of matrices under the
/// Hilbert-Schmidt inner product, returning matrices.
pub fn span_basis_matrices<T: Scalar>(
    generators: &[ComplexMatrix<T>],
    rel_cutoff: T,
) -> (Vec<ComplexMatrix<T>>, Vec<T>) {
    if generators.is_empty() {
        return (vec![], vec![]);
    }
    let rows = generators[0].rows();
    let cols = generators[0].cols();
    let vecs: Vec<Vec<Complex<T>>> = generators.iter().map(|g| g.vectorize()).collect();
    let svd = span_basis(&vecs, rel_cutoff);
    let mats = svd
        .basis
        .iter()
        .map(|v| {
            let mut m = ComplexMatrix::zeros(rows, cols);
            let mut it = v.iter();
            for c in 0..cols {
                for r in 0..rows {
                    m[(r, c)] = *it.next().unwrap();
                }
            }
            m
        })
        .collect();
    (mats, svd.singular_values)
}
