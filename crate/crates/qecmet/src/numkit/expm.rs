//! Matrix exponential by scaling-and-squaring with diagonal Padé approximants.
//!
//! Degree and squaring count are chosen from the exact 1-norm, following the
//! usual theta thresholds for degrees 3/5/7/9/13. Matrices in this crate are
//! small, so the 1-norm is computed directly rather than estimated.

use super::matrix::ComplexMatrix;
use super::scalar::{cast, Scalar};
use crate::{Error, Result};

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

fn pade_coeffs(m: usize) -> &'static [f64] {
    match m {
        3 => &[120., 60., 12., 1.],
        5 => &[30240., 15120., 3360., 420., 30., 1.],
        7 => &[17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.],
        9 => &[
            17643225600.,
            8821612800.,
            2075673600.,
            302702400.,
            30270240.,
            2162160.,
            110880.,
            3960.,
            90.,
            1.,
        ],
        13 => &[
            64764752532480000.,
            32382376266240000.,
            7771770303897600.,
            1187353796428800.,
            129060195264000.,
            10559470521600.,
            670442572800.,
            33522128640.,
            1323241920.,
            40840800.,
            960960.,
            16380.,
            182.,
            1.,
        ],
        _ => unreachable!("unsupported Padé degree"),
    }
}

/// e^m for a square complex matrix.
pub fn expm<T: Scalar>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("expm of a matrix with non-finite entries".into()));
    }
    let norm = m.one_norm().to_f64().unwrap_or(f64::INFINITY);

    for &(deg, theta) in &THETA[..4] {
        if norm <= theta {
            return pade(m, deg);
        }
    }
    let theta13 = THETA[4].1;
    let s = if norm > theta13 { (norm / theta13).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale_re(cast::<T>(0.5f64.powi(s as i32)));
    let mut r = pade(&scaled, 13)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade<T: Scalar>(a: &ComplexMatrix<T>, m: usize) -> Result<ComplexMatrix<T>> {
    let n = a.rows();
    let b: Vec<T> = pade_coeffs(m).iter().map(|&c| cast(c)).collect();
    let id = ComplexMatrix::<T>::identity(n);
    let a2 = a * a;

    let (u, v) = if m <= 9 {
        let mut powers = vec![id.clone(), a2.clone()]; // A^0, A^2, ..., A^(m-1)
        while powers.len() < (m + 1) / 2 {
            powers.push(powers.last().unwrap() * &a2);
        }
        let mut u_inner = ComplexMatrix::<T>::zeros(n, n);
        let mut v = ComplexMatrix::<T>::zeros(n, n);
        for (k, p) in powers.iter().enumerate() {
            if 2 * k + 1 <= m {
                u_inner = &u_inner + &p.scale_re(b[2 * k + 1]);
            }
            v = &v + &p.scale_re(b[2 * k]);
        }
        (a * &u_inner, v)
    } else {
        let a4 = &a2 * &a2;
        let a6 = &a2 * &a4;
        let u_hi = &(&a6.scale_re(b[13]) + &a4.scale_re(b[11])) + &a2.scale_re(b[9]);
        let u_lo = &(&(&a6.scale_re(b[7]) + &a4.scale_re(b[5])) + &a2.scale_re(b[3]))
            + &id.scale_re(b[1]);
        let u_inner = &(&a6 * &u_hi) + &u_lo;
        let v_hi = &(&a6.scale_re(b[12]) + &a4.scale_re(b[10])) + &a2.scale_re(b[8]);
        let v_lo = &(&(&a6.scale_re(b[6]) + &a4.scale_re(b[4])) + &a2.scale_re(b[2]))
            + &id.scale_re(b[0]);
        let v = &(&a6 * &v_hi) + &v_lo;
        (a * &u_inner, v)
    };

    // solve (V - U) X = (V + U)
    lu_solve(&(&v - &u), &(&v + &u))
}

/// Solve A X = B by LU factorization with partial pivoting.
pub(crate) fn lu_solve<T: Scalar>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    assert!(a.is_square());
    assert_eq!(a.rows(), b.rows());
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.clone();
    let nrhs = b.cols();

    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for r in k + 1..n {
            let mag = lu[(r, k)].norm();
            if mag > best {
                best = mag;
                piv = r;
            }
        }
        if best < T::min_positive_value() {
            return Err(Error::NumericalFault("singular matrix in linear solve".into()));
        }
        if piv != k {
            for c in 0..n {
                let tmp = lu[(k, c)];
                lu[(k, c)] = lu[(piv, c)];
                lu[(piv, c)] = tmp;
            }
            for c in 0..nrhs {
                let tmp = x[(k, c)];
                x[(k, c)] = x[(piv, c)];
                x[(piv, c)] = tmp;
            }
        }
        let diag = lu[(k, k)];
        for r in k + 1..n {
            let factor = lu[(r, k)] / diag;
            lu[(r, k)] = factor;
            if factor.norm() == T::zero() {
                continue;
            }
            for c in k + 1..n {
                let sub = factor * lu[(k, c)];
                lu[(r, c)] = lu[(r, c)] - sub;
            }
            for c in 0..nrhs {
                let sub = factor * x[(k, c)];
                x[(r, c)] = x[(r, c)] - sub;
            }
        }
    }
    // back substitution
    for c in 0..nrhs {
        for r in (0..n).rev() {
            let mut acc = x[(r, c)];
            for k in r + 1..n {
                acc = acc - lu[(r, k)] * x[(k, c)];
            }
            x[(r, c)] = acc / lu[(r, r)];
        }
    }
    Ok(x)
}
