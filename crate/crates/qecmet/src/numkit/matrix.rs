//! Dense complex matrices in row-major storage.

use super::scalar::{cast, Scalar};
use crate::{Error, Result};
use num_complex::Complex;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Dense complex matrix. Column vectors are `n x 1` matrices.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self { rows: nr, cols: nc, entries: rows.into_iter().flatten().collect() })
    }

    /// Square matrix with the given diagonal.
    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Computational basis column vector |i>.
    pub fn ket(dim: usize, i: usize) -> Self {
        assert!(i < dim, "basis index out of range");
        let mut v = Self::zeros(dim, 1);
        v[(i, 0)] = Complex::new(T::one(), T::zero());
        v
    }

    /// Column vector from entries.
    pub fn col_vec(entries: Vec<Complex<T>>) -> Self {
        let rows = entries.len();
        Self { rows, cols: 1, entries }
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

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn frob_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> T {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Largest entry deviation from the conjugate transpose.
    pub fn hermiticity_deviation(&self) -> T {
        assert!(self.is_square());
        let mut dev = T::zero();
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.hermiticity_deviation() <= tol
    }

    /// Hermitian part (A + A†)/2.
    pub fn hermitize(&self) -> Self {
        let half = cast::<T>(0.5);
        (self + &self.dagger()).scale_re(half)
    }

    /// Kronecker product self ⊗ other.
    pub fn kron(&self, other: &Self) -> Self {
        let (ar, ac, br, bc) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Self::zeros(ar * br, ac * bc);
        for i in 0..ar {
            for j in 0..ac {
                let a = self[(i, j)];
                for k in 0..br {
                    for l in 0..bc {
                        out[(i * br + k, j * bc + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Trace out the tensor factors not listed in `keep`.
    ///
    /// `dims` are the factor dimensions in tensor order; their product must
    /// equal the matrix side. `keep` lists the factor indices to retain, in
    /// their original order.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let total: usize = dims.iter().product();
        if total != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "factor dimensions {:?} multiply to {}, matrix side is {}",
                dims, total, self.rows
            )));
        }
        if keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::InvalidInput("keep index out of range".into()));
        }
        let mut sorted = keep.to_vec();
        sorted.dedup();
        if sorted.len() != keep.len() || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("keep indices must be strictly increasing".into()));
        }

        let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
        let keep_dim: usize = keep.iter().map(|&i| dims[i]).product();
        let trace_dim: usize = traced.iter().map(|&i| dims[i]).product();

        // strides of each factor in the full index (row-major tensor order)
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let expand = |idx: usize, factors: &[usize]| -> usize {
            let mut rem = idx;
            let mut full = 0;
            for (pos, &f) in factors.iter().enumerate().rev() {
                let d = dims[f];
                full += (rem % d) * strides[f];
                rem /= d;
                let _ = pos;
            }
            full
        };

        let mut out = Self::zeros(keep_dim, keep_dim);
        for a in 0..keep_dim {
            let ka = expand(a, keep);
            for b in 0..keep_dim {
                let kb = expand(b, keep);
                let mut acc = Complex::new(T::zero(), T::zero());
                for t in 0..trace_dim {
                    let tt = expand(t, &traced);
                    acc = acc + self[(ka + tt, kb + tt)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(out)
    }

    /// Column-stacked vectorization (ket index fastest).
    pub fn vectorize(&self) -> Vec<Complex<T>> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for c in 0..self.cols {
            for r in 0..self.rows {
                v.push(self[(r, c)]);
            }
        }
        v
    }

    /// Inverse of [`Self::vectorize`] for a square matrix of side `n`.
    pub fn unvectorize(v: &[Complex<T>], n: usize) -> Self {
        assert_eq!(v.len(), n * n, "vector length does not match matrix side");
        Self::from_fn(n, n, |r, c| v[c * n + r])
    }

    pub fn column(&self, j: usize) -> Self {
        assert!(j < self.cols);
        Self::from_fn(self.rows, 1, |r, _| self[(r, j)])
    }

    /// Matrix-vector product on a raw slice.
    pub fn mul_slice(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        assert_eq!(v.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.entries[r * self.cols..(r + 1) * self.cols];
            let mut acc = Complex::new(T::zero(), T::zero());
            for (a, b) in row.iter().zip(v.iter()) {
                acc = acc + *a * *b;
            }
            *o = acc;
        }
    }

    /// Outer product |u><v| of two column vectors.
    pub fn outer(u: &Self, v: &Self) -> Self {
        assert!(u.cols == 1 && v.cols == 1, "outer product needs column vectors");
        Self::from_fn(u.rows, v.rows, |r, c| u[(r, 0)] * v[(c, 0)].conj())
    }

    pub fn pauli_x() -> Self {
        let o = Complex::new(T::one(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        Self { rows: 2, cols: 2, entries: vec![z, o, o, z] }
    }

    pub fn pauli_y() -> Self {
        let i = Complex::new(T::zero(), T::one());
        let z = Complex::new(T::zero(), T::zero());
        Self { rows: 2, cols: 2, entries: vec![z, -i, i, z] }
    }

    pub fn pauli_z() -> Self {
        let o = Complex::new(T::one(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        Self { rows: 2, cols: 2, entries: vec![o, z, z, -o] }
    }
}

/// Hilbert-Schmidt inner product Tr(a† b).
pub fn hs_inner<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<Complex<T>> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimensionMismatch(format!(
            "hs_inner of {}x{} with {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, y) in a.entries.iter().zip(b.entries.iter()) {
        acc = acc + x.conj() * *y;
    }
    Ok(acc)
}

impl<T: Scalar> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.entries[r * self.cols + c]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.entries[r * self.cols + c]
    }
}

impl<T: Scalar> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: Scalar> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn neg(self) -> ComplexMatrix<T> {
        self.map(|z| -z)
    }
}

impl<T: Scalar> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in matmul");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let rhs_row = &rhs.entries[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.entries[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row.iter()) {
                    *o = *o + a * *b;
                }
            }
        }
        out
    }
}

impl<T: Scalar> std::fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rng::RngStream;
    use crate::{C64, CMat};

    fn random_mat(rng: &mut RngStream, r: usize, c: usize) -> CMat {
        crate::numkit::rng::ginibre(r, c, rng).unwrap()
    }

    #[test]
    fn kron_identity_case() {
        let i2 = CMat::identity(2);
        assert_eq!(i2.kron(&i2), CMat::identity(4));
    }

    #[test]
    fn kron_diagonal_product() {
        let z = CMat::pauli_z();
        let zz = z.kron(&z);
        let expect = CMat::from_diag(&[
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
        ]);
        assert!((&zz - &expect).frob_norm() < 1e-15);
    }

    #[test]
    fn kron_matches_elementwise_definition() {
        let x = CMat::pauli_x();
        let z = CMat::pauli_z();
        let xz = x.kron(&z);
        // elementwise oracle: (A⊗B)[(i*br+k),(j*bc+l)] = A[i,j]·B[k,l]
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expect = x[(i, j)] * z[(k, l)];
                        assert!((xz[(2 * i + k, 2 * j + l)] - expect).norm() < 1e-15);
                    }
                }
            }
        }
        // block anti-diagonal with ±Z blocks
        assert!((xz[(0, 2)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((xz[(1, 3)] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(xz[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = RngStream::new(7, 0);
        let a = random_mat(&mut rng, 2, 2);
        let rho = (&a * &a.dagger()).scale_re(1.0);
        let rho = rho.scale(C64::new(1.0, 0.0) / rho.trace());
        let e0 = CMat::outer(&CMat::ket(2, 0), &CMat::ket(2, 0));
        let joint = e0.kron(&rho);
        let reduced = joint.partial_trace(&[2, 2], &[1]).unwrap();
        assert!((&reduced - &rho).frob_norm() < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let mut bell = CMat::zeros(4, 1);
        bell[(0, 0)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        bell[(3, 0)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = CMat::outer(&bell, &bell);
        for keep in [[0usize], [1usize]] {
            let red = rho.partial_trace(&[2, 2], &keep).unwrap();
            assert!((&red - &CMat::identity(2).scale_re(0.5)).frob_norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_matches_contraction_oracle() {
        let mut rng = RngStream::new(11, 0);
        let a = random_mat(&mut rng, 4, 4);
        let rho = &a * &a.dagger();
        let red = rho.partial_trace(&[2, 2], &[1]).unwrap();
        // explicit double-loop contraction over the environment index
        let mut oracle = CMat::zeros(2, 2);
        for p in 0..2 {
            for q in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for e in 0..2 {
                    acc += rho[(2 * e + p, 2 * e + q)];
                }
                oracle[(p, q)] = acc;
            }
        }
        assert!((&red - &oracle).frob_norm() < 1e-12);
        // trace preserved
        assert!((red.trace() - rho.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = CMat::identity(6);
        assert!(m.partial_trace(&[2, 2], &[0]).is_err());
    }

    #[test]
    fn hs_inner_pauli_norms_and_orthogonality() {
        let z = CMat::pauli_z();
        let x = CMat::pauli_x();
        assert!((hs_inner(&z, &z).unwrap() - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(hs_inner(&x, &z).unwrap().norm() < 1e-15);
        assert!(hs_inner(&x, &CMat::identity(3)).is_err());
    }

    #[test]
    fn hs_inner_matches_elementwise_sum() {
        let mut rng = RngStream::new(3, 1);
        let a = random_mat(&mut rng, 3, 3);
        let b = random_mat(&mut rng, 3, 3);
        let got = hs_inner(&a, &b).unwrap();
        let mut oracle = C64::new(0.0, 0.0);
        for r in 0..3 {
            for c in 0..3 {
                oracle += a[(r, c)].conj() * b[(r, c)];
            }
        }
        assert!((got - oracle).norm() < 1e-12);
    }

    #[test]
    fn vectorize_is_column_stacked() {
        let m = CMat::from_rows(vec![
            vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
            vec![C64::new(3.0, 0.0), C64::new(4.0, 0.0)],
        ])
        .unwrap();
        let v = m.vectorize();
        assert_eq!(v, vec![C64::new(1.0, 0.0), C64::new(3.0, 0.0), C64::new(2.0, 0.0), C64::new(4.0, 0.0)]);
        assert_eq!(CMat::unvectorize(&v, 2), m);
    }

    #[test]
    fn kron_works_at_f32() {
        let z = ComplexMatrix::<f32>::pauli_z();
        let zz = z.kron(&z);
        assert!((zz[(3, 3)] - num_complex::Complex::new(1.0f32, 0.0)).norm() < 1e-6);
    }

    proptest::proptest! {
        #[test]
        fn kron_associative_and_mixes_with_partial_trace(seed in 0u64..200) {
            let mut rng = RngStream::new(seed, 5);
            let a = random_mat(&mut rng, 2, 2);
            let b = random_mat(&mut rng, 3, 3);
            let c = random_mat(&mut rng, 2, 2);
            let left = a.kron(&b).kron(&c);
            let right = a.kron(&b.kron(&c));
            proptest::prop_assert!((&left - &right).frob_norm() < 1e-12 * left.frob_norm().max(1.0));
            // partial_trace(kron(a,b), keep second) = Tr(a)·b
            let red = a.kron(&b).partial_trace(&[2, 3], &[1]).unwrap();
            let expect = b.scale(a.trace());
            proptest::prop_assert!((&red - &expect).frob_norm() < 1e-11 * expect.frob_norm().max(1.0));
        }
    }
}
