//! Small dense helpers shared by the modules: column-major vectorization,
//! Kronecker and Khatri-Rao products, and thin wrappers over faer matmul.

use faer::linalg::matmul::matmul;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatRef, Par};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// `a * b`; either operand may be a conjugated or adjoint view.
pub fn mul<L, R>(a: MatRef<'_, L>, b: MatRef<'_, R>) -> CMat
where
    L: Conjugate<Canonical = C64>,
    R: Conjugate<Canonical = C64>,
{
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    matmul(&mut out, Accum::Replace, a, b, ONE, Par::Seq);
    out
}

/// `dst += alpha * a * b`
pub fn mul_add<L, R>(dst: &mut CMat, a: MatRef<'_, L>, b: MatRef<'_, R>, alpha: C64)
where
    L: Conjugate<Canonical = C64>,
    R: Conjugate<Canonical = C64>,
{
    matmul(dst, Accum::Add, a, b, alpha, Par::Seq);
}

/// Column-major vectorization.
pub fn vectorize(m: MatRef<'_, C64>) -> Vec<C64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &[C64], nrows: usize, ncols: usize) -> CMat {
    assert_eq!(v.len(), nrows * ncols, "devectorize: length mismatch");
    Mat::from_fn(nrows, ncols, |i, j| v[i + nrows * j])
}

pub fn kron(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Column-wise Kronecker product; both operands need the same column count.
pub fn khatri_rao(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    assert_eq!(a.ncols(), b.ncols(), "khatri_rao: column count mismatch");
    let br = b.nrows();
    Mat::from_fn(a.nrows() * br, a.ncols(), |i, j| a[(i / br, j)] * b[(i % br, j)])
}

pub fn frobenius_sqr(m: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `sum conj(a_i) b_i`
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// View a column-major slice as a matrix.
pub fn view(v: &[C64], nrows: usize, ncols: usize) -> MatRef<'_, C64> {
    MatRef::from_column_major_slice(v, nrows, ncols)
}

pub fn conj(m: MatRef<'_, C64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj())
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

/// A linear map `C^ncols -> C^nrows` that may never be stored explicitly.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
    fn adjoint(&self, y: &[C64]) -> Vec<C64>;

    /// Column `j`, by default `apply(e_j)`.
    fn column(&self, j: usize) -> Vec<C64> {
        let mut e = vec![ZERO; self.ncols()];
        e[j] = ONE;
        self.apply(&e)
    }
}

impl LinearOperator for CMat {
    fn nrows(&self) -> usize {
        Mat::nrows(self)
    }

    fn ncols(&self) -> usize {
        Mat::ncols(self)
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), Mat::ncols(self), "apply: length mismatch");
        let y = mul(self.as_ref(), view(x, x.len(), 1));
        y.col_as_slice(0).to_vec()
    }

    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        assert_eq!(y.len(), Mat::nrows(self), "adjoint: length mismatch");
        let x = mul(self.as_ref().adjoint(), view(y, y.len(), 1));
        x.col_as_slice(0).to_vec()
    }

    fn column(&self, j: usize) -> Vec<C64> {
        self.col_as_slice(j).to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorize_stacks_columns() {
        let m = Mat::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        let v = vectorize(m.as_ref());
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(devectorize(&v, 2, 2), m);
    }

    #[test]
    fn kron_of_identity_blocks() {
        let a = identity(2);
        let b = Mat::from_fn(2, 3, |i, j| C64::new(i as f64, j as f64));
        let k = kron(a.as_ref(), b.as_ref());
        assert_eq!(k.nrows(), 4);
        assert_eq!(k.ncols(), 6);
        assert_eq!(k[(3, 5)], b[(1, 2)]);
        assert_eq!(k[(0, 4)], ZERO);
    }

    #[test]
    fn khatri_rao_matches_columnwise_kron() {
        let a = Mat::from_fn(3, 2, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let b = Mat::from_fn(2, 2, |i, j| C64::new(j as f64, i as f64 - 1.0));
        let kr = khatri_rao(a.as_ref(), b.as_ref());
        let full = kron(a.as_ref(), b.as_ref());
        for j in 0..2 {
            for i in 0..6 {
                assert_eq!(kr[(i, j)], full[(i, j * 2 + j)]);
            }
        }
    }
}
