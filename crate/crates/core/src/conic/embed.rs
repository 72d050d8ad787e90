//! Complex-to-real embedding of Hermitian matrices.
//!
//! `H = A + jB` maps to `[[A, -B], [B, A]]`. The embedding doubles every
//! eigenvalue's multiplicity, and `Tr(embed(A) embed(X)) = 2 Re Tr(A X)`.

use nalgebra::{DMatrix, DVector};

use crate::{CMatrix, CVector, Error, Result, C64};

/// Largest entry of `|H - H^H|`.
pub fn hermitian_defect(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn check_hermitian(h: &CMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension(format!("matrix is {:?}, not square", h.shape())));
    }
    let scale = h.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let defect = hermitian_defect(h);
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

pub fn embed_hermitian(h: &CMatrix) -> Result<DMatrix<f64>> {
    check_hermitian(h)?;
    let n = h.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    Ok(out)
}

/// Inverse of the embedding. Symmetric matrices outside the image of
/// [`embed_hermitian`] are projected onto it first, so the result is always
/// Hermitian, and PSD whenever the input is.
pub fn unembed(y: &DMatrix<f64>) -> CMatrix {
    let n = y.nrows() / 2;
    let mut x = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
            let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
            x[(i, j)] = C64::new(re, im);
        }
    }
    hermitianize(&x)
}

pub fn hermitianize(x: &CMatrix) -> CMatrix {
    (x + x.adjoint()) * C64::new(0.5, 0.0)
}

/// Real images of the rank-one term `v v^H`: with `p = [Re v; Im v]` and
/// `q = [-Im v; Re v]`, `embed(v v^H) = p p^T + q q^T`.
pub(crate) fn embed_factor(v: &CVector) -> (DVector<f64>, DVector<f64>) {
    let n = v.len();
    let mut p = DVector::zeros(2 * n);
    let mut q = DVector::zeros(2 * n);
    for i in 0..n {
        p[i] = v[i].re;
        p[i + n] = v[i].im;
        q[i] = -v[i].im;
        q[i + n] = v[i].re;
    }
    (p, q)
}
