//! Small dense helpers on complex matrices.

use nalgebra::{Cholesky, Dyn, SymmetricEigen};

use crate::{CMat, Error, Result, C64};

/// Squared Frobenius norm, i.e. `Tr(X X^H)`.
pub fn frob_sq(x: &CMat) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// `I + X X^H / sigma2`.
pub fn gram_plus_identity(x: &CMat, sigma2: f64) -> CMat {
    let n = x.nrows();
    let mut a = x * x.adjoint();
    a /= C64::from(sigma2);
    for k in 0..n {
        a[(k, k)] += 1.0;
    }
    a
}

/// Cholesky factor of a Hermitian positive-definite matrix.
pub fn hpd_factor(a: CMat) -> Result<Cholesky<C64, Dyn>> {
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numeric("non-finite entry in Gram matrix".into()));
    }
    let not_pd = || Error::Numeric("Gram matrix is not positive definite".into());
    let f = Cholesky::new(a).ok_or_else(not_pd)?;
    // the complex square root never fails, so a negative pivot shows up as a
    // non-real diagonal entry instead of a failed factorization
    let l = f.l_dirty();
    for k in 0..l.nrows() {
        let d = l[(k, k)];
        if !(d.re > 0.0 && d.im.abs() <= 1e-12 * d.re) {
            return Err(not_pd());
        }
    }
    Ok(f)
}

/// `log2 det A` from the Cholesky factor `A = L L^H`.
pub fn log2_det(factor: &Cholesky<C64, Dyn>) -> f64 {
    let l = factor.l_dirty();
    let nats: f64 = (0..l.nrows()).map(|k| l[(k, k)].re.ln()).sum();
    2.0 * nats / std::f64::consts::LN_2
}

/// Eigenpairs of a Hermitian matrix, eigenvalues in decreasing order.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let sym = (a + a.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Real part of the trace of `X^H Y`.
pub fn re_inner(x: &CMat, y: &CMat) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}
