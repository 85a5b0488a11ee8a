//! Dense Hermitian helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::{Cholesky, ComplexField, DMatrix, DVector, Dyn};

/// Conditioning proxy above which the Gram factor is regularized.
pub const CONDITION_LIMIT: f64 = 1e14;

#[derive(Debug, Clone)]
pub struct Factor<T: ComplexField<RealField = f64>> {
    pub chol: Cholesky<T, Dyn>,
    /// jitter added to the diagonal, `0` when none was needed
    pub jitter: f64,
}

fn trace_re<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].clone().real()).sum()
}

fn condition_proxy<T: ComplexField<RealField = f64>>(c: &Cholesky<T, Dyn>) -> f64 {
    let l = c.l_dirty();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)].clone().real();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (hi / lo).powi(2)
}

/// Cholesky factor of a Hermitian positive definite matrix, adding
/// `1e-12·trace` to the diagonal if it is numerically singular.
pub fn factor<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> Result<Factor<T>> {
    if let Some(c) = Cholesky::new(a.clone()) {
        if condition_proxy(&c) <= CONDITION_LIMIT {
            return Ok(Factor { chol: c, jitter: 0.0 });
        }
    }
    let jitter = 1e-12 * trace_re(a).abs().max(f64::MIN_POSITIVE);
    let mut b = a.clone();
    for i in 0..b.nrows() {
        b[(i, i)] += T::from_real(jitter);
    }
    log::warn!("Gram factor regularized with jitter {jitter:.3e} (dimension {})", a.nrows());
    Cholesky::new(b)
        .map(|chol| Factor { chol, jitter })
        .ok_or_else(|| Error::Regularization(format!("Cholesky failed at dimension {}", a.nrows())))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: ComplexField<RealField = f64>>(h: &DMatrix<T>) -> Vec<f64> {
    let sym = (h + h.adjoint()) * T::from_real(0.5);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `L^{-1} A L^{-*}` for Hermitian `A` and `B = LL*`.
pub fn congruence<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, f: &Factor<T>) -> DMatrix<T> {
    let l = f.chol.l();
    let x = l.solve_lower_triangular(a).expect("triangular factor is nonsingular");
    let y = l.solve_lower_triangular(&x.adjoint()).expect("triangular factor is nonsingular");
    y.adjoint()
}

/// Largest `σ` with `A u = σ B u`, `B` positive definite.
pub fn generalized_max_eig<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<f64> {
    let f = factor(b)?;
    let c = congruence(a, &f);
    Ok(*hermitian_eigenvalues(&c).last().expect("nonempty matrix"))
}

/// Largest eigenvalue of `diag(ν) u = σ B u`.
pub fn diagonal_generalized_max_eig(nu: &[f64], b: &DMatrix<f64>) -> Result<f64> {
    if nu.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let f = factor(b)?;
    // L^{-1} diag(ν) L^{-T} = (L^{-1} D^{1/2})(L^{-1} D^{1/2})^T
    let n = nu.len();
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { nu[i].sqrt() } else { 0.0 });
    let x = f.chol.l().solve_lower_triangular(&d).expect("triangular factor is nonsingular");
    let g = &x * x.transpose();
    Ok(*hermitian_eigenvalues(&g).last().expect("nonempty matrix"))
}

/// Extreme singular values of `L* D L^{-*}` where `W = LL*` and `D = diag(d)`.
/// These are the singular values of `W^{1/2} D W^{-1/2}`.
pub fn compression_singular_values(w: &Factor<nalgebra::Complex<f64>>, d: &[nalgebra::Complex<f64>]) -> (f64, f64) {
    let a = compression_matrix(w, d);
    let h = a.adjoint() * &a;
    let ev = hermitian_eigenvalues(&h);
    (ev.last().copied().unwrap_or(0.0).max(0.0).sqrt(), ev[0].max(0.0).sqrt())
}

/// `L* D L^{-*}`.
pub fn compression_matrix(
    w: &Factor<nalgebra::Complex<f64>>,
    d: &[nalgebra::Complex<f64>],
) -> DMatrix<nalgebra::Complex<f64>> {
    let l = w.chol.l();
    let lstar = l.adjoint();
    let n = d.len();
    let eye = DMatrix::<nalgebra::Complex<f64>>::identity(n, n);
    let linv_star = lstar.solve_upper_triangular(&eye).expect("triangular factor is nonsingular");
    let mut dl = linv_star;
    for i in 0..n {
        let s = d[i];
        dl.row_mut(i).iter_mut().for_each(|v| *v *= s);
    }
    lstar * dl
}

/// Rayleigh quotient `xᵀ A x / xᵀ B x`.
pub fn rayleigh(a: &DMatrix<f64>, b: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    (x.transpose() * a * x)[(0, 0)] / (x.transpose() * b * x)[(0, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    #[test]
    fn generalized_eigen_of_diagonal_pair() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 6.0]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        assert!((generalized_max_eig(&a, &b).unwrap() - 3.0).abs() < 1e-14);
        assert!((diagonal_generalized_max_eig(&[2.0, 6.0], &b).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn compression_of_identity_gram() {
        let w = DMatrix::<Complex<f64>>::identity(3, 3);
        let f = factor(&w).unwrap();
        let d = [Complex::new(0.5, 0.0), Complex::new(0.0, -2.0), Complex::new(1.0, 1.0)];
        let (hi, lo) = compression_singular_values(&f, &d);
        assert!((hi - 2.0).abs() < 1e-14 && (lo - 0.5).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_gets_jitter() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let f = factor(&a).unwrap();
        assert!(f.jitter > 0.0);
    }
}
