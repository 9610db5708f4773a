//! Small dense linear-algebra helpers shared by the operator modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Systems up to this size are factorized densely; larger ones go through CG.
pub const DENSE_LIMIT: usize = 512;

/// Indicator vector of `set` in a space of `n` states.
pub fn indicator(n: usize, set: &[usize]) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    for &i in set {
        v[i] = 1.0;
    }
    v
}

/// `Σ_i w_i a_i b_i`.
pub fn weighted_dot(w: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    w.iter().zip(a.iter()).zip(b.iter()).map(|((w, a), b)| w * a * b).sum()
}

pub fn weighted_norm_sq(w: &DVector<f64>, a: &DVector<f64>) -> f64 {
    weighted_dot(w, a, a)
}

/// Principal submatrix on `idx × idx`.
pub fn submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

pub fn subvector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// Solves `a x = b` for symmetric positive definite `a`.
///
/// Dense Cholesky up to [`DENSE_LIMIT`], conjugate gradients above it. A
/// failed Cholesky (non-positive pivot) is reported as
/// [`Error::NotPositiveDefinite`].
pub fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    if a.nrows() <= DENSE_LIMIT {
        let chol = a.cholesky().ok_or(Error::NotPositiveDefinite)?;
        Ok(chol.solve(b))
    } else {
        let n = a.nrows();
        let out = conjugate_gradient(|x| &a * x, b, 1e-13, 10 * n)?;
        Ok(out.x)
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradients for a symmetric positive (semi)definite operator.
///
/// Stops once `‖b − A x‖ ≤ tol · ‖b‖`.
pub fn conjugate_gradient<F>(apply: F, b: &DVector<f64>, tol: f64, max_iter: usize) -> Result<CgOutcome>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let b_norm = b.norm();
    let mut x = DVector::zeros(b.len());
    if b_norm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, relative_residual: 0.0 });
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs_old = r.dot(&r);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let alpha = rs_old / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rs_new = r.dot(&r);
        let rel = rs_new.sqrt() / b_norm;
        if rel <= tol {
            return Ok(CgOutcome { x, iterations: it, relative_residual: rel });
        }
        p = &r + (rs_new / rs_old) * &p;
        rs_old = rs_new;
    }
    Err(Error::NoConvergence(max_iter))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Moore–Penrose pseudoinverse of a symmetric PSD matrix, dropping
/// eigenvalues below `rel_cutoff · λ_max`.
pub fn symmetric_pinv(m: &DMatrix<f64>, rel_cutoff: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let (values, vectors) = sorted_symmetric_eigen(m.clone());
    let top = values.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let mut out = DMatrix::zeros(n, n);
    if top == 0.0 {
        return out;
    }
    for (k, &lambda) in values.iter().enumerate() {
        if lambda > rel_cutoff * top {
            let u = vectors.column(k);
            out += (u * u.transpose()) / lambda;
        }
    }
    out
}

/// Relative discrepancy `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_gap(a: f64, b: f64, floor: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(floor);
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}
