//! Energy-regularized least squares and the special-case measure
//! constructors (product measures, joinings, diagonal measures).
//!
//! The learning objective is
//!
//! ```text
//! Q(h) = ‖ψ − h‖²_{L²(μ)} + γ ‖h‖²_{H_E}
//! ```
//!
//! whose minimizer solves `(diag(μ) + γ L) h = diag(μ) ψ` with
//! `L = D_W − W`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{energy_inner, laplacian};
use crate::error::{Error, Result};
use crate::linalg::weighted_dot;
use crate::net::Network;

/// Perturbation size used by [`optimality_check`].
pub const OPTIMALITY_EPS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct LearnProblem {
    pub net: Network,
    pub psi: DVector<f64>,
    pub gamma: f64,
}

impl LearnProblem {
    pub fn new(net: Network, psi: DVector<f64>, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::NegativeGamma(gamma));
        }
        net.check_vec(&psi)?;
        Ok(Self { net, psi, gamma })
    }
}

/// A factorized system `diag(μ) + γL`, reusable across targets.
#[derive(Debug, Clone)]
pub struct RegularizedSolver {
    mu: DVector<f64>,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl RegularizedSolver {
    pub fn new(net: &Network, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::NegativeGamma(gamma));
        }
        let mu = net.mu().clone();
        if gamma == 0.0 {
            return Ok(Self { mu, factor: None });
        }
        let system = DMatrix::from_diagonal(&mu) + laplacian(net) * gamma;
        let factor = Cholesky::new(system).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self { mu, factor: Some(factor) })
    }

    pub fn solve(&self, psi: &DVector<f64>) -> Result<DVector<f64>> {
        if psi.len() != self.mu.len() {
            return Err(Error::DimensionMismatch { expected: self.mu.len(), found: psi.len() });
        }
        if psi.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("psi"));
        }
        Ok(match &self.factor {
            None => psi.clone(),
            Some(f) => f.solve(&psi.component_mul(&self.mu)),
        })
    }
}

pub fn solve_regularized(problem: &LearnProblem) -> Result<DVector<f64>> {
    RegularizedSolver::new(&problem.net, problem.gamma)?.solve(&problem.psi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub fit: f64,
    pub penalty: f64,
    pub total: f64,
}

pub fn objective(problem: &LearnProblem, h: &DVector<f64>) -> Result<Objective> {
    problem.net.check_vec(h)?;
    let r = &problem.psi - h;
    let fit = weighted_dot(problem.net.mu(), &r, &r);
    let penalty = if problem.gamma == 0.0 { 0.0 } else { problem.gamma * energy_inner(&problem.net, h, h)? };
    Ok(Objective { fit, penalty, total: fit + penalty })
}

/// `d/dε Q(h + εk)` at `ε = 0`.
pub fn first_variation(problem: &LearnProblem, h: &DVector<f64>, k: &DVector<f64>) -> Result<f64> {
    problem.net.check_vec(k)?;
    let r = h - &problem.psi;
    Ok(2.0 * weighted_dot(problem.net.mu(), &r, k) + 2.0 * problem.gamma * energy_inner(&problem.net, h, k)?)
}

/// Largest `Q(h) − Q(h + εk)` over `trials` random unit directions `k`
/// (and their negatives). Positive values mean `h` is not a minimizer.
pub fn optimality_check(problem: &LearnProblem, h: &DVector<f64>, trials: usize, seed: u64) -> Result<f64> {
    let base = objective(problem, h)?.total;
    let n = problem.net.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials.max(1) {
        let mut k = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = k.norm();
        if norm == 0.0 {
            continue;
        }
        k /= norm;
        for sign in [1.0, -1.0] {
            let moved = h + &k * (sign * OPTIMALITY_EPS);
            worst = worst.max(base - objective(problem, &moved)?.total);
        }
    }
    Ok(worst)
}

/// Normalized weighted mean.
fn weighted_mean(weights: &DVector<f64>, f: &DVector<f64>) -> f64 {
    weights.dot(f) / weights.sum()
}

/// `W_ij = r_i μ_i r_j μ_j` for a probability vector `μ`.
pub fn product_measure_network(mu: &[f64], r: &[f64]) -> Result<Network> {
    if mu.len() != r.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), found: r.len() });
    }
    if mu.iter().chain(r).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("product measure"));
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::NotProbability(total));
    }
    if let Some(i) = r.iter().position(|&x| x < 0.0) {
        return Err(Error::NonpositiveWeight(i));
    }
    let n = mu.len();
    let w = DMatrix::from_fn(n, n, |i, j| r[i] * mu[i] * r[j] * mu[j]);
    Network::unlabeled(mu.to_vec(), w)
}

/// Closed forms on a product-measure network with density `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure {
    pub mu: DVector<f64>,
    pub r: DVector<f64>,
}

impl ProductMeasure {
    pub fn new(mu: &[f64], r: &[f64]) -> Self {
        Self { mu: DVector::from_column_slice(mu), r: DVector::from_column_slice(r) }
    }

    /// `E_μ(r)`
    pub fn mean_r(&self) -> f64 {
        self.mu.dot(&self.r)
    }

    /// Atoms of `μ_r = r μ` (not normalized; `E_{μ_r}(f) = ∫ f dμ_r`).
    pub fn mu_r(&self) -> DVector<f64> {
        self.r.component_mul(&self.mu)
    }

    /// `c_i = E_μ(r) r_i`
    pub fn conductance(&self) -> DVector<f64> {
        &self.r * self.mean_r()
    }

    /// `E_μ(r) E_{μ_r}(f²) − E_{μ_r}(f)²`
    pub fn energy_closed_form(&self, f: &DVector<f64>) -> f64 {
        let mr = self.mu_r();
        let e1 = mr.dot(f);
        let e2 = mr.dot(&f.component_mul(f));
        self.mean_r() * e2 - e1 * e1
    }

    /// `α(f) = (E_μ(r) f − E_{μ_r}(f)) / √E_μ(r)`
    pub fn alpha(&self, f: &DVector<f64>) -> DVector<f64> {
        let m = self.mean_r();
        let e1 = self.mu_r().dot(f);
        (f * m).add_scalar(-e1) / m.sqrt()
    }

    /// `‖α(f)‖²_{L²(μ_r)}`
    pub fn alpha_norm_sq(&self, f: &DVector<f64>) -> f64 {
        let a = self.alpha(f);
        weighted_dot(&self.mu_r(), &a, &a)
    }

    /// `Cov_μ(f, g)`, the energy inner product when `r ≡ 1`.
    pub fn covariance(&self, f: &DVector<f64>, g: &DVector<f64>) -> f64 {
        self.mu.dot(&f.component_mul(g)) - weighted_mean(&self.mu, f) * weighted_mean(&self.mu, g)
    }
}

/// `W_ij = μ_i [S(i) = j]` for a measure-preserving map `S`.
pub fn joining_network(mu: &[f64], s: &[usize]) -> Result<Network> {
    let n = mu.len();
    if s.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: s.len() });
    }
    if let Some(&bad) = s.iter().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let mut pushed = vec![0.0; n];
    for (i, &j) in s.iter().enumerate() {
        pushed[j] += mu[i];
    }
    for j in 0..n {
        if (pushed[j] - mu[j]).abs() > 1e-12 * mu[j].abs().max(1.0) {
            return Err(Error::NotMeasurePreserving(j));
        }
    }
    let w = DMatrix::from_fn(n, n, |i, j| if s[i] == j { mu[i] } else { 0.0 });
    for i in 0..n {
        for j in (i + 1)..n {
            if (w[(i, j)] - w[(j, i)]).abs() > 1e-12 * (w[(i, j)] + w[(j, i)]).max(1.0) {
                return Err(Error::SymmetryViolation { i, j });
            }
        }
    }
    Network::unlabeled(mu.to_vec(), w)
}

/// `ρ = ν` on the diagonal: `W = diag(ν)`, default `μ = 1`.
pub fn diagonal_network(nu: &[f64], mu: Option<&[f64]>) -> Result<Network> {
    let n = nu.len();
    let mu = mu.map(<[f64]>::to_vec).unwrap_or_else(|| vec![1.0; n]);
    if let Some(i) = nu.iter().position(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::NonpositiveWeight(i));
    }
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(nu));
    Network::unlabeled(mu, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy_norm_sq;
    use crate::fixtures;
    use crate::linalg::rel_gap;
    use crate::operators::{apply_delta, markov_power, spectrum_p};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn gamma_zero_returns_target() {
        let p = LearnProblem::new(fixtures::triangle(), v(&[1.0, -2.0, 0.5]), 0.0).unwrap();
        assert_eq!(solve_regularized(&p).unwrap(), p.psi);
        assert!(optimality_check(&p, &p.psi, 10, 1).unwrap() <= 0.0);
    }

    #[test]
    fn negative_gamma_rejected() {
        let r = LearnProblem::new(fixtures::triangle(), v(&[1.0, 0.0, 0.0]), -1.0);
        assert_eq!(r, Err(Error::NegativeGamma(-1.0)));
    }

    #[test]
    fn triangle_gamma_one_matches_dense_solve() {
        let net = fixtures::triangle();
        let p = LearnProblem::new(net.clone(), v(&[1.0, 0.0, 0.0]), 1.0).unwrap();
        let h = solve_regularized(&p).unwrap();
        // I + L with L = 3I − J on K₃
        let a = DMatrix::from_row_slice(3, 3, &[3.0, -1.0, -1.0, -1.0, 3.0, -1.0, -1.0, -1.0, 3.0]);
        let oracle = a.lu().solve(&v(&[1.0, 0.0, 0.0])).unwrap();
        assert!((&h - oracle).amax() < 1e-14);
        assert!((h - v(&[0.5, 0.25, 0.25])).amax() < 1e-14);
    }

    #[test]
    fn large_gamma_gives_mu_mean() {
        let net = fixtures::product_measure();
        let psi = v(&[1.0, -1.0, 2.0, 0.5, 3.0]);
        let p = LearnProblem::new(net.clone(), psi.clone(), 1e8).unwrap();
        let h = solve_regularized(&p).unwrap();
        let mean = weighted_mean(net.mu(), &psi);
        assert!(h.iter().all(|x| (x - mean).abs() < 1e-6));
    }

    #[test]
    fn optimality_and_gradient() {
        for fx in fixtures::all() {
            let n = fx.network.len();
            let psi = DVector::from_fn(n, |i, _| (i as f64 * 1.3).sin());
            let p = LearnProblem::new(fx.network.clone(), psi.clone(), 0.7).unwrap();
            let h = solve_regularized(&p).unwrap();
            let q = objective(&p, &h).unwrap().total;
            assert!(optimality_check(&p, &h, 20, 5).unwrap() <= 1e-10 * (1.0 + q), "{}", fx.name);
            let k = DVector::from_fn(n, |i, _| (i as f64 + 0.5).cos());
            let eps = 1e-5;
            let fd = (objective(&p, &(&h + &k * eps)).unwrap().total - objective(&p, &(&h - &k * eps)).unwrap().total)
                / (2.0 * eps);
            let at_psi = first_variation(&p, &psi, &k).unwrap();
            let fd_psi = (objective(&p, &(&psi + &k * eps)).unwrap().total
                - objective(&p, &(&psi - &k * eps)).unwrap().total)
                / (2.0 * eps);
            assert!(rel_gap(at_psi, fd_psi, 1e-12) < 1e-6, "{}", fx.name);
            assert!(fd.abs() < 1e-6 * (1.0 + q));
        }
    }

    #[test]
    fn psi_is_not_optimal_when_penalized() {
        let p = LearnProblem::new(fixtures::triangle(), v(&[1.0, 0.0, 0.0]), 1.0).unwrap();
        assert!(optimality_check(&p, &p.psi, 10, 3).unwrap() > 0.0);
    }

    #[test]
    fn product_measure_uniform_covariance() {
        let mu = [0.25; 4];
        let net = product_measure_network(&mu, &[1.0; 4]).unwrap();
        let pm = ProductMeasure::new(&mu, &[1.0; 4]);
        for a in 1u32..16 {
            for b in 1u32..16 {
                let chi = |m: u32| DVector::from_fn(4, |i, _| if m >> i & 1 == 1 { 1.0 } else { 0.0 });
                let (fa, fb) = (chi(a), chi(b));
                let ma = a.count_ones() as f64 / 4.0;
                let mb = b.count_ones() as f64 / 4.0;
                let mab = (a & b).count_ones() as f64 / 4.0;
                let e = energy_inner(&net, &fa, &fb).unwrap();
                assert!((e - (mab - ma * mb)).abs() < 1e-14);
                assert!((pm.covariance(&fa, &fb) - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn product_measure_random_density() {
        let net = fixtures::product_measure();
        let pm = fixtures::product_measure_parts();
        let c = net.conductance();
        assert!((c - pm.conductance()).amax() < 1e-14);
        let f = v(&[0.3, -1.2, 2.5, 0.0, 1.1]);
        let e = energy_norm_sq(&net, &f).unwrap();
        assert!(rel_gap(e, pm.energy_closed_form(&f), 0.0) < 1e-10);
        assert!(rel_gap(e, pm.alpha_norm_sq(&f), 0.0) < 1e-10);
        assert!(pm.energy_closed_form(&DVector::from_element(5, 2.0)).abs() < 1e-14);
        assert_eq!(net.irreducibility().components.len(), 1);
    }

    #[test]
    fn product_measure_errors() {
        assert!(matches!(product_measure_network(&[0.5, 0.6], &[1.0, 1.0]), Err(Error::NotProbability(_))));
        assert_eq!(product_measure_network(&[0.5, 0.5], &[0.0, 0.0]), Err(Error::ZeroConductance(0)));
    }

    #[test]
    fn joining_examples() {
        let id = joining_network(&[1.0, 2.0], &[0, 1]).unwrap();
        assert_eq!(id.w(), &DMatrix::from_diagonal(&v(&[1.0, 2.0])));
        assert_eq!(apply_delta(&id, &v(&[3.0, -1.0])).unwrap(), DVector::zeros(2));

        let swap = joining_network(&[0.5, 0.5, 1.0, 1.0], &[1, 0, 3, 2]).unwrap();
        let f = v(&[1.0, 4.0, -2.0, 0.5]);
        let d = apply_delta(&swap, &f).unwrap();
        let expect = v(&[1.0 - 4.0, 4.0 - 1.0, -2.0 - 0.5, 0.5 + 2.0]);
        assert!((d - expect).amax() < 1e-14);

        assert_eq!(joining_network(&[1.0; 3], &[1, 2, 0]), Err(Error::SymmetryViolation { i: 0, j: 1 }));
        assert_eq!(joining_network(&[1.0, 2.0], &[1, 0]), Err(Error::NotMeasurePreserving(0)));
    }

    #[test]
    fn diagonal_examples() {
        let net = diagonal_network(&[1.0, 2.0, 3.0], None).unwrap();
        assert_eq!(markov_power(&net, 1), DMatrix::identity(3, 3));
        assert!(spectrum_p(&net).iter().all(|&l| (l - 1.0).abs() < 1e-14));
        assert_eq!(energy_norm_sq(&net, &v(&[5.0, -1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(net.rho(&[0, 2], &[2]), 3.0);
    }

    #[test]
    fn shared_factorization() {
        let net = fixtures::triangle();
        let solver = RegularizedSolver::new(&net, 2.0).unwrap();
        for psi in [v(&[1.0, 0.0, 0.0]), v(&[0.0, 2.0, -1.0])] {
            let p = LearnProblem::new(net.clone(), psi.clone(), 2.0).unwrap();
            assert_eq!(solver.solve(&psi).unwrap(), solve_regularized(&p).unwrap());
        }
    }
}
