//! The operators `R`, `P`, `Δ`, their powers and spectra, and the
//! adjoint identities that tie them to the energy form.

use nalgebra::{DMatrix, DVector};

use crate::energy::energy_inner;
use crate::error::Result;
use crate::linalg::{indicator, sorted_symmetric_eigen, weighted_dot, weighted_norm_sq};
use crate::net::Network;

/// Containment slack for the spectrum of `P` in `[−1, 1]`.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// Dense matrices of `R`, `P` and `Δ = diag(c)(I − P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBundle {
    pub r: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub delta: DMatrix<f64>,
}

impl OperatorBundle {
    pub fn new(net: &Network) -> Self {
        let n = net.len();
        let (w, mu, nu) = (net.w(), net.mu(), net.nu());
        let r = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / mu[i]);
        let p = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / nu[i]);
        let delta = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { nu[i] } else { 0.0 };
            (diag - w[(i, j)]) / mu[i]
        });
        Self { r, p, delta }
    }
}

/// `(Rf)_i = Σ_j W[i][j] f_j / μ_i`
pub fn apply_r(net: &Network, f: &DVector<f64>) -> Result<DVector<f64>> {
    net.check_vec(f)?;
    Ok((net.w() * f).component_div(net.mu()))
}

/// `(Pf)_i = Σ_j W[i][j] f_j / ν_i`
pub fn apply_p(net: &Network, f: &DVector<f64>) -> Result<DVector<f64>> {
    net.check_vec(f)?;
    let (w, nu) = (net.w(), net.nu());
    Ok(DVector::from_fn(net.len(), |i, _| (0..net.len()).map(|j| w[(i, j)] / nu[i] * f[j]).sum()))
}

/// `Δf = c∘f − Rf`
pub fn apply_delta(net: &Network, f: &DVector<f64>) -> Result<DVector<f64>> {
    let rf = apply_r(net, f)?;
    let c = net.conductance();
    Ok(c.component_mul(f) - rf)
}

/// `Pⁿ` by repeated multiplication; `P⁰ = I`.
pub fn markov_power(net: &Network, n: usize) -> DMatrix<f64> {
    let p = OperatorBundle::new(net).p;
    let mut out = DMatrix::identity(net.len(), net.len());
    for _ in 0..n {
        out = &out * &p;
    }
    out
}

/// `ρ_n(A×B) = Σ_{i∈A} ν_i (Pⁿχ_B)_i`.
pub fn rho_n(net: &Network, a: &[usize], b: &[usize], n: usize) -> Result<f64> {
    net.check_set(a)?;
    net.check_set(b)?;
    let mut v = indicator(net.len(), b);
    for _ in 0..n {
        v = apply_p(net, &v)?;
    }
    Ok(a.iter().map(|&i| net.nu()[i] * v[i]).sum())
}

/// `S = D_ν^{1/2} P D_ν^{−1/2}`, entrywise `W[i][j] / √(ν_i ν_j)`.
pub fn symmetrized_p(net: &Network) -> DMatrix<f64> {
    let (w, nu) = (net.w(), net.nu());
    DMatrix::from_fn(net.len(), net.len(), |i, j| w[(i, j)] / (nu[i] * nu[j]).sqrt())
}

/// Eigenvalues of `P`, ascending, via its `ν`-symmetrized conjugate.
pub fn spectrum_p(net: &Network) -> Vec<f64> {
    sorted_symmetric_eigen(symmetrized_p(net)).0
}

/// Orthonormal basis (in `L²(ν)`) of harmonic functions modulo constants.
///
/// Harmonic functions are exactly the functions constant on each connected
/// component, so the basis has `#components − 1` vectors, each with
/// `ν`-mean zero.
pub fn harmonic_basis(net: &Network) -> Vec<DVector<f64>> {
    let n = net.len();
    let nu = net.nu();
    let total = nu.sum();
    let ones = DVector::from_element(n, 1.0);
    let comps = net.components();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(comps.len().saturating_sub(1));
    for comp in comps.iter().take(comps.len().saturating_sub(1)) {
        let chi = indicator(n, comp);
        let mut v = &chi - &ones * (weighted_dot(nu, &chi, &ones) / total);
        for b in &basis {
            let coef = weighted_dot(nu, &v, b);
            v -= b * coef;
        }
        let norm = weighted_norm_sq(nu, &v).sqrt();
        basis.push(v / norm);
    }
    basis
}

/// Dimension of the harmonic space modulo constants from the multiplicity of
/// the eigenvalue 1 of `P`; a numeric cross-check of [`harmonic_basis`].
pub fn harmonic_dimension_numeric(net: &Network, tol: f64) -> usize {
    spectrum_p(net).iter().filter(|&&l| (l - 1.0).abs() <= tol).count().saturating_sub(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IotaAdjoint {
    /// `|⟨f,g⟩_E − ⟨f,(I−P)g⟩_{L²(ν)}| / (1 + ‖f‖‖g‖)`
    pub residual: f64,
    /// `‖f‖²_{H_E}`
    pub energy_sq: f64,
    /// `‖f‖²_{L²(ν)}`
    pub l2_sq: f64,
    /// `‖f‖²_{H_E} ≤ 2‖f‖²_{L²(ν)}`
    pub bound_holds: bool,
}

/// Checks `ι*(g) = (I − P)g` for the inclusion `ι : L²(ν) → H_E`.
pub fn iota_adjoint_residual(net: &Network, f: &DVector<f64>, g: &DVector<f64>) -> Result<IotaAdjoint> {
    let nu = net.nu();
    let lhs = energy_inner(net, f, g)?;
    let dissipated = g - apply_p(net, g)?;
    let rhs = weighted_dot(nu, f, &dissipated);
    let l2_sq = weighted_norm_sq(nu, f);
    let scale = 1.0 + l2_sq.sqrt() * weighted_norm_sq(nu, g).sqrt();
    let energy_sq = energy_inner(net, f, f)?;
    Ok(IotaAdjoint {
        residual: (lhs - rhs).abs() / scale,
        energy_sq,
        l2_sq,
        bound_holds: energy_sq <= 2.0 * l2_sq * (1.0 + 1e-12) + 1e-300,
    })
}

/// Returns `(∫_A f dμ, ∫_V R(χ_A f / c) dμ)`.
pub fn mass_transport_check(net: &Network, f: &DVector<f64>, a: &[usize]) -> Result<(f64, f64)> {
    net.check_vec(f)?;
    net.check_set(a)?;
    let mu = net.mu();
    let chi = indicator(net.len(), a);
    let direct = weighted_dot(mu, &chi, f);
    let c = net.conductance();
    let moved = apply_r(net, &chi.component_mul(f).component_div(&c))?;
    Ok((direct, mu.dot(&moved)))
}

/// `|⟨φ, f⟩_{H_E} − ⟨φ, Δf⟩_{L²(μ)}| / (1 + ‖φ‖_{L²(ν)}‖f‖_{L²(ν)})`
pub fn j_adjoint_residual(net: &Network, phi: &DVector<f64>, f: &DVector<f64>) -> Result<f64> {
    let lhs = energy_inner(net, phi, f)?;
    let rhs = weighted_dot(net.mu(), phi, &apply_delta(net, f)?);
    let nu = net.nu();
    let scale = 1.0 + weighted_norm_sq(nu, phi).sqrt() * weighted_norm_sq(nu, f).sqrt();
    Ok((lhs - rhs).abs() / scale)
}

/// Operators of the restriction `ρ_A` of `ρ` to `A × A`, acting on all of `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub c: DVector<f64>,
    pub r: DMatrix<f64>,
    pub delta: DMatrix<f64>,
}

pub fn restrict(net: &Network, subset: &[usize]) -> Result<Restriction> {
    net.check_set(subset)?;
    let n = net.len();
    let mask = indicator(n, subset);
    let (w, mu) = (net.w(), net.mu());
    let masked = DMatrix::from_fn(n, n, |i, j| if mask[i] * mask[j] > 0.0 { w[(i, j)] } else { 0.0 });
    let row_mass = DVector::from_iterator(n, masked.row_iter().map(|row| row.sum()));
    let r = DMatrix::from_fn(n, n, |i, j| masked[(i, j)] / mu[i]);
    let c = row_mass.component_div(mu);
    let delta = DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { row_mass[i] } else { 0.0 };
        (diag - masked[(i, j)]) / mu[i]
    });
    Ok(Restriction { c, r, delta })
}
