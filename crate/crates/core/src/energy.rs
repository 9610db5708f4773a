//! The finite-energy space `H_E`: the energy form, indicator Gram matrices,
//! the harmonic/indicator splitting, dipoles and the signed measure `μ_f`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::green::{BoundaryConfig, KernelGram, KernelKind};
use crate::linalg::{indicator, solve_spd, subvector, submatrix, weighted_dot, weighted_norm_sq};
use crate::net::{Network, SetFamily};
use crate::operators::{apply_delta, apply_p};

/// Relative tolerance on dipole residuals.
pub const DIPOLE_TOL: f64 = 1e-9;

/// Tolerance on the set-balance condition of boundary-free dipoles.
pub const BALANCE_TOL: f64 = 1e-12;

/// A function on the states, understood modulo constants.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyElement {
    pub values: DVector<f64>,
    /// Whether `values` has `ν`-weighted mean zero.
    pub canonical: bool,
}

impl EnergyElement {
    /// Canonical representative: subtracts the `ν`-weighted mean.
    pub fn canonical(net: &Network, values: DVector<f64>) -> Self {
        let nu = net.nu();
        let mean = nu.dot(&values) / nu.sum();
        Self { values: values.add_scalar(-mean), canonical: true }
    }

    pub fn raw(values: DVector<f64>) -> Self {
        Self { values, canonical: false }
    }
}

/// `ξ(f, g) = ½ Σ_{ij} W[i][j] (f_i − f_j)(g_i − g_j)`.
pub fn energy_inner(net: &Network, f: &DVector<f64>, g: &DVector<f64>) -> Result<f64> {
    net.check_vec(f)?;
    net.check_vec(g)?;
    let w = net.w();
    let n = net.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let wij = w[(i, j)];
            if wij != 0.0 {
                acc += wij * (f[i] - f[j]) * (g[i] - g[j]);
            }
        }
    }
    Ok(acc)
}

pub fn energy_norm_sq(net: &Network, f: &DVector<f64>) -> Result<f64> {
    energy_inner(net, f, f)
}

/// Gram matrix `⟨χ_A, χ_B⟩_{H_E} = ν(A∩B) − ρ(A×B)` over a family.
pub fn indicator_gram(net: &Network, family: &SetFamily) -> Result<KernelGram> {
    let sets = family.sets();
    for s in sets {
        net.check_set(s)?;
    }
    let n = net.len();
    let masks: Vec<DVector<f64>> = sets.iter().map(|s| indicator(n, s)).collect();
    let m = sets.len();
    let gram = DMatrix::from_fn(m, m, |a, b| {
        let overlap = weighted_dot(net.nu(), &masks[a], &masks[b]);
        overlap - net.rho(&sets[a], &sets[b])
    });
    Ok(KernelGram { kind: KernelKind::KRho, family: family.clone(), gram })
}

/// Orthogonal splitting `f = d + h` with `h` harmonic.
#[derive(Debug, Clone, PartialEq)]
pub struct RoydenSplit {
    /// Component of `f` with zero `ν`-mean on every connected component.
    pub d: EnergyElement,
    /// Harmonic part: the `ν`-mean of `f` on each component.
    pub h: EnergyElement,
    pub energy_cross: f64,
    pub l2_cross: f64,
}

pub fn royden_project(net: &Network, f: &DVector<f64>) -> Result<RoydenSplit> {
    net.check_vec(f)?;
    let nu = net.nu();
    let mut h = DVector::zeros(net.len());
    for comp in net.components() {
        let mass: f64 = comp.iter().map(|&i| nu[i]).sum();
        let mean = comp.iter().map(|&i| nu[i] * f[i]).sum::<f64>() / mass;
        for &i in &comp {
            h[i] = mean;
        }
    }
    let h = EnergyElement::canonical(net, h);
    let d = EnergyElement::canonical(net, f - &h.values);
    let energy_cross = energy_inner(net, &d.values, &h.values)?;
    let l2_cross = weighted_dot(nu, &d.values, &h.values);
    Ok(RoydenSplit { d, h, energy_cross, l2_cross })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DipoleKind {
    /// `Δv = χ_A − χ_B`
    Mu,
    /// `Δw = c(χ_A − χ_B)`
    Nu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSolution {
    pub v: EnergyElement,
    pub kind: DipoleKind,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// `‖Δv − target‖ / max(1, ‖target‖)` over the constrained rows.
    pub residual: f64,
}

/// Right-hand side `χ_A − χ_B`, weighted by `c` for `ν`-dipoles.
pub fn dipole_target(net: &Network, kind: DipoleKind, a: &[usize], b: &[usize]) -> DVector<f64> {
    let n = net.len();
    let t = indicator(n, a) - indicator(n, b);
    match kind {
        DipoleKind::Mu => t,
        DipoleKind::Nu => t.component_mul(&net.conductance()),
    }
}

/// Solves `Δv = target` in its weak form `(D_W − W)v = μ∘target`.
///
/// Without a boundary each connected component is grounded at its smallest
/// state and the result is made canonical. With a boundary, `v` vanishes on
/// the boundary and only interior rows are constrained.
pub fn dipole(
    net: &Network,
    kind: DipoleKind,
    a: &[usize],
    b: &[usize],
    boundary: Option<&BoundaryConfig>,
) -> Result<DipoleSolution> {
    net.check_set(a)?;
    net.check_set(b)?;
    let n = net.len();
    let target = dipole_target(net, kind, a, b);
    let rhs = target.component_mul(net.mu());
    let lap = laplacian(net);

    let (unknowns, rows): (Vec<usize>, Vec<usize>) = match boundary {
        Some(bc) => (bc.interior().to_vec(), bc.interior().to_vec()),
        None => {
            let weight = |set: &[usize]| match kind {
                DipoleKind::Mu => net.mu_of(set),
                DipoleKind::Nu => net.nu_of(set),
            };
            let (lhs, rhs_mass) = (weight(a), weight(b));
            if (lhs - rhs_mass).abs() > BALANCE_TOL * lhs.abs().max(rhs_mass.abs()).max(1.0) {
                return Err(Error::UnbalancedSets { lhs, rhs: rhs_mass });
            }
            let mut grounded = Vec::new();
            for (k, comp) in net.components().iter().enumerate() {
                let charge: f64 = comp.iter().map(|&i| rhs[i]).sum();
                let scale: f64 = comp.iter().map(|&i| rhs[i].abs()).sum::<f64>().max(1.0);
                if charge.abs() > BALANCE_TOL * scale {
                    return Err(Error::SingularSystem { component: k });
                }
                grounded.push(comp[0]);
            }
            let free: Vec<usize> = (0..n).filter(|i| !grounded.contains(i)).collect();
            (free, (0..n).collect())
        }
    };

    let reduced = submatrix(&lap, &unknowns);
    let sol = solve_spd(reduced, &subvector(&rhs, &unknowns)).map_err(|e| match e {
        Error::NotPositiveDefinite => Error::SingularSystem { component: 0 },
        other => other,
    })?;
    let mut values = DVector::zeros(n);
    for (k, &i) in unknowns.iter().enumerate() {
        values[i] = sol[k];
    }
    let v = match boundary {
        Some(_) => EnergyElement::raw(values),
        None => EnergyElement::canonical(net, values),
    };

    let lv = apply_delta(net, &v.values)?;
    let diff: f64 = rows.iter().map(|&i| (lv[i] - target[i]).powi(2)).sum::<f64>().sqrt();
    let tnorm: f64 = rows.iter().map(|&i| target[i].powi(2)).sum::<f64>().sqrt();
    let residual = diff / tnorm.max(1.0);
    Ok(DipoleSolution { v, kind, a: a.to_vec(), b: b.to_vec(), residual })
}

/// Weak-form Laplacian `D_W − W`.
pub fn laplacian(net: &Network) -> DMatrix<f64> {
    DMatrix::from_diagonal(net.nu()) - net.w()
}

/// `μ_f(A) = ⟨χ_A, f⟩_{H_E}`.
pub fn mu_f(net: &Network, f: &DVector<f64>, a: &[usize]) -> Result<f64> {
    net.check_set(a)?;
    energy_inner(net, &indicator(net.len(), a), f)
}

/// Quantities entering the norm bounds for `Δ` and `I − P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    /// `‖f‖²_{H_E}`
    pub energy: f64,
    /// `‖c⁻¹Δf‖²_{L²(ν)}`
    pub scaled_delta_nu: f64,
    /// `‖Δf‖²_{L²(c⁻¹μ)}`
    pub delta_inv_c_mu: f64,
    /// `‖f − Pf‖²_{L²(ν)}`
    pub dissipation: f64,
    /// `‖f‖² − ½‖c⁻¹Δf‖²_{L²(ν)}`
    pub slack_a: f64,
    /// `2‖f‖² − ‖Δf‖²_{L²(c⁻¹μ)}`
    pub slack_b: f64,
    /// `2‖f‖² − ‖f − Pf‖²_{L²(ν)}`
    pub slack_c: f64,
}

impl NormBounds {
    pub fn min_slack(&self) -> f64 {
        self.slack_a.min(self.slack_b).min(self.slack_c)
    }
}

pub fn norm_bounds_report(net: &Network, f: &DVector<f64>) -> Result<NormBounds> {
    let energy = energy_norm_sq(net, f)?;
    let c = net.conductance();
    let nu = net.nu();
    let delta = apply_delta(net, f)?;
    let scaled = delta.component_div(&c);
    let scaled_delta_nu = weighted_norm_sq(nu, &scaled);
    let delta_inv_c_mu = weighted_norm_sq(&net.mu().component_div(&c), &delta);
    let dissipation = weighted_norm_sq(nu, &(f - apply_p(net, f)?));
    Ok(NormBounds {
        energy,
        scaled_delta_nu,
        delta_inv_c_mu,
        dissipation,
        slack_a: energy - 0.5 * scaled_delta_nu,
        slack_b: 2.0 * energy - delta_inv_c_mu,
        slack_c: 2.0 * energy - dissipation,
    })
}
