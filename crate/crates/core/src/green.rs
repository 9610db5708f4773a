//! Killed chains, Green's functions and the set kernels `K`, `k_ρ`, `K_ν`,
//! `N_ρ`.
//!
//! A finite irreducible chain is recurrent, so `Σ_n Pⁿ` diverges. Transience
//! is obtained by killing the walk on a boundary set `B`: the interior
//! restriction `P_int` is substochastic with spectral radius `< 1`, and
//! `G = (I − P_int)⁻¹` is the Green's function.
//!
//! Kernel conventions (all sums over interior states only):
//!
//! ```text
//! ρ_n(A×B) = Σ_{i∈A} ν_i (P_intⁿ χ_B)_i
//! K(A, B)  = Σ_n ρ_n(A×B) = Σ_{i∈A} ν_i (G χ_B)_i
//! G_A      = G χ_A on the interior, 0 on B
//! N_ρ(A,B) = ‖G_A − G_B‖²_{H_E} = K(A,A) + K(B,B) − 2K(A,B)
//! k_ρ(A,B) = ν(A∩B) − ρ(A×B)          (no boundary needed)
//! K_ν(A,B) = ν(A∩B)                   (no boundary needed)
//! ```

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::energy::{energy_inner, indicator_gram, mu_f};
use crate::error::{Error, Result};
use crate::linalg::{indicator, rel_gap, sorted_symmetric_eigen, submatrix, symmetric_pinv, weighted_dot};
use crate::net::{Network, SetFamily};

/// Required gap between the killed spectral radius and 1.
pub const TRANSIENCE_MARGIN: f64 = 1e-12;

/// PSD / CND slack, relative to the Gram trace.
pub const GRAM_TOL: f64 = 1e-9;

/// An absorbing boundary and its complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryConfig {
    boundary: Vec<usize>,
    interior: Vec<usize>,
}

impl BoundaryConfig {
    /// Validates that `boundary` is nonempty and that every interior state
    /// reaches it through the support graph.
    pub fn new(net: &Network, boundary: &[usize]) -> Result<Self> {
        if boundary.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        net.check_set(boundary)?;
        let n = net.len();
        let mut on_boundary = vec![false; n];
        for &b in boundary {
            on_boundary[b] = true;
        }
        // reverse BFS from the boundary; W is symmetric so reachability is too
        let mut reached = on_boundary.clone();
        let mut queue: VecDeque<usize> = boundary.iter().copied().collect();
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !reached[j] && net.w()[(i, j)] > 0.0 {
                    reached[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if let Some(trapped) = reached.iter().position(|r| !r) {
            return Err(Error::TrappedInterior(trapped));
        }
        let mut b: Vec<usize> = boundary.to_vec();
        b.sort_unstable();
        b.dedup();
        let interior = (0..n).filter(|&i| !on_boundary[i]).collect();
        Ok(Self { boundary: b, interior })
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Position of state `i` within the interior, if it is interior.
    pub fn interior_position(&self, i: usize) -> Option<usize> {
        self.interior.binary_search(&i).ok()
    }

    fn check_interior(&self, set: &[usize]) -> Result<()> {
        match set.iter().find(|&&i| self.boundary.binary_search(&i).is_ok()) {
            Some(&i) => Err(Error::SetMeetsBoundary(i)),
            None => Ok(()),
        }
    }
}

/// The substochastic interior block of `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct KilledChain {
    pub interior: Vec<usize>,
    pub p_int: DMatrix<f64>,
    pub spectral_radius: f64,
}

/// `ν` restricted to the interior, in interior order.
fn interior_nu(net: &Network, bc: &BoundaryConfig) -> DVector<f64> {
    DVector::from_iterator(bc.interior.len(), bc.interior.iter().map(|&i| net.nu()[i]))
}

pub fn killed_restriction(net: &Network, bc: &BoundaryConfig) -> Result<KilledChain> {
    let idx = &bc.interior;
    let m = idx.len();
    let (w, nu) = (net.w(), net.nu());
    let p_int = DMatrix::from_fn(m, m, |a, b| w[(idx[a], idx[b])] / nu[idx[a]]);
    let sym = DMatrix::from_fn(m, m, |a, b| w[(idx[a], idx[b])] / (nu[idx[a]] * nu[idx[b]]).sqrt());
    let spectral_radius = sorted_symmetric_eigen(sym).0.iter().fold(0.0_f64, |r, l| r.max(l.abs()));
    if spectral_radius >= 1.0 - TRANSIENCE_MARGIN {
        // only reachable if the boundary check was bypassed by round-off
        return Err(Error::TrappedInterior(idx.first().copied().unwrap_or(0)));
    }
    Ok(KilledChain { interior: idx.clone(), p_int, spectral_radius })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreenMethod {
    /// Dense LU solve of `(I − P_int) G = I`.
    Solve,
    /// Partial sums `Σ_{k≤N} P_intᵏ`, stopped once a term drops below `tol`
    /// in max-norm (scaled by `1 − radius`).
    Neumann { tol: f64 },
}

/// Green's matrix on the interior.
pub fn green_operator(net: &Network, bc: &BoundaryConfig, method: GreenMethod) -> Result<DMatrix<f64>> {
    let chain = killed_restriction(net, bc)?;
    let m = chain.interior.len();
    let eye = DMatrix::<f64>::identity(m, m);
    if m == 0 {
        return Ok(eye);
    }
    match method {
        GreenMethod::Solve => (eye - &chain.p_int)
            .lu()
            .try_inverse()
            .ok_or(Error::TrappedInterior(chain.interior[0])),
        GreenMethod::Neumann { tol } => {
            let stop = tol * (1.0 - chain.spectral_radius);
            let mut sum = eye.clone();
            let mut term = eye;
            let cap = 100_000_000 / (m * m).max(1) + 1000;
            for _ in 0..cap {
                term = &term * &chain.p_int;
                sum += &term;
                if term.amax() <= stop {
                    return Ok(sum);
                }
            }
            Err(Error::NoConvergence(cap))
        }
    }
}

/// `G_A` on all of `V`, zero on the boundary.
pub fn green_indicator(net: &Network, bc: &BoundaryConfig, a: &[usize]) -> Result<DVector<f64>> {
    net.check_set(a)?;
    bc.check_interior(a)?;
    let g = green_operator(net, bc, GreenMethod::Solve)?;
    Ok(green_columns(net, bc, &g, a))
}

fn green_columns(net: &Network, bc: &BoundaryConfig, g: &DMatrix<f64>, a: &[usize]) -> DVector<f64> {
    let mut out = DVector::zeros(net.len());
    let chi = DVector::from_iterator(bc.interior.len(), bc.interior.iter().map(|i| if a.contains(i) { 1.0 } else { 0.0 }));
    let ga = g * chi;
    for (k, &i) in bc.interior.iter().enumerate() {
        out[i] = ga[k];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// Green kernel `Σ_n ρ_n(A×B)` of the killed chain.
    K,
    /// `ρ((A∩B)×V) − ρ(A×B)`
    KRho,
    /// `ν(A∩B)`
    KNu,
    /// `‖ω_{A,B}‖²_{H_E}`
    NRho,
}

impl KernelKind {
    pub fn id(self) -> &'static str {
        match self {
            KernelKind::K => "K",
            KernelKind::KRho => "krho",
            KernelKind::KNu => "Knu",
            KernelKind::NRho => "Nrho",
        }
    }

    pub fn needs_boundary(self) -> bool {
        matches!(self, KernelKind::K | KernelKind::NRho)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "K" => Ok(KernelKind::K),
            "krho" => Ok(KernelKind::KRho),
            "Knu" => Ok(KernelKind::KNu),
            "Nrho" => Ok(KernelKind::NRho),
            other => Err(format!("unknown kernel `{other}` (expected K, krho, Knu or Nrho)")),
        }
    }
}

/// A kernel evaluated on a family of sets.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGram {
    pub kind: KernelKind,
    pub family: SetFamily,
    pub gram: DMatrix<f64>,
}

impl KernelGram {
    pub fn trace(&self) -> f64 {
        self.gram.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        sorted_symmetric_eigen(self.gram.clone()).0.first().copied().unwrap_or(0.0)
    }

    /// `min eig ≥ −GRAM_TOL · max(trace, 1)`.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -GRAM_TOL * self.trace().abs().max(1.0)
    }

    /// Largest `λᵀGλ / ‖λ‖²` over the given vectors after projecting each
    /// onto the zero-sum hyperplane. Nonpositive (up to slack) for CND kernels.
    pub fn max_zero_sum_form(&self, vectors: &[DVector<f64>]) -> f64 {
        let m = self.gram.nrows() as f64;
        vectors
            .iter()
            .map(|v| {
                let centered = v.add_scalar(-v.sum() / m);
                let norm_sq = centered.norm_squared();
                if norm_sq == 0.0 {
                    0.0
                } else {
                    centered.dot(&(&self.gram * &centered)) / norm_sq
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// SHA-256 over the kernel id, the family and the Gram entries (bit patterns).
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind.id().as_bytes());
        for set in self.family.sets() {
            h.update((set.len() as u64).to_le_bytes());
            for &i in set {
                h.update((i as u64).to_le_bytes());
            }
        }
        for x in self.gram.iter() {
            h.update(x.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Gram matrix of the requested kernel over `family`.
pub fn kernel_gram(
    net: &Network,
    kind: KernelKind,
    family: &SetFamily,
    boundary: Option<&BoundaryConfig>,
) -> Result<KernelGram> {
    for s in family.sets() {
        net.check_set(s)?;
    }
    let sets = family.sets();
    let m = sets.len();
    let n = net.len();
    let gram = match kind {
        KernelKind::KRho => return indicator_gram(net, family),
        KernelKind::KNu => {
            let masks: Vec<_> = sets.iter().map(|s| indicator(n, s)).collect();
            DMatrix::from_fn(m, m, |a, b| weighted_dot(net.nu(), &masks[a], &masks[b]))
        }
        KernelKind::K | KernelKind::NRho => {
            let bc = boundary.ok_or(Error::MissingBoundary(kind.id()))?;
            let k = green_kernel_matrix(net, bc, sets)?;
            if kind == KernelKind::K {
                k
            } else {
                DMatrix::from_fn(m, m, |a, b| k[(a, a)] + k[(b, b)] - 2.0 * k[(a, b)])
            }
        }
    };
    Ok(KernelGram { kind, family: family.clone(), gram })
}

/// `K(A, B) = ⟨χ_A, G χ_B⟩_{L²(ν_int)}` for every pair of `sets`.
fn green_kernel_matrix(net: &Network, bc: &BoundaryConfig, sets: &[Vec<usize>]) -> Result<DMatrix<f64>> {
    for s in sets {
        bc.check_interior(s)?;
    }
    let g = green_operator(net, bc, GreenMethod::Solve)?;
    let columns: Vec<DVector<f64>> = sets.iter().map(|s| green_columns(net, bc, &g, s)).collect();
    let nu = net.nu();
    let m = sets.len();
    let mut k = DMatrix::from_fn(m, m, |a, b| sets[a].iter().map(|&i| nu[i] * columns[b][i]).sum());
    // exact symmetry of the kernel; the two triangles differ only by round-off
    k = (&k + k.transpose()) * 0.5;
    Ok(k)
}

/// `Σ_{n≤terms} ρ_n(A×B)` for the killed chain, by repeated application of `P_int`.
pub fn truncated_green_kernel(net: &Network, bc: &BoundaryConfig, a: &[usize], b: &[usize], terms: usize) -> Result<f64> {
    net.check_set(a)?;
    net.check_set(b)?;
    bc.check_interior(a)?;
    bc.check_interior(b)?;
    let chain = killed_restriction(net, bc)?;
    let nu = interior_nu(net, bc);
    let chi = |set: &[usize]| {
        DVector::from_iterator(bc.interior.len(), bc.interior.iter().map(|i| if set.contains(i) { 1.0 } else { 0.0 }))
    };
    let chi_a = chi(a);
    let mut v = chi(b);
    let mut total = 0.0;
    for _ in 0..=terms {
        total += weighted_dot(&nu, &chi_a, &v);
        v = &chain.p_int * v;
    }
    Ok(total)
}

/// `(I − P_int)^{−1/2} χ_A` on the interior, via the eigendecomposition of
/// the `ν`-symmetrized interior operator.
pub fn inverse_sqrt_realization(net: &Network, bc: &BoundaryConfig, a: &[usize]) -> Result<DVector<f64>> {
    net.check_set(a)?;
    bc.check_interior(a)?;
    let idx = &bc.interior;
    let m = idx.len();
    let nu = interior_nu(net, bc);
    let sqrt_nu = nu.map(f64::sqrt);
    let sym = submatrix(&crate::operators::symmetrized_p(net), idx);
    let (values, vectors) = sorted_symmetric_eigen(sym);
    let weights = DVector::from_iterator(m, values.iter().map(|l| (1.0 - l).powf(-0.5)));
    let chi = DVector::from_iterator(m, idx.iter().map(|i| if a.contains(i) { 1.0 } else { 0.0 }));
    let rotated = vectors.transpose() * chi.component_mul(&sqrt_nu);
    let back = &vectors * rotated.component_mul(&weights);
    Ok(back.component_div(&sqrt_nu))
}

/// Norms of one set's three representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryRow {
    pub set: Vec<usize>,
    /// `K(A, A)`
    pub rkhs: f64,
    /// `‖G_A‖²_{H_E}`
    pub energy: f64,
    /// `‖(I − P_int)^{−1/2} χ_A‖²_{L²(ν)}`
    pub l2: f64,
}

impl IsometryRow {
    pub fn max_rel_gap(&self) -> f64 {
        let floor = 1e-300;
        rel_gap(self.rkhs, self.energy, floor)
            .max(rel_gap(self.rkhs, self.l2, floor))
            .max(rel_gap(self.energy, self.l2, floor))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryReport {
    pub rows: Vec<IsometryRow>,
    /// Largest relative gap among `K(A,B)`, `⟨G_A, G_B⟩_{H_E}` and
    /// `⟨K*_A, K*_B⟩_{L²(ν)}` over all pairs.
    pub max_pair_gap: f64,
}

impl IsometryReport {
    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(IsometryRow::max_rel_gap).fold(self.max_pair_gap, f64::max)
    }
}

/// Compares `H(K)`, `H_E` and `L²(ν)` norms and inner products on `family`.
pub fn isometry_suite(net: &Network, bc: &BoundaryConfig, family: &SetFamily) -> Result<IsometryReport> {
    let sets = family.sets();
    let k = kernel_gram(net, KernelKind::K, family, Some(bc))?.gram;
    let greens: Vec<DVector<f64>> = sets.iter().map(|s| green_indicator(net, bc, s)).collect::<Result<_>>()?;
    let roots: Vec<DVector<f64>> = sets.iter().map(|s| inverse_sqrt_realization(net, bc, s)).collect::<Result<_>>()?;
    let nu = interior_nu(net, bc);
    let scale = k.diagonal().amax().max(1e-300);
    let mut rows = Vec::with_capacity(sets.len());
    let mut max_pair_gap = 0.0_f64;
    for a in 0..sets.len() {
        for b in a..sets.len() {
            let e = energy_inner(net, &greens[a], &greens[b])?;
            let l = weighted_dot(&nu, &roots[a], &roots[b]);
            let kk = k[(a, b)];
            let gap = (kk - e).abs().max((kk - l).abs()).max((e - l).abs()) / scale;
            max_pair_gap = max_pair_gap.max(gap);
            if a == b {
                rows.push(IsometryRow { set: sets[a].clone(), rkhs: kk, energy: e, l2: l });
            }
        }
    }
    Ok(IsometryReport { rows, max_pair_gap })
}

/// Three-way norm comparison for a single, possibly empty, interior set.
pub fn isometry_row(net: &Network, bc: &BoundaryConfig, set: &[usize]) -> Result<IsometryRow> {
    let g = green_indicator(net, bc, set)?;
    let root = inverse_sqrt_realization(net, bc, set)?;
    let nu = interior_nu(net, bc);
    let rkhs: f64 = set.iter().map(|&i| net.nu()[i] * g[i]).sum();
    Ok(IsometryRow {
        set: set.to_vec(),
        rkhs,
        energy: energy_inner(net, &g, &g)?,
        l2: weighted_dot(&nu, &root, &root),
    })
}

/// Relative tolerance on `‖f‖²_{H_E} − ‖proj f‖²` before a family is
/// declared too small.
pub const SPAN_TOL: f64 = 1e-8;

/// `‖μ_f‖_{H(k_ρ)}` computed as `√(mᵀ G⁺ m)` with `m_i = μ_f(A_i)` and `G`
/// the `k_ρ` Gram matrix of the family.
pub fn mu_f_rkhs_norm(net: &Network, f: &DVector<f64>, family: &SetFamily) -> Result<f64> {
    net.check_vec(f)?;
    let gram = indicator_gram(net, family)?.gram;
    let m = DVector::from_iterator(family.len(), family.sets().iter().map(|s| mu_f(net, f, s)).collect::<Result<Vec<_>>>()?);
    let pinv = symmetric_pinv(&gram, 1e-12);
    let norm_sq = m.dot(&(&pinv * &m)).max(0.0);
    let energy = energy_inner(net, f, f)?;
    let missing = energy - norm_sq;
    if missing > SPAN_TOL * energy.max(1e-300) && missing > 1e-14 {
        return Err(Error::FamilyTooSmall(missing));
    }
    Ok(norm_sq.sqrt())
}
