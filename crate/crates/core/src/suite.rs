//! Identity batteries run against a network, collected into a [`Report`].

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::energy::{dipole, energy_inner, energy_norm_sq, norm_bounds_report, royden_project, DipoleKind};
use crate::green::{
    green_indicator, green_operator, isometry_suite, kernel_gram, killed_restriction, mu_f_rkhs_norm,
    truncated_green_kernel, BoundaryConfig, GreenMethod, KernelKind, GRAM_TOL,
};
use crate::io::{NetworkFile, RawNetwork};
use crate::learn::{first_variation, objective, optimality_check, solve_regularized, LearnProblem};
use crate::linalg::{indicator, rel_gap, weighted_norm_sq};
use crate::net::{Network, SetFamily, SYMMETRY_TOL};
use crate::operators::{
    apply_delta, harmonic_basis, harmonic_dimension_numeric, iota_adjoint_residual, markov_power, rho_n,
    spectrum_p, symmetrized_p, SPECTRUM_TOL,
};
use crate::paths::{dissipation_norm, mc_energy_estimate, orthogonality_residual, variance_invariance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SuiteId {
    Core,
    Operators,
    Energy,
    Dissipation,
    Green,
    Rkhs,
    Learn,
    All,
}

impl SuiteId {
    pub const EACH: [SuiteId; 7] = [
        SuiteId::Core,
        SuiteId::Operators,
        SuiteId::Energy,
        SuiteId::Dissipation,
        SuiteId::Green,
        SuiteId::Rkhs,
        SuiteId::Learn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::Core => "core",
            SuiteId::Operators => "operators",
            SuiteId::Energy => "energy",
            SuiteId::Dissipation => "dissipation",
            SuiteId::Green => "green",
            SuiteId::Rkhs => "rkhs",
            SuiteId::Learn => "learn",
            SuiteId::All => "all",
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SuiteId::EACH
            .iter()
            .chain(std::iter::once(&SuiteId::All))
            .find(|id| id.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// One identity with its measured residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    /// The identity being tested, as a formula.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub checksum: String,
    pub checks: Vec<Check>,
    pub values: Map<String, Value>,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

struct Battery<'a> {
    net: &'a Network,
    boundary: Option<&'a BoundaryConfig>,
    rng: ChaCha8Rng,
    seed: u64,
    tol: f64,
    checks: Vec<Check>,
    values: Map<String, Value>,
}

impl Battery<'_> {
    fn record(&mut self, id: &str, anchor: &str, residual: f64, tolerance: f64) {
        let pass = residual.is_finite() && residual <= tolerance;
        self.checks.push(Check { id: id.into(), anchor: anchor.into(), residual, tolerance, pass });
    }

    /// Records the worst of `residuals`, or an error as a failed check.
    fn record_max(&mut self, id: &str, anchor: &str, tolerance: f64, residuals: crate::error::Result<Vec<f64>>) {
        match residuals {
            Ok(r) => self.record(id, anchor, r.into_iter().fold(0.0, f64::max), tolerance),
            Err(e) => {
                self.values.insert(format!("{id}.error"), json!(e.to_string()));
                self.record(id, anchor, f64::INFINITY, tolerance);
            }
        }
    }

    fn random_vec(&mut self) -> DVector<f64> {
        let n = self.net.len();
        DVector::from_fn(n, |_, _| self.rng.random_range(-1.0..1.0))
    }

    fn random_set(&mut self) -> Vec<usize> {
        let n = self.net.len();
        let mut s: Vec<usize> = (0..n).filter(|_| self.rng.random_bool(0.5)).collect();
        if s.is_empty() {
            s.push(self.rng.random_range(0..n));
        }
        s
    }

    fn core(&mut self) {
        let net = self.net;
        let n = net.len();
        let p = markov_power(net, 1);
        let nu = net.nu();
        let scale = nu.amax();
        let balance = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (nu[i] * p[(i, j)] - nu[j] * p[(j, i)]).abs())
            .fold(0.0, f64::max)
            / scale;
        self.record("core.detailed_balance", "ν(x)P(x,y) = ν(y)P(y,x)", balance, self.tol);
        let s = symmetrized_p(net);
        self.record("core.self_adjoint", "⟨Pf, g⟩_ν = ⟨f, Pg⟩_ν", (&s - s.transpose()).amax(), SYMMETRY_TOL);
        let stationary = (nu.transpose() * &p - nu.transpose()).amax() / scale;
        self.record("core.stationary", "νP = ν", stationary, self.tol);
        let mut worst = 0.0_f64;
        for _ in 0..10 {
            let (a, b) = (self.random_set(), self.random_set());
            for k in 0..=6 {
                let ab = rho_n(net, &a, &b, k).unwrap_or(f64::NAN);
                let ba = rho_n(net, &b, &a, k).unwrap_or(f64::NAN);
                worst = worst.max(rel_gap(ab, ba, 1e-300));
            }
        }
        self.record("core.rho_n_symmetric", "ρ_n(A×B) = ρ_n(B×A)", worst, self.tol);
        let irreducible = net.irreducibility().irreducible;
        let harm = harmonic_basis(net).len();
        let mismatch = if irreducible == (harm == 0) { 0.0 } else { 1.0 };
        self.record("core.irreducible_iff_no_harmonic", "irreducible ⟺ Harm = {0}", mismatch, 0.0);
        self.values.insert("components".into(), json!(net.components().len()));
    }

    fn operators(&mut self) {
        let net = self.net;
        let spectrum = spectrum_p(net);
        let out_of_range = spectrum.iter().map(|l| (l.abs() - 1.0).max(0.0)).fold(0.0, f64::max);
        self.record("operators.spectrum_range", "spec(P) ⊂ [−1, 1]", out_of_range, SPECTRUM_TOL);
        let comps = net.components().len();
        let dims = [harmonic_basis(net).len(), harmonic_dimension_numeric(net, SPECTRUM_TOL), comps - 1];
        let mismatch = if dims[0] == dims[1] && dims[1] == dims[2] { 0.0 } else { 1.0 };
        self.record("operators.harmonic_dimension", "dim Harm = #components − 1", mismatch, 0.0);
        let h_residual = harmonic_basis(net)
            .iter()
            .map(|h| apply_delta(net, h).map(|d| d.amax()))
            .collect::<crate::error::Result<Vec<_>>>();
        self.record_max("operators.harmonic_delta", "Δh = 0", self.tol, h_residual);
        let pairs: Vec<_> = (0..20).map(|_| (self.random_vec(), self.random_vec())).collect();
        let iota = pairs
            .iter()
            .map(|(f, g)| iota_adjoint_residual(net, f, g).map(|r| r.residual))
            .collect::<crate::error::Result<Vec<_>>>();
        self.record_max("operators.weak_form", "⟨φ, f⟩_{H_E} = ∫ φ Δf dμ", self.tol, iota);
        self.values.insert("spectrum_p".into(), json!(spectrum));
    }

    fn energy(&mut self) {
        let net = self.net;
        let fs: Vec<_> = (0..50).map(|_| self.random_vec()).collect();
        let three_way = fs
            .iter()
            .map(|f| {
                let e = energy_inner(net, f, f)?;
                let weak = f.component_mul(&apply_delta(net, f)?).dot(net.mu());
                let diss = dissipation_norm(net, f)?.total;
                let floor = 1e-6 * weighted_norm_sq(net.nu(), f);
                Ok(rel_gap(e, weak, floor).max(rel_gap(e, diss, floor)))
            })
            .collect();
        self.record_max("energy.three_way", "‖f‖²_{H_E} = Σ f Δf μ = ½(variance + dissipation)", self.tol, three_way);
        let sets: Vec<_> = (0..20).map(|_| (self.random_set(), self.random_set())).collect();
        let geometry = sets
            .iter()
            .map(|(a, b)| {
                let n = net.len();
                let (ca, cb) = (indicator(n, a), indicator(n, b));
                let inter: Vec<usize> = a.iter().copied().filter(|i| b.contains(i)).collect();
                let expect = net.nu_of(&inter) - net.rho(a, b);
                let got = energy_inner(net, &ca, &cb)?;
                Ok((got - expect).abs() / net.nu().sum())
            })
            .collect();
        self.record_max("energy.indicator_gram", "⟨χ_A, χ_B⟩_{H_E} = ν(A∩B) − ρ(A×B)", 1e-12, geometry);
        let bounds = fs
            .iter()
            .map(|f| norm_bounds_report(net, f).map(|b| (-b.min_slack()).max(0.0)))
            .collect();
        self.record_max("energy.norm_bounds", "‖Δ‖_{H_E → L²(c⁻¹μ)} ≤ √2", 1e-12, bounds);
        let royden = fs
            .iter()
            .map(|f| {
                let split = royden_project(net, f)?;
                let e = energy_norm_sq(net, f)?;
                let pyth = (e - energy_norm_sq(net, &split.d.values)? - energy_norm_sq(net, &split.h.values)?).abs();
                Ok((split.energy_cross.abs() + pyth) / e.max(1.0) + split.l2_cross.abs() / net.nu().sum())
            })
            .collect();
        self.record_max("energy.royden_orthogonal", "H_E = Fin ⊕ Harm", self.tol, royden);
        let dip = balanced_pairs(net)
            .into_iter()
            .map(|(kind, i, j)| dipole(net, kind, &[i], &[j], None).map(|s| s.residual))
            .collect::<crate::error::Result<Vec<_>>>();
        let dip = dip.map(|mut v| {
            if let Some(bc) = self.boundary {
                for &i in bc.interior() {
                    if let Ok(s) = dipole(net, DipoleKind::Mu, &[i], &[], Some(bc)) {
                        v.push(s.residual);
                    }
                }
            }
            v
        });
        self.record_max("energy.dipole_residual", "Δv_{A,B} = χ_A − χ_B", 1e-9, dip);
    }

    fn dissipation(&mut self) {
        let net = self.net;
        let pairs: Vec<_> = (0..10).map(|_| (self.random_vec(), self.random_vec())).collect();
        let ortho = pairs
            .iter()
            .flat_map(|(g1, g2)| (0..=4).map(move |k| (g1, g2, k)))
            .map(|(g1, g2, k)| {
                orthogonality_residual(net, g1, g2, k)
                    .map(|o| o.residual.abs().max(o.split_residual.abs()) / o.scale.max(1e-300))
            })
            .collect();
        self.record_max("dissipation.orthogonal", "g∘X_n ⊥ P(g)∘X_n − g∘X_{n+1}", self.tol, ortho);
        let fs: Vec<_> = (0..10).map(|_| self.random_vec()).collect();
        let var = fs
            .iter()
            .flat_map(|f| (1..=4).map(move |k| (f, k)))
            .map(|(f, k)| variance_invariance(net, f, k).map(|(a, b)| rel_gap(a, b, 1e-14)))
            .collect();
        self.record_max("dissipation.variance_invariance", "∫Var_x(f∘X₁)dν = ∫Var(f∘X_n | X_{n−1})dν", self.tol, var);
        let sets: Vec<_> = (0..5).map(|_| self.random_set()).collect();
        let lemma = sets
            .iter()
            .flat_map(|a| (0..=4).map(move |k| (a, k)))
            .map(|(a, k)| {
                let chi = indicator(net.len(), a);
                let pn = markov_power(net, k) * &chi;
                let lhs = weighted_norm_sq(net.nu(), &pn);
                rho_n(net, a, a, 2 * k).map(|rhs| rel_gap(lhs, rhs, 1e-300))
            })
            .collect();
        self.record_max("dissipation.power_norm", "‖Pⁿχ_A‖²_{L²(ν)} = ρ_{2n}(A×A)", self.tol, lemma);
        let f = self.random_vec();
        let z = match (energy_norm_sq(net, &f), mc_energy_estimate(net, &f, self.seed, 20_000)) {
            (Ok(exact), Ok(mc)) => {
                self.values.insert("mc_energy".into(), json!({"exact": exact, "estimate": mc.estimate, "stderr": mc.stderr}));
                if mc.stderr == 0.0 {
                    (mc.estimate - exact).abs()
                } else {
                    (mc.estimate - exact).abs() / mc.stderr
                }
            }
            _ => f64::INFINITY,
        };
        self.record("dissipation.mc_energy", "𝔼 ½ν(V)(f(X₁) − f(X₀))² = ‖f‖²_{H_E}  [stderr units]", z, 4.0);
    }

    fn green(&mut self) {
        let Some(bc) = self.boundary else {
            self.values.insert("green".into(), json!("no boundary"));
            return;
        };
        let net = self.net;
        match killed_restriction(net, bc) {
            Ok(chain) => {
                self.values.insert("spectral_radius".into(), json!(chain.spectral_radius));
                self.record("green.transient", "spectral radius of P_int < 1", chain.spectral_radius - (1.0 - 1e-12), 0.0)
            }
            Err(_) => self.record("green.transient", "spectral radius of P_int < 1", f64::INFINITY, 0.0),
        }
        let (solve, neumann) =
            match (green_operator(net, bc, GreenMethod::Solve), green_operator(net, bc, GreenMethod::Neumann { tol: 1e-12 })) {
                (Ok(s), Ok(n)) => (s, n),
                _ => {
                    self.record("green.neumann", "G = Σ_n P_intⁿ", f64::INFINITY, 1e-10);
                    return;
                }
            };
        self.record("green.neumann", "G = Σ_n P_intⁿ", (&solve - &neumann).amax(), 1e-10);
        self.record("green.nonnegative", "G ≥ 0", (-solve.min()).max(0.0), 0.0);
        let rows: Vec<Vec<f64>> = solve.row_iter().map(|r| r.iter().copied().collect()).collect();
        self.values.insert("green_matrix".into(), json!(rows));
        self.values.insert("interior".into(), json!(bc.interior()));
        let c = net.conductance();
        let mut sets: Vec<Vec<usize>> = bc.interior().iter().map(|&i| vec![i]).collect();
        sets.push(bc.interior().to_vec());
        let res = sets
            .iter()
            .map(|a| {
                let ga = green_indicator(net, bc, a)?;
                let d = apply_delta(net, &ga)?;
                Ok(bc.interior().iter().map(|&i| (d[i] - c[i] * if a.contains(&i) { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max))
            })
            .collect();
        self.record_max("green.delta_g", "ΔG_A = c χ_A on the interior", 1e-9, res);
        if let Some(&i) = bc.interior().first() {
            let series = truncated_green_kernel(net, bc, &[i], &[i], 2000);
            let exact = green_indicator(net, bc, &[i]).map(|g| net.nu()[i] * g[i]);
            let gap = match (series, exact) {
                (Ok(s), Ok(e)) => rel_gap(s, e, 1e-300),
                _ => f64::INFINITY,
            };
            self.record("green.series", "K(A,A) = Σ_n ρ_n(A×A)", gap, 1e-10);
        }
    }

    fn interior_family(&mut self, bc: &BoundaryConfig) -> Option<SetFamily> {
        let interior = bc.interior().to_vec();
        if interior.is_empty() {
            return None;
        }
        let mut sets: Vec<Vec<usize>> = interior.iter().map(|&i| vec![i]).collect();
        for _ in 0..4 {
            let s: Vec<usize> = interior.iter().copied().filter(|_| self.rng.random_bool(0.5)).collect();
            if !s.is_empty() {
                sets.push(s);
            }
        }
        SetFamily::new(self.net.len(), sets).ok()
    }

    fn rkhs(&mut self) {
        let net = self.net;
        let n = net.len();
        let all = SetFamily::new(n, (0..n).map(|i| vec![i]).chain((0..4).map(|_| self.random_set())).collect())
            .expect("nonempty sets");
        let mut psd = Vec::new();
        for kind in [KernelKind::KRho, KernelKind::KNu] {
            psd.push(kernel_gram(net, kind, &all, None).map(|g| (-g.min_eigenvalue() - GRAM_TOL * g.trace().abs().max(1.0)).max(0.0)));
        }
        let fs: Vec<_> = (0..10).map(|_| self.random_vec()).collect();
        let mu_f = fs
            .iter()
            .map(|f| {
                let norm = mu_f_rkhs_norm(net, f, &SetFamily::singletons(n))?;
                let e = energy_norm_sq(net, f)?;
                Ok(rel_gap(norm * norm, e, 1e-12 * weighted_norm_sq(net.nu(), f)))
            })
            .collect();
        self.record_max("rkhs.mu_f_isometry", "‖μ_f‖²_{H(k_ρ)} = ‖f‖²_{H_E}", 1e-8, mu_f);
        if let Some(bc) = self.boundary {
            if let Some(fam) = self.interior_family(bc) {
                psd.push(
                    kernel_gram(net, KernelKind::K, &fam, Some(bc))
                        .map(|g| (-g.min_eigenvalue() - GRAM_TOL * g.trace().abs().max(1.0)).max(0.0)),
                );
                let iso = isometry_suite(net, bc, &fam).map(|r| vec![r.max_gap()]);
                self.record_max("rkhs.isometry", "‖K(·,A)‖²_{H(K)} = ‖G_A‖²_{H_E} = ‖(I−P)^{−1/2}χ_A‖²_{L²(ν)}", 1e-9, iso);
                let cnd = kernel_gram(net, KernelKind::NRho, &fam, Some(bc)).map(|g| {
                    let m = fam.len();
                    let vs: Vec<DVector<f64>> =
                        (0..50).map(|_| DVector::from_fn(m, |_, _| self.rng.random_range(-1.0..1.0))).collect();
                    vec![(g.max_zero_sum_form(&vs) - GRAM_TOL * g.trace().abs().max(1.0)).max(0.0)]
                });
                self.record_max("rkhs.nrho_cnd", "Σλ = 0 ⟹ λᵀN_ρλ ≤ 0", 0.0, cnd);
            }
        }
        let psd = psd.into_iter().collect::<crate::error::Result<Vec<_>>>();
        self.record_max("rkhs.psd", "Gram matrices of K, k_ρ, K_ν are PSD", 0.0, psd);
    }

    fn learn(&mut self) {
        let net = self.net;
        let psi = self.random_vec();
        let run = |gamma: f64| -> crate::error::Result<(LearnProblem, DVector<f64>)> {
            let p = LearnProblem::new(net.clone(), psi.clone(), gamma)?;
            let h = solve_regularized(&p)?;
            Ok((p, h))
        };
        let seed = self.seed;
        let opt = run(0.5).and_then(|(p, h)| {
            let q = objective(&p, &h)?.total;
            Ok(vec![optimality_check(&p, &h, 20, seed)?.max(0.0) / (1.0 + q)])
        });
        self.record_max("learn.optimality", "Q(h) ≤ Q(h + εk)", 1e-10, opt);
        let k = self.random_vec();
        let grad = run(0.5).and_then(|(p, _)| {
            let eps = 1e-5;
            let fd = (objective(&p, &(&psi + &k * eps))?.total - objective(&p, &(&psi - &k * eps))?.total) / (2.0 * eps);
            Ok(vec![rel_gap(first_variation(&p, &psi, &k)?, fd, 1e-12)])
        });
        self.record_max("learn.gradient", "d/dε Q(h + εk) = 2⟨h − ψ, k⟩_μ + 2γ⟨h, k⟩_{H_E}", 1e-6, grad);
        let zero = run(0.0).map(|(_, h)| vec![(h - &psi).amax()]);
        self.record_max("learn.gamma_zero", "γ = 0 ⟹ h = ψ", 0.0, zero);
        let big = run(1e8).map(|(_, h)| {
            let mu = net.mu();
            net.components()
                .iter()
                .flat_map(|c| {
                    let mean = c.iter().map(|&i| mu[i] * psi[i]).sum::<f64>() / c.iter().map(|&i| mu[i]).sum::<f64>();
                    c.iter().map(|&i| (h[i] - mean).abs()).collect::<Vec<_>>()
                })
                .collect()
        });
        self.record_max("learn.gamma_large", "γ → ∞ ⟹ h → E_μ(ψ)", 1e-6, big);
    }
}

/// Singleton pairs within one component whose `μ` (or `ν`) masses agree.
fn balanced_pairs(net: &Network) -> Vec<(DipoleKind, usize, usize)> {
    let (mu, nu) = (net.mu(), net.nu());
    let mut out = Vec::new();
    for comp in net.components() {
        'pairs: for (k, &i) in comp.iter().enumerate() {
            for &j in &comp[k + 1..] {
                let kind = if mu[i] == mu[j] {
                    DipoleKind::Mu
                } else if nu[i] == nu[j] {
                    DipoleKind::Nu
                } else {
                    continue;
                };
                out.push((kind, i, j));
                break 'pairs;
            }
        }
    }
    out
}

fn suite_seed(seed: u64, suite: SuiteId) -> u64 {
    seed ^ (suite as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Runs one battery (or all of them) against `raw`.
///
/// Validation failures are reported as failed checks; this never errors.
pub fn run_suite(raw: &RawNetwork, suite: SuiteId, seed: u64, tol: f64) -> Report {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut values = Map::new();
    let command = format!("suite {} --seed {seed} --tol {tol:e}", suite.name());
    let checksum = raw.checksum();

    let w: &DMatrix<f64> = &raw.w;
    if w.is_square() && w.nrows() == raw.states.len() {
        let asym = (w - w.transpose()).amax();
        checks.push(Check {
            id: "core.symmetry".into(),
            anchor: "ρ(A×B) = ρ(B×A)".into(),
            residual: asym,
            tolerance: SYMMETRY_TOL,
            pass: asym <= SYMMETRY_TOL,
        });
    }
    let built: crate::error::Result<NetworkFile> = raw.build();
    let file = match built {
        Ok(f) => f,
        Err(e) => {
            values.insert("validation_error".into(), json!(e.to_string()));
            checks.push(Check {
                id: "core.validate".into(),
                anchor: "finite atomic symmetric measure".into(),
                residual: f64::INFINITY,
                tolerance: 0.0,
                pass: false,
            });
            return Report { command, checksum, checks, values, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 };
        }
    };
    let bc = match file.boundary.as_deref().map(|b| BoundaryConfig::new(&file.network, b)) {
        Some(Ok(bc)) => Some(bc),
        Some(Err(e)) => {
            values.insert("boundary_error".into(), json!(e.to_string()));
            checks.push(Check {
                id: "green.boundary".into(),
                anchor: "every interior state reaches the boundary".into(),
                residual: f64::INFINITY,
                tolerance: 0.0,
                pass: false,
            });
            None
        }
        None => None,
    };
    let list: Vec<SuiteId> = if suite == SuiteId::All { SuiteId::EACH.to_vec() } else { vec![suite] };
    for id in list {
        let mut battery = Battery {
            net: &file.network,
            boundary: bc.as_ref(),
            rng: ChaCha8Rng::seed_from_u64(suite_seed(seed, id)),
            seed: suite_seed(seed, id),
            tol,
            checks: Vec::new(),
            values: Map::new(),
        };
        match id {
            SuiteId::Core => battery.core(),
            SuiteId::Operators => battery.operators(),
            SuiteId::Energy => battery.energy(),
            SuiteId::Dissipation => battery.dissipation(),
            SuiteId::Green => battery.green(),
            SuiteId::Rkhs => battery.rkhs(),
            SuiteId::Learn => battery.learn(),
            SuiteId::All => unreachable!(),
        }
        checks.extend(battery.checks);
        values.extend(battery.values);
    }
    Report { command, checksum, checks, values, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 }
}
