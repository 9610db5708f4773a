//! Finite atomic symmetric measures.
//!
//! A [`Network`] stores `n` atoms of a base measure `μ` together with a
//! symmetric coupling matrix `W`, where `W[i][j]` is the mass the symmetric
//! measure `ρ` puts on the atom pair `({i}, {j})`. Everything else in the
//! crate (conductance, stationary measure, transition matrix, Laplacian) is
//! derived from these two objects.

use std::collections::{HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute tolerance for accepting `W` as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative tolerance used when deciding whether `diag(p)` commutes with `R`.
pub const COMMUTATOR_TOL: f64 = 1e-10;

/// A validated finite symmetric measure: base masses `μ` and coupling `W`.
///
/// After construction `W` is exactly symmetric and every row sum is
/// strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    states: Vec<String>,
    mu: DVector<f64>,
    w: DMatrix<f64>,
    nu: DVector<f64>,
}

impl Network {
    /// Validates and builds a network.
    ///
    /// `W` must agree with its transpose to within [`SYMMETRY_TOL`]; the
    /// stored matrix is the exact average `½(W + Wᵀ)`.
    pub fn new(states: Vec<String>, mu: Vec<f64>, w: DMatrix<f64>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::EmptyNetwork);
        }
        let mut seen = HashSet::with_capacity(n);
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateState(s.clone()));
            }
        }
        if mu.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: mu.len() });
        }
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: w.nrows().max(w.ncols()) });
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("mu"));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("W"));
        }
        if let Some(i) = mu.iter().position(|&m| m <= 0.0) {
            return Err(Error::NonpositiveMass(i));
        }
        for i in 0..n {
            for j in 0..n {
                let wij = w[(i, j)];
                if wij < 0.0 {
                    return Err(Error::NegativeCoupling { i, j, value: wij });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (wij, wji) = (w[(i, j)], w[(j, i)]);
                if (wij - wji).abs() > SYMMETRY_TOL {
                    return Err(Error::AsymmetricCoupling { i, j, wij, wji });
                }
            }
        }
        let w = (&w + w.transpose()) * 0.5;
        let nu = DVector::from_iterator(n, w.row_iter().map(|r| r.sum()));
        if let Some(i) = nu.iter().position(|&s| s <= 0.0) {
            return Err(Error::ZeroConductance(i));
        }
        Ok(Self { states, mu: DVector::from_vec(mu), w, nu })
    }

    /// Network whose states are labelled `"0"`, `"1"`, …
    pub fn unlabeled(mu: Vec<f64>, w: DMatrix<f64>) -> Result<Self> {
        let states = (0..mu.len()).map(|i| i.to_string()).collect();
        Self::new(states, mu, w)
    }

    /// Builds the symmetric measure `ρ# = ½(ρ + ρ∘θ)` from an arbitrary
    /// nonnegative coupling.
    pub fn symmetrize(states: Vec<String>, mu: Vec<f64>, w_raw: &DMatrix<f64>) -> Result<Self> {
        if !w_raw.is_square() {
            return Err(Error::DimensionMismatch { expected: w_raw.nrows(), found: w_raw.ncols() });
        }
        let w = (w_raw + w_raw.transpose()) * 0.5;
        Self::new(states, mu, w)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s == id)
    }

    /// Base masses `μ`.
    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    /// Coupling matrix `W`.
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Stationary measure `ν_i = Σ_j W[i][j]`.
    pub fn nu(&self) -> &DVector<f64> {
        &self.nu
    }

    /// Conductance `c_i = ν_i / μ_i`.
    pub fn conductance(&self) -> DVector<f64> {
        self.nu.component_div(&self.mu)
    }

    /// Total mass `ρ(V×V)`.
    pub fn total_mass(&self) -> f64 {
        self.nu.sum()
    }

    /// `ρ(A×B) = Σ_{i∈A, j∈B} W[i][j]`.
    pub fn rho(&self, a: &[usize], b: &[usize]) -> f64 {
        a.iter().map(|&i| b.iter().map(|&j| self.w[(i, j)]).sum::<f64>()).sum()
    }

    pub fn mu_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.mu[i]).sum()
    }

    pub fn nu_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.nu[i]).sum()
    }

    pub(crate) fn check_vec(&self, f: &DVector<f64>) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: f.len() });
        }
        Ok(())
    }

    pub(crate) fn check_set(&self, set: &[usize]) -> Result<()> {
        match set.iter().find(|&&i| i >= self.len()) {
            Some(&index) => Err(Error::IndexOutOfRange { index, len: self.len() }),
            None => Ok(()),
        }
    }

    /// Conductance, stationary measure, transition matrix and conditional rows.
    pub fn derive(&self) -> DerivedMeasures {
        let n = self.len();
        let c = self.conductance();
        let p = DMatrix::from_fn(n, n, |i, j| self.w[(i, j)] / self.nu[i]);
        let rho_x = DMatrix::from_fn(n, n, |i, j| self.w[(i, j)] / self.mu[i]);
        DerivedMeasures { c, nu: self.nu.clone(), p, rho_x }
    }

    /// Reweights the base measure by `p`, keeping `W`.
    ///
    /// The disintegration `ρ_β = ∫ρ_x dβ` with `dβ = p dμ` has atoms
    /// `W[i][j]·p_i`; it is symmetric exactly when `diag(p)` commutes with
    /// the matrix of `R`.
    pub fn reweight(&self, p: &[f64]) -> Result<Reweighting> {
        let n = self.len();
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.len() });
        }
        if let Some(i) = p.iter().position(|&x| !x.is_finite() || x <= 0.0) {
            return Err(Error::NonpositiveWeight(i));
        }
        let r = DMatrix::from_fn(n, n, |i, j| self.w[(i, j)] / self.mu[i]);
        let mut scale = 0.0_f64;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                scale = scale.max((p[i] * r[(i, j)]).abs()).max((r[(i, j)] * p[j]).abs());
                worst = worst.max(((p[i] - p[j]) * r[(i, j)]).abs());
            }
        }
        let commutes = worst <= COMMUTATOR_TOL * scale;
        let atoms = DMatrix::from_fn(n, n, |i, j| self.w[(i, j)] * p[i]);
        let beta = self.mu.iter().zip(p).map(|(m, q)| m * q).collect();
        let network = Network::new(self.states.clone(), beta, self.w.clone())?;
        Ok(Reweighting { network, atoms, commutes })
    }

    /// Connected components of the support graph, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = vec![start];
            label[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for j in 0..n {
                    if self.w[(i, j)] > 0.0 && label[j] == usize::MAX {
                        label[j] = id;
                        comp.push(j);
                        queue.push_back(j);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn irreducibility(&self) -> Irreducibility {
        let components = self.components();
        Irreducibility { irreducible: components.len() == 1, components }
    }

    /// Least `n ≥ 1` with `P_n(x, A) > 0`, or `None` if `A` is never reached.
    pub fn attainability(&self, x: usize, target: &[usize]) -> Result<Option<usize>> {
        if target.is_empty() {
            return Err(Error::EmptyTargetSet);
        }
        self.check_set(&[x])?;
        self.check_set(target)?;
        let n = self.len();
        // BFS where level 1 holds the out-neighbours of x (x itself only via a loop or return walk).
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for j in 0..n {
            if self.w[(x, j)] > 0.0 {
                dist[j] = 1;
                queue.push_back(j);
            }
        }
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if self.w[(i, j)] > 0.0 && dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
        Ok(target.iter().map(|&a| dist[a]).filter(|&d| d != usize::MAX).min())
    }
}

/// Objects derived from a network by disintegration.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedMeasures {
    /// `c_i = Σ_j W[i][j] / μ_i`
    pub c: DVector<f64>,
    /// `ν_i = c_i μ_i`
    pub nu: DVector<f64>,
    /// Row-stochastic `P[i][j] = W[i][j] / ν_i`.
    pub p: DMatrix<f64>,
    /// Conditional rows `ρ_x[i][j] = W[i][j] / μ_i`.
    pub rho_x: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reweighting {
    /// Network with base measure `β = p·μ` and the original coupling.
    pub network: Network,
    /// Atoms of `∫ρ_x dβ`, i.e. `W[i][j]·p_i`.
    pub atoms: DMatrix<f64>,
    pub commutes: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Irreducibility {
    pub irreducible: bool,
    pub components: Vec<Vec<usize>>,
}

/// A list of state subsets over which kernels are evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    sets: Vec<Vec<usize>>,
    names: Vec<Option<String>>,
}

impl SetFamily {
    /// Validates that every set is nonempty and in range; members are sorted
    /// and deduplicated.
    pub fn new(n: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        let names = vec![None; sets.len()];
        Self::with_names(n, sets, names)
    }

    pub fn with_names(n: usize, sets: Vec<Vec<usize>>, names: Vec<Option<String>>) -> Result<Self> {
        if names.len() != sets.len() {
            return Err(Error::DimensionMismatch { expected: sets.len(), found: names.len() });
        }
        let mut clean = Vec::with_capacity(sets.len());
        for (k, mut s) in sets.into_iter().enumerate() {
            if s.is_empty() {
                return Err(Error::EmptySet(k));
            }
            if let Some(&index) = s.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange { index, len: n });
            }
            s.sort_unstable();
            s.dedup();
            clean.push(s);
        }
        Ok(Self { sets: clean, names })
    }

    /// All singletons `{0}, …, {n−1}`.
    pub fn singletons(n: usize) -> Self {
        Self { sets: (0..n).map(|i| vec![i]).collect(), names: vec![None; n] }
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn names(&self) -> &[Option<String>] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}
