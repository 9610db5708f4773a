//! Random paths of the reversible chain and the dissipation space.
//!
//! Exact evaluators work with `n`-step distribution matrices and are the
//! reference; the Monte Carlo estimators are statistical cross-checks.
//!
//! Sampling uses one ChaCha8 stream per path: the generator is seeded with
//! the batch seed and its stream id is set to the path index. A path's
//! trajectory therefore depends only on `(seed, index)` and batches are
//! identical for any thread count.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{indicator, weighted_dot, weighted_norm_sq};
use crate::net::Network;
use crate::operators::{apply_p, OperatorBundle};

/// Minimum number of samples accepted by [`mc_energy_estimate`].
pub const MIN_MC_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartLaw {
    /// `X₀ ~ ν / ν(V)`
    Stationary,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathBatch {
    pub seed: u64,
    pub steps: usize,
    pub count: usize,
    pub start: StartLaw,
    paths: Vec<usize>,
}

impl PathBatch {
    /// States of path `k`, `steps + 1` entries.
    pub fn path(&self, k: usize) -> &[usize] {
        let stride = self.steps + 1;
        &self.paths[k * stride..(k + 1) * stride]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.paths.chunks(self.steps + 1)
    }

    /// Observed one-step transitions `counts[i][j]` over all paths and steps.
    pub fn transition_counts(&self, n: usize) -> DMatrix<f64> {
        let mut counts = DMatrix::zeros(n, n);
        for path in self.iter() {
            for pair in path.windows(2) {
                counts[(pair[0], pair[1])] += 1.0;
            }
        }
        counts
    }
}

/// Inverse-CDF sampler over a discrete distribution.
struct Categorical {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl Categorical {
    fn new(weights: impl Iterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let mut last_positive = 0;
        let mut cumulative = Vec::new();
        for (k, w) in weights.enumerate() {
            if w > 0.0 {
                last_positive = k;
            }
            acc += w;
            cumulative.push(acc);
        }
        for c in &mut cumulative {
            *c /= acc;
        }
        Self { cumulative, last_positive }
    }

    fn sample(&self, u: f64) -> usize {
        let k = self.cumulative.partition_point(|&c| c <= u);
        k.min(self.last_positive)
    }
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Samples `count` paths of `steps` transitions each.
pub fn sample_paths(net: &Network, seed: u64, steps: usize, count: usize, start: StartLaw) -> Result<PathBatch> {
    if steps == 0 || count == 0 {
        return Err(Error::EmptyBatch);
    }
    if let StartLaw::Fixed(x) = start {
        net.check_set(&[x])?;
    }
    let n = net.len();
    let w = net.w();
    let rows: Vec<Categorical> = (0..n).map(|i| Categorical::new(w.row(i).iter().copied())).collect();
    let initial = Categorical::new(net.nu().iter().copied());
    let stride = steps + 1;
    let mut paths = vec![0usize; count * stride];
    paths.par_chunks_mut(stride).enumerate().for_each(|(k, out)| {
        let mut rng = path_rng(seed, k);
        let mut x = match start {
            StartLaw::Stationary => initial.sample(rng.random::<f64>()),
            StartLaw::Fixed(x) => x,
        };
        out[0] = x;
        for slot in out.iter_mut().skip(1) {
            x = rows[x].sample(rng.random::<f64>());
            *slot = x;
        }
    });
    Ok(PathBatch { seed, steps, count, start, paths })
}

/// Exact `λ`-mass of the cylinder `{X₀ ∈ A₀, …, X_k ∈ A_k}`.
pub fn cylinder_mass(net: &Network, sets: &[Vec<usize>]) -> Result<f64> {
    let Some((first, rest)) = sets.split_first() else {
        return Ok(net.nu().sum());
    };
    let n = net.len();
    let p = OperatorBundle::new(net).p;
    net.check_set(first)?;
    let mut row = net.nu().component_mul(&indicator(n, first)).transpose();
    for set in rest {
        net.check_set(set)?;
        row = (&row * &p).component_mul(&indicator(n, set).transpose());
    }
    Ok(row.sum())
}

/// Variation/dissipation split of the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationSplit {
    /// `Σ_i ν_i Var_i(f∘X₁) = Σ_i ν_i (P(f²) − (Pf)²)_i`
    pub variance_term: f64,
    /// `‖f − Pf‖²_{L²(ν)}`
    pub dissipation_term: f64,
    /// `½(variance_term + dissipation_term)`, equal to `‖f‖²_{H_E}`.
    pub total: f64,
}

pub fn dissipation_norm(net: &Network, f: &DVector<f64>) -> Result<DissipationSplit> {
    let pf = apply_p(net, f)?;
    let pf2 = apply_p(net, &f.component_mul(f))?;
    let nu = net.nu();
    let var = pf2 - pf.component_mul(&pf);
    let variance_term = nu.dot(&var);
    let dissipation_term = weighted_norm_sq(nu, &(f - &pf));
    Ok(DissipationSplit { variance_term, dissipation_term, total: 0.5 * (variance_term + dissipation_term) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Monte Carlo estimate of `½ ∫ 𝔼_x[(f∘X₁ − f∘X₀)²] dν(x)` from
/// `ν`-distributed one-step paths.
pub fn mc_energy_estimate(net: &Network, f: &DVector<f64>, seed: u64, count: usize) -> Result<McEstimate> {
    net.check_vec(f)?;
    if count < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples { min: MIN_MC_SAMPLES, got: count });
    }
    let batch = sample_paths(net, seed, 1, count, StartLaw::Stationary)?;
    let scale = 0.5 * net.nu().sum();
    let samples: Vec<f64> = batch.iter().map(|p| (f[p[1]] - f[p[0]]).powi(2)).collect();
    let m = count as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(McEstimate { estimate: scale * mean, stderr: scale * (var / m).sqrt(), count })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityCheck {
    /// `⟨g₁∘X_n, P(g₂)∘X_n − g₂∘X_{n+1}⟩_D`
    pub residual: f64,
    /// `⟨(I−P)g₂∘X_n, P(g₂)∘X_n − g₂∘X_{n+1}⟩_D`
    pub split_residual: f64,
    /// Cauchy–Schwarz scale for the residuals.
    pub scale: f64,
}

/// Dissipation-space inner product `½ Σ_{ij} J_ij a(i, j) b(i, j)` where
/// `J_ij = λ(X_n = i, X_{n+1} = j)`.
fn diss_inner<A, B>(joint: &DMatrix<f64>, a: A, b: B) -> (f64, f64)
where
    A: Fn(usize, usize) -> f64,
    B: Fn(usize, usize) -> f64,
{
    let n = joint.nrows();
    let (mut dot, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let m = joint[(i, j)];
            if m != 0.0 {
                let (x, y) = (a(i, j), b(i, j));
                dot += m * x * y;
                aa += m * x * x;
                bb += m * y * y;
            }
        }
    }
    (0.5 * dot, 0.5 * (aa * bb).sqrt())
}

/// Exact check that `g₁∘X_n ⊥ P(g₂)∘X_n − g₂∘X_{n+1}` in the dissipation space.
pub fn orthogonality_residual(net: &Network, g1: &DVector<f64>, g2: &DVector<f64>, n: usize) -> Result<OrthogonalityCheck> {
    net.check_vec(g1)?;
    net.check_vec(g2)?;
    let p = OperatorBundle::new(net).p;
    let mut law = net.nu().transpose();
    for _ in 0..n {
        law = &law * &p;
    }
    let joint = DMatrix::from_fn(net.len(), net.len(), |i, j| law[i] * p[(i, j)]);
    let pg2 = apply_p(net, g2)?;
    let innovation = |i: usize, j: usize| pg2[i] - g2[j];
    let (residual, scale) = diss_inner(&joint, |i, _| g1[i], innovation);
    let drift = g2 - &pg2;
    let (split_residual, split_scale) = diss_inner(&joint, |i, _| drift[i], innovation);
    Ok(OrthogonalityCheck { residual, split_residual, scale: scale.max(split_scale) })
}

/// `(∫ Var_x(f∘X₁) dν, ∫ 𝔼_x[Var(f∘X_n | X_{n−1})] dν)`.
///
/// The second entry is the variance of the `n`-th step increment given the
/// previous state, averaged over paths started from `ν`; stationarity of `ν`
/// makes the two entries agree.
pub fn variance_invariance(net: &Network, f: &DVector<f64>, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let pf = apply_p(net, f)?;
    let one_step = apply_p(net, &f.component_mul(f))? - pf.component_mul(&pf);
    let nu = net.nu();
    let mut carried = one_step.clone();
    for _ in 1..n {
        carried = apply_p(net, &carried)?;
    }
    Ok((nu.dot(&one_step), weighted_dot(nu, &DVector::from_element(net.len(), 1.0), &carried)))
}
