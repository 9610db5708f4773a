//! Graph-Laplacian calculus on finite atomic symmetric measures.
//!
//! A [`Network`] is a finite state space with masses `μ` and a symmetric
//! nonnegative coupling `W` (the atoms of a symmetric measure `ρ`). From it
//! come the stationary weights `ν = W·1`, conductance `c = ν/μ`, the Markov
//! operator `P`, the Laplacian `Δ = c(I − P)`, and the energy form
//! `⟨f, g⟩_{H_E} = ½ Σ W_ij (f_i − f_j)(g_i − g_j)`.
//!
//! Modules:
//! - [`net`]: validation, derived measures, connectivity
//! - [`operators`]: `R`, `P`, `Δ`, spectra, harmonic functions
//! - [`energy`]: energy space, dipoles, Royden splitting, norm bounds
//! - [`paths`]: path sampling, cylinder masses, dissipation identities
//! - [`green`]: killed chains, Green's functions, set kernels
//! - [`learn`]: regularized least squares and special measures
//! - [`io`], [`fixtures`], [`suite`]: files, canonical examples, batteries

pub mod energy;
pub mod error;
pub mod fixtures;
pub mod green;
pub mod io;
pub mod learn;
pub mod linalg;
pub mod net;
pub mod operators;
pub mod paths;
pub mod suite;

pub use error::{Error, ParseError, Result};
pub use green::BoundaryConfig;
pub use net::{Network, SetFamily};
