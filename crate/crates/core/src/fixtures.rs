//! Canonical small networks used by the test batteries and `mlap fixtures`.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::green::BoundaryConfig;
use crate::io::{write_network, NetworkFile};
use crate::learn::{diagonal_network, joining_network, product_measure_network, ProductMeasure};
use crate::net::Network;

/// Seed for the product-measure density.
pub const PRODUCT_SEED: u64 = 0x5eed_0005;

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub network: Network,
    pub boundary: Option<Vec<usize>>,
}

impl Fixture {
    pub fn boundary_config(&self) -> Option<BoundaryConfig> {
        self.boundary.as_ref().map(|b| BoundaryConfig::new(&self.network, b).expect("fixture boundary"))
    }

    pub fn file(&self) -> NetworkFile {
        NetworkFile { network: self.network.clone(), boundary: self.boundary.clone() }
    }
}

fn graph(states: &[&str], mu: Vec<f64>, edges: &[(usize, usize, f64)]) -> Network {
    let n = states.len();
    let mut w = DMatrix::zeros(n, n);
    for &(i, j, x) in edges {
        w[(i, j)] = x;
        w[(j, i)] = x;
    }
    Network::new(states.iter().map(|s| s.to_string()).collect(), mu, w).expect("fixture network")
}

/// K₃ with unit masses and unit weights.
pub fn triangle() -> Network {
    graph(&["a", "b", "c"], vec![1.0; 3], &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
}

/// The path 0–1–2 with unit weights.
pub fn path3() -> Network {
    graph(&["0", "1", "2"], vec![1.0; 3], &[(0, 1, 1.0), (1, 2, 1.0)])
}

/// A triangle on {0,1,2} next to a single edge {3,4}.
pub fn two_component() -> Network {
    graph(
        &["t0", "t1", "t2", "e0", "e1"],
        vec![1.0; 5],
        &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (3, 4, 1.0)],
    )
}

/// `W = diag(1, 2, 3)`, unit masses.
pub fn diagonal() -> Network {
    diagonal_network(&[1.0, 2.0, 3.0], None).expect("fixture network")
}

/// Uniform `μ` on five states with the seeded density of [`product_measure_parts`].
pub fn product_measure() -> Network {
    let pm = product_measure_parts();
    product_measure_network(pm.mu.as_slice(), pm.r.as_slice()).expect("fixture network")
}

pub fn product_measure_parts() -> ProductMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(PRODUCT_SEED);
    let r: Vec<f64> = (0..5).map(|_| rng.random_range(0.5..2.0)).collect();
    ProductMeasure::new(&[0.2; 5], &r)
}

/// The involution `0 ↔ 1`, `2 ↔ 3` with masses `(½, ½, 1, 1)`.
pub fn joining() -> Network {
    joining_network(&[0.5, 0.5, 1.0, 1.0], &[1, 0, 3, 2]).expect("fixture network")
}

pub fn all() -> Vec<Fixture> {
    vec![
        Fixture { name: "triangle", network: triangle(), boundary: Some(vec![2]) },
        Fixture { name: "path3", network: path3(), boundary: Some(vec![2]) },
        Fixture { name: "two_component", network: two_component(), boundary: Some(vec![2, 4]) },
        Fixture { name: "diagonal", network: diagonal(), boundary: None },
        Fixture { name: "product_measure", network: product_measure(), boundary: Some(vec![4]) },
        Fixture { name: "joining", network: joining(), boundary: Some(vec![1, 3]) },
    ]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}

/// Writes every fixture as `<name>.json` into `dir`.
pub fn emit_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    all()
        .iter()
        .map(|fx| {
            let path = dir.join(format!("{}.json", fx.name));
            write_network(&path, &fx.file())?;
            Ok(path)
        })
        .collect()
}
