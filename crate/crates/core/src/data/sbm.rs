use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Parameters of a homophilous stochastic block model with Gaussian features.
/// Block `c` holds the nodes of class `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    /// Euclidean distance between any two class means.
    pub feature_separation: f64,
    pub seed: u64,
}

impl SbmSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_out)
            || !(0.0..=1.0).contains(&self.p_in)
            || self.p_out > self.p_in
        {
            return Err(Error::input(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::input("every block needs at least one node"));
        }
        if !(self.feature_separation.is_finite() && self.feature_separation >= 0.0) {
            return Err(Error::input("feature_separation must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Samples a graph from `spec`. Identical specs yield identical graphs.
///
/// Class means sit on scaled coordinate axes when `feature_dim` is at least
/// the number of blocks (pairwise distance exactly `feature_separation`), and
/// on random unit directions otherwise. Features add unit Gaussian noise.
pub fn generate_sbm(spec: &SbmSpec) -> Result<Graph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let num_classes = spec.block_sizes.len();
    let labels: Vec<usize> = spec
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
        .collect();
    let n = labels.len();

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { spec.p_in } else { spec.p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }

    let d = spec.feature_dim;
    let scale = spec.feature_separation / std::f64::consts::SQRT_2;
    let mut means = Array2::<f64>::zeros((num_classes, d));
    if d >= num_classes {
        for c in 0..num_classes {
            means[[c, c]] = scale;
        }
    } else if d > 0 {
        for mut row in means.rows_mut() {
            row.mapv_inplace(|_| rng.sample::<f64, _>(StandardNormal));
            let norm = row.dot(&row).sqrt().max(f64::MIN_POSITIVE);
            row.mapv_inplace(|v| v / norm * scale);
        }
    }
    let mut features = Array2::<f64>::zeros((n, d));
    for (i, mut row) in features.rows_mut().into_iter().enumerate() {
        for (k, x) in row.iter_mut().enumerate() {
            *x = means[[labels[i], k]] + rng.sample::<f64, _>(StandardNormal);
        }
    }
    Graph::build(&edges, features, labels, num_classes)
}
