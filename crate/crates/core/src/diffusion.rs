//! Graph diffusion `S = Σ_r θ_r T^r` with `T = A D^{-1}`, top-K
//! sparsification per column, and the anchor-local sampling weights derived
//! from it.
//!
//! Columns are computed independently: column `j` is the truncated series
//! applied to the indicator of node `j`, i.e. the diffusion seeded at `j`.
//! Isolated nodes get a self-transition so `T` stays column-stochastic.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Environment variable naming the directory for cached diffusion matrices.
pub const CACHE_DIR_ENV: &str = "GRAPHSHA_CACHE_DIR";
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionKind {
    /// Personalized PageRank, `θ_r = α(1-α)^r`.
    Ppr,
    /// Heat kernel, `θ_r = e^{-t} t^r / r!`.
    HeatKernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    pub kind: DiffusionKind,
    /// Teleport probability for PPR.
    pub alpha: f64,
    /// Diffusion time for the heat kernel.
    pub t: f64,
    pub top_k: usize,
    /// The series stops once the coefficient mass not yet summed drops below this.
    pub series_tolerance: f64,
    pub max_terms: usize,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            kind: DiffusionKind::Ppr,
            alpha: 0.05,
            t: 5.0,
            top_k: 128,
            series_tolerance: 1e-6,
            // α = 0.05 needs ~270 terms to bring the residual below 1e-6.
            max_terms: 512,
        }
    }
}

impl DiffusionConfig {
    pub fn ppr(alpha: f64) -> Self {
        Self {
            kind: DiffusionKind::Ppr,
            alpha,
            ..Self::default()
        }
    }

    pub fn heat_kernel(t: f64) -> Self {
        Self {
            kind: DiffusionKind::HeatKernel,
            t,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == DiffusionKind::Ppr && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::input(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if self.kind == DiffusionKind::HeatKernel && !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::input(format!("t must be > 0, got {}", self.t)));
        }
        if self.top_k == 0 {
            return Err(Error::input("top_k must be >= 1"));
        }
        if self.max_terms == 0 || !(self.series_tolerance > 0.0) {
            return Err(Error::input("max_terms and series_tolerance must be positive"));
        }
        Ok(())
    }

    /// Truncated series coefficients `θ_0..=θ_R`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut summed = 0.0;
        for r in 0..self.max_terms {
            let theta = match self.kind {
                DiffusionKind::Ppr => self.alpha * (1.0 - self.alpha).powi(r as i32),
                DiffusionKind::HeatKernel => {
                    // e^{-t} t^r / r!, built incrementally in log space.
                    let log = -self.t + r as f64 * self.t.ln()
                        - (1..=r).map(|k| (k as f64).ln()).sum::<f64>();
                    log.exp()
                }
            };
            out.push(theta);
            summed += theta;
            let residual = match self.kind {
                DiffusionKind::Ppr => (1.0 - self.alpha).powi(r as i32 + 1),
                DiffusionKind::HeatKernel => 1.0 - summed,
            };
            if residual < self.series_tolerance {
                break;
            }
        }
        out
    }
}

/// Sparsified diffusion: per column at most `top_k` `(node, score)` pairs,
/// sorted by node id and renormalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionMatrix {
    columns: Vec<Vec<(usize, f64)>>,
}

impl DiffusionMatrix {
    pub fn num_nodes(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    /// Stored score `S̃_ij`, zero when pruned.
    pub fn score(&self, i: usize, j: usize) -> f64 {
        let col = &self.columns[j];
        match col.binary_search_by_key(&i, |&(k, _)| k) {
            Ok(p) => col[p].1,
            Err(_) => 0.0,
        }
    }
}

/// Applies `T = A D^{-1}` (with self-transitions at isolated nodes) to `v`.
fn apply_transition(g: &Graph, inv_degree: &[f64], v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let nbrs = g.neighbors(i);
        *o = if nbrs.is_empty() {
            v[i]
        } else {
            nbrs.iter().map(|&k| v[k] * inv_degree[k]).sum()
        };
    }
}

/// Dense, unsparsified column `S e_j` from the truncated series.
pub fn diffusion_column(g: &Graph, cfg: &DiffusionConfig, j: usize) -> Vec<f64> {
    let inv_degree = inverse_degrees(g);
    column_with(g, &cfg.coefficients(), &inv_degree, j)
}

fn inverse_degrees(g: &Graph) -> Vec<f64> {
    (0..g.num_nodes())
        .map(|i| match g.degree(i) {
            0 => 1.0,
            d => 1.0 / d as f64,
        })
        .collect()
}

fn column_with(g: &Graph, thetas: &[f64], inv_degree: &[f64], j: usize) -> Vec<f64> {
    let n = g.num_nodes();
    let mut walk = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut acc = vec![0.0; n];
    walk[j] = 1.0;
    for (r, &theta) in thetas.iter().enumerate() {
        for (a, w) in acc.iter_mut().zip(&walk) {
            *a += theta * w;
        }
        if r + 1 < thetas.len() {
            apply_transition(g, inv_degree, &walk, &mut next);
            std::mem::swap(&mut walk, &mut next);
        }
    }
    acc
}

/// Keeps the `k` largest entries (ties to the lower node id) and renormalizes.
fn top_k(column: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut entries: Vec<(usize, f64)> = column
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, s)| s > 0.0)
        .collect();
    if entries.len() > k {
        entries.select_nth_unstable_by(k - 1, |a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        entries.truncate(k);
    }
    entries.sort_unstable_by_key(|&(i, _)| i);
    let total: f64 = entries.iter().map(|&(_, s)| s).sum();
    entries.iter_mut().for_each(|e| e.1 /= total);
    entries
}

/// Computes the sparsified diffusion matrix. Columns are processed in parallel.
pub fn compute_diffusion(g: &Graph, cfg: &DiffusionConfig) -> Result<DiffusionMatrix> {
    cfg.validate()?;
    let thetas = cfg.coefficients();
    let inv_degree = inverse_degrees(g);
    let columns = (0..g.num_nodes())
        .into_par_iter()
        .map(|j| top_k(&column_with(g, &thetas, &inv_degree, j), cfg.top_k))
        .collect();
    Ok(DiffusionMatrix { columns })
}

/// The anchor's diffusion column restricted to its closed 1-hop neighborhood
/// and renormalized; uniform over that neighborhood if no score survives.
/// Returned pairs are sorted by node id.
pub fn one_hop_sampling_weights(dm: &DiffusionMatrix, g: &Graph, anchor: usize) -> Vec<(usize, f64)> {
    let nbrs = g.neighbors(anchor);
    let split = nbrs.partition_point(|&j| j < anchor);
    let closed = nbrs[..split]
        .iter()
        .chain(std::iter::once(&anchor))
        .chain(&nbrs[split..]);
    let mut weights: Vec<(usize, f64)> = closed
        .map(|&i| (i, dm.score(i, anchor)))
        .filter(|&(_, s)| s > 0.0)
        .collect();
    let total: f64 = weights.iter().map(|&(_, s)| s).sum();
    if weights.is_empty() || total <= 0.0 {
        let uniform = 1.0 / (nbrs.len() + 1) as f64;
        let mut all: Vec<(usize, f64)> = nbrs.iter().map(|&i| (i, uniform)).collect();
        all.push((anchor, uniform));
        all.sort_unstable_by_key(|&(i, _)| i);
        return all;
    }
    weights.iter_mut().for_each(|w| w.1 /= total);
    weights
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    graph_hash: String,
    config: DiffusionConfig,
    matrix: DiffusionMatrix,
}

fn cache_key(graph_hash: &str, cfg: &DiffusionConfig) -> String {
    let cfg_json = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(cfg_json.as_bytes());
    let cfg_hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("diffusion-{}-{}.json", &graph_hash[..16], cfg_hex)
}

/// Path of the cache entry for `(g, cfg)` under `dir`.
pub fn cache_path(dir: &Path, g: &Graph, cfg: &DiffusionConfig) -> PathBuf {
    dir.join(cache_key(&g.content_hash(), cfg))
}

/// Writes a versioned JSON dump keyed by graph content hash and config.
pub fn save_cache(path: &Path, g: &Graph, cfg: &DiffusionConfig, dm: &DiffusionMatrix) -> Result<()> {
    let file = CacheFile {
        version: CACHE_VERSION,
        graph_hash: g.content_hash(),
        config: cfg.clone(),
        matrix: dm.clone(),
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_vec(&file)?)?;
    Ok(())
}

/// Reads a cache entry, returning `None` if it belongs to a different graph
/// or config.
pub fn load_cache(path: &Path, g: &Graph, cfg: &DiffusionConfig) -> Result<Option<DiffusionMatrix>> {
    let file: CacheFile = serde_json::from_slice(&fs::read(path)?)?;
    if file.version != CACHE_VERSION {
        return Err(Error::Version {
            found: file.version,
            expected: CACHE_VERSION,
        });
    }
    if file.graph_hash != g.content_hash() || &file.config != cfg {
        return Ok(None);
    }
    Ok(Some(file.matrix))
}

/// Loads from `cache_dir` when a matching entry exists, otherwise computes
/// and stores one. Without a cache directory this is [`compute_diffusion`].
pub fn load_or_compute(
    g: &Graph,
    cfg: &DiffusionConfig,
    cache_dir: Option<&Path>,
) -> Result<DiffusionMatrix> {
    let Some(dir) = cache_dir else {
        return compute_diffusion(g, cfg);
    };
    let path = cache_path(dir, g, cfg);
    if path.exists() {
        if let Some(dm) = load_cache(&path, g, cfg)? {
            return Ok(dm);
        }
    }
    let dm = compute_diffusion(g, cfg)?;
    save_cache(&path, g, cfg, &dm)?;
    Ok(dm)
}
