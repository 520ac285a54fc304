//! Oracles and fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod samplers;

use graphsha::data::{generate_sbm, make_long_tailed_split};
use graphsha::diffusion::compute_diffusion;
use graphsha::nn::{loss_and_gradients, ModelParams, Propagator};
use graphsha::synthesis::{SourceSignals, Synthesizer};
use graphsha::{Backbone, DiffusionConfig, Graph, HardnessConfig, HardnessVector, MixupConfig, QuotaMode, SbmSpec};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Erdős–Rényi graph with Gaussian features and uniform labels.
pub fn random_graph(n: usize, p: f64, d: usize, c: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let features = Array2::from_shape_fn((n, d), |_| rng.random::<f64>() * 2.0 - 1.0);
    let labels: Vec<usize> = (0..n).map(|i| if i < c { i } else { rng.random_range(0..c) }).collect();
    Graph::build(&edges, features, labels, c).unwrap()
}

pub fn dense_adjacency(g: &Graph) -> Array2<f64> {
    let n = g.num_nodes();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for &j in g.neighbors(i) {
            a[[i, j]] = 1.0;
        }
    }
    a
}

/// `D̃^{-1/2}(A+I)D̃^{-1/2}` computed densely.
pub fn dense_gcn_operator(g: &Graph) -> Array2<f64> {
    let n = g.num_nodes();
    let a = dense_adjacency(g) + Array2::<f64>::eye(n);
    let d: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| a[[i, j]] / (d[i] * d[j]).sqrt())
}

/// Row-normalized adjacency; zero rows for isolated nodes.
pub fn dense_mean_operator(g: &Graph) -> Array2<f64> {
    let n = g.num_nodes();
    let a = dense_adjacency(g);
    Array2::from_shape_fn((n, n), |(i, j)| {
        let d = g.degree(i) as f64;
        if d == 0.0 {
            0.0
        } else {
            a[[i, j]] / d
        }
    })
}

/// `T = A D^{-1}` with a self-transition for isolated nodes.
pub fn dense_transition(g: &Graph) -> Array2<f64> {
    let n = g.num_nodes();
    let a = dense_adjacency(g);
    Array2::from_shape_fn((n, n), |(i, j)| {
        let dj = g.degree(j) as f64;
        if dj == 0.0 {
            if i == j {
                1.0
            } else {
                0.0
            }
        } else {
            a[[i, j]] / dj
        }
    })
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(m: &Array2<f64>) -> Array2<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut inv = Array2::<f64>::eye(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[[x, col]].abs().total_cmp(&a[[y, col]].abs()))
            .unwrap();
        assert!(a[[pivot, col]].abs() > 1e-12, "singular matrix");
        for k in 0..n {
            a.swap([col, k], [pivot, k]);
            inv.swap([col, k], [pivot, k]);
        }
        let p = a[[col, col]];
        for k in 0..n {
            a[[col, k]] /= p;
            inv[[col, k]] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[[r, col]];
                if f != 0.0 {
                    for k in 0..n {
                        a[[r, k]] -= f * a[[col, k]];
                        inv[[r, k]] -= f * inv[[col, k]];
                    }
                }
            }
        }
    }
    inv
}

/// Closed-form PPR `α (I − (1−α) T)^{-1}`.
pub fn dense_ppr(g: &Graph, alpha: f64) -> Array2<f64> {
    let n = g.num_nodes();
    let m = Array2::<f64>::eye(n) - dense_transition(g) * (1.0 - alpha);
    invert(&m) * alpha
}

/// Upper tail probability of the chi-square statistic of `counts` against
/// `expected_probs`. Cells with zero expected probability must be empty.
pub fn chi_square_p(counts: &[usize], expected_probs: &[f64]) -> f64 {
    let total: usize = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &p) in counts.iter().zip(expected_probs) {
        if p == 0.0 {
            assert_eq!(o, 0, "draw in a zero-probability cell");
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if cells < 2 {
        return 1.0;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

/// Largest relative error between analytic gradients and central finite
/// differences over every parameter entry.
pub fn max_gradient_error(backbone: Backbone, g: &Graph, hidden: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ModelParams::init(backbone, g.feature_dim(), hidden, g.num_classes(), &mut rng);
    let prop = Propagator::new(backbone, g.topology());
    let x = g.features();
    let targets: Vec<(usize, usize)> = (0..g.num_nodes()).step_by(2).map(|i| (i, g.label(i))).collect();
    let weights: Vec<f64> = (0..g.num_classes()).map(|c| 1.0 + c as f64).collect();
    let (_, grads, _) = loss_and_gradients(&prop, x, &params, &targets, Some(&weights));
    let loss_at = |p: &ModelParams| loss_and_gradients(&prop, x, p, &targets, Some(&weights)).0;

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for t in 0..2 {
        let shape = params.tensors()[t].dim();
        for r in 0..shape.0 {
            for c in 0..shape.1 {
                let mut plus = params.clone();
                plus.tensors_mut()[t][[r, c]] += h;
                let mut minus = params.clone();
                minus.tensors_mut()[t][[r, c]] -= h;
                let fd = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
                let an = grads.tensors()[t][[r, c]];
                let err = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-7);
                worst = worst.max(err);
            }
        }
    }
    worst
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

pub fn row(v: &[f64]) -> Array1<f64> {
    Array1::from(v.to_vec())
}

/// Neighbor-label disagreement among the `k` nearest training nodes, by
/// sorting every pairwise squared distance (ties to the lower id).
pub fn brute_force_knn(emb: &Array2<f64>, labels: &[usize], nodes: &[usize], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; labels.len()];
    for &i in nodes {
        let mut all: Vec<(f64, usize)> = nodes
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| {
                let d: f64 = emb.row(i).iter().zip(emb.row(j)).map(|(a, b)| (a - b).powi(2)).sum();
                (d, j)
            })
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let other = all[..k].iter().filter(|&&(_, j)| labels[j] != labels[i]).count();
        out[i] = other as f64 / k as f64;
    }
    out
}

pub fn small_sbm(seed: u64) -> Graph {
    generate_sbm(&SbmSpec {
        block_sizes: vec![40, 40, 40, 40],
        p_in: 0.1,
        p_out: 0.01,
        feature_dim: 5,
        feature_separation: 2.0,
        seed,
    })
    .unwrap()
}

/// Draws one synthesis batch per trial under varying graphs, splits, quota
/// modes and model signals, and checks every edge, label and class count.
/// Returns the number of edges checked.
pub fn check_synthesis_batches(trials: u64) -> Result<usize, String> {
    let mut checked_edges = 0;
    for trial in 0..trials {
        let g = small_sbm(trial % 5);
        let split = make_long_tailed_split(&g, 10.0, 20, 5, trial).unwrap();
        let dm = compute_diffusion(&g, &DiffusionConfig { top_k: 16, ..DiffusionConfig::default() }).unwrap();
        let mode = if trial % 2 == 0 { QuotaMode::Mean } else { QuotaMode::Max };
        let synth = Synthesizer::new(&g, &split, &dm, mode);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let hv = HardnessVector::new((0..g.num_nodes()).map(|_| rng.random::<f64>()).collect());
        let logits = Array2::from_shape_fn((g.num_nodes(), 4), |_| rng.random::<f64>() * 4.0 - 2.0);
        let signals = if trial % 10 == 0 {
            SourceSignals::Uniform
        } else {
            SourceSignals::Model { hardness: &hv, logits: &logits, knn_fields: None }
        };
        let mcfg = MixupConfig { quota_mode: mode, ..MixupConfig::default() };
        let batch = synth.synthesize(signals, &HardnessConfig::default(), &mcfg, &mut rng).unwrap();

        for (s, p) in batch.provenance.iter().enumerate() {
            if batch.labels[s] != g.label(p.anchor) {
                return Err(format!("trial {trial}: synthetic {s} labelled {} but anchor {} is {}", batch.labels[s], p.anchor, g.label(p.anchor)));
            }
        }
        for &(s, v) in &batch.edges {
            let anchor = batch.provenance[s].anchor;
            if v != anchor && !g.topology().has_edge(anchor, v) {
                return Err(format!("trial {trial}: edge to {v} outside N[{anchor}]"));
            }
            checked_edges += 1;
        }
        let counts = split.class_counts_train();
        let target = match mode {
            QuotaMode::Max => *counts.iter().max().unwrap(),
            QuotaMode::Mean => (counts.iter().sum::<usize>() as f64 / counts.len() as f64 + 0.5).floor() as usize,
        };
        for (c, &count) in counts.iter().enumerate() {
            let made = batch.labels.iter().filter(|&&y| y == c).count();
            if count + made != count.max(target) {
                return Err(format!("trial {trial}: class {c} ends at {} instead of {}", count + made, count.max(target)));
            }
        }
    }
    Ok(checked_edges)
}
