//! Goodness-of-fit checks for the five synthesis samplers. Each returns the
//! chi-square p-value of `DRAWS` draws against the analytic multinomial.

use super::chi_square_p;
use graphsha::hardness::{sample_anchors, sample_auxiliary, sample_neighbor_class};
use graphsha::synthesis::{sample_synth_neighbors, EdgeCountSampler};
use graphsha::{DegreeDistribution, HardnessVector};
use ndarray::array;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DRAWS: usize = 100_000;

fn softmax(z: &[f64], t: f64) -> Vec<f64> {
    let e: Vec<f64> = z.iter().map(|v| (v / t).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

pub fn anchor_p(seed: u64) -> f64 {
    let hardness = vec![0.0, 0.5, 0.1, 0.9, 0.3, 0.0, 0.7];
    let hv = HardnessVector::new(hardness.clone());
    // Class 0 owns nodes {1, 3, 4, 6}; class 1 {0, 2, 5}.
    let members = vec![vec![1, 3, 4, 6], vec![0, 2, 5]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors = sample_anchors(&hv, &members, &[DRAWS, 0], &mut rng);
    assert_eq!(anchors.len(), DRAWS);
    let mut counts = vec![0; 7];
    for a in anchors {
        counts[a] += 1;
    }
    let total: f64 = members[0].iter().map(|&i| hardness[i]).sum();
    let probs: Vec<f64> = (0..7).map(|i| if members[0].contains(&i) { hardness[i] / total } else { 0.0 }).collect();
    chi_square_p(&counts, &probs)
}

pub fn neighbor_class_p(seed: u64) -> f64 {
    let z = [1.2, -0.3, 0.4, 2.0, 0.0];
    let (label, t) = (3, 1.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0; 5];
    for _ in 0..DRAWS {
        counts[sample_neighbor_class(&z, label, t, &mut rng)] += 1;
    }
    let mut probs = softmax(&z, t);
    probs[label] = 0.0;
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    chi_square_p(&counts, &probs)
}

pub fn auxiliary_p(seed: u64) -> f64 {
    let logits = array![[0.1, 0.9, -1.0], [2.0, 0.0, 0.5], [0.0, 0.0, 0.0], [-1.0, 1.5, 0.3], [0.7, -0.2, 1.1]];
    let candidates = [0, 2, 3, 4];
    let (anchor_label, t) = (1, 0.8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0; 5];
    for _ in 0..DRAWS {
        counts[sample_auxiliary(&candidates, &logits, anchor_label, t, &mut rng).unwrap()] += 1;
    }
    let w: Vec<f64> = (0..5)
        .map(|j| if candidates.contains(&j) { softmax(&logits.row(j).to_vec(), t)[anchor_label] } else { 0.0 })
        .collect();
    let s: f64 = w.iter().sum();
    let probs: Vec<f64> = w.iter().map(|v| v / s).collect();
    chi_square_p(&counts, &probs)
}

pub fn edge_count_p(seed: u64) -> f64 {
    let pd = DegreeDistribution::from_probabilities([(0, 0.1), (1, 0.3), (2, 0.25), (3, 0.2), (7, 0.15)]).unwrap();
    let sampler = EdgeCountSampler::new(&pd);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0; 8];
    for _ in 0..DRAWS {
        counts[sampler.sample(&mut rng)] += 1;
    }
    // Degree zero is clamped to a single edge.
    let probs = [0.0, 0.4, 0.25, 0.2, 0.0, 0.0, 0.0, 0.15];
    chi_square_p(&counts, &probs)
}

/// Ordered pairs from two sequential draws without replacement:
/// `P(i, j) = w_i w_j / (1 - w_i)`.
pub fn endpoint_p(seed: u64) -> f64 {
    let weights = [(10, 0.4), (11, 0.3), (12, 0.2), (13, 0.1)];
    let w: Vec<f64> = weights.iter().map(|p| p.1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0; 16];
    for _ in 0..DRAWS {
        let picked = sample_synth_neighbors(&weights, 2, &mut rng);
        assert_eq!(picked.len(), 2);
        let pos = |v: usize| weights.iter().position(|p| p.0 == v).unwrap();
        counts[4 * pos(picked[0]) + pos(picked[1])] += 1;
    }
    let probs: Vec<f64> = (0..16)
        .map(|cell| {
            let (i, j) = (cell / 4, cell % 4);
            if i == j {
                0.0
            } else {
                w[i] * w[j] / (1.0 - w[i])
            }
        })
        .collect();
    chi_square_p(&counts, &probs)
}
