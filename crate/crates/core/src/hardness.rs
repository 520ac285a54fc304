//! Node hardness and the three multinomial samplings that pick the source
//! nodes of a synthesized sample: a hard minor anchor, a neighbor class drawn
//! from the anchor's softmax, and an auxiliary node of that class that is
//! confident about the anchor's class.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{softmax, Categorical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardnessMetric {
    /// `1 - softmax(Z_i / T)[y_i]`.
    Confidence,
    /// Fraction of the k nearest training embeddings with another label.
    Knn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessConfig {
    pub metric: HardnessMetric,
    /// Softmax temperature, shared by hardness, neighbor-class and auxiliary sampling.
    pub temperature: f64,
    pub knn_k: usize,
}

impl Default for HardnessConfig {
    fn default() -> Self {
        Self {
            metric: HardnessMetric::Confidence,
            temperature: 1.0,
            knn_k: 4,
        }
    }
}

impl HardnessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::input(format!("temperature must be > 0, got {}", self.temperature)));
        }
        if self.knn_k == 0 {
            return Err(Error::input("knn_k must be >= 1"));
        }
        Ok(())
    }
}

/// Per-node hardness in `[0, 1]`, indexed by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct HardnessVector {
    values: Vec<f64>,
}

impl HardnessVector {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        Self { values }
    }

    /// Every node equally hard; used before any logits exist.
    pub fn uniform(num_nodes: usize) -> Self {
        Self::new(vec![1.0; num_nodes])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// Source nodes of one synthesized sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcePair {
    pub anchor: usize,
    pub neighbor_class: usize,
    pub auxiliary: usize,
}

/// Confidence hardness `1 - softmax(Z_i / T)[y_i]` for every row of `logits`.
pub fn confidence_hardness(
    logits: &Array2<f64>,
    labels: &[usize],
    cfg: &HardnessConfig,
) -> Result<HardnessVector> {
    cfg.validate()?;
    if logits.nrows() != labels.len() {
        return Err(Error::input("logits and labels disagree on node count"));
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::input("non-finite logits"));
    }
    let values = logits
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &y)| {
            let row = row.to_vec();
            (1.0 - softmax(&row, cfg.temperature)[y]).clamp(0.0, 1.0)
        })
        .collect();
    Ok(HardnessVector::new(values))
}

fn squared_distance(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// For each node in `nodes`, the `k` nearest other members of `nodes` by
/// Euclidean distance between embedding rows. Ties go to the lower node id.
pub fn knn_receptive_fields(
    embeddings: &Array2<f64>,
    nodes: &[usize],
    k: usize,
) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k + 1 > nodes.len() {
        return Err(Error::input(format!(
            "knn_k = {k} needs at least {} training nodes, have {}",
            k + 1,
            nodes.len()
        )));
    }
    Ok(nodes
        .iter()
        .map(|&i| {
            let mut dists: Vec<(f64, usize)> = nodes
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (squared_distance(embeddings.row(i), embeddings.row(j)), j))
                .collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if dists.len() > k {
                dists.select_nth_unstable_by(k - 1, cmp);
                dists.truncate(k);
            }
            dists.sort_unstable_by(cmp);
            dists.into_iter().map(|(_, j)| j).collect()
        })
        .collect())
}

/// KNN hardness over the training nodes `nodes`: the fraction of each node's
/// `k` nearest training embeddings that carry a different label. Nodes not in
/// `nodes` get hardness 0.
pub fn knn_hardness(
    embeddings: &Array2<f64>,
    labels: &[usize],
    nodes: &[usize],
    cfg: &HardnessConfig,
) -> Result<HardnessVector> {
    cfg.validate()?;
    let fields = knn_receptive_fields(embeddings, nodes, cfg.knn_k)?;
    let mut values = vec![0.0; labels.len()];
    for (&i, field) in nodes.iter().zip(&fields) {
        let other = field.iter().filter(|&&j| labels[j] != labels[i]).count();
        values[i] = other as f64 / cfg.knn_k as f64;
    }
    Ok(HardnessVector::new(values))
}

/// Anchor distribution of one class: proportional to hardness, uniform when
/// every member has zero hardness.
pub fn anchor_distribution(hv: &HardnessVector, members: &[usize]) -> Option<Categorical> {
    let weights: Vec<f64> = members.iter().map(|&i| hv.get(i)).collect();
    Categorical::new(&weights).or_else(|| Categorical::uniform(members.len()))
}

/// Draws `quotas[c]` anchors with replacement from each class's training
/// nodes, with probability proportional to hardness.
pub fn sample_anchors<R: Rng + ?Sized>(
    hv: &HardnessVector,
    train_by_class: &[Vec<usize>],
    quotas: &[usize],
    rng: &mut R,
) -> Vec<usize> {
    let mut anchors = Vec::with_capacity(quotas.iter().sum());
    for (members, &quota) in train_by_class.iter().zip(quotas) {
        if quota == 0 {
            continue;
        }
        let dist = anchor_distribution(hv, members).expect("class with a quota has training nodes");
        anchors.extend((0..quota).map(|_| members[dist.sample(rng)]));
    }
    anchors
}

/// Masked softmax over classes: `excluded` classes (always including the
/// anchor's own) get probability zero. `None` if every class is excluded.
pub fn neighbor_class_distribution(
    logits_anchor: &[f64],
    excluded: &[bool],
    temperature: f64,
) -> Option<Categorical> {
    let mut probs = softmax(logits_anchor, temperature);
    for (p, &ex) in probs.iter_mut().zip(excluded) {
        if ex {
            *p = 0.0;
        }
    }
    Categorical::new(&probs).or_else(|| {
        // Softmax underflow: fall back to uniform over the allowed classes.
        let allowed: Vec<f64> = excluded.iter().map(|&ex| if ex { 0.0 } else { 1.0 }).collect();
        Categorical::new(&allowed)
    })
}

/// Draws a neighbor class from `softmax(Z_anc / T)` with the anchor's own
/// class masked out.
pub fn sample_neighbor_class<R: Rng + ?Sized>(
    logits_anchor: &[f64],
    anchor_label: usize,
    temperature: f64,
    rng: &mut R,
) -> usize {
    let mut excluded = vec![false; logits_anchor.len()];
    excluded[anchor_label] = true;
    neighbor_class_distribution(logits_anchor, &excluded, temperature)
        .expect("at least two classes")
        .sample(rng)
}

/// Auxiliary distribution over `candidates`: each weighted by its softmax
/// confidence on `anchor_label`. Uniform if all confidences underflow.
pub fn auxiliary_distribution(
    candidates: &[usize],
    logits: &Array2<f64>,
    anchor_label: usize,
    temperature: f64,
) -> Result<Categorical> {
    if candidates.is_empty() {
        return Err(Error::NoAuxiliary);
    }
    let weights: Vec<f64> = candidates
        .iter()
        .map(|&j| softmax(&logits.row(j).to_vec(), temperature)[anchor_label])
        .collect();
    Ok(Categorical::new(&weights)
        .or_else(|| Categorical::uniform(candidates.len()))
        .expect("nonempty"))
}

/// Draws an auxiliary node from `candidates` (training nodes of the neighbor
/// class) proportionally to their confidence on the anchor's class.
/// `logits` is indexed by node id. Empty candidates yield
/// [`Error::NoAuxiliary`].
pub fn sample_auxiliary<R: Rng + ?Sized>(
    candidates: &[usize],
    logits: &Array2<f64>,
    anchor_label: usize,
    temperature: f64,
    rng: &mut R,
) -> Result<usize> {
    let dist = auxiliary_distribution(candidates, logits, anchor_label, temperature)?;
    Ok(candidates[dist.sample(rng)])
}
