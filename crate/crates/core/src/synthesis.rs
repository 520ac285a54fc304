//! SemiMixup synthesis of harder minor samples.
//!
//! A synthesized node takes its features from a convex mix of an anchor and
//! an auxiliary node, its label from the anchor, and its edges only from the
//! anchor's diffusion-weighted closed 1-hop neighborhood. The number of edges
//! follows the graph's degree distribution.

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::data::ImbalancedSplit;
use crate::diffusion::{one_hop_sampling_weights, DiffusionMatrix};
use crate::error::{Error, Result};
use crate::graph::{DegreeDistribution, Graph};
use crate::hardness::{
    anchor_distribution, auxiliary_distribution, neighbor_class_distribution, HardnessConfig,
    HardnessVector,
};
use crate::sampling::{sample_without_replacement, Categorical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotaMode {
    /// Fill classes up to the rounded mean training count.
    Mean,
    /// Fill classes up to the largest training count.
    Max,
}

/// Distribution of the mixing coefficient `δ` (weight of the anchor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaDistribution {
    Beta { b1: f64, b2: f64 },
    Constant(f64),
}

impl DeltaDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            DeltaDistribution::Beta { b1, b2 } => b1 / (b1 + b2),
            DeltaDistribution::Constant(d) => d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler().map(|_| ())
    }

    fn sampler(&self) -> Result<DeltaSampler> {
        match *self {
            DeltaDistribution::Beta { b1, b2 } => {
                if !(b1 > 0.0 && b2 > 0.0 && b1.is_finite() && b2.is_finite()) {
                    return Err(Error::input(format!("beta parameters must be > 0, got ({b1}, {b2})")));
                }
                Ok(DeltaSampler::Beta(Beta::new(b1, b2).expect("validated")))
            }
            DeltaDistribution::Constant(d) if (0.0..=1.0).contains(&d) => Ok(DeltaSampler::Constant(d)),
            DeltaDistribution::Constant(d) => Err(Error::input(format!("delta {d} outside [0, 1]"))),
        }
    }
}

enum DeltaSampler {
    Beta(Beta<f64>),
    Constant(f64),
}

impl DeltaSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DeltaSampler::Beta(b) => b.sample(rng),
            DeltaSampler::Constant(d) => *d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixupConfig {
    pub delta: DeltaDistribution,
    pub quota_mode: QuotaMode,
}

impl Default for MixupConfig {
    fn default() -> Self {
        Self {
            delta: DeltaDistribution::Beta { b1: 1.0, b2: 4.0 },
            quota_mode: QuotaMode::Mean,
        }
    }
}

/// Where a synthesized node came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub anchor: usize,
    pub auxiliary: usize,
    pub delta: f64,
}

/// Nodes synthesized for one epoch. Synthesized node `m` gets id `N + m` in
/// the augmented graph; `edges` holds `(m, original_node)` attachments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisBatch {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub provenance: Vec<Provenance>,
}

impl SynthesisBatch {
    pub fn empty(feature_dim: usize) -> Self {
        Self {
            features: Array2::zeros((0, feature_dim)),
            labels: Vec::new(),
            edges: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Pretty JSON for inspection; includes provenance triples.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Synthesis counts per class: `max(0, target - count_c)` where the target is
/// the round-half-up mean or the maximum of `counts`.
pub fn compute_class_quota(counts: &[usize], mode: QuotaMode) -> Vec<usize> {
    if counts.is_empty() {
        return Vec::new();
    }
    let target = match mode {
        QuotaMode::Max => *counts.iter().max().unwrap(),
        QuotaMode::Mean => {
            let (sum, n) = (counts.iter().sum::<usize>(), counts.len());
            (2 * sum + n) / (2 * n)
        }
    };
    counts.iter().map(|&c| target.saturating_sub(c)).collect()
}

/// `δ·x_anc + (1-δ)·x_aux`.
pub fn mix_features(x_anc: ArrayView1<f64>, x_aux: ArrayView1<f64>, delta: f64) -> Result<Array1<f64>> {
    if x_anc.len() != x_aux.len() {
        return Err(Error::input(format!(
            "feature dimensions differ: {} vs {}",
            x_anc.len(),
            x_aux.len()
        )));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::input(format!("delta {delta} outside [0, 1]")));
    }
    Ok(x_anc.mapv(|a| a * delta) + x_aux.mapv(|b| b * (1.0 - delta)))
}

/// Repeated draws from a degree distribution, clamped to at least one edge.
#[derive(Debug, Clone)]
pub struct EdgeCountSampler {
    degrees: Vec<usize>,
    dist: Categorical,
}

impl EdgeCountSampler {
    pub fn new(pd: &DegreeDistribution) -> Self {
        let (degrees, probs): (Vec<usize>, Vec<f64>) = pd.iter().unzip();
        let dist = Categorical::new(&probs).expect("degree distribution has mass");
        Self { degrees, dist }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.degrees[self.dist.sample(rng)].max(1)
    }
}

/// One draw from `pd`, clamped to at least one.
pub fn sample_edge_count<R: Rng + ?Sized>(pd: &DegreeDistribution, rng: &mut R) -> usize {
    EdgeCountSampler::new(pd).sample(rng)
}

/// `min(n, support)` distinct nodes drawn sequentially without replacement
/// from `(node, weight)` pairs.
pub fn sample_synth_neighbors<R: Rng + ?Sized>(
    weights: &[(usize, f64)],
    n: usize,
    rng: &mut R,
) -> Vec<usize> {
    let w: Vec<f64> = weights.iter().map(|&(_, p)| p).collect();
    sample_without_replacement(&w, n, rng)
        .into_iter()
        .map(|i| weights[i].0)
        .collect()
}

/// Model signals that steer source-node selection.
#[derive(Debug, Clone, Copy)]
pub enum SourceSignals<'a> {
    /// No model output yet: uniform anchors, neighbor classes and auxiliaries.
    Uniform,
    Model {
        hardness: &'a HardnessVector,
        /// Previous-epoch logits on the original graph, indexed by node id.
        logits: &'a Array2<f64>,
        /// KNN receptive fields by node id (empty for non-training nodes).
        /// When present, auxiliaries are drawn uniformly from the anchor's
        /// other-label receptive field.
        knn_fields: Option<&'a [Vec<usize>]>,
    },
}

/// Per-run synthesis state that does not change across epochs: quotas,
/// training groups, edge-count sampler and anchor-local edge weights.
pub struct Synthesizer<'a> {
    graph: &'a Graph,
    train_by_class: Vec<Vec<usize>>,
    quotas: Vec<usize>,
    edge_counts: EdgeCountSampler,
    anchor_weights: HashMap<usize, Vec<(usize, f64)>>,
}

impl<'a> Synthesizer<'a> {
    pub fn new(
        graph: &'a Graph,
        split: &ImbalancedSplit,
        diffusion: &DiffusionMatrix,
        mode: QuotaMode,
    ) -> Self {
        let train_by_class = split.train_by_class(graph.labels());
        let quotas = compute_class_quota(split.class_counts_train(), mode);
        let anchor_weights = train_by_class
            .iter()
            .zip(&quotas)
            .filter(|(_, &q)| q > 0)
            .flat_map(|(members, _)| members.iter())
            .map(|&a| (a, one_hop_sampling_weights(diffusion, graph, a)))
            .collect();
        Self {
            graph,
            train_by_class,
            quotas,
            edge_counts: EdgeCountSampler::new(&graph.degree_distribution()),
            anchor_weights,
        }
    }

    pub fn quotas(&self) -> &[usize] {
        &self.quotas
    }

    pub fn total_quota(&self) -> usize {
        self.quotas.iter().sum()
    }

    /// Samples one batch. Consumes randomness only when some quota is positive.
    pub fn synthesize<R: Rng + ?Sized>(
        &self,
        signals: SourceSignals<'_>,
        hcfg: &HardnessConfig,
        mcfg: &MixupConfig,
        rng: &mut R,
    ) -> Result<SynthesisBatch> {
        let g = self.graph;
        let total = self.total_quota();
        if total == 0 {
            return Ok(SynthesisBatch::empty(g.feature_dim()));
        }
        let delta_sampler = mcfg.delta.sampler()?;
        let c = g.num_classes();
        let uniform_hardness;
        let hardness = match signals {
            SourceSignals::Model { hardness, .. } => hardness,
            SourceSignals::Uniform => {
                uniform_hardness = HardnessVector::uniform(g.num_nodes());
                &uniform_hardness
            }
        };

        let mut aux_tables: HashMap<(usize, usize), Categorical> = HashMap::new();
        let mut features = Array2::zeros((total, g.feature_dim()));
        let mut labels = Vec::with_capacity(total);
        let mut edges = Vec::new();
        let mut provenance = Vec::with_capacity(total);

        for (class, &quota) in self.quotas.iter().enumerate() {
            if quota == 0 {
                continue;
            }
            let members = &self.train_by_class[class];
            let anchors = anchor_distribution(hardness, members).expect("nonempty class");
            for _ in 0..quota {
                let anchor = members[anchors.sample(rng)];
                let auxiliary = self.pick_auxiliary(anchor, class, c, signals, hcfg, &mut aux_tables, rng);
                let (auxiliary, delta) = match auxiliary {
                    Some(aux) => (aux, delta_sampler.sample(rng)),
                    // Every candidate class was empty: duplicate the anchor.
                    None => (anchor, 1.0),
                };
                let m = labels.len();
                let mixed = mix_features(g.features().row(anchor), g.features().row(auxiliary), delta)?;
                features.row_mut(m).assign(&mixed);
                labels.push(class);
                let count = self.edge_counts.sample(rng);
                let weights = &self.anchor_weights[&anchor];
                edges.extend(sample_synth_neighbors(weights, count, rng).into_iter().map(|t| (m, t)));
                provenance.push(Provenance {
                    anchor,
                    auxiliary,
                    delta,
                });
            }
        }
        Ok(SynthesisBatch {
            features,
            labels,
            edges,
            provenance,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn pick_auxiliary<R: Rng + ?Sized>(
        &self,
        anchor: usize,
        anchor_class: usize,
        num_classes: usize,
        signals: SourceSignals<'_>,
        hcfg: &HardnessConfig,
        aux_tables: &mut HashMap<(usize, usize), Categorical>,
        rng: &mut R,
    ) -> Option<usize> {
        let labels = self.graph.labels();
        if let SourceSignals::Model { knn_fields: Some(fields), .. } = signals {
            let others: Vec<usize> = fields[anchor]
                .iter()
                .copied()
                .filter(|&j| labels[j] != anchor_class)
                .collect();
            if !others.is_empty() {
                return Some(others[rng.random_range(0..others.len())]);
            }
        }
        let mut excluded = vec![false; num_classes];
        excluded[anchor_class] = true;
        // One attempt per other class; each failure masks that class.
        for _ in 1..num_classes {
            let neighbor_class = match signals {
                SourceSignals::Model { logits, .. } => {
                    let row = logits.row(anchor).to_vec();
                    neighbor_class_distribution(&row, &excluded, hcfg.temperature)?.sample(rng)
                }
                SourceSignals::Uniform => {
                    let allowed: Vec<f64> = excluded.iter().map(|&e| if e { 0.0 } else { 1.0 }).collect();
                    Categorical::new(&allowed)?.sample(rng)
                }
            };
            let candidates = &self.train_by_class[neighbor_class];
            if candidates.is_empty() {
                excluded[neighbor_class] = true;
                continue;
            }
            let table = aux_tables
                .entry((neighbor_class, anchor_class))
                .or_insert_with(|| match signals {
                    SourceSignals::Model { logits, .. } => {
                        auxiliary_distribution(candidates, logits, anchor_class, hcfg.temperature)
                            .expect("nonempty candidates")
                    }
                    SourceSignals::Uniform => Categorical::uniform(candidates.len()).expect("nonempty"),
                });
            return Some(candidates[table.sample(rng)]);
        }
        None
    }
}

/// One SemiMixup batch for `split`. `logits` are the previous epoch's
/// original-graph logits; `None` selects the uniform epoch-0 behavior.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_batch<R: Rng + ?Sized>(
    g: &Graph,
    split: &ImbalancedSplit,
    dm: &DiffusionMatrix,
    hv: &HardnessVector,
    logits: Option<&Array2<f64>>,
    hcfg: &HardnessConfig,
    mcfg: &MixupConfig,
    rng: &mut R,
) -> Result<SynthesisBatch> {
    let synth = Synthesizer::new(g, split, dm, mcfg.quota_mode);
    let signals = match logits {
        Some(logits) => SourceSignals::Model {
            hardness: hv,
            logits,
            knn_fields: None,
        },
        None => SourceSignals::Uniform,
    };
    synth.synthesize(signals, hcfg, mcfg, rng)
}
