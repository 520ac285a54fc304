//! The training loop: Vanilla, Upsample, Reweight and per-epoch SemiMixup
//! synthesis, with early stopping on validation balanced accuracy.

use std::time::{Duration, Instant};

use ndarray::{concatenate, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{forward, loss_and_gradients, Backbone, ModelParams, Propagator};
use super::optim::Adam;
use crate::data::{upsample_split, ImbalancedSplit};
use crate::diffusion::{compute_diffusion, DiffusionConfig, DiffusionMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hardness::{confidence_hardness, knn_hardness, knn_receptive_fields, HardnessConfig, HardnessMetric};
use crate::metrics::{argmax, evaluate};
use crate::synthesis::{MixupConfig, SourceSignals, SynthesisBatch, Synthesizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Vanilla,
    /// Duplicate minor training nodes with their edges before training.
    Upsample,
    /// Inverse-frequency class weights in the loss.
    Reweight,
    /// Per-epoch SemiMixup synthesis of harder minor samples.
    #[serde(rename = "graphsha")]
    GraphSha,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Vanilla => "vanilla",
            Mode::Upsample => "upsample",
            Mode::Reweight => "reweight",
            Mode::GraphSha => "graphsha",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub backbone: Backbone,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    /// Epochs without a validation bAcc improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub mode: Mode,
    pub hardness: HardnessConfig,
    pub mixup: MixupConfig,
    pub diffusion: DiffusionConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            backbone: Backbone::Gcn,
            hidden_dim: 64,
            learning_rate: 0.01,
            weight_decay: 5e-4,
            max_epochs: 2000,
            patience: 200,
            seed: 0,
            mode: Mode::Vanilla,
            hardness: HardnessConfig::default(),
            mixup: MixupConfig::default(),
            diffusion: DiffusionConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.max_epochs == 0 || self.hidden_dim == 0 {
            return Err(Error::input("learning_rate > 0, max_epochs >= 1 and hidden_dim >= 1 required"));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::input("weight_decay must be >= 0"));
        }
        self.hardness.validate()?;
        self.diffusion.validate()
    }
}

/// One line of the training trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: usize,
    pub loss: f64,
    pub val_bacc: f64,
    pub synthesized: usize,
}

#[derive(Debug, Clone)]
pub struct EpochState {
    /// Original-graph logits after the latest update.
    pub cached_logits: Option<Array2<f64>>,
    /// Original-graph first-layer embeddings after the latest update.
    pub cached_hidden: Option<Array2<f64>>,
    pub epoch: usize,
    pub best_val_bacc: f64,
    pub best_epoch: usize,
}

/// Wall-clock split of a run, kept out of the trace so traces stay reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct Timing {
    pub synthesis: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best validation epoch.
    pub params: ModelParams,
    pub state: EpochState,
    pub trace: Vec<TraceRecord>,
    /// Predictions of the best parameters on the first `N` (original) nodes.
    pub predictions: Vec<usize>,
    pub timing: Timing,
}

fn predictions(logits: &Array2<f64>, n: usize) -> Vec<usize> {
    (0..n)
        .map(|i| argmax(logits.row(i).as_slice().expect("standard layout")))
        .collect()
}

/// Argmax predictions of `params` on `g`.
pub fn predict(backbone: Backbone, g: &Graph, params: &ModelParams) -> Vec<usize> {
    let prop = Propagator::new(backbone, g.topology());
    predictions(&forward(&prop, g.features(), params).logits, g.num_nodes())
}

/// Inverse-frequency weights `max_count / count_c`.
pub fn reweight_class_weights(counts: &[usize]) -> Vec<f64> {
    let max = *counts.iter().max().unwrap_or(&1) as f64;
    counts.iter().map(|&c| max / c.max(1) as f64).collect()
}

/// Trains on `g` with `split`. GraphSHA mode computes the diffusion matrix
/// itself; use [`train_with_diffusion`] to share one across runs.
pub fn train(g: &Graph, split: &ImbalancedSplit, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_diffusion(g, split, cfg, None)
}

pub fn train_with_diffusion(
    g: &Graph,
    split: &ImbalancedSplit,
    cfg: &TrainConfig,
    diffusion: Option<&DiffusionMatrix>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let n_original = g.num_nodes();
    let upsampled;
    let (graph, split) = match cfg.mode {
        Mode::Upsample => {
            upsampled = upsample_split(g, split, cfg.mixup.quota_mode)?;
            (&upsampled.0, &upsampled.1)
        }
        _ => (g, split),
    };
    let owned_diffusion;
    let synthesizer = match cfg.mode {
        Mode::GraphSha => {
            let dm = match diffusion {
                Some(dm) => dm,
                None => {
                    owned_diffusion = compute_diffusion(graph, &cfg.diffusion)?;
                    &owned_diffusion
                }
            };
            Some(Synthesizer::new(graph, split, dm, cfg.mixup.quota_mode))
        }
        _ => None,
    };
    let class_weights = match cfg.mode {
        Mode::Reweight => Some(reweight_class_weights(split.class_counts_train())),
        _ => None,
    };

    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut synth_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    synth_rng.set_stream(1);

    let labels = graph.labels();
    let base_prop = Propagator::new(cfg.backbone, graph.topology());
    // Upsampled duplicates are a training device only: validation, caches and
    // predictions always use the original graph.
    let eval_prop = match cfg.mode {
        Mode::Upsample => Propagator::new(cfg.backbone, g.topology()),
        _ => base_prop.clone(),
    };
    let base_targets: Vec<(usize, usize)> = split.train().iter().map(|&i| (i, labels[i])).collect();
    let val_mask: &[usize] = if split.val().is_empty() { split.train() } else { split.val() };

    let mut params = ModelParams::init(
        cfg.backbone,
        graph.feature_dim(),
        cfg.hidden_dim,
        graph.num_classes(),
        &mut init_rng,
    );
    let mut opt = Adam::new(&params, cfg.learning_rate, cfg.weight_decay);
    let mut state = EpochState {
        cached_logits: None,
        cached_hidden: None,
        epoch: 0,
        best_val_bacc: f64::NEG_INFINITY,
        best_epoch: 0,
    };
    let mut best_params = params.clone();
    let mut best_logits: Option<Array2<f64>> = None;
    let mut trace = Vec::new();
    let mut timing = Timing::default();

    for epoch in 0..cfg.max_epochs {
        state.epoch = epoch;
        let batch = match &synthesizer {
            Some(synth) => {
                let t0 = Instant::now();
                let batch = synthesize_epoch(synth, graph, split, &state, cfg, &mut synth_rng)?;
                timing.synthesis += t0.elapsed();
                batch
            }
            None => SynthesisBatch::empty(graph.feature_dim()),
        };

        let (loss, grads) = if batch.is_empty() {
            let (loss, grads, _) =
                loss_and_gradients(&base_prop, graph.features(), &params, &base_targets, class_weights.as_deref());
            (loss, grads)
        } else {
            let topology = graph.topology().with_attachments(batch.len(), &batch.edges);
            let prop = Propagator::new(cfg.backbone, &topology);
            let features = concatenate(Axis(0), &[graph.features().view(), batch.features.view()])
                .expect("same feature width");
            let n = graph.num_nodes();
            let mut targets = base_targets.clone();
            targets.extend(batch.labels.iter().enumerate().map(|(m, &y)| (n + m, y)));
            let (loss, grads, _) =
                loss_and_gradients(&prop, &features, &params, &targets, class_weights.as_deref());
            (loss, grads)
        };
        if !loss.is_finite() || !grads.is_finite() {
            return Err(Error::Numeric {
                epoch,
                message: format!("loss {loss}, trace so far: {} epochs", trace.len()),
            });
        }
        opt.step(&mut params, &grads);

        let fp = forward(&eval_prop, g.features(), &params);
        if fp.logits.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numeric {
                epoch,
                message: "non-finite logits after update".into(),
            });
        }
        let preds = predictions(&fp.logits, n_original);
        let val_bacc = evaluate(&preds, labels, val_mask, graph.num_classes()).balanced_accuracy;
        trace.push(TraceRecord {
            epoch,
            loss,
            val_bacc,
            synthesized: batch.len(),
        });
        if val_bacc > state.best_val_bacc {
            state.best_val_bacc = val_bacc;
            state.best_epoch = epoch;
            best_params = params.clone();
            best_logits = Some(fp.logits.clone());
        }
        state.cached_logits = Some(fp.logits);
        state.cached_hidden = Some(fp.hidden);
        if epoch - state.best_epoch >= cfg.patience {
            break;
        }
    }
    timing.total = started.elapsed();
    let predictions = predictions(&best_logits.expect("at least one epoch"), n_original);
    Ok(TrainOutcome {
        params: best_params,
        state,
        trace,
        predictions,
        timing,
    })
}

/// Hardness and sampling signals from the previous epoch, then one batch.
fn synthesize_epoch(
    synth: &Synthesizer<'_>,
    graph: &Graph,
    split: &ImbalancedSplit,
    state: &EpochState,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SynthesisBatch> {
    if synth.total_quota() == 0 {
        return Ok(SynthesisBatch::empty(graph.feature_dim()));
    }
    let (Some(logits), Some(hidden)) = (&state.cached_logits, &state.cached_hidden) else {
        return synth.synthesize(SourceSignals::Uniform, &cfg.hardness, &cfg.mixup, rng);
    };
    match cfg.hardness.metric {
        HardnessMetric::Confidence => {
            let hardness = confidence_hardness(logits, graph.labels(), &cfg.hardness)?;
            let signals = SourceSignals::Model {
                hardness: &hardness,
                logits,
                knn_fields: None,
            };
            synth.synthesize(signals, &cfg.hardness, &cfg.mixup, rng)
        }
        HardnessMetric::Knn => {
            let hardness = knn_hardness(hidden, graph.labels(), split.train(), &cfg.hardness)?;
            let fields = knn_receptive_fields(hidden, split.train(), cfg.hardness.knn_k)?;
            let mut by_node = vec![Vec::new(); graph.num_nodes()];
            for (&i, field) in split.train().iter().zip(fields) {
                by_node[i] = field;
            }
            let signals = SourceSignals::Model {
                hardness: &hardness,
                logits,
                knn_fields: Some(&by_node),
            };
            synth.synthesize(signals, &cfg.hardness, &cfg.mixup, rng)
        }
    }
}
