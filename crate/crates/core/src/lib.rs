//! Hardness-guided synthesis of minor-class nodes for class-imbalanced node
//! classification.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] — immutable CSR graphs, degree statistics and the symmetric
//!   normalized adjacency used by GCN.
//! * [`data`] — container I/O, stochastic block model generation and the
//!   long-tailed / step imbalanced splits.
//! * [`diffusion`] — PPR and heat-kernel diffusion with top-K sparsification.
//! * [`hardness`] — confidence and KNN node hardness plus the three
//!   multinomial samplings that pick anchor, neighbor class and auxiliary.
//! * [`synthesis`] — SemiMixup: mixed features, degree-matched edge counts and
//!   diffusion-weighted 1-hop attachments.
//! * [`nn`] — two-layer GCN / SAGE encoders with hand-written gradients and the
//!   per-epoch training loop, including the Vanilla / Upsample / Reweight
//!   baselines.
//! * [`metrics`] — Acc, bAcc, macro-F1 and the misclassified-minor diagnostic.
//! * [`experiment`] — multi-seed experiment runner and sweeps driven by a
//!   flat config file.

pub mod data;
pub mod diffusion;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod hardness;
pub mod metrics;
pub mod nn;
pub mod sampling;
pub mod sparse;
pub mod synthesis;

pub use data::{ImbalancedSplit, SbmSpec};
pub use diffusion::{DiffusionConfig, DiffusionKind, DiffusionMatrix};
pub use error::{Error, Result};
pub use experiment::{ExperimentReport, ExperimentSpec, Method};
pub use graph::{DegreeDistribution, Graph, Topology};
pub use hardness::{HardnessConfig, HardnessMetric, HardnessVector, SourcePair};
pub use metrics::MetricsReport;
pub use nn::{Backbone, ModelParams, Mode, TrainConfig};
pub use synthesis::{DeltaDistribution, MixupConfig, QuotaMode, SynthesisBatch};
