//! Two-layer GNN encoders, the optimizer and the training loop.

pub mod model;
pub mod optim;
pub mod train;

pub use model::{
    backward, cross_entropy, forward, gcn_forward, loss_and_gradients, sage_forward, Backbone,
    ForwardPass, ModelParams, Propagator,
};
pub use optim::Adam;
pub use train::{
    predict, reweight_class_weights, train, train_with_diffusion, EpochState, Mode, Timing,
    TraceRecord, TrainConfig, TrainOutcome,
};
