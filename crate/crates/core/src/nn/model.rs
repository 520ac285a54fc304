//! Two-layer GCN and mean-aggregator SAGE encoders with reverse-mode
//! gradients written out by hand.
//!
//! GCN: `H = ReLU(Â X W1)`, `Z = Â H W2`.
//! SAGE: `H = ReLU([X, M X] W1)`, `Z = [H, M H] W2`, where `M = D^{-1} A`
//! averages neighbors (zero rows for isolated nodes).

use ndarray::{s, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Topology;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backbone {
    Gcn,
    Sage,
}

/// Weights of a two-layer encoder. For SAGE the first `d` (resp. `h`) rows of
/// `w1` (resp. `w2`) act on the node itself and the rest on the neighbor mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
}

impl ModelParams {
    /// Glorot-uniform initialization.
    pub fn init<R: Rng + ?Sized>(
        backbone: Backbone,
        in_dim: usize,
        hidden_dim: usize,
        num_classes: usize,
        rng: &mut R,
    ) -> Self {
        let fan = match backbone {
            Backbone::Gcn => 1,
            Backbone::Sage => 2,
        };
        let mut glorot = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
        };
        let w1 = glorot(fan * in_dim, hidden_dim);
        let w2 = glorot(fan * hidden_dim, num_classes);
        Self { w1, w2 }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            w1: Array2::zeros(self.w1.raw_dim()),
            w2: Array2::zeros(self.w2.raw_dim()),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.w1.iter().chain(self.w2.iter()).all(|v| v.is_finite())
    }

    pub fn tensors(&self) -> [&Array2<f64>; 2] {
        [&self.w1, &self.w2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Array2<f64>; 2] {
        [&mut self.w1, &mut self.w2]
    }
}

/// Propagation operator of a backbone over a fixed topology.
#[derive(Debug, Clone)]
pub struct Propagator {
    backbone: Backbone,
    op: SparseMatrix,
    /// Transpose of `op`; `None` when `op` is symmetric.
    op_t: Option<SparseMatrix>,
}

impl Propagator {
    pub fn new(backbone: Backbone, topology: &Topology) -> Self {
        match backbone {
            Backbone::Gcn => Self {
                backbone,
                op: topology.normalized_adjacency().into_matrix(),
                op_t: None,
            },
            Backbone::Sage => {
                let op = topology.mean_aggregator();
                let op_t = Some(op.transpose());
                Self { backbone, op, op_t }
            }
        }
    }

    pub fn backbone(&self) -> Backbone {
        self.backbone
    }

    pub fn num_nodes(&self) -> usize {
        self.op.rows()
    }

    fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        self.op.matmul(x)
    }

    fn apply_t(&self, x: &Array2<f64>) -> Array2<f64> {
        self.op_t.as_ref().unwrap_or(&self.op).matmul(x)
    }
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// First-layer pre-activations.
    pub hidden_pre: Array2<f64>,
    /// First-layer embeddings `H`.
    pub hidden: Array2<f64>,
    pub logits: Array2<f64>,
    /// `M X` (SAGE only).
    input_mean: Option<Array2<f64>>,
    /// `M H` (SAGE only).
    hidden_mean: Option<Array2<f64>>,
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

pub fn forward(prop: &Propagator, x: &Array2<f64>, params: &ModelParams) -> ForwardPass {
    match prop.backbone {
        Backbone::Gcn => {
            let hidden_pre = prop.apply(&x.dot(&params.w1));
            let hidden = relu(&hidden_pre);
            let logits = prop.apply(&hidden.dot(&params.w2));
            ForwardPass {
                hidden_pre,
                hidden,
                logits,
                input_mean: None,
                hidden_mean: None,
            }
        }
        Backbone::Sage => {
            let d = x.ncols();
            let h = params.hidden_dim();
            let input_mean = prop.apply(x);
            let hidden_pre = x.dot(&params.w1.slice(s![..d, ..])) + input_mean.dot(&params.w1.slice(s![d.., ..]));
            let hidden = relu(&hidden_pre);
            let hidden_mean = prop.apply(&hidden);
            let logits = hidden.dot(&params.w2.slice(s![..h, ..])) + hidden_mean.dot(&params.w2.slice(s![h.., ..]));
            ForwardPass {
                hidden_pre,
                hidden,
                logits,
                input_mean: Some(input_mean),
                hidden_mean: Some(hidden_mean),
            }
        }
    }
}

/// Parameter gradients given `dL/dZ`.
pub fn backward(
    prop: &Propagator,
    x: &Array2<f64>,
    params: &ModelParams,
    fp: &ForwardPass,
    dlogits: &Array2<f64>,
) -> ModelParams {
    let relu_mask = |grad: Array2<f64>| {
        let mut g = grad;
        g.zip_mut_with(&fp.hidden_pre, |g, &pre| {
            if pre <= 0.0 {
                *g = 0.0;
            }
        });
        g
    };
    match prop.backbone {
        Backbone::Gcn => {
            let d_hw2 = prop.apply_t(dlogits);
            let w2 = fp.hidden.t().dot(&d_hw2);
            let d_hidden_pre = relu_mask(d_hw2.dot(&params.w2.t()));
            let d_xw1 = prop.apply_t(&d_hidden_pre);
            let w1 = x.t().dot(&d_xw1);
            ModelParams { w1, w2 }
        }
        Backbone::Sage => {
            let h = params.hidden_dim();
            let input_mean = fp.input_mean.as_ref().expect("sage forward");
            let hidden_mean = fp.hidden_mean.as_ref().expect("sage forward");
            let (w2_self, w2_nbr) = (params.w2.slice(s![..h, ..]), params.w2.slice(s![h.., ..]));
            let w2 = ndarray::concatenate(
                Axis(0),
                &[fp.hidden.t().dot(dlogits).view(), hidden_mean.t().dot(dlogits).view()],
            )
            .expect("matching widths");
            let d_hidden = dlogits.dot(&w2_self.t()) + prop.apply_t(&dlogits.dot(&w2_nbr.t()));
            let d_hidden_pre = relu_mask(d_hidden);
            let w1 = ndarray::concatenate(
                Axis(0),
                &[x.t().dot(&d_hidden_pre).view(), input_mean.t().dot(&d_hidden_pre).view()],
            )
            .expect("matching widths");
            ModelParams { w1, w2 }
        }
    }
}

/// Logits of a GCN over `topology`.
pub fn gcn_forward(topology: &Topology, x: &Array2<f64>, params: &ModelParams) -> Array2<f64> {
    forward(&Propagator::new(Backbone::Gcn, topology), x, params).logits
}

/// Logits of a mean-aggregator SAGE encoder over `topology`.
pub fn sage_forward(topology: &Topology, x: &Array2<f64>, params: &ModelParams) -> Array2<f64> {
    forward(&Propagator::new(Backbone::Sage, topology), x, params).logits
}

/// Weighted mean cross-entropy over `(node, class)` targets and its gradient
/// with respect to the logits. Without class weights every target counts once.
pub fn cross_entropy(
    logits: &Array2<f64>,
    targets: &[(usize, usize)],
    class_weights: Option<&[f64]>,
) -> (f64, Array2<f64>) {
    assert!(!targets.is_empty(), "cross-entropy needs at least one target");
    let weight = |c: usize| class_weights.map_or(1.0, |w| w[c]);
    let norm: f64 = targets.iter().map(|&(_, c)| weight(c)).sum();
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut loss = 0.0;
    for &(i, c) in targets {
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
        let w = weight(c) / norm;
        loss += w * (lse - row[c]);
        let mut g = grad.row_mut(i);
        for (k, gk) in g.iter_mut().enumerate() {
            let p = (row[k] - lse).exp();
            *gk += w * (p - if k == c { 1.0 } else { 0.0 });
        }
    }
    (loss, grad)
}

/// Cross-entropy loss of the encoder on `targets` and its parameter gradients.
pub fn loss_and_gradients(
    prop: &Propagator,
    x: &Array2<f64>,
    params: &ModelParams,
    targets: &[(usize, usize)],
    class_weights: Option<&[f64]>,
) -> (f64, ModelParams, ForwardPass) {
    let fp = forward(prop, x, params);
    let (loss, dlogits) = cross_entropy(&fp.logits, targets, class_weights);
    let grads = backward(prop, x, params, &fp, &dlogits);
    (loss, grads, fp)
}
