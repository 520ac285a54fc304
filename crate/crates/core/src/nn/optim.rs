use super::model::ModelParams;

/// Adam with L2 weight decay folded into the gradient.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
    step: i32,
    m: ModelParams,
    v: ModelParams,
}

impl Adam {
    pub fn new(params: &ModelParams, lr: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step);
        let bc2 = 1.0 - self.beta2.powi(self.step);
        let (b1, b2, eps, lr, wd) = (self.beta1, self.beta2, self.eps, self.lr, self.weight_decay);
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            ndarray::Zip::from(p)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|p, &g, m, v| {
                    let g = g + wd * *p;
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p -= lr * m_hat / (v_hat.sqrt() + eps);
                });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = ModelParams {
            w1: array![[1.0, -1.0]],
            w2: array![[0.0]],
        };
        let g = ModelParams {
            w1: array![[0.5, -2.0]],
            w2: array![[0.0]],
        };
        let mut opt = Adam::new(&p, 0.01, 0.0);
        opt.step(&mut p, &g);
        assert!((p.w1[[0, 0]] - 0.99).abs() < 1e-9);
        assert!((p.w1[[0, 1]] + 0.99).abs() < 1e-9);
        assert_eq!(p.w2[[0, 0]], 0.0);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut p = ModelParams {
            w1: array![[3.0]],
            w2: array![[-2.0]],
        };
        let mut opt = Adam::new(&p, 0.05, 0.0);
        for _ in 0..2000 {
            let g = ModelParams {
                w1: p.w1.mapv(|w| 2.0 * (w - 1.0)),
                w2: p.w2.mapv(|w| 2.0 * w),
            };
            opt.step(&mut p, &g);
        }
        assert!((p.w1[[0, 0]] - 1.0).abs() < 1e-3);
        assert!(p.w2[[0, 0]].abs() < 1e-3);
    }
}
