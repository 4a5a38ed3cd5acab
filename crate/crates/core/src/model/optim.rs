//! Adam with bias correction.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates for a fixed list of parameter tensors ("slots").
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    t: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(config: AdamConfig, slot_sizes: &[usize]) -> Self {
        Adam {
            config,
            t: 0,
            m: slot_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: slot_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Advances the shared step counter; call once before updating the slots.
    pub fn begin_step(&mut self) {
        self.t += 1;
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn update(&mut self, slot: usize, params: &mut [f64], grads: &[f64]) {
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        assert!(self.t > 0, "begin_step must precede update");
        assert_eq!(params.len(), self.m[slot].len());
        assert_eq!(grads.len(), params.len());
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        let (m, v) = (&mut self.m[slot], &mut self.v[slot]);
        for k in 0..params.len() {
            let g = grads[k];
            m[k] = beta1 * m[k] + (1.0 - beta1) * g;
            v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
            let m_hat = m[k] / c1;
            let v_hat = v[k] / c2;
            params[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}
