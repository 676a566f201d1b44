//! Adam with L2 regularization coupled into the gradient:
//! g' = g + l2 * theta, then the usual bias-corrected moment updates.

use super::TrainError;
use crate::model::ModelParams;
use crate::Tensor;

/// First and second moment accumulators, one tensor per parameter in
/// canonical order, plus the shared step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    t: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> AdamState {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

/// One update: theta -= lr * m_hat / (sqrt(v_hat) + eps), with
/// m_hat = m / (1 - beta1^t) and v_hat = v / (1 - beta2^t). The step
/// counter advances once per call, shared by every parameter.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &[Tensor],
    state: &mut AdamState,
    lr: f64,
    l2: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<(), TrainError> {
    if grads.len() != state.m.len() {
        return Err(TrainError::BadConfig(format!(
            "{} gradients for {} optimizer slots",
            grads.len(),
            state.m.len()
        )));
    }
    state.t += 1;
    let bc1 = 1.0 - beta1.powi(state.t as i32);
    let bc2 = 1.0 - beta2.powi(state.t as i32);

    let mut i = 0usize;
    let mut bad: Option<String> = None;
    params.visit_mut(|name, theta| {
        if theta.shape() != grads[i].shape() {
            if bad.is_none() {
                bad = Some(name);
            }
            i += 1;
            return;
        }
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        let g_raw = grads[i].data();
        for (j, t) in theta.data_mut().iter_mut().enumerate() {
            let g = g_raw[j] + l2 * *t;
            m[j] = beta1 * m[j] + (1.0 - beta1) * g;
            v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            *t -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        i += 1;
    });
    match bad {
        Some(name) => Err(TrainError::BadConfig(format!(
            "gradient shape mismatch at parameter {name}"
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_params, ModelConfig, ModelKind};

    fn scalar_ish_params() -> ModelParams {
        // Smallest legal model: every tensor tiny so single entries are
        // easy to hand-compute.
        let config = ModelConfig {
            kind: ModelKind::PlainBigru,
            hidden: 1,
            edge_dim: 1,
            ..ModelConfig::default()
        };
        let mut p = init_params(&config, 1, 1, 1, 0);
        p.visit_mut(|_, t| {
            for x in t.data_mut() {
                *x = 1.0;
            }
        });
        p
    }

    fn grads_of(params: &ModelParams, value: f64) -> Vec<Tensor> {
        let mut out = params.zeros_like();
        for t in &mut out {
            for x in t.data_mut() {
                *x = value;
            }
        }
        out
    }

    #[test]
    fn first_step_matches_hand_computation() {
        // theta = 1, g = 0.5, lr = 0.1, no L2:
        // m = 0.05, v = 0.00025, m_hat = 0.5, v_hat = 0.25,
        // theta' = 1 - 0.1 * 0.5 / (0.5 + 1e-8) ~= 0.900000002.
        let mut params = scalar_ish_params();
        let grads = grads_of(&params, 0.5);
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &grads, &mut state, 0.1, 0.0, 0.9, 0.999, 1e-8).unwrap();
        let expected = 1.0 - 0.1 * (0.5 / (0.5 + 1e-8));
        params.visit(|name, t| {
            for x in t.data() {
                assert!((x - expected).abs() < 1e-15, "{name}: {x} vs {expected}");
                assert!((x - 0.900000002).abs() < 1e-9, "{name}");
            }
        });
        assert_eq!(state.steps(), 1);
    }

    #[test]
    fn l2_couples_into_the_gradient() {
        // Zero raw gradient, l2 = 0.1, theta = 1: effective g = 0.1, so the
        // (bias-corrected, eps-saturated) step shrinks theta by almost
        // exactly lr.
        let mut params = scalar_ish_params();
        let grads = grads_of(&params, 0.0);
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &grads, &mut state, 0.01, 0.1, 0.9, 0.999, 1e-8).unwrap();
        let expected = 1.0 - 0.01 * (0.1 / (0.1 + 1e-8));
        params.visit(|_, t| {
            for x in t.data() {
                assert!((x - expected).abs() < 1e-15);
            }
        });
    }

    #[test]
    fn multi_step_bias_correction_matches_reference_loop() {
        let mut params = scalar_ish_params();
        let mut state = AdamState::new(&params);
        let (beta1, beta2, eps, lr) = (0.9, 0.999, 1e-8, 0.05);
        let gs = [0.3, -0.7, 0.1, 0.9];

        // Independent scalar reference.
        let (mut theta, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
        for (step, g) in gs.iter().enumerate() {
            let t = (step + 1) as i32;
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g * g;
            theta -= lr * (m / (1.0 - beta1.powi(t))) / ((v / (1.0 - beta2.powi(t))).sqrt() + eps);
        }

        for g in gs {
            let grads = grads_of(&params, g);
            adam_step(&mut params, &grads, &mut state, lr, 0.0, beta1, beta2, eps).unwrap();
        }
        params.visit(|name, t| {
            for x in t.data() {
                assert!((x - theta).abs() < 1e-14, "{name}: {x} vs {theta}");
            }
        });
        assert_eq!(state.steps(), 4);
    }

    #[test]
    fn gradient_inventory_mismatch_is_rejected() {
        let mut params = scalar_ish_params();
        let grads = grads_of(&params, 0.1);
        let mut state = AdamState::new(&params);
        assert!(matches!(
            adam_step(&mut params, &grads[..3], &mut state, 0.1, 0.0, 0.9, 0.999, 1e-8),
            Err(TrainError::BadConfig(_))
        ));
    }
}
