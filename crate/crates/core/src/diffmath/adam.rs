//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;

/// Per-parameter Adam state: moment estimates and step counter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub lr: f64,
}

impl AdamState {
    pub fn new(numel: usize, lr: f64) -> Self {
        AdamState {
            m: vec![0.0; numel],
            v: vec![0.0; numel],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            lr,
        }
    }
}

/// One Adam update of `params` in place. Aborts without touching any state
/// when the gradient is non-finite.
pub fn adam_step(params: &mut Tensor, grad: &Tensor, state: &mut AdamState) -> Result<()> {
    if params.shape != grad.shape {
        return Err(Error::config(format!(
            "adam_step shape mismatch: params {:?} vs grad {:?}",
            params.shape, grad.shape
        )));
    }
    if params.numel() != state.m.len() {
        return Err(Error::config("adam_step state sized for a different tensor"));
    }
    if !grad.all_finite() {
        return Err(Error::numeric(format!(
            "non-finite gradient at step {}; aborting update",
            state.t + 1
        )));
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for ((p, &g), (m, v)) in params
        .data
        .iter_mut()
        .zip(&grad.data)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= state.lr * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut p = Tensor::new(vec![3], vec![1.0, -2.0, 0.5]).unwrap();
        let g = Tensor::zeros(vec![3]);
        let mut st = AdamState::new(3, 0.01);
        adam_step(&mut p, &g, &mut st).unwrap();
        assert_eq!(p.data, vec![1.0, -2.0, 0.5]);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn first_step_moves_by_roughly_lr_times_sign() {
        // With m = v = 0 before the step, m_hat/sqrt(v_hat) = sign(g) exactly,
        // so the update magnitude is lr up to the epsilon stabilizer.
        let lr = 0.01;
        for &g0 in &[3.7, -0.002, 120.0] {
            let mut p = Tensor::new(vec![1], vec![0.0]).unwrap();
            let g = Tensor::new(vec![1], vec![g0]).unwrap();
            let mut st = AdamState::new(1, lr);
            adam_step(&mut p, &g, &mut st).unwrap();
            let expected = -lr * g0.signum();
            assert!(
                (p.data[0] - expected).abs() < 1e-6,
                "g0={g0}: got {}, expected ~{expected}",
                p.data[0]
            );
        }
    }

    #[test]
    fn two_steps_match_hand_unrolled_recurrence() {
        let (lr, b1, b2, eps) = (0.05, 0.9, 0.999, 1e-8);
        let g0 = -1.3;
        let mut p = Tensor::new(vec![1], vec![2.0]).unwrap();
        let g = Tensor::new(vec![1], vec![g0]).unwrap();
        let mut st = AdamState::new(1, lr);
        adam_step(&mut p, &g, &mut st).unwrap();
        adam_step(&mut p, &g, &mut st).unwrap();

        // Hand-unrolled: constant gradient for two steps.
        let mut expected = 2.0;
        let mut m = 0.0;
        let mut v = 0.0;
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * g0;
            v = b2 * v + (1.0 - b2) * g0 * g0;
            let m_hat = m / (1.0 - b1f(b1, t));
            let v_hat = v / (1.0 - b1f(b2, t));
            expected -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        assert!((p.data[0] - expected).abs() < 1e-15);

        fn b1f(b: f64, t: i32) -> f64 {
            b.powi(t)
        }
    }

    #[test]
    fn non_finite_gradient_aborts_step() {
        let mut p = Tensor::new(vec![1], vec![1.0]).unwrap();
        let g = Tensor::new(vec![1], vec![f64::NAN]).unwrap();
        let mut st = AdamState::new(1, 0.01);
        assert!(adam_step(&mut p, &g, &mut st).is_err());
        assert_eq!(p.data[0], 1.0);
        assert_eq!(st.t, 0);
    }

    #[test]
    fn second_moment_stays_non_negative() {
        let mut p = Tensor::new(vec![2], vec![0.0, 0.0]).unwrap();
        let mut st = AdamState::new(2, 0.1);
        for i in 0..30 {
            let g = Tensor::new(vec![2], vec![(-1.0f64).powi(i), 0.3 * i as f64]).unwrap();
            adam_step(&mut p, &g, &mut st).unwrap();
            assert!(st.v.iter().all(|v| *v >= 0.0));
            assert_eq!(st.t, (i + 1) as u64);
        }
    }
}
