use serde::{Deserialize, Serialize};

use super::array::Param;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Global gradient-norm ceiling; non-positive disables clipping.
    pub clip_norm: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 3e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 1e-5, clip_norm: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig, params: &[&Param<T>]) -> Self {
        let zeros = || params.iter().map(|p| vec![T::zero(); p.len()]).collect();
        AdamState { config, step: 0, m: zeros(), v: zeros() }
    }
}

/// Global L2 norm over every gradient buffer.
pub fn grad_norm<T: Scalar>(params: &[&mut Param<T>]) -> T {
    params.iter().map(|p| p.grad.sum_squares()).sum::<T>().sqrt()
}

/// Clips the global gradient norm, then applies one bias-corrected Adam
/// update with decoupled weight decay. Returns the norm before clipping.
pub fn adam_step<T: Scalar>(params: &mut [&mut Param<T>], adam: &mut AdamState<T>) -> T {
    assert_eq!(params.len(), adam.m.len(), "optimizer/parameter count");
    let cfg = adam.config;
    let norm = grad_norm(params);
    let clip = if cfg.clip_norm > 0.0 && norm.as_f64() > cfg.clip_norm { T::of(cfg.clip_norm) / norm } else { T::one() };

    adam.step += 1;
    let t = adam.step as i32;
    let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
    let c1 = T::one() - b1.powi(t);
    let c2 = T::one() - b2.powi(t);
    let (lr, eps, wd) = (T::of(cfg.lr), T::of(cfg.eps), T::of(cfg.weight_decay));

    for ((p, m), v) in params.iter_mut().zip(&mut adam.m).zip(&mut adam.v) {
        assert_eq!(m.len(), p.len(), "moment shape for {}", p.name);
        let Param { value, grad, .. } = &mut **p;
        for (((w, &g), m), v) in value.as_mut_slice().iter_mut().zip(grad.as_slice()).zip(m.iter_mut()).zip(v.iter_mut()) {
            let g = g * clip;
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *w -= lr * (m_hat / (v_hat.sqrt() + eps) + wd * *w);
        }
    }
    norm
}
