//! Embedding, LSTM and MLP building blocks with hand-written backward passes.

use rand::Rng;

use super::array::{Param, ValueArray};
use crate::codec::Step;
use crate::Scalar;

#[inline]
pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

fn init_bound(fan_in: usize) -> f64 {
    1.0 / (fan_in.max(1) as f64).sqrt()
}

/// Inverted-dropout mask; `None` when dropout is inactive.
pub(crate) fn dropout_mask<T: Scalar, R: Rng>(len: usize, p: f64, rng: Option<&mut R>) -> Option<Vec<T>> {
    let rng = rng?;
    if p <= 0.0 {
        return None;
    }
    let keep = T::of(1.0 / (1.0 - p));
    Some((0..len).map(|_| if rng.gen::<f64>() < p { T::zero() } else { keep }).collect())
}

#[inline]
pub(crate) fn apply_mask<T: Scalar>(x: &mut [T], mask: &Option<Vec<T>>) {
    if let Some(m) = mask {
        x.iter_mut().zip(m).for_each(|(a, &b)| *a *= b);
    }
}

/// Linear map from the concatenated one-hot step to a dense embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMap<T> {
    pub weight: Param<T>,
    pub bias: Param<T>,
    /// Block offsets of the five components inside the one-hot input.
    pub offsets: [usize; 5],
}

impl<T: Scalar> EmbeddingMap<T> {
    pub fn new<R: Rng>(k: usize, dim: usize, offsets: [usize; 5], rng: &mut R) -> Self {
        let bound = init_bound(k);
        EmbeddingMap {
            weight: Param::new("embedding.weight", ValueArray::uniform(dim, k, bound, rng)),
            bias: Param::new("embedding.bias", ValueArray::vector(dim)),
            offsets,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.value.cols()
    }

    pub fn dim(&self) -> usize {
        self.weight.value.rows()
    }

    fn columns(&self, step: &Step) -> [usize; 5] {
        std::array::from_fn(|c| self.offsets[c] + step[c])
    }

    /// `None` is the start token, the all-zeros vector.
    pub fn forward(&self, step: Option<&Step>) -> Vec<T> {
        let mut out = self.bias.value.as_slice().to_vec();
        if let Some(step) = step {
            let w = &self.weight.value;
            for col in self.columns(step) {
                for (r, o) in out.iter_mut().enumerate() {
                    *o += w.as_slice()[r * w.cols() + col];
                }
            }
        }
        out
    }

    pub fn backward(&mut self, step: Option<&Step>, d_out: &[T]) {
        self.bias.grad.add_assign(d_out);
        if let Some(step) = step {
            let cols = self.weight.grad.cols();
            let columns = self.columns(step);
            let g = self.weight.grad.as_mut_slice();
            for col in columns {
                for (r, &d) in d_out.iter().enumerate() {
                    g[r * cols + col] += d;
                }
            }
        }
    }
}

/// One LSTM layer; gate rows are stacked as input, forget, cell, output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer<T> {
    pub w_input: Param<T>,
    pub w_hidden: Param<T>,
    pub bias: Param<T>,
}

#[derive(Debug, Clone)]
pub(crate) struct LstmCache<T> {
    pub x: Vec<T>,
    pub h_prev: Vec<T>,
    pub c_prev: Vec<T>,
    pub i: Vec<T>,
    pub f: Vec<T>,
    pub g: Vec<T>,
    pub o: Vec<T>,
    pub tanh_c: Vec<T>,
}

impl<T: Scalar> LstmLayer<T> {
    pub fn new<R: Rng>(index: usize, input: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = init_bound(input + hidden);
        let mut bias = ValueArray::vector(4 * hidden);
        for b in &mut bias.as_mut_slice()[hidden..2 * hidden] {
            *b = T::one();
        }
        LstmLayer {
            w_input: Param::new(format!("lstm.{index}.w_input"), ValueArray::uniform(4 * hidden, input, bound, rng)).gated(),
            w_hidden: Param::new(format!("lstm.{index}.w_hidden"), ValueArray::uniform(4 * hidden, hidden, bound, rng))
                .gated(),
            bias: Param::new(format!("lstm.{index}.bias"), bias).gated(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hidden.value.cols()
    }

    pub fn input(&self) -> usize {
        self.w_input.value.cols()
    }

    /// Returns `(h, c, cache)`.
    pub(crate) fn forward(&self, x: &[T], h_prev: &[T], c_prev: &[T]) -> (Vec<T>, Vec<T>, LstmCache<T>) {
        let n = self.hidden();
        let mut z = self.bias.value.as_slice().to_vec();
        self.w_input.value.matvec_acc(x, &mut z);
        self.w_hidden.value.matvec_acc(h_prev, &mut z);
        let i: Vec<T> = z[..n].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<T> = z[n..2 * n].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<T> = z[2 * n..3 * n].iter().map(|&v| v.tanh()).collect();
        let o: Vec<T> = z[3 * n..].iter().map(|&v| sigmoid(v)).collect();
        let c: Vec<T> = (0..n).map(|j| f[j] * c_prev[j] + i[j] * g[j]).collect();
        let tanh_c: Vec<T> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<T> = (0..n).map(|j| o[j] * tanh_c[j]).collect();
        let cache = LstmCache { x: x.to_vec(), h_prev: h_prev.to_vec(), c_prev: c_prev.to_vec(), i, f, g, o, tanh_c };
        (h, c, cache)
    }

    /// Accumulates parameter gradients; returns `(dx, dh_prev, dc_prev)`.
    pub(crate) fn backward(&mut self, cache: &LstmCache<T>, dh: &[T], dc_next: &[T]) -> (Vec<T>, Vec<T>, Vec<T>) {
        let n = self.hidden();
        let one = T::one();
        let mut dz = vec![T::zero(); 4 * n];
        let mut dc_prev = vec![T::zero(); n];
        for j in 0..n {
            let (i, f, g, o, tc) = (cache.i[j], cache.f[j], cache.g[j], cache.o[j], cache.tanh_c[j]);
            let dc = dc_next[j] + dh[j] * o * (one - tc * tc);
            dz[j] = dc * g * i * (one - i);
            dz[n + j] = dc * cache.c_prev[j] * f * (one - f);
            dz[2 * n + j] = dc * i * (one - g * g);
            dz[3 * n + j] = dh[j] * tc * o * (one - o);
            dc_prev[j] = dc * f;
        }
        self.w_input.grad.outer_acc(&dz, &cache.x);
        self.w_hidden.grad.outer_acc(&dz, &cache.h_prev);
        self.bias.grad.add_assign(&dz);
        let mut dx = vec![T::zero(); self.input()];
        self.w_input.value.matvec_t_acc(&dz, &mut dx);
        let mut dh_prev = vec![T::zero(); n];
        self.w_hidden.value.matvec_t_acc(&dz, &mut dh_prev);
        (dx, dh_prev, dc_prev)
    }
}

/// Stacked LSTM cells forming the state transition.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmStack<T> {
    pub layers: Vec<LstmLayer<T>>,
}

impl<T: Scalar> LstmStack<T> {
    pub fn new<R: Rng>(input: usize, hidden: usize, num_layers: usize, rng: &mut R) -> Self {
        let layers = (0..num_layers)
            .map(|l| LstmLayer::new(l, if l == 0 { input } else { hidden }, hidden, rng))
            .collect();
        LstmStack { layers }
    }

    pub fn hidden(&self) -> usize {
        self.layers[0].hidden()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }
}

/// Per-layer hidden and cell state of an [`LstmStack`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState<T> {
    pub h: Vec<Vec<T>>,
    pub c: Vec<Vec<T>>,
}

impl<T: Scalar> LstmState<T> {
    pub fn zeros(num_layers: usize, hidden: usize) -> Self {
        LstmState { h: vec![vec![T::zero(); hidden]; num_layers], c: vec![vec![T::zero(); hidden]; num_layers] }
    }
}

/// Two-layer perceptron head ending in a softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpHead<T> {
    pub w1: Param<T>,
    pub b1: Param<T>,
    pub w2: Param<T>,
    pub b2: Param<T>,
}

#[derive(Debug, Clone)]
pub(crate) struct MlpCache<T> {
    pub pre: Vec<T>,
    pub act: Vec<T>,
    pub mask: Option<Vec<T>>,
    pub probs: Vec<T>,
}

impl<T: Scalar> MlpHead<T> {
    pub fn new<R: Rng>(name: &str, input: usize, hidden: usize, out: usize, rng: &mut R) -> Self {
        MlpHead {
            w1: Param::new(format!("head.{name}.w1"), ValueArray::uniform(hidden, input, init_bound(input), rng)),
            b1: Param::new(format!("head.{name}.b1"), ValueArray::vector(hidden)),
            w2: Param::new(format!("head.{name}.w2"), ValueArray::uniform(out, hidden, init_bound(hidden), rng)),
            b2: Param::new(format!("head.{name}.b2"), ValueArray::vector(out)),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.w2.value.rows()
    }

    pub(crate) fn forward(&self, h: &[T], mask: Option<Vec<T>>) -> MlpCache<T> {
        let mut pre = self.b1.value.as_slice().to_vec();
        self.w1.value.matvec_acc(h, &mut pre);
        let mut act: Vec<T> = pre.iter().map(|&v| v.max(T::zero())).collect();
        apply_mask(&mut act, &mask);
        let mut z = self.b2.value.as_slice().to_vec();
        self.w2.value.matvec_acc(&act, &mut z);
        MlpCache { pre, act, mask, probs: softmax(&z) }
    }

    /// `d_probs` is the loss gradient w.r.t. the softmax output; adds the
    /// gradient w.r.t. the head input into `dh`.
    pub(crate) fn backward(&mut self, h: &[T], cache: &MlpCache<T>, d_probs: &[T], dh: &mut [T]) {
        let p = &cache.probs;
        let dot: T = p.iter().zip(d_probs).map(|(&a, &b)| a * b).sum();
        let dz: Vec<T> = p.iter().zip(d_probs).map(|(&pi, &di)| pi * (di - dot)).collect();
        self.w2.grad.outer_acc(&dz, &cache.act);
        self.b2.grad.add_assign(&dz);
        let mut d_act = vec![T::zero(); cache.act.len()];
        self.w2.value.matvec_t_acc(&dz, &mut d_act);
        apply_mask(&mut d_act, &cache.mask);
        for (d, &pre) in d_act.iter_mut().zip(&cache.pre) {
            if pre <= T::zero() {
                *d = T::zero();
            }
        }
        self.w1.grad.outer_acc(&d_act, h);
        self.b1.grad.add_assign(&d_act);
        self.w1.value.matvec_t_acc(&d_act, dh);
    }
}

pub fn softmax<T: Scalar>(z: &[T]) -> Vec<T> {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = z.iter().map(|&v| (v - max).exp()).collect();
    let s: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let p = softmax(&[0.0f64; 4]);
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn softmax_is_shift_invariant_and_stable() {
        let p = softmax(&[1000.0f64, 1001.0]);
        let q = softmax(&[0.0f64, 1.0]);
        assert!((p[0] - q[0]).abs() < 1e-12);
        assert!(p.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn forget_bias_is_one() {
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        let l = LstmLayer::<f64>::new(0, 3, 2, &mut rng);
        assert_eq!(l.bias.value.as_slice(), &[0., 0., 1., 1., 0., 0., 0., 0.]);
    }
}
