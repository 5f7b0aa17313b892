//! Embedding, stacked LSTM and five softmax heads, with backpropagation
//! through time over whole sequences.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::array::Param;
use super::layers::{apply_mask, dropout_mask, EmbeddingMap, LstmCache, LstmStack, LstmState, MlpCache, MlpHead};
use super::loss::bce_one_hot;
use crate::codec::{Step, COMPONENTS};
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDims {
    /// One-hot block sizes of the five tuple components.
    pub block_dims: [usize; 5],
    pub embedding: usize,
    pub hidden: usize,
    pub layers: usize,
    pub mlp_hidden: usize,
}

impl NetworkDims {
    pub fn k(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn offsets(&self) -> [usize; 5] {
        let mut o = [0; 5];
        for c in 1..5 {
            o[c] = o[c - 1] + self.block_dims[c - 1];
        }
        o
    }
}

/// Output distributions of the five heads at one step.
pub type HeadOutputs<T> = [Vec<T>; 5];

#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    pub dims: NetworkDims,
    pub embedding: EmbeddingMap<T>,
    pub lstm: LstmStack<T>,
    pub heads: Vec<MlpHead<T>>,
    /// Dropout probability used when a training RNG is supplied.
    pub dropout: f64,
}

struct StepCache<T> {
    layers: Vec<LstmCache<T>>,
    /// Dropout masks on the outputs of all but the last layer.
    masks: Vec<Option<Vec<T>>>,
    top: Vec<T>,
    heads: Vec<MlpCache<T>>,
    d_probs: Vec<Vec<T>>,
}

impl<T: Scalar> Network<T> {
    pub fn new<R: Rng>(dims: NetworkDims, dropout: f64, rng: &mut R) -> Self {
        let embedding = EmbeddingMap::new(dims.k(), dims.embedding, dims.offsets(), rng);
        let lstm = LstmStack::new(dims.embedding, dims.hidden, dims.layers, rng);
        let heads = COMPONENTS
            .iter()
            .zip(dims.block_dims)
            .map(|(name, out)| MlpHead::new(name, dims.hidden, dims.mlp_hidden, out, rng))
            .collect();
        Network { dims, embedding, lstm, heads, dropout }
    }

    pub fn initial_state(&self) -> LstmState<T> {
        LstmState::zeros(self.dims.layers, self.dims.hidden)
    }

    fn check_step(&self, step: &Step) -> Result<()> {
        for (c, (&i, &d)) in step.iter().zip(&self.dims.block_dims).enumerate() {
            if i >= d {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} index < {d}", COMPONENTS[c]),
                    got: i.to_string(),
                });
            }
        }
        Ok(())
    }

    /// One inference step (no dropout). `input` of `None` is the start token.
    pub fn forward_step(&self, state: &LstmState<T>, input: Option<&Step>) -> Result<(LstmState<T>, HeadOutputs<T>)> {
        if state.h.len() != self.dims.layers || state.h.iter().chain(&state.c).any(|v| v.len() != self.dims.hidden) {
            return Err(Error::ShapeMismatch {
                expected: format!("{} layers x {}", self.dims.layers, self.dims.hidden),
                got: format!("{} layers", state.h.len()),
            });
        }
        if let Some(step) = input {
            self.check_step(step)?;
        }
        let mut x = self.embedding.forward(input);
        let mut next = LstmState { h: Vec::with_capacity(self.dims.layers), c: Vec::with_capacity(self.dims.layers) };
        for (l, layer) in self.lstm.layers.iter().enumerate() {
            let (h, c, _) = layer.forward(&x, &state.h[l], &state.c[l]);
            x = h.clone();
            next.h.push(h);
            next.c.push(c);
        }
        let outs: Vec<Vec<T>> = self.heads.iter().map(|head| head.forward(&x, None).probs).collect();
        let outs: HeadOutputs<T> = outs.try_into().expect("five heads");
        Ok((next, outs))
    }

    /// Teacher-forced loss of one encoded sequence (step `i` is fed the
    /// ground truth of step `i - 1`), without dropout.
    pub fn sequence_loss(&self, steps: &[Step]) -> Result<T> {
        let mut state = self.initial_state();
        let mut total = T::zero();
        for (s, target) in steps.iter().enumerate() {
            self.check_step(target)?;
            let input = if s == 0 { None } else { Some(&steps[s - 1]) };
            let (next, outs) = self.forward_step(&state, input)?;
            for (probs, &t) in outs.iter().zip(target) {
                total += bce_one_hot(probs, t).0;
            }
            state = next;
        }
        Ok(total)
    }

    /// Teacher-forced forward and backward pass over one sequence. Gradients
    /// of `scale * loss` are added to the parameter buffers; the unscaled
    /// loss is returned. Dropout is active iff `rng` is given.
    pub fn accumulate_gradients<R: Rng>(&mut self, steps: &[Step], mut rng: Option<&mut R>, scale: T) -> Result<T> {
        for s in steps {
            self.check_step(s)?;
        }
        let layers = self.dims.layers;
        let mut state = self.initial_state();
        let mut caches: Vec<StepCache<T>> = Vec::with_capacity(steps.len());
        let mut total = T::zero();

        for (s, target) in steps.iter().enumerate() {
            let input = if s == 0 { None } else { Some(&steps[s - 1]) };
            let mut x = self.embedding.forward(input);
            let mut layer_caches = Vec::with_capacity(layers);
            let mut masks = Vec::with_capacity(layers.saturating_sub(1));
            for l in 0..layers {
                let (h, c, cache) = self.lstm.layers[l].forward(&x, &state.h[l], &state.c[l]);
                layer_caches.push(cache);
                x = h.clone();
                state.h[l] = h;
                state.c[l] = c;
                if l + 1 < layers {
                    let mask = dropout_mask(x.len(), self.dropout, rng.as_deref_mut());
                    apply_mask(&mut x, &mask);
                    masks.push(mask);
                }
            }
            let mut head_caches = Vec::with_capacity(5);
            let mut d_probs = Vec::with_capacity(5);
            for (head, &t) in self.heads.iter().zip(target) {
                let mask = dropout_mask(self.dims.mlp_hidden, self.dropout, rng.as_deref_mut());
                let cache = head.forward(&x, mask);
                let (loss, grad) = bce_one_hot(&cache.probs, t);
                total += loss;
                d_probs.push(grad.into_iter().map(|g| g * scale).collect());
                head_caches.push(cache);
            }
            caches.push(StepCache { layers: layer_caches, masks, top: x, heads: head_caches, d_probs });
        }

        let hidden = self.dims.hidden;
        let mut dh_next = vec![vec![T::zero(); hidden]; layers];
        let mut dc_next = vec![vec![T::zero(); hidden]; layers];
        for s in (0..steps.len()).rev() {
            let cache = &caches[s];
            let mut d_out = vec![T::zero(); hidden];
            for ((head, hc), dp) in self.heads.iter_mut().zip(&cache.heads).zip(&cache.d_probs) {
                head.backward(&cache.top, hc, dp, &mut d_out);
            }
            for l in (0..layers).rev() {
                let dh: Vec<T> = d_out.iter().zip(&dh_next[l]).map(|(&a, &b)| a + b).collect();
                let (mut dx, dh_prev, dc_prev) = self.lstm.layers[l].backward(&cache.layers[l], &dh, &dc_next[l]);
                dh_next[l] = dh_prev;
                dc_next[l] = dc_prev;
                if l > 0 {
                    apply_mask(&mut dx, &cache.masks[l - 1]);
                    d_out = dx;
                } else {
                    let input = if s == 0 { None } else { Some(&steps[s - 1]) };
                    self.embedding.backward(input, &dx);
                }
            }
        }
        Ok(total)
    }

    /// All parameters in a fixed order (embedding, LSTM layers, heads).
    pub fn params(&self) -> Vec<&Param<T>> {
        let mut out = vec![&self.embedding.weight, &self.embedding.bias];
        for l in &self.lstm.layers {
            out.extend([&l.w_input, &l.w_hidden, &l.bias]);
        }
        for h in &self.heads {
            out.extend([&h.w1, &h.b1, &h.w2, &h.b2]);
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut out = vec![&mut self.embedding.weight, &mut self.embedding.bias];
        for l in &mut self.lstm.layers {
            out.extend([&mut l.w_input, &mut l.w_hidden, &mut l.bias]);
        }
        for h in &mut self.heads {
            out.extend([&mut h.w1, &mut h.b1, &mut h.w2, &mut h.b2]);
        }
        out
    }

    pub fn zero_grad(&mut self) {
        self.params_mut().into_iter().for_each(Param::zero_grad);
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn check_finite(&self) -> Result<()> {
        for p in self.params() {
            if !p.value.all_finite() {
                return Err(Error::NonFinite(p.name.clone()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dims() -> NetworkDims {
        NetworkDims { block_dims: [4, 4, 3, 2, 3], embedding: 6, hidden: 5, layers: 2, mlp_hidden: 7 }
    }

    fn net() -> Network<f64> {
        Network::new(dims(), 0.0, &mut ChaCha8Rng::seed_from_u64(7))
    }

    #[test]
    fn zero_weights_give_uniform_heads() {
        let mut n = net();
        for p in n.params_mut() {
            p.value.fill(0.0);
        }
        let (_, outs) = n.forward_step(&n.initial_state(), None).unwrap();
        for (probs, d) in outs.iter().zip(dims().block_dims) {
            for &p in probs {
                assert!((p - 1.0 / d as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn heads_are_distributions_and_deterministic() {
        let n = net();
        let s0 = n.initial_state();
        let (s1, a) = n.forward_step(&s0, Some(&[1, 2, 0, 1, 2])).unwrap();
        let (_, b) = n.forward_step(&s0, Some(&[1, 2, 0, 1, 2])).unwrap();
        assert_eq!(a, b);
        for probs in &a {
            let s: f64 = probs.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert!(probs.iter().all(|&p| p >= 0.0));
        }
        assert_eq!(s1.h.len(), 2);
        assert_eq!(s1.h[1].len(), 5);
    }

    #[test]
    fn rejects_bad_shapes() {
        let n = net();
        assert!(matches!(n.forward_step(&n.initial_state(), Some(&[9, 0, 0, 0, 0])), Err(Error::ShapeMismatch { .. })));
        let bad = LstmState::zeros(1, 5);
        assert!(matches!(n.forward_step(&bad, None), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn training_loss_matches_inference_loss_without_dropout() {
        let mut n = net();
        let seq = [[0, 1, 0, 0, 1], [1, 2, 1, 0, 0], [3, 3, 2, 1, 2]];
        let a = n.sequence_loss(&seq).unwrap();
        let b = n.accumulate_gradients::<ChaCha8Rng>(&seq, None, 1.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn gradient_scales_linearly() {
        let seq = [[0, 1, 0, 0, 1], [3, 3, 2, 1, 2]];
        let mut a = net();
        a.accumulate_gradients::<ChaCha8Rng>(&seq, None, 1.0).unwrap();
        let mut b = net();
        b.accumulate_gradients::<ChaCha8Rng>(&seq, None, 2.0).unwrap();
        for (pa, pb) in a.params().iter().zip(b.params()) {
            for (x, y) in pa.grad.as_slice().iter().zip(pb.grad.as_slice()) {
                assert!((2.0 * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
        let mut c = net();
        c.accumulate_gradients::<ChaCha8Rng>(&seq, None, 0.0).unwrap();
        assert!(c.params().iter().all(|p| p.grad.as_slice().iter().all(|&g| g == 0.0)));
    }

    #[test]
    fn thousand_random_steps_stay_finite() {
        let n = net();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = n.initial_state();
        for _ in 0..1000 {
            let step: Step = std::array::from_fn(|c| rng.gen_range(0..dims().block_dims[c]));
            let (next, outs) = n.forward_step(&state, Some(&step)).unwrap();
            assert!(outs.iter().flatten().all(|p| p.is_finite()));
            assert!(next.h.iter().chain(&next.c).flatten().all(|v| v.is_finite()));
            assert_eq!(next.h.len(), state.h.len());
            state = next;
        }
    }

    #[test]
    fn single_precision_instantiation() {
        let n: Network<f32> = Network::new(dims(), 0.0, &mut ChaCha8Rng::seed_from_u64(7));
        let (_, outs) = n.forward_step(&n.initial_state(), None).unwrap();
        let s: f32 = outs[0].iter().sum();
        assert!((s - 1.0).abs() < 1e-5);
    }
}
