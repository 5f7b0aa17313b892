use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::GenerativeModel;
use crate::canonize::{decode, DecodeMode};
use crate::codec::{decode_step, DecodedStep, Step};
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::{DfsCode, Scalar};

/// Total sampling attempts allowed per requested graph.
pub const RESAMPLE_FACTOR: usize = 10;

fn sample_index<T: Scalar, R: Rng>(probs: &[T], rng: &mut R) -> usize {
    match WeightedIndex::new(probs.iter().map(|p| p.as_f64().max(0.0))) {
        Ok(dist) => dist.sample(rng),
        // degenerate output; fall back to the most likely entry
        Err(_) => probs.iter().enumerate().fold(0, |b, (i, p)| if *p > probs[b] { i } else { b }),
    }
}

/// Raw component indices sampled step by step, EOS step excluded.
pub fn sample_sequence<T: Scalar, R: Rng>(model: &GenerativeModel<T>, max_len: usize, rng: &mut R) -> Result<Vec<Step>> {
    let net = &model.network;
    let eos = model.vocab.eos();
    let mut state = net.initial_state();
    let mut prev: Option<Step> = None;
    let mut out = Vec::new();
    while out.len() < max_len {
        let (next, outs) = net.forward_step(&state, prev.as_ref())?;
        let step: Step = std::array::from_fn(|c| sample_index(&outs[c], rng));
        if step.iter().zip(&eos).any(|(s, e)| s == e) {
            break;
        }
        out.push(step);
        prev = Some(step);
        state = next;
    }
    Ok(out)
}

/// Samples one tuple sequence: each step draws the five components
/// independently and stops at the first EOS or after `max_len` tuples.
pub fn generate<T: Scalar, R: Rng>(model: &GenerativeModel<T>, max_len: usize, rng: &mut R) -> Result<DfsCode> {
    let steps = sample_sequence(model, max_len, rng)?;
    let tuples = steps
        .iter()
        .map(|s| match decode_step(s, &model.vocab)? {
            DecodedStep::Tuple(t) => Ok(t),
            DecodedStep::Eos => unreachable!("EOS steps end sampling"),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DfsCode::new(tuples))
}

/// Samples `n` graphs; sequence `i` uses its own stream of `seed`.
/// Sequences that repair to a graph without edges are resampled; after
/// `RESAMPLE_FACTOR * n` attempts in total the run fails.
pub fn generate_graphs<T: Scalar>(model: &GenerativeModel<T>, n: usize, max_len: usize, seed: u64) -> Result<Vec<LabeledGraph>> {
    if n == 0 {
        return Err(Error::Precondition("number of graphs must be at least 1".into()));
    }
    let mut slots: Vec<(ChaCha8Rng, Option<LabeledGraph>)> = (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            (rng, None)
        })
        .collect();
    let cap = RESAMPLE_FACTOR * n;
    let mut attempts = 0;
    loop {
        let pending = slots.iter().filter(|s| s.1.is_none()).count();
        if pending == 0 {
            break;
        }
        if attempts + pending > cap {
            return Err(Error::ResampleCapExceeded { attempts });
        }
        attempts += pending;
        slots.par_iter_mut().filter(|s| s.1.is_none()).try_for_each(|(rng, slot)| -> Result<()> {
            let code = generate(model, max_len, rng)?;
            let g = decode(&code, DecodeMode::Lenient)?;
            if g.edge_count() > 0 {
                *slot = Some(g);
            }
            Ok(())
        })?;
    }
    Ok(slots.into_iter().map(|s| s.1.expect("filled")).collect())
}
