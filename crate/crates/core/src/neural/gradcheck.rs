use rand::seq::index::sample;
use rand::Rng;

use super::network::Network;
use crate::codec::Step;
use crate::error::{Error, Result};
use crate::Scalar;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Denominator floor of the relative error. Central differences at
/// `FD_STEP` carry roughly 1e-10 of absolute roundoff on losses of order
/// ten, so gradients far below the floor are compared in absolute terms.
pub const REL_ERROR_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub checked: usize,
    pub max_rel_error: f64,
    pub max_abs_analytic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub params: Vec<ParamCheck>,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

/// Adds uniform noise in `[-scale, scale]` to every bias vector.
pub fn jitter_biases<T: Scalar, R: Rng>(net: &mut Network<T>, scale: f64, rng: &mut R) {
    for p in net.params_mut() {
        if p.value.cols() == 1 {
            for v in p.value.as_mut_slice() {
                *v += T::of(rng.gen_range(-scale..=scale));
            }
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares backpropagated gradients with central differences. With
/// `per_block = None` every entry is checked, otherwise that many random
/// entries are drawn from each row block (so every LSTM gate is covered).
pub fn finite_difference_check<T: Scalar, R: Rng>(
    net: &Network<T>,
    steps: &[Step],
    tolerance: f64,
    per_block: Option<usize>,
    rng: &mut R,
) -> Result<GradCheckReport> {
    if net.dropout > 0.0 {
        return Err(Error::Precondition("gradient check needs dropout disabled".into()));
    }
    let mut work = net.clone();
    work.zero_grad();
    work.accumulate_gradients::<R>(steps, None, T::one())?;
    let analytic: Vec<Vec<f64>> =
        work.params().iter().map(|p| p.grad.as_slice().iter().map(|g| g.as_f64()).collect()).collect();

    let h = T::of(FD_STEP);
    let mut out = Vec::new();
    for (pi, grads) in analytic.iter().enumerate() {
        let (len, blocks, name) = {
            let p = work.params()[pi];
            (p.len(), p.row_blocks, p.name.clone())
        };
        let indices: Vec<usize> = match per_block {
            None => (0..len).collect(),
            Some(n) => {
                let block = len / blocks;
                (0..blocks).flat_map(|b| sample(rng, block, n.min(block)).into_iter().map(move |i| b * block + i).collect::<Vec<_>>()).collect()
            }
        };
        let mut worst = 0.0f64;
        for &i in &indices {
            let orig = work.params()[pi].value.as_slice()[i];
            work.params_mut()[pi].value.as_mut_slice()[i] = orig + h;
            let up = work.sequence_loss(steps)?;
            work.params_mut()[pi].value.as_mut_slice()[i] = orig - h;
            let down = work.sequence_loss(steps)?;
            work.params_mut()[pi].value.as_mut_slice()[i] = orig;
            let numeric = ((up - down) / (h + h)).as_f64();
            let r = relative_error(grads[i], numeric);
            worst = worst.max(r);
        }
        out.push(ParamCheck {
            name,
            checked: indices.len(),
            max_rel_error: worst,
            max_abs_analytic: grads.iter().fold(0.0, |a, g| a.max(g.abs())),
        });
    }
    let max_rel_error = out.iter().map(|p| p.max_rel_error).fold(0.0, f64::max);
    Ok(GradCheckReport { params: out, max_rel_error, tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::NetworkDims;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(dropout: f64) -> (Network<f64>, Vec<Step>) {
        let dims = NetworkDims { block_dims: [4, 4, 3, 3, 3], embedding: 8, hidden: 8, layers: 2, mlp_hidden: 8 };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut net = Network::new(dims, dropout, &mut rng);
        // zero biases put every ReLU exactly on its kink at the start step
        jitter_biases(&mut net, 0.1, &mut rng);
        (net, vec![[0, 1, 0, 1, 1], [1, 2, 1, 0, 0], [3, 3, 2, 2, 2]])
    }

    #[test]
    fn passes_on_small_model() {
        let (net, seq) = setup(0.0);
        let r = finite_difference_check(&net, &seq, 1e-4, None, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.params.len(), 2 + 3 * 2 + 4 * 5);
    }

    #[test]
    fn zero_tolerance_fails() {
        let (net, seq) = setup(0.0);
        let r = finite_difference_check(&net, &seq, 0.0, Some(3), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn dropout_is_rejected() {
        let (net, seq) = setup(0.2);
        let r = finite_difference_check(&net, &seq, 1e-4, None, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
