use crate::Scalar;

/// Probabilities are clamped to `[EPS, 1 - EPS]` inside the logarithms.
pub const PROB_CLAMP: f64 = 1e-7;

/// Elementwise binary cross-entropy summed over every entry:
/// `-sum(t * ln(p) + (1 - t) * ln(1 - p))`.
pub fn bce_loss<T: Scalar>(probs: &[T], target: &[T]) -> T {
    assert_eq!(probs.len(), target.len(), "probability/target length");
    probs.iter().zip(target).map(|(&p, &t)| bce_term(p, t)).sum()
}

#[inline]
fn bce_term<T: Scalar>(p: T, t: T) -> T {
    let eps = T::of(PROB_CLAMP);
    let q = p.max(eps).min(T::one() - eps);
    -(t * q.ln() + (T::one() - t) * (T::one() - q).ln())
}

/// Loss and gradient of one softmax block against a one-hot target index.
pub(crate) fn bce_one_hot<T: Scalar>(probs: &[T], target: usize) -> (T, Vec<T>) {
    let eps = T::of(PROB_CLAMP);
    let one = T::one();
    let mut loss = T::zero();
    let grad = probs
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let t = if j == target { one } else { T::zero() };
            loss += bce_term(p, t);
            if p < eps || p > one - eps {
                T::zero()
            } else if j == target {
                -one / p
            } else {
                one / (one - p)
            }
        })
        .collect();
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_half_block() {
        let l = bce_loss(&[0.5f64, 0.5], &[1.0, 0.0]);
        assert!((l - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((l - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn exact_match_is_near_zero() {
        let t = [0.0f64, 1.0, 0.0, 0.0, 1.0];
        let l = bce_loss(&t, &t);
        let expected = -(t.len() as f64) * (1.0 - PROB_CLAMP).ln();
        assert!((l - expected).abs() < 1e-12);
        assert!(l < 1e-5);
    }

    #[test]
    fn one_hot_helper_agrees() {
        let p = [0.2f64, 0.5, 0.3];
        let (l, g) = bce_one_hot(&p, 1);
        assert!((l - bce_loss(&p, &[0.0, 1.0, 0.0])).abs() < 1e-15);
        assert!((g[1] + 2.0).abs() < 1e-12);
        assert!((g[0] - 1.25).abs() < 1e-12);
    }
}
