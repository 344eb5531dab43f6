//! Per-record losses over raw logits and their gradients.

use crate::error::{Error, Result};
use crate::numerics::sigmoid_scalar;
use crate::scalar::Scalar;

/// Lower clamp applied to probabilities before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;

#[inline]
fn ln_clamped<T: Scalar>(p: T) -> T {
    p.max(T::of(LOG_FLOOR)).ln()
}

/// Probability the sigmoid assigns to the observed target.
#[inline]
fn p_target<T: Scalar>(s: T, target: bool) -> T {
    let p = sigmoid_scalar(s);
    if target {
        p
    } else {
        T::one() - p
    }
}

fn check_len(scores: usize, targets: usize) -> Result<()> {
    if scores != targets {
        return Err(Error::Shape(format!("{scores} scores for {targets} targets")));
    }
    Ok(())
}

/// Summed binary cross-entropy over categories.
pub fn loss_pc<T: Scalar>(scores: &[T], targets: &[bool]) -> Result<T> {
    check_len(scores.len(), targets.len())?;
    Ok(scores
        .iter()
        .zip(targets)
        .map(|(&s, &y)| -ln_clamped(p_target(s, y)))
        .sum())
}

/// Summed focal loss `-alpha_c (1 - p_t)^gamma ln p_t`.
pub fn focal_loss<T: Scalar>(scores: &[T], targets: &[bool], alpha: &[f64], gamma: f64) -> Result<T> {
    check_len(scores.len(), targets.len())?;
    check_len(alpha.len(), targets.len())?;
    let g = T::of(gamma);
    Ok(scores
        .iter()
        .zip(targets)
        .zip(alpha)
        .map(|((&s, &y), &a)| {
            let pt = p_target(s, y);
            -T::of(a) * (T::one() - pt).powf(g) * ln_clamped(pt)
        })
        .sum())
}

/// Gradient of [`focal_loss`] with respect to each score.
pub fn focal_loss_grad<T: Scalar>(
    scores: &[T],
    targets: &[bool],
    alpha: &[f64],
    gamma: f64,
) -> Result<Vec<T>> {
    check_len(scores.len(), targets.len())?;
    check_len(alpha.len(), targets.len())?;
    let g = T::of(gamma);
    Ok(scores
        .iter()
        .zip(targets)
        .zip(alpha)
        .map(|((&s, &y), &a)| {
            let pt = p_target(s, y);
            let q = T::one() - pt;
            let sign = if y { T::one() } else { -T::one() };
            sign * T::of(a) * q.powf(g) * (g * pt * ln_clamped(pt) - q)
        })
        .collect())
}

/// Softmax cross-entropy of the intent logits.
pub fn loss_i<T: Scalar>(logits: &[T], target: usize) -> Result<T> {
    if target >= logits.len() {
        return Err(Error::Input(format!(
            "intent target {target} outside {} logits",
            logits.len()
        )));
    }
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + logits.iter().map(|&x| (x - max).exp()).sum::<T>().ln();
    Ok(lse - logits[target])
}

pub fn loss_i_grad<T: Scalar>(logits: &[T], target: usize) -> Vec<T> {
    let mut p = logits.to_vec();
    crate::numerics::softmax_in_place(&mut p);
    p[target] -= T::one();
    p
}

/// `beta1 * focal + beta2 * intent`. Rejects both weights being zero.
pub fn total_loss<T: Scalar>(focal: T, intent: T, beta1: f64, beta2: f64) -> Result<T> {
    if beta1 == 0.0 && beta2 == 0.0 {
        return Err(Error::Config("loss weights beta1 and beta2 are both zero".into()));
    }
    Ok(T::of(beta1) * focal + T::of(beta2) * intent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn focal_example_value() {
        // gamma 2, p_t = 0.9: (0.1)^2 * -ln 0.9
        let s = (0.9f64 / 0.1).ln();
        let l = focal_loss(&[s], &[true], &[1.0], 2.0).unwrap();
        assert_abs_diff_eq!(l, 0.01 * -(0.9f64).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(l, 0.0010536, epsilon = 1e-7);
    }

    #[test]
    fn confident_correct_scores_vanish() {
        let l: f64 = focal_loss(&[40.0, -40.0], &[true, false], &[1.0, 1.0], 1.5).unwrap();
        assert!(l < 1e-15);
    }

    #[test]
    fn clamp_keeps_loss_finite() {
        let l: f64 = loss_pc(&[-1e4], &[true]).unwrap();
        assert_abs_diff_eq!(l, -(LOG_FLOOR.ln()), epsilon = 1e-9);
    }

    #[test]
    fn intent_cross_entropy() {
        let l: f64 = loss_i(&[0.0, 0.0], 1).unwrap();
        assert_abs_diff_eq!(l, 2f64.ln(), epsilon = 1e-15);
        assert_eq!(loss_i_grad(&[0.0f64, 0.0], 0), vec![-0.5, 0.5]);
        assert!(loss_i(&[0.0f64], 3).is_err());
    }

    #[test]
    fn zero_weights_rejected() {
        assert!(matches!(total_loss(1.0f64, 1.0, 0.0, 0.0), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn focal_gamma_zero_is_bce(
            s in prop::collection::vec(-30.0f64..30.0, 1..8),
            seed in any::<u64>(),
        ) {
            let y: Vec<bool> = (0..s.len()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let ones = vec![1.0; s.len()];
            let a = focal_loss(&s, &y, &ones, 0.0).unwrap();
            let b = loss_pc(&s, &y).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn focal_is_nonnegative_and_shrinks_with_gamma(
            s in -20.0f64..20.0, y in any::<bool>(), g in 0.0f64..4.0, dg in 0.0f64..2.0,
        ) {
            let l1 = focal_loss(&[s], &[y], &[1.0], g).unwrap();
            let l2 = focal_loss(&[s], &[y], &[1.0], g + dg).unwrap();
            prop_assert!(l1 >= 0.0);
            prop_assert!(l2 <= l1 + 1e-15);
        }

        #[test]
        fn focal_grad_matches_difference(
            s in -8.0f64..8.0, y in any::<bool>(), g in 0.0f64..3.0, a in 0.1f64..3.0,
        ) {
            let h = 1e-6;
            let f = |x: f64| focal_loss(&[x], &[y], &[a], g).unwrap();
            let numeric = (f(s + h) - f(s - h)) / (2.0 * h);
            let analytic = focal_loss_grad(&[s], &[y], &[a], g).unwrap()[0];
            prop_assert!((numeric - analytic).abs() <= 1e-6 * (1.0 + analytic.abs()));
        }

        #[test]
        fn total_is_linear_in_weights(
            f in 0.0f64..10.0, i in 0.0f64..10.0,
            b1 in 0.0f64..2.0, b2 in 0.01f64..2.0, k in 0.1f64..3.0,
        ) {
            let base = total_loss(f, i, b1, b2).unwrap();
            let scaled = total_loss(f, i, k * b1, k * b2).unwrap();
            prop_assert!((scaled - k * base).abs() <= 1e-12 * (1.0 + scaled.abs()));
        }
    }
}
