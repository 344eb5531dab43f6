use rand::Rng;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-entry multipliers produced by a dropout draw (0 or `1/(1-p)`).
pub type DropoutMask<T> = Matrix<T>;

/// Inverted dropout. Returns the output and the mask needed by the
/// backward pass; in eval mode (or `p == 0`) the mask is `None`.
pub fn dropout_with_mask<T: Scalar, R: Rng + ?Sized>(
    m: &Matrix<T>,
    p: f64,
    training: bool,
    rng: &mut R,
) -> Result<(Matrix<T>, Option<DropoutMask<T>>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Config(format!("dropout rate {p} outside [0, 1)")));
    }
    if !training || p == 0.0 {
        return Ok((m.clone(), None));
    }
    let keep = T::of(1.0 / (1.0 - p));
    let mut mask = Matrix::zeros(m.rows(), m.cols());
    for x in mask.as_mut_slice() {
        if rng.gen::<f64>() >= p {
            *x = keep;
        }
    }
    Ok((m.hadamard(&mask), Some(mask)))
}

pub fn dropout<T: Scalar, R: Rng + ?Sized>(
    m: &Matrix<T>,
    p: f64,
    training: bool,
    rng: &mut R,
) -> Result<Matrix<T>> {
    dropout_with_mask(m, p, training, rng).map(|(out, _)| out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rate_and_eval_mode_are_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Matrix::<f64>::from_vec(1, 3, vec![1.0, -2.0, 3.0]).unwrap();
        assert_eq!(dropout(&m, 0.0, true, &mut rng).unwrap(), m);
        assert_eq!(dropout(&m, 0.9, false, &mut rng).unwrap(), m);
    }

    #[test]
    fn rate_of_one_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Matrix::<f64>::zeros(1, 1);
        assert!(matches!(dropout(&m, 1.0, true, &mut rng), Err(Error::Config(_))));
    }

    #[test]
    fn inverted_dropout_preserves_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = Matrix::<f64>::filled(1000, 1000, 1.0);
        let out = dropout(&m, 0.5, true, &mut rng).unwrap();
        let mean = out.as_slice().iter().sum::<f64>() / 1e6;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!(out.as_slice().iter().all(|&x| x == 0.0 || x == 2.0));
    }
}
