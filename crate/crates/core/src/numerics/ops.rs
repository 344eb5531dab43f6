//! Elementwise nonlinearities, softmax and cosine similarity, each paired
//! with its reverse-mode rule.

use super::matrix::{dot, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[inline]
pub fn sigmoid_scalar<T: Scalar>(x: T) -> T {
    // Split on sign so exp never overflows.
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub fn sigmoid<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    m.map(sigmoid_scalar)
}

/// Given `y = sigmoid(x)` and upstream `dy`, returns `dx`.
pub fn sigmoid_backward<T: Scalar>(y: &Matrix<T>, dy: &Matrix<T>) -> Matrix<T> {
    assert_eq!(y.shape(), dy.shape());
    let data = y
        .as_slice()
        .iter()
        .zip(dy.as_slice())
        .map(|(&s, &g)| g * s * (T::one() - s))
        .collect();
    Matrix::from_vec(y.rows(), y.cols(), data).expect("shape preserved")
}

pub fn relu<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    m.map(|x| if x > T::zero() { x } else { T::zero() })
}

/// Given the pre-activation `x` and upstream `dy`, returns `dx`.
pub fn relu_backward<T: Scalar>(x: &Matrix<T>, dy: &Matrix<T>) -> Matrix<T> {
    assert_eq!(x.shape(), dy.shape());
    let data = x
        .as_slice()
        .iter()
        .zip(dy.as_slice())
        .map(|(&v, &g)| if v > T::zero() { g } else { T::zero() })
        .collect();
    Matrix::from_vec(x.rows(), x.cols(), data).expect("shape preserved")
}

/// In-place softmax of one slice, stabilized by max subtraction.
pub fn softmax_in_place<T: Scalar>(xs: &mut [T]) {
    if xs.is_empty() {
        return;
    }
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in xs.iter_mut() {
        *x /= sum;
    }
}

pub fn row_softmax<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    let mut out = m.clone();
    for r in 0..out.rows() {
        softmax_in_place(out.row_mut(r));
    }
    out
}

/// Given softmax output `y` (per row) and upstream `dy`, returns `dx`.
pub fn row_softmax_backward<T: Scalar>(y: &Matrix<T>, dy: &Matrix<T>) -> Matrix<T> {
    assert_eq!(y.shape(), dy.shape());
    let mut out = Matrix::zeros(y.rows(), y.cols());
    for r in 0..y.rows() {
        softmax_backward_slice(y.row(r), dy.row(r), out.row_mut(r));
    }
    out
}

pub(crate) fn softmax_backward_slice<T: Scalar>(y: &[T], dy: &[T], dx: &mut [T]) {
    let inner = dot(y, dy);
    for ((d, &yi), &gi) in dx.iter_mut().zip(y).zip(dy) {
        *d = yi * (gi - inner);
    }
}

fn norm<T: Scalar>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

/// Pairwise cosine similarity between the rows of `a` and the rows of `b`.
///
/// A pair involving a zero-norm row has similarity 0.
pub fn cosine_rows<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols() != b.cols() {
        return Err(Error::Shape(format!(
            "cosine of {}x{} rows against {}x{} rows",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let na: Vec<T> = (0..a.rows()).map(|i| norm(a.row(i))).collect();
    let nb: Vec<T> = (0..b.rows()).map(|j| norm(b.row(j))).collect();
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        for j in 0..b.rows() {
            if na[i] > T::zero() && nb[j] > T::zero() {
                let c = dot(a.row(i), b.row(j)) / (na[i] * nb[j]);
                // rounding can push |c| a hair past 1
                out[(i, j)] = c.max(-T::one()).min(T::one());
            }
        }
    }
    Ok(out)
}

/// Reverse rule for [`cosine_rows`]: returns `(da, db)`.
pub fn cosine_rows_backward<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    dout: &Matrix<T>,
) -> (Matrix<T>, Matrix<T>) {
    assert_eq!(dout.shape(), (a.rows(), b.rows()));
    let na: Vec<T> = (0..a.rows()).map(|i| norm(a.row(i))).collect();
    let nb: Vec<T> = (0..b.rows()).map(|j| norm(b.row(j))).collect();
    let mut da = Matrix::zeros(a.rows(), a.cols());
    let mut db = Matrix::zeros(b.rows(), b.cols());
    for i in 0..a.rows() {
        if na[i] == T::zero() {
            continue;
        }
        for j in 0..b.rows() {
            if nb[j] == T::zero() {
                continue;
            }
            let g = dout[(i, j)];
            if g == T::zero() {
                continue;
            }
            let ai = a.row(i);
            let bj = b.row(j);
            let inv = T::one() / (na[i] * nb[j]);
            let c = dot(ai, bj) * inv;
            let ca = c / (na[i] * na[i]);
            let cb = c / (nb[j] * nb[j]);
            for (k, d) in da.row_mut(i).iter_mut().enumerate() {
                *d += g * (bj[k] * inv - ca * ai[k]);
            }
            for (k, d) in db.row_mut(j).iter_mut().enumerate() {
                *d += g * (ai[k] * inv - cb * bj[k]);
            }
        }
    }
    (da, db)
}
