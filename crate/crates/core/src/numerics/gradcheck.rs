//! Central finite-difference verification of analytic gradients.

use super::params::{ParamId, ParamStore};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-4;

/// Magnitude below which errors are measured absolutely rather than
/// relative to the gradient size.
pub const REL_ERROR_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct ParamCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub max_abs_grad: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub params: Vec<ParamCheck>,
    pub tolerance: f64,
    pub passed: bool,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.params.iter().map(|p| p.max_rel_error).fold(0.0, f64::max)
    }
}

fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares the gradients produced by `loss_and_grad` against central
/// differences of its loss.
///
/// `loss_and_grad` must evaluate the loss at the store's current values and
/// populate every gradient slot. It has to be deterministic: it is called
/// twice up front and the two losses must agree bit for bit.
pub fn check_gradients<T, F>(
    store: &mut ParamStore<T>,
    mut loss_and_grad: F,
    tolerance: f64,
) -> Result<GradCheckReport>
where
    T: Scalar,
    F: FnMut(&mut ParamStore<T>) -> Result<T>,
{
    store.clear_gradients();
    let l0 = loss_and_grad(store)?;
    let analytic: Vec<_> = store.ids().map(|id| store.grad(id).clone()).collect();
    store.clear_gradients();
    let l1 = loss_and_grad(store)?;
    if l0.to_f64_lossless().to_bits() != l1.to_f64_lossless().to_bits() {
        return Err(Error::Protocol(format!(
            "loss closure is not deterministic: {l0} then {l1}"
        )));
    }

    let h = T::of(FD_STEP);
    let two_h = T::of(2.0 * FD_STEP);
    let ids: Vec<ParamId> = store.ids().collect();
    let mut params = Vec::with_capacity(ids.len());
    for id in ids {
        let n = store.value(id).as_slice().len();
        let mut worst = 0.0f64;
        let mut biggest = 0.0f64;
        for i in 0..n {
            let x = store.value(id).as_slice()[i];
            store.value_mut(id).as_mut_slice()[i] = x + h;
            let lp = loss_and_grad(store)?;
            store.value_mut(id).as_mut_slice()[i] = x - h;
            let lm = loss_and_grad(store)?;
            store.value_mut(id).as_mut_slice()[i] = x;
            let numeric = ((lp - lm) / two_h).to_f64_lossless();
            let a = analytic[id.0].as_slice()[i].to_f64_lossless();
            worst = worst.max(rel_error(a, numeric));
            biggest = biggest.max(a.abs());
        }
        params.push(ParamCheck {
            name: store.name(id).to_string(),
            max_rel_error: worst,
            max_abs_grad: biggest,
        });
    }
    store.clear_gradients();
    let passed = params.iter().all(|p| p.max_rel_error <= tolerance);
    Ok(GradCheckReport {
        params,
        tolerance,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    #[test]
    fn quadratic_gradient_is_exact() {
        let mut store = ParamStore::<f64>::new();
        let x = store.add("x", Matrix::from_vec(1, 3, vec![0.3, -1.7, 2.2]).unwrap());
        let report = check_gradients(
            &mut store,
            |s| {
                let v = s.value(x).clone();
                let loss = 0.5 * v.as_slice().iter().map(|a| a * a).sum::<f64>();
                *s.grad_mut(x) = v;
                Ok(loss)
            },
            1e-8,
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn constant_closure_has_zero_gradients() {
        let mut store = ParamStore::<f64>::new();
        let x = store.add("x", Matrix::filled(2, 2, 1.0));
        let report = check_gradients(
            &mut store,
            |s| {
                s.grad_mut(x);
                Ok(0.0)
            },
            1e-12,
        )
        .unwrap();
        assert!(report.passed);
        assert_eq!(report.params[0].max_abs_grad, 0.0);
    }

    #[test]
    fn wrong_gradient_fails() {
        let mut store = ParamStore::<f64>::new();
        let x = store.add("x", Matrix::filled(1, 1, 2.0));
        let report = check_gradients(
            &mut store,
            |s| {
                let v = s.value(x)[(0, 0)];
                s.grad_mut(x)[(0, 0)] = v; // true gradient is 2v
                Ok(v * v)
            },
            1e-4,
        )
        .unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn nondeterministic_closure_is_protocol_error() {
        let mut store = ParamStore::<f64>::new();
        let x = store.add("x", Matrix::filled(1, 1, 2.0));
        let mut calls = 0.0;
        let err = check_gradients(
            &mut store,
            |s| {
                calls += 1.0;
                s.grad_mut(x);
                Ok(calls)
            },
            1e-4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Protocol(_)));
    }
}
