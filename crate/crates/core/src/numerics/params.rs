//! Trainable parameter container with gradient slots and Adam state.

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Index of a parameter inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub usize);

#[derive(Debug, Clone)]
struct Param<T> {
    name: String,
    value: Matrix<T>,
    grad: Matrix<T>,
    grad_ready: bool,
    m: Matrix<T>,
    v: Matrix<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParamStore<T> {
    params: Vec<Param<T>>,
    step: u64,
}

/// Detached gradient buffers with the same layout as a store.
///
/// Workers fill their own `Gradients` and the owner reduces them in a
/// fixed order before handing the sum to the store.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    mats: Vec<Matrix<T>>,
}

impl<T: Scalar> Gradients<T> {
    #[inline]
    pub fn get(&self, id: ParamId) -> &Matrix<T> {
        &self.mats[id.0]
    }

    #[inline]
    pub fn get_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        &mut self.mats[id.0]
    }

    pub fn add_assign(&mut self, other: &Gradients<T>) {
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, k: T) {
        for m in &mut self.mats {
            m.as_mut_slice().iter_mut().for_each(|x| *x *= k);
        }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        Self {
            params: Vec::new(),
            step: 0,
        }
    }

    pub fn add(&mut self, name: impl Into<String>, value: Matrix<T>) -> ParamId {
        let (r, c) = value.shape();
        self.params.push(Param {
            name: name.into(),
            grad: Matrix::zeros(r, c),
            grad_ready: false,
            m: Matrix::zeros(r, c),
            v: Matrix::zeros(r, c),
            value,
        });
        ParamId(self.params.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.params[id.0].name
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    #[inline]
    pub fn value(&self, id: ParamId) -> &Matrix<T> {
        &self.params[id.0].value
    }

    #[inline]
    pub fn value_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        &mut self.params[id.0].value
    }

    #[inline]
    pub fn grad(&self, id: ParamId) -> &Matrix<T> {
        &self.params[id.0].grad
    }

    /// Mutable gradient slot; marks it as populated.
    pub fn grad_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        let p = &mut self.params[id.0];
        p.grad_ready = true;
        &mut p.grad
    }

    pub fn grad_ready(&self, id: ParamId) -> bool {
        self.params[id.0].grad_ready
    }

    /// Fresh zero gradient buffers matching every parameter.
    pub fn zero_gradients(&self) -> Gradients<T> {
        Gradients {
            mats: self
                .params
                .iter()
                .map(|p| Matrix::zeros(p.value.rows(), p.value.cols()))
                .collect(),
        }
    }

    /// Installs a full set of gradients, marking every slot populated.
    pub fn set_gradients(&mut self, grads: Gradients<T>) -> Result<()> {
        if grads.mats.len() != self.params.len() {
            return Err(Error::Consistency(format!(
                "{} gradient buffers for {} parameters",
                grads.mats.len(),
                self.params.len()
            )));
        }
        for (p, g) in self.params.iter_mut().zip(grads.mats) {
            if g.shape() != p.value.shape() {
                return Err(Error::Consistency(format!(
                    "gradient for '{}' is {:?}, parameter is {:?}",
                    p.name,
                    g.shape(),
                    p.value.shape()
                )));
            }
            p.grad = g;
            p.grad_ready = true;
        }
        Ok(())
    }

    pub fn clear_gradients(&mut self) {
        for p in &mut self.params {
            p.grad.fill(T::zero());
            p.grad_ready = false;
        }
    }

    /// Snapshot of all parameter values (for best-checkpoint tracking).
    pub fn values(&self) -> Vec<Matrix<T>> {
        self.params.iter().map(|p| p.value.clone()).collect()
    }

    pub fn restore_values(&mut self, values: Vec<Matrix<T>>) -> Result<()> {
        if values.len() != self.params.len() {
            return Err(Error::Consistency("snapshot length differs from store".into()));
        }
        for (p, v) in self.params.iter_mut().zip(values) {
            if v.shape() != p.value.shape() {
                return Err(Error::Consistency(format!("snapshot shape for '{}'", p.name)));
            }
            p.value = v;
        }
        Ok(())
    }

    /// One Adam update over every parameter, then clears gradients.
    pub fn adam_step(&mut self, lr: T, cfg: &AdamConfig) -> Result<()> {
        if let Some(p) = self.params.iter().find(|p| !p.grad_ready) {
            return Err(Error::Consistency(format!(
                "gradient for '{}' was never populated",
                p.name
            )));
        }
        self.step += 1;
        let b1 = T::of(cfg.beta1);
        let b2 = T::of(cfg.beta2);
        let eps = T::of(cfg.eps);
        let t = self.step as i32;
        let bc1 = T::one() - b1.powi(t);
        let bc2 = T::one() - b2.powi(t);
        for p in &mut self.params {
            let value = p.value.as_mut_slice();
            let grad = p.grad.as_slice();
            let m = p.m.as_mut_slice();
            let v = p.v.as_mut_slice();
            for i in 0..value.len() {
                let g = grad[i];
                m[i] = b1 * m[i] + (T::one() - b1) * g;
                v[i] = b2 * v[i] + (T::one() - b2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                value[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        self.clear_gradients();
        Ok(())
    }
}
