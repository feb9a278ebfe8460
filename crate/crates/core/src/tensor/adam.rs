use super::DenseMatrix;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment estimates for one parameter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    m: DenseMatrix,
    v: DenseMatrix,
    step: u64,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize, config: AdamConfig) -> Self {
        Self {
            config,
            m: DenseMatrix::zeros(rows, cols),
            v: DenseMatrix::zeros(rows, cols),
            step: 0,
        }
    }

    pub fn for_param(param: &DenseMatrix, config: AdamConfig) -> Self {
        Self::new(param.rows(), param.cols(), config)
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn second_moment(&self) -> &DenseMatrix {
        &self.v
    }

    /// One bias-corrected Adam update of `param` in place.
    pub fn step(&mut self, param: &mut DenseMatrix, grad: &DenseMatrix) -> Result<()> {
        param.same_shape(grad, "adam_step")?;
        param.same_shape(&self.m, "adam_step")?;
        if !(self.config.learning_rate >= 0.0) {
            return Err(invalid("learning rate must be nonnegative"));
        }
        let AdamConfig {
            learning_rate: lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        self.step += 1;
        let bias1 = 1.0 - libm::pow(beta1, self.step as f64);
        let bias2 = 1.0 - libm::pow(beta2, self.step as f64);
        let params = param.as_mut_slice();
        let m = self.m.as_mut_slice();
        let v = self.v.as_mut_slice();
        for (((p, &g), m), v) in params.iter_mut().zip(grad.as_slice()).zip(m).zip(v) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            let delta = lr * m_hat / (libm::sqrt(v_hat) + epsilon);
            // A zero step must not flip the sign of a zero parameter.
            if delta != 0.0 {
                *p -= delta;
            }
        }
        Ok(())
    }
}
