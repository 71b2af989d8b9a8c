//! Convex per-observation losses `l(y, η)` with their first two derivatives
//! in the linear predictor.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

pub trait LossModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn value(&self, y: f64, eta: f64) -> f64;

    /// `u = ∂l/∂η`.
    fn first_derivative(&self, y: f64, eta: f64) -> f64;

    /// `w = ∂²l/∂η²`, never negative.
    fn second_derivative(&self, y: f64, eta: f64) -> f64;

    /// Whether the loss is applied to the centered response. Losses on a
    /// bounded response domain see the raw values.
    fn uses_centered_response(&self) -> bool {
        true
    }

    /// Reject responses outside the loss's domain.
    fn check_response(&self, _y: ArrayView1<f64>) -> Result<()> {
        Ok(())
    }

    /// Total loss `Σ_i l(y_i, η_i)`.
    fn total(&self, y: ArrayView1<f64>, eta: ArrayView1<f64>) -> f64 {
        y.iter().zip(eta).map(|(&a, &b)| self.value(a, b)).sum()
    }

    fn gradient_terms(&self, y: ArrayView1<f64>, eta: ArrayView1<f64>) -> Array1<f64> {
        y.iter()
            .zip(eta)
            .map(|(&a, &b)| self.first_derivative(a, b))
            .collect()
    }

    fn weights(&self, y: ArrayView1<f64>, eta: ArrayView1<f64>) -> Array1<f64> {
        y.iter()
            .zip(eta)
            .map(|(&a, &b)| self.second_derivative(a, b))
            .collect()
    }
}

/// `½ (y − η)²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredError;

impl LossModel for SquaredError {
    fn name(&self) -> &'static str {
        "squared"
    }

    fn value(&self, y: f64, eta: f64) -> f64 {
        0.5 * (y - eta) * (y - eta)
    }

    fn first_derivative(&self, y: f64, eta: f64) -> f64 {
        eta - y
    }

    fn second_derivative(&self, _y: f64, _eta: f64) -> f64 {
        1.0
    }
}

/// Binomial deviance for `y ∈ {0, 1}`: `log(1 + e^η) − y η`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Logistic;

fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

impl LossModel for Logistic {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn value(&self, y: f64, eta: f64) -> f64 {
        // y log p + (1 − y) log(1 − p) = yη − log(1 + e^η)
        softplus(eta) - y * eta
    }

    fn first_derivative(&self, y: f64, eta: f64) -> f64 {
        sigmoid(eta) - y
    }

    fn second_derivative(&self, _y: f64, eta: f64) -> f64 {
        let p = sigmoid(eta);
        p * (1.0 - p)
    }

    fn uses_centered_response(&self) -> bool {
        false
    }

    fn check_response(&self, y: ArrayView1<f64>) -> Result<()> {
        match y.iter().position(|&v| v != 0.0 && v != 1.0) {
            None => Ok(()),
            Some(i) => Err(Error::Domain(format!(
                "logistic loss needs responses in {{0, 1}}, observation {i} is {}",
                y[i]
            ))),
        }
    }
}

pub fn squared_error_loss() -> SquaredError {
    SquaredError
}

pub fn logistic_loss() -> Logistic {
    Logistic
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn logistic_at_zero() {
        let l = logistic_loss();
        assert_relative_eq!(l.value(1.0, 0.0), 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(l.first_derivative(1.0, 0.0), -0.5);
        assert_relative_eq!(l.second_derivative(1.0, 0.0), 0.25);
        assert_relative_eq!(l.value(0.0, 0.0), 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(l.first_derivative(0.0, 0.0), 0.5);
    }

    #[test]
    fn logistic_is_stable_at_extremes() {
        let l = logistic_loss();
        for eta in [-500.0, 500.0] {
            for y in [0.0, 1.0] {
                let v = l.value(y, eta);
                assert!(v.is_finite() && v >= 0.0);
                assert!(l.second_derivative(y, eta) >= 0.0);
            }
        }
        assert!(l.value(1.0, 500.0) < 1e-200);
        assert_relative_eq!(l.value(0.0, 500.0), 500.0);
    }

    #[test]
    fn logistic_rejects_non_binary() {
        let err = logistic_loss().check_response(array![0.0, 1.0, 0.5].view());
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn squared_error_values() {
        let l = squared_error_loss();
        assert_eq!(l.value(2.0, 2.0), 0.0);
        assert_eq!(l.first_derivative(2.0, 2.0), 0.0);
        assert_eq!(l.value(1.0, 0.0), 0.5);
        assert_eq!(l.first_derivative(1.0, 0.0), -1.0);
        assert_eq!(l.second_derivative(1.0, 0.0), 1.0);
    }
}
