use serde::{Deserialize, Serialize};

use super::VectorField;
use crate::scalar::Arith;

/// Van der Pol oscillator `ẋ₁ = x₂, ẋ₂ = −x₁ + η(1 − x₁²)x₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VanDerPol {
    pub eta: f64,
}

impl Default for VanDerPol {
    fn default() -> Self {
        Self { eta: 1.0 }
    }
}

pub fn vanderpol(eta: f64) -> VanDerPol {
    VanDerPol { eta }
}

impl VectorField for VanDerPol {
    fn name(&self) -> &str {
        "vanderpol"
    }

    fn state_dim(&self) -> usize {
        2
    }

    fn field<T: Arith>(&self, _t: f64, x: &[T], _w: &[T]) -> Vec<T> {
        let c = T::cst;
        vec![x[1], -x[0] + c(self.eta) * (c(1.0) - x[0].sqr()) * x[1]]
    }

    fn jacobian<T: Arith>(&self, _t: f64, x: &[T], _w: &[T]) -> Vec<T> {
        let c = T::cst;
        vec![
            c(0.0),
            c(1.0),
            c(-1.0) - c(2.0 * self.eta) * x[0] * x[1],
            c(self.eta) * (c(1.0) - x[0].sqr()),
        ]
    }
}
