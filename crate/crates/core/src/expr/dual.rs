use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex value with its gradient in the coordinates `u1..uN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualValue {
    pub value: Complex64,
    pub partials: Vec<Complex64>,
}

impl DualValue {
    pub fn constant(value: Complex64, dim: usize) -> Self {
        Self {
            value,
            partials: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn variable(value: Complex64, index: usize, dim: usize) -> Self {
        let mut d = Self::constant(value, dim);
        d.partials[index] = Complex64::new(1.0, 0.0);
        d
    }

    pub fn dim(&self) -> usize {
        self.partials.len()
    }

    /// Chain rule: new value `f` with `df/dself = slope`.
    pub(crate) fn chain(&self, f: Complex64, slope: Complex64) -> Self {
        Self {
            value: f,
            partials: self.partials.iter().map(|p| p * slope).collect(),
        }
    }

    pub(crate) fn combine(
        &self,
        other: &Self,
        value: Complex64,
        da: Complex64,
        db: Complex64,
    ) -> Self {
        Self {
            value,
            partials: self
                .partials
                .iter()
                .zip(&other.partials)
                .map(|(p, q)| p * da + q * db)
                .collect(),
        }
    }
}
