//! Adaptive integration of first-order complex ODE systems `w' = F(w, z)`
//! along piecewise paths in the complex `z` plane.
//!
//! The stepper is the Dormand–Prince 5(4) pair with PI step-size control,
//! run in the arc-length parameter of each path segment. Blow-up of the
//! state is reported as a pole, step-size collapse with a bounded state as a
//! suspected branch point.

mod export;
mod integrator;
mod path;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, Expr};

pub use export::{termination_json, write_csv};
pub use integrator::{integrate_along, integrate_loop};
pub use path::{ComplexPath, Orientation, Segment, CONTIGUITY_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),
    #[error("loop is not closed: starts at {start}, ends at {end}")]
    OpenLoop { start: Complex64, end: Complex64 },
    #[error("state dimension {got} does not match field dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("field not evaluable at the path start: {0}")]
    InitialField(FieldError),
}

/// Failure of a right-hand side evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("point is not metrically ordinary")]
    NotOrdinary,
    #[error("{0}")]
    Other(String),
}

/// Right-hand side `F(z, w)` of a complex ODE system of fixed dimension.
pub trait ComplexField {
    fn dim(&self) -> usize;
    fn eval(&self, z: Complex64, w: &[Complex64], dw: &mut [Complex64]) -> Result<(), FieldError>;
}

impl<T: ComplexField + ?Sized> ComplexField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: Complex64, w: &[Complex64], dw: &mut [Complex64]) -> Result<(), FieldError> {
        (**self).eval(z, w, dw)
    }
}

impl<T: ComplexField + ?Sized> ComplexField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: Complex64, w: &[Complex64], dw: &mut [Complex64]) -> Result<(), FieldError> {
        (**self).eval(z, w, dw)
    }
}

impl<T: ComplexField + ?Sized> ComplexField for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: Complex64, w: &[Complex64], dw: &mut [Complex64]) -> Result<(), FieldError> {
        (**self).eval(z, w, dw)
    }
}

/// Closure-backed field.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(Complex64, &[Complex64], &mut [Complex64]) -> Result<(), FieldError>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> ComplexField for FnField<F>
where
    F: Fn(Complex64, &[Complex64], &mut [Complex64]) -> Result<(), FieldError>,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, z: Complex64, w: &[Complex64], dw: &mut [Complex64]) -> Result<(), FieldError> {
        (self.f)(z, w, dw)
    }
}

/// Field given by expressions: `u1` is the time variable `z`, `u2..u{M+1}`
/// are the state components `w_1..w_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprField {
    components: Vec<Expr>,
}

impl ExprField {
    pub fn new(components: Vec<Expr>) -> Result<Self, OdeError> {
        let m = components.len();
        if m == 0 {
            return Err(OdeError::Dimension {
                expected: 1,
                got: 0,
            });
        }
        for e in &components {
            if let Some(v) = e.max_var() {
                if v > m {
                    return Err(OdeError::Dimension {
                        expected: m,
                        got: v,
                    });
                }
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }
}

impl ComplexField for ExprField {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn eval(&self, z: Complex64, w: &[Complex64], dw: &mut [Complex64]) -> Result<(), FieldError> {
        let mut point = Vec::with_capacity(w.len() + 1);
        point.push(z);
        point.extend_from_slice(w);
        for (out, e) in dw.iter_mut().zip(&self.components) {
            *out = e.eval(&point)?;
        }
        Ok(())
    }
}

/// Tolerances and step bounds. Step sizes are arc lengths along the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Multiplied by `max(1, path length)` before use.
    pub min_step: f64,
    pub blowup_threshold: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            min_step: 1e-12,
            blowup_threshold: 1e8,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), OdeError> {
        let bad = |m: &str| Err(OdeError::InvalidConfig(m.to_string()));
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad("rel_tol must lie in (0, 1)");
        }
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return bad("abs_tol must lie in (0, 1)");
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step) {
            return bad("need 0 < min_step < max_step");
        }
        if !(self.blowup_threshold > 1.0) {
            return bad("blowup_threshold must exceed 1");
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityKind {
    Pole,
    SuspectedBranchPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// `|w|` exceeded the blow-up threshold near `z_est`.
    Singularity {
        z_est: Complex64,
        s: f64,
        kind: SingularityKind,
    },
    /// Step size fell below the minimum with a bounded state.
    StepCollapse {
        z: Complex64,
        s: f64,
    },
    FieldFailure {
        z: Complex64,
        s: f64,
        message: String,
    },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    /// Where integration stopped, if it stopped early.
    pub fn location(&self) -> Option<Complex64> {
        match self {
            Termination::Completed => None,
            Termination::Singularity { z_est, .. } => Some(*z_est),
            Termination::StepCollapse { z, .. } | Termination::FieldFailure { z, .. } => Some(*z),
        }
    }

    /// Local classification of an early stop.
    pub fn singularity_kind(&self) -> Option<SingularityKind> {
        match self {
            Termination::Completed => None,
            Termination::Singularity { kind, .. } => Some(*kind),
            Termination::StepCollapse { .. } => Some(SingularityKind::SuspectedBranchPoint),
            Termination::FieldFailure { .. } => Some(SingularityKind::Pole),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Arc length from the path start.
    pub s: f64,
    pub z: Complex64,
    pub w: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory always holds the initial sample")
    }

    pub fn final_state(&self) -> &[Complex64] {
        &self.last().w
    }
}
