//! Complex-analytic geodesic completeness engine.
//!
//! Geodesics of meromorphic metrics are integrated along paths in the complex
//! time plane; singularities met on the real axis are flanked by detours, and
//! closed-form completeness criteria for warped products and the
//! Clifton-Pohl torus are cross-checked against numerical continuation.

pub mod clifton_pohl;
pub mod coercivity;
pub mod complex_ode;
pub mod continuation;
pub mod expr;
pub mod geodesic;
pub mod metric;

pub use complex_ode::{ComplexPath, IntegratorConfig, Termination, Trajectory};
pub use expr::{DualValue, EvalError, Expr};
