//! Benchmark fixtures.

use holgeo::clifton_pohl;
use holgeo::geodesic::{GeodesicGerm, GeodesicMetric};
use holgeo::{ComplexPath, Expr};
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Clifton-Pohl plane as a general metric.
pub fn clifton_pohl_metric() -> GeodesicMetric {
    clifton_pohl::metric().into()
}

/// Non-null germ at (1, 0) with velocity (1, 1) whose real geodesic has a pole near t = 1.
pub fn clifton_pohl_germ() -> GeodesicGerm {
    GeodesicGerm::new(c(0.0), vec![c(1.0), c(0.0)], vec![c(1.0), c(1.0)])
}

/// Real segment [0, 2] with a detour of radius 0.1 around t = 1.
pub fn detour_path() -> ComplexPath {
    ComplexPath::real_detour(0.0, 2.0, 1.0, 0.1, true).expect("valid detour")
}

/// Unit circle around the origin.
pub fn unit_loop() -> ComplexPath {
    ComplexPath::circle(c(0.0), 1.0, 0.0, 1.0).expect("valid circle")
}

/// Warping function of a coercive example-class metric.
pub fn exp_warping() -> Expr {
    Expr::parse("exp(u1)").expect("valid expression")
}
