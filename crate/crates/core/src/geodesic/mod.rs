//! Geodesic systems of meromorphic metrics in complex time.
//!
//! The state is `(u, u̇)` of dimension `2N`; the field is
//! `(u, u̇) ↦ (u̇, −Γ^k_ij(u) u̇^i u̇^j)`.

mod probe;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_ode::{
    integrate_along, ComplexField, ComplexPath, FieldError, IntegratorConfig, OdeError, Trajectory,
};
use crate::metric::{
    christoffel_general, christoffel_warped, is_metrically_ordinary, ChristoffelTensor,
    MetricError, MetricSpec, WarpedSpec,
};

pub use crate::continuation::HalfPlane;
pub use probe::{
    probe_real_completeness, CompletenessEvidence, DetourOutcome, DetourRecord, ObstructionKind,
    ProbeConfig, ProbeObstruction, Verdict,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeodesicError {
    #[error("germ dimension {got} does not match metric dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("germ position is not metrically ordinary")]
    NotOrdinary,
    #[error("path starts at {path_start}, germ time is {z0}")]
    PathStart {
        z0: Complex64,
        path_start: Complex64,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Initial data: time `z0`, position and velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicGerm {
    pub z0: Complex64,
    pub position: Vec<Complex64>,
    pub velocity: Vec<Complex64>,
}

impl GeodesicGerm {
    pub fn new(z0: Complex64, position: Vec<Complex64>, velocity: Vec<Complex64>) -> Self {
        Self {
            z0,
            position,
            velocity,
        }
    }

    /// Real time and real initial data.
    pub fn real(t0: f64, position: &[f64], velocity: &[f64]) -> Self {
        let c = |x: &f64| Complex64::new(*x, 0.0);
        Self::new(
            Complex64::new(t0, 0.0),
            position.iter().map(c).collect(),
            velocity.iter().map(c).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// Concatenated `(u, u̇)` state.
    pub fn state(&self) -> Vec<Complex64> {
        let mut s = self.position.clone();
        s.extend_from_slice(&self.velocity);
        s
    }
}

/// Metric with the route used for its Christoffel symbols.
#[derive(Debug, Clone, PartialEq)]
pub enum GeodesicMetric {
    /// Koszul formula on a general coefficient matrix.
    General(MetricSpec),
    /// Closed-form warped-product symbols.
    Warped(WarpedSpec),
}

impl GeodesicMetric {
    pub fn dim(&self) -> usize {
        match self {
            GeodesicMetric::General(m) => m.dim(),
            GeodesicMetric::Warped(w) => w.dim(),
        }
    }

    pub fn christoffel(&self, p: &[Complex64]) -> Result<ChristoffelTensor, MetricError> {
        match self {
            GeodesicMetric::General(m) => christoffel_general(m, p),
            GeodesicMetric::Warped(w) => christoffel_warped(w, p),
        }
    }

    pub fn is_ordinary(&self, p: &[Complex64]) -> bool {
        match self {
            GeodesicMetric::General(m) => is_metrically_ordinary(m, p),
            GeodesicMetric::Warped(w) => is_metrically_ordinary(&w.to_metric(), p),
        }
    }

    pub fn as_warped(&self) -> Option<&WarpedSpec> {
        match self {
            GeodesicMetric::Warped(w) => Some(w),
            GeodesicMetric::General(_) => None,
        }
    }
}

impl From<MetricSpec> for GeodesicMetric {
    fn from(m: MetricSpec) -> Self {
        GeodesicMetric::General(m)
    }
}

impl From<WarpedSpec> for GeodesicMetric {
    fn from(w: WarpedSpec) -> Self {
        GeodesicMetric::Warped(w)
    }
}

/// Right-hand side of the geodesic system.
#[derive(Debug, Clone)]
pub struct GeodesicField {
    metric: GeodesicMetric,
}

impl GeodesicField {
    pub fn metric(&self) -> &GeodesicMetric {
        &self.metric
    }
}

pub fn geodesic_field(m: impl Into<GeodesicMetric>) -> GeodesicField {
    GeodesicField { metric: m.into() }
}

impl ComplexField for GeodesicField {
    fn dim(&self) -> usize {
        2 * self.metric.dim()
    }

    fn eval(&self, _z: Complex64, w: &[Complex64], dw: &mut [Complex64]) -> Result<(), FieldError> {
        let n = self.metric.dim();
        let (u, v) = w.split_at(n);
        let gamma = self.metric.christoffel(u).map_err(|e| match e {
            MetricError::CoefficientPole { source, .. } => FieldError::Eval(source),
            MetricError::NotOrdinary => FieldError::NotOrdinary,
            other => FieldError::Other(other.to_string()),
        })?;
        dw[..n].copy_from_slice(v);
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let g = gamma.get(k, i, j);
                    if g != Complex64::new(0.0, 0.0) {
                        acc += g * v[i] * v[j];
                    }
                }
            }
            dw[n + k] = -acc;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstIntegralMode {
    U1Nonconstant,
    U1Constant,
}

/// Constants `A_1..A_N` of a warped geodesic; `values[0]` is `A_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegralSet {
    pub values: Vec<Complex64>,
    pub mode: FirstIntegralMode,
}

/// Evaluates the warped first integrals at `(u, u̇)` in a fixed mode.
pub fn first_integrals_at(
    w: &WarpedSpec,
    u: &[Complex64],
    v: &[Complex64],
    mode: FirstIntegralMode,
) -> Result<Vec<Complex64>, GeodesicError> {
    let c = w.eval_coefficients(u)?;
    let n = w.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    match mode {
        FirstIntegralMode::U1Nonconstant => {
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 1..n {
                let (a, _) = c.a[k - 1];
                let (f, _) = c.f[k - 1];
                out[k] = v[k] * v[k] * f * a * a;
                sum += out[k] / a;
            }
            out[0] = c.b1.0 * v[0] * v[0] + sum;
        }
        FirstIntegralMode::U1Constant => {
            for k in 1..n {
                let (f, _) = c.f[k - 1];
                out[k] = v[k] * v[k] * f;
            }
        }
    }
    if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(GeodesicError::NotOrdinary);
    }
    Ok(out)
}

/// `A_k = (u̇^k)² f_k a_k²`, `A_1 = b₁(u̇¹)² + Σ A_l/a_l`; when `u̇¹ = 0`
/// exactly, `A_k = (u̇^k)² f_k` and `A_1 = 0`.
pub fn first_integrals(
    w: &WarpedSpec,
    g: &GeodesicGerm,
) -> Result<FirstIntegralSet, GeodesicError> {
    check_germ(w.dim(), g)?;
    if !is_metrically_ordinary(&w.to_metric(), &g.position) {
        return Err(GeodesicError::NotOrdinary);
    }
    let mode = if g.velocity[0] == Complex64::new(0.0, 0.0) {
        FirstIntegralMode::U1Constant
    } else {
        FirstIntegralMode::U1Nonconstant
    };
    let values = first_integrals_at(w, &g.position, &g.velocity, mode)?;
    Ok(FirstIntegralSet { values, mode })
}

fn check_germ(dim: usize, g: &GeodesicGerm) -> Result<(), GeodesicError> {
    if g.position.len() != dim || g.velocity.len() != dim {
        return Err(GeodesicError::Dimension {
            expected: dim,
            got: g.position.len().max(g.velocity.len()),
        });
    }
    Ok(())
}

/// Result of [`shoot`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub trajectory: Trajectory,
    /// Initial first integrals, for warped metrics.
    pub first_integrals: Option<FirstIntegralSet>,
    /// `drift[s][k] = |A_k(sample s) − A_k(germ)|`, for warped metrics.
    pub drift: Vec<Vec<f64>>,
}

impl Shot {
    pub fn max_drift(&self) -> f64 {
        self.drift.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn final_position(&self) -> &[Complex64] {
        let s = self.trajectory.final_state();
        &s[..s.len() / 2]
    }

    pub fn final_velocity(&self) -> &[Complex64] {
        let s = self.trajectory.final_state();
        &s[s.len() / 2..]
    }
}

/// Integrates the geodesic through `g` along `path`.
pub fn shoot(
    m: &GeodesicMetric,
    g: &GeodesicGerm,
    path: &ComplexPath,
    config: &IntegratorConfig,
) -> Result<Shot, GeodesicError> {
    check_germ(m.dim(), g)?;
    if (path.start() - g.z0).norm() > 1e-12 * g.z0.norm().max(1.0) {
        return Err(GeodesicError::PathStart {
            z0: g.z0,
            path_start: path.start(),
        });
    }
    if !m.is_ordinary(&g.position) {
        return Err(GeodesicError::NotOrdinary);
    }
    let field = geodesic_field(m.clone());
    let trajectory = integrate_along(&field, &g.state(), path, config)?;
    let (first, drift) = match m.as_warped() {
        Some(w) => {
            let set = first_integrals(w, g)?;
            let n = w.dim();
            let drift = trajectory
                .samples
                .iter()
                .map(
                    |s| match first_integrals_at(w, &s.w[..n], &s.w[n..], set.mode) {
                        Ok(a) => a
                            .iter()
                            .zip(&set.values)
                            .map(|(x, y)| (x - y).norm())
                            .collect(),
                        Err(_) => vec![f64::INFINITY; n],
                    },
                )
                .collect();
            (Some(set), drift)
        }
        None => (None, Vec::new()),
    };
    Ok(Shot {
        trajectory,
        first_integrals: first,
        drift,
    })
}
