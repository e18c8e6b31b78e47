//! Scenario files: schema, defaults and conversion into core inputs.

use std::fmt;

use holgeo::clifton_pohl::{self, CPInitial};
use holgeo::coercivity::ClassifyOptions;
use holgeo::continuation::ContinuationConfig;
use holgeo::geodesic::{GeodesicGerm, GeodesicMetric, ProbeConfig};
use holgeo::metric::{MetricSpec, WarpedSpec};
use holgeo::{ComplexPath, Expr, IntegratorConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Schema violation located by a JSON pointer into the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationError {
    pub pointer: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() {
            "/"
        } else {
            &self.pointer
        };
        write!(f, "invalid scenario at {at}: {}", self.message)
    }
}

impl std::error::Error for ValidationError {}

/// A complex number written as `x` or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Pair([f64; 2]),
}

impl Num {
    pub fn value(self) -> Complex64 {
        match self {
            Num::Real(x) => Complex64::new(x, 0.0),
            Num::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl Default for Num {
    fn default() -> Self {
        Num::Real(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricInput {
    /// `b1(u1) du1² + Σ a_k(u1) f_k(u^k) (du^k)²`.
    Warped {
        b1: String,
        a: Vec<String>,
        f: Vec<String>,
    },
    /// Symmetric matrix of coefficient expressions.
    General {
        matrix: Vec<Vec<String>>,
    },
    CliftonPohl,
    /// `h′² du1² + Σ f_k² (du^k)²/P_k(h)`; coefficients lowest degree last.
    WarpedExample {
        h: String,
        f: Vec<String>,
        p: Vec<Vec<Num>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermInput {
    #[serde(default)]
    pub t0: Num,
    pub position: Vec<Num>,
    pub velocity: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathInput {
    Line {
        from: Num,
        to: Num,
    },
    Polyline {
        points: Vec<Num>,
    },
    Circle {
        center: Num,
        radius: f64,
        #[serde(default)]
        angle: f64,
        #[serde(default = "one")]
        turns: f64,
    },
    RealDetour {
        a: f64,
        b: f64,
        center: f64,
        radius: f64,
        #[serde(default = "yes")]
        upper: bool,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn eight() -> usize {
    8
}

/// Every section is optional; each verb checks for the ones it needs.
/// Configuration sections are always materialized with defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricInput>,
    /// Evaluation point for `christoffel`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub germ: Option<GermInput>,
    /// Batch alternative to `germ` for `probe`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub germs: Option<Vec<GermInput>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<[f64; 2]>,
    /// Closed-form germ in `u1` for `monodromy`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Num>,
    #[serde(default = "eight")]
    pub max_turns: usize,
    /// Clifton-Pohl initial data `{alpha, beta, x, y}` for `clifton-pohl classify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<CPInitial>>,
    #[serde(default)]
    pub seed: u64,
    /// Shared by every verb; overrides the integrator inside `probe` and `continuation`.
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub continuation: ContinuationConfig,
    #[serde(default)]
    pub classify: ClassifyOptions,
}

impl Default for Scenario {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1")))
            }
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ValidationError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = pointer_of(e.path());
            ValidationError::new(pointer, e.into_inner().to_string())
        })
    }

    /// Applies command-line overrides and propagates the shared integrator.
    pub fn resolve(mut self, seed: Option<u64>, tol: Option<f64>) -> Result<Self, ValidationError> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(t) = tol {
            self.integrator.rel_tol = t;
            self.integrator.abs_tol = t * 1e-2;
        }
        self.integrator
            .validate()
            .map_err(|e| ValidationError::new("/integrator", e.to_string()))?;
        self.probe.integrator = self.integrator;
        self.continuation.integrator = self.integrator;
        self.classify.sampling.continuation.integrator = self.integrator;
        self.classify.sampling.seed = self.seed;
        if self.max_turns == 0 {
            return Err(ValidationError::new("/max_turns", "must be at least 1"));
        }
        if let Some([a, b]) = self.horizon {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(ValidationError::new("/horizon", "need finite t0 < t1"));
            }
        }
        Ok(self)
    }

    pub fn require<'a, T>(
        field: &'a Option<T>,
        name: &str,
        verb: &str,
    ) -> Result<&'a T, ValidationError> {
        field.as_ref().ok_or_else(|| {
            ValidationError::new(format!("/{name}"), format!("required by `{verb}`"))
        })
    }
}

fn parse(text: &str, dim: usize, pointer: String) -> Result<Expr, ValidationError> {
    Expr::parse_with_dim(text, dim).map_err(|e| ValidationError::new(pointer, e.to_string()))
}

/// Metric for geodesic computations; `warped_example` is classification-only.
pub fn geodesic_metric(m: &MetricInput, verb: &str) -> Result<GeodesicMetric, ValidationError> {
    match m {
        MetricInput::Warped { b1, a, f } => Ok(GeodesicMetric::Warped(warped_spec(b1, a, f)?)),
        MetricInput::General { matrix } => {
            let n = matrix.len();
            let mut rows = Vec::with_capacity(n);
            for (i, row) in matrix.iter().enumerate() {
                let mut parsed = Vec::with_capacity(row.len());
                for (j, e) in row.iter().enumerate() {
                    parsed.push(parse(e, n, format!("/metric/matrix/{i}/{j}"))?);
                }
                rows.push(parsed);
            }
            MetricSpec::from_matrix(rows)
                .map(GeodesicMetric::General)
                .map_err(|e| ValidationError::new("/metric/matrix", e.to_string()))
        }
        MetricInput::CliftonPohl => Ok(GeodesicMetric::General(clifton_pohl::metric())),
        MetricInput::WarpedExample { .. } => Err(ValidationError::new(
            "/metric/type",
            format!("warped_example supports classify-warped only, not `{verb}`"),
        )),
    }
}

pub fn warped_spec(b1: &str, a: &[String], f: &[String]) -> Result<WarpedSpec, ValidationError> {
    let n = a.len() + 1;
    if f.len() != a.len() {
        return Err(ValidationError::new(
            "/metric/f",
            format!("expected {} entries to match `a`, got {}", a.len(), f.len()),
        ));
    }
    let b1 = parse(b1, n, "/metric/b1".into())?;
    let a = a
        .iter()
        .enumerate()
        .map(|(k, e)| parse(e, n, format!("/metric/a/{k}")))
        .collect::<Result<Vec<_>, _>>()?;
    let f = f
        .iter()
        .enumerate()
        .map(|(k, e)| parse(e, n, format!("/metric/f/{k}")))
        .collect::<Result<Vec<_>, _>>()?;
    WarpedSpec::new(b1, a, f).map_err(|e| ValidationError::new("/metric", e.to_string()))
}

/// `(h, f, coefficient lists)` of a `warped_example` metric.
pub type ExampleClass = (Expr, Vec<Expr>, Vec<Vec<Complex64>>);

pub fn example_class(m: &MetricInput) -> Result<Option<ExampleClass>, ValidationError> {
    let MetricInput::WarpedExample { h, f, p } = m else {
        return Ok(None);
    };
    let n = f.len() + 1;
    let h = parse(h, n, "/metric/h".into())?;
    let f = f
        .iter()
        .enumerate()
        .map(|(k, e)| parse(e, n, format!("/metric/f/{k}")))
        .collect::<Result<Vec<_>, _>>()?;
    let p = p
        .iter()
        .map(|c| c.iter().map(|x| x.value()).collect())
        .collect();
    Ok(Some((h, f, p)))
}

pub fn germ(g: &GermInput, dim: usize, pointer: &str) -> Result<GeodesicGerm, ValidationError> {
    for (name, v) in [("position", &g.position), ("velocity", &g.velocity)] {
        if v.len() != dim {
            return Err(ValidationError::new(
                format!("{pointer}/{name}"),
                format!("expected {dim} components, got {}", v.len()),
            ));
        }
    }
    Ok(GeodesicGerm::new(
        g.t0.value(),
        g.position.iter().map(|x| x.value()).collect(),
        g.velocity.iter().map(|x| x.value()).collect(),
    ))
}

pub fn path(p: &PathInput) -> Result<ComplexPath, ValidationError> {
    let built = match p {
        PathInput::Line { from, to } => ComplexPath::line(from.value(), to.value()),
        PathInput::Polyline { points } => {
            let pts: Vec<Complex64> = points.iter().map(|x| x.value()).collect();
            ComplexPath::polyline(&pts)
        }
        PathInput::Circle {
            center,
            radius,
            angle,
            turns,
        } => ComplexPath::circle(center.value(), *radius, *angle, *turns),
        PathInput::RealDetour {
            a,
            b,
            center,
            radius,
            upper,
        } => ComplexPath::real_detour(*a, *b, *center, *radius, *upper),
    };
    built.map_err(|e| ValidationError::new("/path", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointer_locates_type_errors() {
        let err = Scenario::from_json(r#"{"germ": {"position": [1, "x"], "velocity": [0, 1]}}"#)
            .unwrap_err();
        assert_eq!(err.pointer, "/germ/position/1");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err =
            Scenario::from_json(r#"{"integrator": {"rel_tol": 1e-9, "bogus": 1}}"#).unwrap_err();
        assert!(err.pointer.starts_with("/integrator"), "{err}");
    }

    #[test]
    fn complex_numbers_in_both_forms() {
        let s = Scenario::from_json(r#"{"base_point": [1, 2], "point": [3, [0, -1]]}"#).unwrap();
        assert_eq!(s.base_point.unwrap().value(), Complex64::new(1.0, 2.0));
        assert_eq!(s.point.unwrap()[1].value(), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn parse_errors_point_into_metric() {
        let m = MetricInput::Warped {
            b1: "1".into(),
            a: vec!["exp(u1".into()],
            f: vec!["1".into()],
        };
        let err = geodesic_metric(&m, "christoffel").unwrap_err();
        assert_eq!(err.pointer, "/metric/a/0");
        assert!(err.message.contains("position"), "{}", err.message);
    }

    #[test]
    fn tol_override_reaches_every_integrator() {
        let s = Scenario::default().resolve(Some(3), Some(1e-8)).unwrap();
        assert_eq!(s.probe.integrator.rel_tol, 1e-8);
        assert_eq!(s.continuation.integrator.abs_tol, 1e-10);
        assert_eq!(s.classify.sampling.seed, 3);
    }
}
