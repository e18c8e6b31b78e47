//! Path-based analytic continuation of scalar germs.
//!
//! A germ is either a closed-form expression in one variable with a tracked
//! argument for every `sqrt`/`log` node, or the solution of a complex ODE with
//! initial data. Continuing a germ along a path yields a new germ at the path
//! end; looping repeatedly around a closed path classifies the monodromy.

mod branch;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_ode::{integrate_along, ComplexField, ComplexPath, IntegratorConfig, OdeError};
use crate::expr::{eval_generic, DualValue, EvalError, Expr};

pub(crate) use branch::Tracked;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContinuationError {
    #[error("path starts at {path_start}, germ is based at {base_point}")]
    PathStart {
        base_point: Complex64,
        path_start: Complex64,
    },
    #[error("continuation hit a singularity near {z}")]
    HitSingularity { z: Complex64 },
    #[error("loop is not closed")]
    OpenLoop,
    #[error("closed-form germ must be an expression in u1 only")]
    NotUnivariate,
    #[error("germ is not evaluable at its base point: {0}")]
    BaseEvaluation(EvalError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Numerical knobs for continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationConfig {
    /// Used for ODE-defined germs.
    pub integrator: IntegratorConfig,
    /// Largest arc-length step for closed-form germs.
    pub max_step: f64,
    /// Largest per-step change of any tracked argument.
    pub max_arg_jump: f64,
    /// A loop returns when `|v_k − v_0| ≤ return_tol·(1 + |v_0|)`.
    pub return_tol: f64,
    /// Spread allowed among the last three loop values for a suspected limit.
    pub limit_tol: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            max_step: 0.05,
            max_arg_jump: PI / 4.0,
            return_tol: 1e-8,
            limit_tol: 1e-6,
        }
    }
}

#[derive(Clone)]
pub enum GermRepr {
    /// `expr` in `u1`; `branch_args[j]` is the unwrapped argument of the
    /// input of the `j`-th branching node in evaluation order.
    ClosedForm { expr: Expr, branch_args: Vec<f64> },
    OdeDefined {
        field: Arc<dyn ComplexField + Send + Sync>,
        state: Vec<Complex64>,
    },
}

impl fmt::Debug for GermRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GermRepr::ClosedForm { expr, branch_args } => f
                .debug_struct("ClosedForm")
                .field("expr", &format_args!("{expr}"))
                .field("branch_args", branch_args)
                .finish(),
            GermRepr::OdeDefined { field, state } => f
                .debug_struct("OdeDefined")
                .field("dim", &field.dim())
                .field("state", state)
                .finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Germ {
    base_point: Complex64,
    repr: GermRepr,
}

impl Germ {
    /// Closed-form germ on principal branches at `base_point`.
    pub fn closed_form(expr: Expr, base_point: Complex64) -> Result<Self, ContinuationError> {
        if expr.max_var().is_some_and(|v| v > 0) {
            return Err(ContinuationError::NotUnivariate);
        }
        let mut seed = Tracked::new(&[]);
        eval_generic::<Complex64, _>(&expr, &[base_point], &mut seed)
            .map_err(ContinuationError::BaseEvaluation)?;
        Ok(Self {
            base_point,
            repr: GermRepr::ClosedForm {
                expr,
                branch_args: seed.into_args(),
            },
        })
    }

    /// Closed-form germ with explicit branch arguments; missing entries are
    /// filled with principal arguments.
    pub fn closed_form_with_branches(
        expr: Expr,
        base_point: Complex64,
        branch_args: &[f64],
    ) -> Result<Self, ContinuationError> {
        if expr.max_var().is_some_and(|v| v > 0) {
            return Err(ContinuationError::NotUnivariate);
        }
        let mut seed = Tracked::new(branch_args);
        eval_generic::<Complex64, _>(&expr, &[base_point], &mut seed)
            .map_err(ContinuationError::BaseEvaluation)?;
        Ok(Self {
            base_point,
            repr: GermRepr::ClosedForm {
                expr,
                branch_args: seed.into_args(),
            },
        })
    }

    pub fn ode(
        field: Arc<dyn ComplexField + Send + Sync>,
        base_point: Complex64,
        state: Vec<Complex64>,
    ) -> Result<Self, ContinuationError> {
        if state.len() != field.dim() {
            return Err(OdeError::Dimension {
                expected: field.dim(),
                got: state.len(),
            }
            .into());
        }
        Ok(Self {
            base_point,
            repr: GermRepr::OdeDefined { field, state },
        })
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    pub fn repr(&self) -> &GermRepr {
        &self.repr
    }

    pub fn branch_args(&self) -> Option<&[f64]> {
        match &self.repr {
            GermRepr::ClosedForm { branch_args, .. } => Some(branch_args),
            GermRepr::OdeDefined { .. } => None,
        }
    }

    /// Full value: the scalar for closed forms, the state vector for ODE germs.
    pub fn state(&self) -> Vec<Complex64> {
        match &self.repr {
            GermRepr::ClosedForm { .. } => vec![self.value()],
            GermRepr::OdeDefined { state, .. } => state.clone(),
        }
    }

    /// Value at the base point (first state component for ODE germs).
    pub fn value(&self) -> Complex64 {
        match &self.repr {
            GermRepr::ClosedForm { expr, branch_args } => {
                let mut p = Tracked::new(branch_args);
                eval_generic::<Complex64, _>(expr, &[self.base_point], &mut p)
                    .expect("closed-form germs are evaluable at their base point")
            }
            GermRepr::OdeDefined { state, .. } => state[0],
        }
    }

    /// Derivative at the base point on the tracked branch.
    pub fn derivative(&self) -> Result<Complex64, ContinuationError> {
        match &self.repr {
            GermRepr::ClosedForm { expr, branch_args } => {
                let mut p = Tracked::new(branch_args);
                let d: DualValue = eval_generic(expr, &[self.base_point], &mut p)
                    .map_err(ContinuationError::BaseEvaluation)?;
                Ok(d.partials[0])
            }
            GermRepr::OdeDefined { field, state } => {
                let mut dw = vec![Complex64::new(0.0, 0.0); state.len()];
                field
                    .eval(self.base_point, state, &mut dw)
                    .map_err(|_| ContinuationError::HitSingularity { z: self.base_point })?;
                Ok(dw[0])
            }
        }
    }

    /// Same germ with every tracked argument shifted by `2π·shifts[j]`.
    pub fn with_branch_shift(&self, shifts: &[i32]) -> Self {
        let mut out = self.clone();
        if let GermRepr::ClosedForm { branch_args, .. } = &mut out.repr {
            for (a, k) in branch_args.iter_mut().zip(shifts) {
                *a += 2.0 * PI * f64::from(*k);
            }
        }
        out
    }
}

fn starts_at(path: &ComplexPath, z: Complex64) -> bool {
    (path.start() - z).norm() <= 1e-12 * z.norm().max(1.0)
}

/// Continues `g` along `path` and returns the germ at the path end.
pub fn continue_germ(
    g: &Germ,
    path: &ComplexPath,
    config: &ContinuationConfig,
) -> Result<Germ, ContinuationError> {
    if !starts_at(path, g.base_point) {
        return Err(ContinuationError::PathStart {
            base_point: g.base_point,
            path_start: path.start(),
        });
    }
    match &g.repr {
        GermRepr::ClosedForm { expr, branch_args } => {
            let args = continue_closed_form(expr, branch_args, path, config)?;
            Ok(Germ {
                base_point: path.end(),
                repr: GermRepr::ClosedForm {
                    expr: expr.clone(),
                    branch_args: args,
                },
            })
        }
        GermRepr::OdeDefined { field, state } => {
            let traj = integrate_along(field, state, path, &config.integrator)?;
            if let Some(z) = traj.termination.location() {
                return Err(ContinuationError::HitSingularity { z });
            }
            Ok(Germ {
                base_point: path.end(),
                repr: GermRepr::OdeDefined {
                    field: field.clone(),
                    state: traj.final_state().to_vec(),
                },
            })
        }
    }
}

fn continue_closed_form(
    expr: &Expr,
    args0: &[f64],
    path: &ComplexPath,
    config: &ContinuationConfig,
) -> Result<Vec<f64>, ContinuationError> {
    const BLOWUP: f64 = 1e8;
    let eval_at = |z: Complex64, prior: &[f64]| -> Option<(Complex64, Vec<f64>, f64)> {
        let mut p = Tracked::new(prior);
        let v = eval_generic::<Complex64, _>(expr, &[z], &mut p).ok()?;
        let jump = p.max_jump();
        Some((v, p.into_args(), jump))
    };
    let mut args = args0.to_vec();
    let (mut v, _, _) = eval_at(path.start(), &args)
        .ok_or(ContinuationError::HitSingularity { z: path.start() })?;
    let min_step = config.integrator.min_step * path.length().max(1.0);
    for seg in path.segments() {
        let len = seg.length();
        let mut s = 0.0;
        let mut h = config.max_step.min(len);
        while s < len {
            let (s_new, last) = if s + h >= len * (1.0 - 1e-14) {
                (len, true)
            } else {
                (s + h, false)
            };
            let z = seg.point(s_new);
            let ok = match eval_at(z, &args) {
                Some((v_new, a_new, jump))
                    if jump <= config.max_arg_jump
                        && (v_new - v).norm() <= 0.5 * (1.0 + v.norm())
                        && v_new.norm() <= BLOWUP =>
                {
                    v = v_new;
                    args = a_new;
                    true
                }
                _ => false,
            };
            if ok {
                s = s_new;
                if last {
                    break;
                }
                h = (h * 2.0).min(config.max_step);
            } else {
                h *= 0.5;
                if h < min_step {
                    return Err(ContinuationError::HitSingularity { z: seg.point(s) });
                }
            }
        }
    }
    Ok(args)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum MonodromyClass {
    Trivial,
    FiniteOrder { k: usize },
    NonReturning { max_k: usize },
    LogarithmicSuspected { limit: Complex64 },
}

#[derive(Debug, Clone)]
pub struct MonodromyResult {
    /// Germ after one traversal of the loop.
    pub germ_out: Germ,
    pub classification: MonodromyClass,
    /// Value after each completed traversal, starting with turn 1.
    pub turn_values: Vec<Complex64>,
}

/// Repeats `loop_path` up to `max_turns` times and classifies the monodromy.
pub fn monodromy(
    g: &Germ,
    loop_path: &ComplexPath,
    max_turns: usize,
    config: &ContinuationConfig,
) -> Result<MonodromyResult, ContinuationError> {
    if !loop_path.is_closed() {
        return Err(ContinuationError::OpenLoop);
    }
    let s0 = g.state();
    let returned = |s: &[Complex64]| {
        s.iter()
            .zip(&s0)
            .all(|(a, b)| (a - b).norm() <= config.return_tol * (1.0 + b.norm()))
    };
    let mut current = g.clone();
    let mut germ_out = None;
    let mut turn_values = Vec::with_capacity(max_turns);
    for k in 1..=max_turns.max(1) {
        current = continue_germ(&current, loop_path, config)?;
        // re-anchor exactly at the base point to avoid drift in `z`
        current.base_point = g.base_point;
        if germ_out.is_none() {
            germ_out = Some(current.clone());
        }
        turn_values.push(current.value());
        if returned(&current.state()) {
            let classification = if k == 1 {
                MonodromyClass::Trivial
            } else {
                MonodromyClass::FiniteOrder { k }
            };
            return Ok(MonodromyResult {
                germ_out: germ_out.expect("set on first turn"),
                classification,
                turn_values,
            });
        }
    }
    let n = turn_values.len();
    let classification = if n >= 3 {
        let last = &turn_values[n - 3..];
        let spread = last
            .iter()
            .flat_map(|a| last.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        if spread <= config.limit_tol {
            MonodromyClass::LogarithmicSuspected { limit: last[2] }
        } else {
            MonodromyClass::NonReturning { max_k: max_turns }
        }
    } else {
        MonodromyClass::NonReturning { max_k: max_turns }
    };
    Ok(MonodromyResult {
        germ_out: germ_out.expect("at least one turn"),
        classification,
        turn_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlane {
    Upper,
    Lower,
}

/// One attempted flanking of a real obstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetourAttempt {
    pub half_plane: HalfPlane,
    pub succeeded: bool,
    /// Value at the landing point when the detour succeeded.
    pub landing_value: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub t: f64,
    pub attempts: Vec<DetourAttempt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachedPoint {
    pub t: f64,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealCoverage {
    /// Reached sample abscissae in increasing order, with continued values.
    pub reached: Vec<ReachedPoint>,
    pub obstructions: Vec<Obstruction>,
}

impl RealCoverage {
    pub fn abscissae(&self) -> Vec<f64> {
        self.reached.iter().map(|p| p.t).collect()
    }
}

/// Bound on detours per direction.
const MAX_OBSTRUCTIONS: usize = 256;

/// Samples `interval` uniformly and continues `g` to every sample reachable
/// along the real axis, flanking obstructions by semicircles of radius
/// `detour_radius` (upper half-plane first).
pub fn real_coverage(
    g: &Germ,
    detour_radius: f64,
    interval: (f64, f64),
    samples: usize,
    config: &ContinuationConfig,
) -> RealCoverage {
    let (t0, t1) = (interval.0.min(interval.1), interval.0.max(interval.1));
    let base = g.base_point.re;
    let n = samples.max(2);
    let grid: Vec<f64> = (0..n)
        .map(|j| t0 + (t1 - t0) * j as f64 / (n - 1) as f64)
        .collect();
    let mut reached = Vec::new();
    let mut obstructions = Vec::new();
    let right: Vec<f64> = grid.iter().copied().filter(|t| *t >= base).collect();
    let left: Vec<f64> = grid.iter().rev().copied().filter(|t| *t < base).collect();
    for targets in [right, left] {
        march(
            g,
            &targets,
            detour_radius,
            config,
            &mut reached,
            &mut obstructions,
        );
    }
    reached.sort_by(|a: &ReachedPoint, b| a.t.total_cmp(&b.t));
    obstructions.sort_by(|a: &Obstruction, b| a.t.total_cmp(&b.t));
    RealCoverage {
        reached,
        obstructions,
    }
}

fn real(t: f64) -> Complex64 {
    Complex64::new(t, 0.0)
}

fn march(
    g: &Germ,
    targets: &[f64],
    radius: f64,
    config: &ContinuationConfig,
    reached: &mut Vec<ReachedPoint>,
    obstructions: &mut Vec<Obstruction>,
) {
    let mut current = g.clone();
    let mut count = 0;
    let mut idx = 0;
    while idx < targets.len() {
        let t = targets[idx];
        let here = current.base_point.re;
        if t == here {
            reached.push(ReachedPoint {
                t,
                value: current.value(),
            });
            idx += 1;
            continue;
        }
        let path = ComplexPath::line(real(here), real(t)).expect("distinct real points");
        match continue_germ(&current, &path, config) {
            Ok(next) => {
                reached.push(ReachedPoint {
                    t,
                    value: next.value(),
                });
                current = next;
                idx += 1;
            }
            Err(ContinuationError::HitSingularity { z }) => {
                count += 1;
                if count > MAX_OBSTRUCTIONS {
                    return;
                }
                let t_star = z.re;
                let forward = t > here;
                let landing = if forward {
                    t_star + radius
                } else {
                    t_star - radius
                };
                let mut attempts = Vec::new();
                let mut chosen = None;
                for (half_plane, upper) in [(HalfPlane::Upper, true), (HalfPlane::Lower, false)] {
                    let outcome = ComplexPath::real_detour(here, landing, t_star, radius, upper)
                        .ok()
                        .and_then(|p| continue_germ(&current, &p, config).ok());
                    attempts.push(DetourAttempt {
                        half_plane,
                        succeeded: outcome.is_some(),
                        landing_value: outcome.as_ref().map(Germ::value),
                    });
                    if chosen.is_none() {
                        chosen = outcome;
                    }
                }
                obstructions.push(Obstruction {
                    t: t_star,
                    attempts,
                });
                match chosen {
                    Some(mut next) => {
                        next.base_point = real(landing);
                        current = next;
                        // samples swallowed by the detour are not reached
                        while idx < targets.len()
                            && (if forward {
                                targets[idx] < landing
                            } else {
                                targets[idx] > landing
                            })
                        {
                            idx += 1;
                        }
                    }
                    None => return,
                }
            }
            Err(_) => return,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_ode::FnField;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> ContinuationConfig {
        ContinuationConfig::default()
    }

    fn unit_circle(turns: f64) -> ComplexPath {
        ComplexPath::circle(c(0.0, 0.0), 1.0, 0.0, turns).unwrap()
    }

    #[test]
    fn sqrt_over_upper_semicircle() {
        let g = Germ::closed_form(Expr::parse("sqrt(u1)").unwrap(), c(1.0, 0.0)).unwrap();
        let arc = ComplexPath::circle(c(0.0, 0.0), 1.0, 0.0, 0.5).unwrap();
        let out = continue_germ(&g, &arc, &cfg()).unwrap();
        assert!(
            (out.value() - c(0.0, 1.0)).norm() <= 1e-10,
            "{}",
            out.value()
        );
        assert!((out.base_point() - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn log_winds_once_and_twice() {
        let g = Germ::closed_form(Expr::parse("log(u1)").unwrap(), c(1.0, 0.0)).unwrap();
        let once = continue_germ(&g, &unit_circle(1.0), &cfg()).unwrap();
        assert!((once.value() - c(0.0, 2.0 * PI)).norm() <= 1e-10);
        let twice = continue_germ(&g, &unit_circle(2.0), &cfg()).unwrap();
        assert!((twice.value() - c(0.0, 4.0 * PI)).norm() <= 1e-10);
    }

    #[test]
    fn ode_germ_of_integral_winds() {
        let f = FnField::new(1, |z: Complex64, _w: &[Complex64], dw: &mut [Complex64]| {
            dw[0] = z.inv();
            Ok(())
        });
        let g = Germ::ode(Arc::new(f), c(1.0, 0.0), vec![c(0.0, 0.0)]).unwrap();
        let twice = continue_germ(&g, &unit_circle(2.0), &cfg()).unwrap();
        assert!((twice.value() - c(0.0, 4.0 * PI)).norm() <= 1e-9);
    }

    #[test]
    fn path_must_start_at_base() {
        let g = Germ::closed_form(Expr::parse("u1").unwrap(), c(1.0, 0.0)).unwrap();
        let p = ComplexPath::line(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(matches!(
            continue_germ(&g, &p, &cfg()),
            Err(ContinuationError::PathStart { .. })
        ));
    }

    #[test]
    fn pole_on_path_is_reported() {
        let g = Germ::closed_form(Expr::parse("1/(1-u1)").unwrap(), c(0.0, 0.0)).unwrap();
        let p = ComplexPath::line(c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        match continue_germ(&g, &p, &cfg()) {
            Err(ContinuationError::HitSingularity { z }) => assert!((z - 1.0).norm() < 1e-3, "{z}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn monodromy_examples() {
        let sqrt = Germ::closed_form(Expr::parse("sqrt(u1)").unwrap(), c(1.0, 0.0)).unwrap();
        let r = monodromy(&sqrt, &unit_circle(1.0), 4, &cfg()).unwrap();
        assert_eq!(r.classification, MonodromyClass::FiniteOrder { k: 2 });
        assert!((r.germ_out.value() + 1.0).norm() <= 1e-10);

        let log = Germ::closed_form(Expr::parse("log(u1)").unwrap(), c(1.0, 0.0)).unwrap();
        let r = monodromy(&log, &unit_circle(1.0), 8, &cfg()).unwrap();
        assert_eq!(r.classification, MonodromyClass::NonReturning { max_k: 8 });
        for (k, v) in r.turn_values.iter().enumerate() {
            assert!((v - c(0.0, 2.0 * PI * (k + 1) as f64)).norm() <= 1e-9);
        }

        let exp = Germ::closed_form(Expr::parse("exp(u1)").unwrap(), c(1.0, 0.0)).unwrap();
        let r = monodromy(&exp, &unit_circle(1.0), 4, &cfg()).unwrap();
        assert_eq!(r.classification, MonodromyClass::Trivial);
    }

    #[test]
    fn power_with_imaginary_exponent_suggests_limit() {
        let g = Germ::closed_form(Expr::parse("exp(i*log(u1))").unwrap(), c(1.0, 0.0)).unwrap();
        let r = monodromy(&g, &unit_circle(1.0), 8, &cfg()).unwrap();
        match r.classification {
            MonodromyClass::LogarithmicSuspected { limit } => assert!(limit.norm() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn essential_composite_returns_after_two_turns() {
        let g = Germ::closed_form(Expr::parse("exp(-1/sqrt(u1))").unwrap(), c(1.0, 0.0)).unwrap();
        let r = monodromy(&g, &unit_circle(1.0), 8, &cfg()).unwrap();
        assert_eq!(r.classification, MonodromyClass::FiniteOrder { k: 2 });
    }

    #[test]
    fn coverage_of_simple_pole() {
        let g = Germ::closed_form(Expr::parse("1/(1-u1)").unwrap(), c(0.0, 0.0)).unwrap();
        let cov = real_coverage(&g, 0.1, (0.0, 2.0), 41, &cfg());
        let ts = cov.abscissae();
        assert_eq!(cov.obstructions.len(), 1);
        assert!((cov.obstructions[0].t - 1.0).abs() < 1e-3);
        for j in 0..41 {
            let t = j as f64 * 0.05;
            let hit = ts.iter().any(|x| (x - t).abs() < 1e-12);
            // samples between the pole and the detour landing are skipped
            if !(1.0 - 1e-6..=1.1 + 1e-6).contains(&t) {
                assert!(hit, "t = {t}");
            } else if t < 1.1 - 1e-6 {
                assert!(!hit, "t = {t}");
            }
        }
        for p in &cov.reached {
            assert!((p.value - 1.0 / (1.0 - p.t)).norm() < 1e-9);
        }
    }

    #[test]
    fn coverage_of_entire_function() {
        let g = Germ::closed_form(Expr::parse("exp(u1)").unwrap(), c(0.0, 0.0)).unwrap();
        let cov = real_coverage(&g, 0.1, (-5.0, 5.0), 21, &cfg());
        assert_eq!(cov.reached.len(), 21);
        assert!(cov.obstructions.is_empty());
    }

    #[test]
    fn coverage_of_sqrt_tracks_upper_branch() {
        let g = Germ::closed_form(Expr::parse("sqrt(u1)").unwrap(), c(1.0, 0.0)).unwrap();
        let cov = real_coverage(&g, 0.1, (-2.0, 2.0), 41, &cfg());
        assert_eq!(cov.obstructions.len(), 1);
        let attempts = &cov.obstructions[0].attempts;
        assert!(attempts.iter().all(|a| a.succeeded));
        for p in &cov.reached {
            let expected = if p.t >= 0.0 {
                c(p.t.sqrt(), 0.0)
            } else {
                c(0.0, (-p.t).sqrt())
            };
            assert!((p.value - expected).norm() < 1e-9, "{} {}", p.t, p.value);
        }
        // the lower detour lands on the other sign
        let up = attempts[0].landing_value.unwrap();
        let down = attempts[1].landing_value.unwrap();
        assert!((up + down).norm() < 1e-9);
    }
}
