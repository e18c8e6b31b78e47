//! The Clifton-Pohl plane `du⊙dv/(u²+v²)`: geodesic equations, null
//! geodesics in closed form, the impulse `P = AB²`, logarithmic coordinates,
//! the φ-equation and the completeness classifier.

mod charts;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::metric::MetricSpec;

pub use charts::{
    axis_crossing_continue, cross_validate, integrate_charted, Axis, AxisCrossing, Chart,
    ChartedTrajectory, CrossValidation, CHART_SWITCH,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CPError {
    #[error("initial position is the origin")]
    ZeroPosition,
    #[error("velocity ({x}, {y}) is null")]
    NullVector { x: f64, y: f64 },
    #[error("point ({u}, {v}) lies on a coordinate axis")]
    OnAxis { u: Complex64, v: Complex64 },
    #[error("square root branch undefined at the turning point φ = {phi}")]
    BranchUndefined { phi: Complex64 },
    #[error("A must be nonzero")]
    ZeroA,
    #[error("crossing is singular: {0}")]
    SingularCrossing(String),
    #[error(transparent)]
    Ode(#[from] crate::complex_ode::OdeError),
}

/// The complexified metric `g_uv = 1/(2(u²+v²))` on coordinates `(u1, u2) = (u, v)`.
pub fn metric() -> MetricSpec {
    let g = Expr::real(1.0) / (Expr::real(2.0) * (Expr::var(0).powi(2) + Expr::var(1).powi(2)));
    MetricSpec::from_upper(2, vec![Expr::real(0.0), g, Expr::real(0.0)]).expect("valid 2×2 metric")
}

/// Real initial data: position `(α, β)`, velocity `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CPInitial {
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    pub y: f64,
}

impl CPInitial {
    pub fn new(alpha: f64, beta: f64, x: f64, y: f64) -> Self {
        Self { alpha, beta, x, y }
    }

    /// `(u, v, u̇, v̇)` as a complex state.
    pub fn state(&self) -> [Complex64; 4] {
        [self.alpha, self.beta, self.x, self.y].map(|r| Complex64::new(r, 0.0))
    }

    pub fn germ(&self, t0: f64) -> crate::geodesic::GeodesicGerm {
        crate::geodesic::GeodesicGerm::real(t0, &[self.alpha, self.beta], &[self.x, self.y])
    }
}

/// First-integral constants `A = xy/(α²+β²)`, `B = α/x + β/y` and `P = AB²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CPConstants {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

pub fn constants(c: &CPInitial) -> Result<CPConstants, CPError> {
    if c.alpha == 0.0 && c.beta == 0.0 {
        return Err(CPError::ZeroPosition);
    }
    if c.x * c.y == 0.0 {
        return Err(CPError::NullVector { x: c.x, y: c.y });
    }
    let a = c.x * c.y / (c.alpha * c.alpha + c.beta * c.beta);
    let b = c.alpha / c.x + c.beta / c.y;
    Ok(CPConstants { a, b, p: a * b * b })
}

/// Impulse `P = AB² = (α²y/x + 2αβ + β²x/y)/(α²+β²)`.
pub fn impulse(c: &CPInitial) -> Result<f64, CPError> {
    constants(c).map(|k| k.p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CPVerdict {
    Complete,
    Incomplete,
}

/// Limits of `G(φ) = ∫_{φ_ref}^{φ} dν/F(ν)` as `φ → ±∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptote {
    pub phi_ref: f64,
    pub sigma_plus: Complex64,
    pub sigma_minus: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CPClassification {
    pub verdict: CPVerdict,
    pub constants: CPConstants,
    /// `Ch φ₀ = 2/P`, present iff complete.
    pub phi_zero: Option<f64>,
    /// Present iff incomplete.
    pub asymptote: Option<Asymptote>,
}

/// Complete iff `0 < P ≤ 2`.
pub fn classify(c: &CPInitial) -> Result<CPClassification, CPError> {
    let k = constants(c)?;
    if k.p > 0.0 && k.p <= 2.0 {
        return Ok(CPClassification {
            verdict: CPVerdict::Complete,
            constants: k,
            phi_zero: Some((2.0 / k.p).acosh()),
            asymptote: None,
        });
    }
    let phi_ref = if c.alpha != 0.0 && c.beta != 0.0 {
        (c.alpha / c.beta).abs().ln()
    } else {
        0.0
    };
    let rhs = phi_rhs(k.a, k.b)?;
    let s0 = Complex64::new(c.beta / c.y - c.alpha / c.x, 0.0);
    let hint = if s0.norm() > 0.0 {
        s0
    } else {
        Complex64::new(1.0, 0.0)
    };
    let recip = |nu: f64| -> Complex64 {
        match rhs.eval(Complex64::new(nu, 0.0), hint) {
            Ok(f) if f.norm().is_finite() => f.inv(),
            _ => Complex64::new(0.0, 0.0),
        }
    };
    let tail = |dir: f64| -> Complex64 {
        let mut end = phi_ref;
        for _ in 0..800 {
            end += dir;
            if recip(end).norm() < 1e-14 {
                break;
            }
        }
        adaptive_simpson(&recip, phi_ref, end, 1e-13)
    };
    Ok(CPClassification {
        verdict: CPVerdict::Incomplete,
        constants: k,
        phi_zero: None,
        asymptote: Some(Asymptote {
            phi_ref,
            sigma_plus: tail(1.0),
            sigma_minus: tail(-1.0),
        }),
    })
}

fn adaptive_simpson(f: &impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec(
        f: &impl Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        // rounding noise caps the attainable accuracy
        let floor = 1e-12 * (left.norm() + right.norm());
        if depth == 0 || delta.norm() <= (15.0 * tol).max(floor) {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Closed-form null geodesics with `v ≡ A_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum NullGeodesic {
    /// `u(t) = 1/(c − b·t)`.
    Rational { b: f64, c: f64 },
    /// `u(t) = amplitude·tan(rate·t + phase)`.
    Tangent {
        amplitude: f64,
        rate: f64,
        phase: f64,
    },
}

/// `u = 1/(C − Bt)` for `A_v = 0`, else `u = A_v·tan(A_v·t + B)`.
pub fn null_geodesic(a_v: f64, b: f64, c: f64) -> NullGeodesic {
    if a_v == 0.0 {
        NullGeodesic::Rational { b, c }
    } else {
        NullGeodesic::Tangent {
            amplitude: a_v,
            rate: a_v,
            phase: b,
        }
    }
}

impl NullGeodesic {
    /// Fit to a germ `(u0, v0)` with velocity `(u̇0, 0)` at `t = 0`.
    pub fn from_germ(u0: f64, v0: f64, du0: f64) -> Self {
        if v0 == 0.0 {
            NullGeodesic::Rational {
                b: du0 / (u0 * u0),
                c: 1.0 / u0,
            }
        } else {
            NullGeodesic::Tangent {
                amplitude: v0,
                rate: du0 * v0 / (v0 * v0 + u0 * u0),
                phase: (u0 / v0).atan(),
            }
        }
    }

    pub fn u(&self, t: Complex64) -> Complex64 {
        match *self {
            NullGeodesic::Rational { b, c } => (c - b * t).inv(),
            NullGeodesic::Tangent {
                amplitude,
                rate,
                phase,
            } => amplitude * (rate * t + phase).tan(),
        }
    }

    pub fn du(&self, t: Complex64) -> Complex64 {
        match *self {
            NullGeodesic::Rational { b, c } => b * (c - b * t).powi(-2),
            NullGeodesic::Tangent {
                amplitude,
                rate,
                phase,
            } => amplitude * rate * (rate * t + phase).cos().powi(-2),
        }
    }

    /// Real poles in `(t0, t1)`, increasing.
    pub fn poles(&self, t0: f64, t1: f64) -> Vec<f64> {
        match *self {
            NullGeodesic::Rational { b, c } => {
                if b == 0.0 {
                    return Vec::new();
                }
                let t = c / b;
                if t > t0 && t < t1 {
                    vec![t]
                } else {
                    Vec::new()
                }
            }
            NullGeodesic::Tangent { rate, phase, .. } => {
                if rate == 0.0 {
                    return Vec::new();
                }
                let half_pi = std::f64::consts::FRAC_PI_2;
                let pi = std::f64::consts::PI;
                // rate·t + phase = π/2 + kπ
                let k_of = |t: f64| (rate * t + phase - half_pi) / pi;
                let (k0, k1) = {
                    let (x, y) = (k_of(t0), k_of(t1));
                    (x.min(y).ceil() as i64, x.max(y).floor() as i64)
                };
                let mut out: Vec<f64> = (k0..=k1)
                    .map(|k| (half_pi + k as f64 * pi - phase) / rate)
                    .filter(|t| *t > t0 && *t < t1)
                    .collect();
                out.sort_by(f64::total_cmp);
                out
            }
        }
    }
}

/// `F(φ) = 2A·Ch φ·√(B² − 2/(A·Ch φ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiRhs {
    pub a: f64,
    pub b: f64,
}

pub fn phi_rhs(a: f64, b: f64) -> Result<PhiRhs, CPError> {
    if a == 0.0 {
        return Err(CPError::ZeroA);
    }
    Ok(PhiRhs { a, b })
}

impl PhiRhs {
    /// `B² − 2/(A Ch φ)`, evaluated as `(P − 2)/A + 4 Sh²(φ/2)/(A Ch φ)` to
    /// avoid cancellation near the turning point.
    pub fn radicand(&self, phi: Complex64) -> Complex64 {
        let p = self.a * self.b * self.b;
        let sh = (0.5 * phi).sinh();
        (p - 2.0) / self.a + 4.0 * sh * sh / (self.a * phi.cosh())
    }

    /// Square root of the radicand on the branch nearest `hint`.
    pub fn root(&self, phi: Complex64, hint: Complex64) -> Result<Complex64, CPError> {
        let r = self.radicand(phi);
        if r == Complex64::new(0.0, 0.0) {
            return Err(CPError::BranchUndefined { phi });
        }
        let s = r.sqrt();
        Ok(if (s * hint.conj()).re < 0.0 { -s } else { s })
    }

    /// `F(φ)` on the branch whose root is nearest `hint`.
    pub fn eval(&self, phi: Complex64, hint: Complex64) -> Result<Complex64, CPError> {
        Ok(2.0 * self.a * phi.cosh() * self.root(phi, hint)?)
    }

    /// The branch-free system `φ̇ = 2A Ch φ·S`, `Ṡ = 2 Th φ` on `(φ, S)`.
    pub fn field(&self) -> PhiField {
        PhiField { a: self.a }
    }
}

/// `(φ, S) ↦ (2A Ch φ·S, 2 Th φ)`; `S² = B² − 2/(A Ch φ)` is conserved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiField {
    a: f64,
}

impl crate::complex_ode::ComplexField for PhiField {
    fn dim(&self) -> usize {
        2
    }

    fn eval(
        &self,
        _z: Complex64,
        w: &[Complex64],
        dw: &mut [Complex64],
    ) -> Result<(), crate::complex_ode::FieldError> {
        dw[0] = 2.0 * self.a * w[0].cosh() * w[1];
        dw[1] = 2.0 * w[0].tanh();
        Ok(())
    }
}

/// `u = s_u·e^ω`, `v = s_v·e^η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CPLogState {
    pub omega: Complex64,
    pub eta: Complex64,
    pub s_u: i8,
    pub s_v: i8,
}

fn sign_of(z: Complex64) -> i8 {
    if z.re < 0.0 {
        -1
    } else {
        1
    }
}

pub fn to_log_coords(u: Complex64, v: Complex64) -> Result<CPLogState, CPError> {
    let zero = Complex64::new(0.0, 0.0);
    if u == zero || v == zero {
        return Err(CPError::OnAxis { u, v });
    }
    let (s_u, s_v) = (sign_of(u), sign_of(v));
    Ok(CPLogState {
        omega: (f64::from(s_u) * u).ln(),
        eta: (f64::from(s_v) * v).ln(),
        s_u,
        s_v,
    })
}

pub fn from_log_coords(s: &CPLogState) -> (Complex64, Complex64) {
    (
        f64::from(s.s_u) * s.omega.exp(),
        f64::from(s.s_v) * s.eta.exp(),
    )
}

/// Geodesic field in log chart, `(ω, η, ω̇, η̇)`:
/// `ω̈ = ω̇² Th(ω−η)`, `η̈ = −η̇² Th(ω−η)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogChartField;

impl crate::complex_ode::ComplexField for LogChartField {
    fn dim(&self) -> usize {
        4
    }

    fn eval(
        &self,
        _z: Complex64,
        w: &[Complex64],
        dw: &mut [Complex64],
    ) -> Result<(), crate::complex_ode::FieldError> {
        let th = (w[0] - w[1]).tanh();
        if !(th.re.is_finite() && th.im.is_finite()) {
            return Err(crate::expr::EvalError::Pole {
                location: w.to_vec(),
            }
            .into());
        }
        dw[0] = w[2];
        dw[1] = w[3];
        dw[2] = w[2] * w[2] * th;
        dw[3] = -w[3] * w[3] * th;
        Ok(())
    }
}

/// Geodesic field in `(u, v, u̇, v̇)`: `ü = 2u u̇²/(u²+v²)`, `v̈ = 2v v̇²/(u²+v²)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlaneChartField;

impl crate::complex_ode::ComplexField for PlaneChartField {
    fn dim(&self) -> usize {
        4
    }

    fn eval(
        &self,
        _z: Complex64,
        w: &[Complex64],
        dw: &mut [Complex64],
    ) -> Result<(), crate::complex_ode::FieldError> {
        let q = w[0] * w[0] + w[1] * w[1];
        if q.norm() < crate::expr::POLE_THRESHOLD {
            return Err(crate::expr::EvalError::Pole {
                location: w.to_vec(),
            }
            .into());
        }
        dw[0] = w[2];
        dw[1] = w[3];
        dw[2] = 2.0 * w[0] * w[2] * w[2] / q;
        dw[3] = 2.0 * w[1] * w[3] * w[3] / q;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn impulse_examples() {
        assert_eq!(impulse(&CPInitial::new(1.0, 0.0, 1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(impulse(&CPInitial::new(1.0, 0.0, 1.0, -1.0)).unwrap(), -1.0);
        assert_eq!(impulse(&CPInitial::new(1.0, 1.0, 1.0, 1.0)).unwrap(), 2.0);
        assert!(matches!(
            impulse(&CPInitial::new(1.0, 0.0, 0.0, 1.0)),
            Err(CPError::NullVector { .. })
        ));
        assert_eq!(
            impulse(&CPInitial::new(0.0, 0.0, 1.0, 1.0)),
            Err(CPError::ZeroPosition)
        );
    }

    #[test]
    fn impulse_expanded_form() {
        let (al, be, x, y) = (0.7, -1.3, 0.4, 2.1);
        let p = impulse(&CPInitial::new(al, be, x, y)).unwrap();
        let expanded = (al * al * y / x + 2.0 * al * be + be * be * x / y) / (al * al + be * be);
        assert!((p - expanded).abs() < 1e-14);
    }

    #[test]
    fn classification_examples() {
        let k = classify(&CPInitial::new(1.0, 0.0, 1.0, 1.0)).unwrap();
        assert_eq!(k.verdict, CPVerdict::Complete);
        assert!((k.phi_zero.unwrap() - 1.3169578969248166).abs() < 1e-12);
        assert!(k.asymptote.is_none());

        let k = classify(&CPInitial::new(1.0, 0.0, 1.0, -1.0)).unwrap();
        assert_eq!(k.verdict, CPVerdict::Incomplete);
        let s = k.asymptote.unwrap();
        assert!(s.sigma_plus.norm().is_finite() && s.sigma_minus.norm().is_finite());
        assert!(k.phi_zero.is_none());

        let k = classify(&CPInitial::new(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(k.verdict, CPVerdict::Complete);
        assert_eq!(k.phi_zero, Some(0.0));
    }

    #[test]
    fn sigma_matches_closed_form_for_negative_a() {
        // A = −1, B = 1: F = −2 Ch ν √(1 + 2/Ch ν) on the branch of S₀ = −1
        let k = classify(&CPInitial::new(1.0, 0.0, 1.0, -1.0)).unwrap();
        let s = k.asymptote.unwrap();
        let f = |nu: f64| 1.0 / (-2.0 * nu.cosh() * -(1.0 + 2.0 / nu.cosh()).sqrt());
        let mut acc = 0.0;
        let n = 200_000;
        let h = 40.0 / n as f64;
        for j in 0..n {
            acc += f((j as f64 + 0.5) * h) * h;
        }
        assert!(
            (s.sigma_plus.re - acc).abs() < 1e-8,
            "{} {acc}",
            s.sigma_plus
        );
        assert!((s.sigma_minus + s.sigma_plus).norm() < 1e-10);
    }

    #[test]
    fn null_geodesic_forms() {
        let g = null_geodesic(0.0, 1.0, 1.0);
        assert!((g.u(c(0.5, 0.0)) - 2.0).norm() < 1e-15);
        assert_eq!(g.poles(0.0, 3.0), vec![1.0]);
        let g = null_geodesic(1.0, 0.0, 0.0);
        assert!((g.u(c(0.3, 0.0)) - 0.3f64.tan()).norm() < 1e-15);
        let poles = g.poles(0.0, 5.0);
        assert_eq!(poles.len(), 2);
        assert!((poles[0] - PI / 2.0).abs() < 1e-15 && (poles[1] - 1.5 * PI).abs() < 1e-14);
        assert_eq!(
            NullGeodesic::from_germ(1.0, 0.0, 1.0),
            NullGeodesic::Rational { b: 1.0, c: 1.0 }
        );
        assert_eq!(
            NullGeodesic::from_germ(0.0, 1.0, 1.0),
            NullGeodesic::Tangent {
                amplitude: 1.0,
                rate: 1.0,
                phase: 0.0
            }
        );
    }

    #[test]
    fn tangent_solves_null_equation() {
        // u = A tan(c t + d) with A = 2 solves ü = 2u u̇²/(u² + A²) for any c
        let g = NullGeodesic::from_germ(0.5, 2.0, 0.7);
        let t = c(0.2, 0.0);
        let h = 1e-4;
        let upp = (g.u(t + h) - 2.0 * g.u(t) + g.u(t - h)) / (h * h);
        let u = g.u(t);
        let rhs = 2.0 * u * g.du(t).powi(2) / (u * u + 4.0);
        assert!(((upp - rhs) / rhs).norm() < 1e-6);
        assert!((g.u(c(0.0, 0.0)) - 0.5).norm() < 1e-15);
        assert!((g.du(c(0.0, 0.0)) - 0.7).norm() < 1e-15);
    }

    #[test]
    fn phi_rhs_examples() {
        let f = phi_rhs(1.0, 2.0).unwrap();
        assert!((f.eval(c(0.0, 0.0), c(1.0, 0.0)).unwrap() - 2.0 * 2f64.sqrt()).norm() < 1e-15);
        let f = phi_rhs(1.0, 2f64.sqrt()).unwrap();
        assert!(f.eval(c(0.0, 0.0), c(1.0, 0.0)).unwrap().norm() < 1e-7);
        let f = phi_rhs(2.0, 1.0).unwrap();
        assert!(matches!(
            f.eval(c(0.0, 0.0), c(1.0, 0.0)),
            Err(CPError::BranchUndefined { .. })
        ));
        assert_eq!(phi_rhs(0.0, 1.0), Err(CPError::ZeroA));
    }

    #[test]
    fn log_coordinates() {
        let s = to_log_coords(c(E, 0.0), c(E * E, 0.0)).unwrap();
        assert!((s.omega - 1.0).norm() < 1e-15 && (s.eta - 2.0).norm() < 1e-15);
        assert_eq!((s.s_u, s.s_v), (1, 1));
        let s = to_log_coords(c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(
            (s.omega, s.eta, s.s_u, s.s_v),
            (c(0.0, 0.0), c(0.0, 0.0), -1, 1)
        );
        assert!(to_log_coords(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn metric_is_off_diagonal() {
        let m = metric();
        let g = m.eval(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(g[(0, 1)], c(0.25, 0.0));
        assert_eq!(g[(0, 0)], c(0.0, 0.0));
    }
}
