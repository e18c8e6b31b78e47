use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("quadratic with all coefficients zero")]
pub struct ZeroQuadratic;

/// `a·η² + b·η + c`, not identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Complex64; 3]", into = "[Complex64; 3]")]
pub struct QuadraticPolynomial {
    a: Complex64,
    b: Complex64,
    c: Complex64,
}

impl TryFrom<[Complex64; 3]> for QuadraticPolynomial {
    type Error = ZeroQuadratic;
    fn try_from(v: [Complex64; 3]) -> Result<Self, ZeroQuadratic> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<QuadraticPolynomial> for [Complex64; 3] {
    fn from(p: QuadraticPolynomial) -> Self {
        [p.a, p.b, p.c]
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl QuadraticPolynomial {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self, ZeroQuadratic> {
        if a == ZERO && b == ZERO && c == ZERO {
            return Err(ZeroQuadratic);
        }
        Ok(Self { a, b, c })
    }

    pub fn real(a: f64, b: f64, c: f64) -> Result<Self, ZeroQuadratic> {
        Self::new(a.into(), b.into(), c.into())
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    /// `Δ = b² − 4ac`.
    pub fn discriminant(&self) -> Complex64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    pub fn eval(&self, eta: Complex64) -> Complex64 {
        (self.a * eta + self.b) * eta + self.c
    }

    /// The polynomial as an expression in the given variable.
    pub fn to_expr(&self, var: &Expr) -> Expr {
        let mut terms = Vec::new();
        if self.a != ZERO {
            terms.push(Expr::constant(self.a) * var.clone().powi(2));
        }
        if self.b != ZERO {
            terms.push(Expr::constant(self.b) * var.clone());
        }
        if self.c != ZERO {
            terms.push(Expr::constant(self.c));
        }
        terms
            .into_iter()
            .reduce(|x, y| x + y)
            .expect("not all coefficients vanish")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    A,
    B,
    C,
    D,
}

/// Catalog case: `a ≠ 0, Δ ≠ 0 → A`; `a ≠ 0, Δ = 0 → B`; `a = 0, b ≠ 0 → C`;
/// `a = b = 0 → D`. Zero tests are exact.
pub fn case_of(p: &QuadraticPolynomial) -> CaseTag {
    match (p.a != ZERO, p.discriminant() != ZERO, p.b != ZERO) {
        (true, true, _) => CaseTag::A,
        (true, false, _) => CaseTag::B,
        (false, _, true) => CaseTag::C,
        (false, _, false) => CaseTag::D,
    }
}

/// Branch convention of the catalog: within one primitive every `sqrt`
/// stays on one branch, while `log` may sit on any branch.
pub const BRANCH_POLICY: &str = "same branch of sqrt, any branch of log";

/// A primitive of `1/√(aη² + bη + c)` as an expression in `u1 = η`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormPrimitive {
    pub case: CaseTag,
    pub expr: Expr,
    pub branch_policy: &'static str,
}

fn plus_const(e: Expr, c: Complex64) -> Expr {
    if c == ZERO {
        e
    } else {
        e + Expr::constant(c)
    }
}

fn times_const(c: Complex64, e: Expr) -> Expr {
    if c == Complex64::new(1.0, 0.0) {
        e
    } else {
        Expr::constant(c) * e
    }
}

pub fn primitive_reciprocal_sqrt_quadratic(p: &QuadraticPolynomial) -> ClosedFormPrimitive {
    let eta = Expr::var(0);
    let (a, b, c) = (p.a, p.b, p.c);
    let case = case_of(p);
    let expr = match case {
        CaseTag::A => {
            let inner = QuadraticPolynomial {
                a: Complex64::new(1.0, 0.0),
                b: b / a,
                c: c / a,
            }
            .to_expr(&eta);
            let arg = plus_const(eta.clone(), b / (2.0 * a)) + inner.sqrt();
            times_const(a.sqrt().inv(), arg.log())
        }
        CaseTag::B => times_const(a.sqrt().inv(), plus_const(eta, b / (2.0 * a)).log()),
        CaseTag::C => times_const(2.0 / b, plus_const(Expr::constant(b) * eta, c).sqrt()),
        CaseTag::D => times_const(c.sqrt().inv(), eta),
    };
    ClosedFormPrimitive {
        case,
        expr,
        branch_policy: BRANCH_POLICY,
    }
}

/// `min(|F′ − q^{-1/2}|, |F′ + q^{-1/2}|)/|q^{-1/2}|` at `η`: the relative
/// derivative error up to the sign of the square root.
pub fn derivative_residual(
    prim: &ClosedFormPrimitive,
    p: &QuadraticPolynomial,
    eta: Complex64,
) -> Option<f64> {
    let d = prim.expr.eval_with_partials(&[eta]).ok()?.partials[0];
    let target = p.eval(eta).sqrt().inv();
    let t = target.norm();
    if !t.is_finite() || t == 0.0 {
        return None;
    }
    Some((d - target).norm().min((d + target).norm()) / t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: f64, b: f64, c: f64) -> QuadraticPolynomial {
        QuadraticPolynomial::real(a, b, c).unwrap()
    }

    #[test]
    fn catalog_examples() {
        let d = primitive_reciprocal_sqrt_quadratic(&q(0.0, 0.0, 1.0));
        assert_eq!(d.case, CaseTag::D);
        assert_eq!(d.expr, Expr::var(0));
        let b = primitive_reciprocal_sqrt_quadratic(&q(1.0, 0.0, 0.0));
        assert_eq!(b.case, CaseTag::B);
        assert_eq!(b.expr, Expr::var(0).log());
        let a = primitive_reciprocal_sqrt_quadratic(&q(1.0, 0.0, -1.0));
        assert_eq!(a.case, CaseTag::A);
        let r = derivative_residual(&a, &q(1.0, 0.0, -1.0), Complex64::new(2.0, 0.0)).unwrap();
        assert!(r <= 1e-10, "{r}");
        let v = a.expr.eval(&[Complex64::new(2.0, 0.0)]).unwrap();
        assert!((v - (2.0 + 3f64.sqrt()).ln()).norm() < 1e-15);
    }

    #[test]
    fn case_c() {
        let p = q(0.0, 2.0, 1.0);
        let prim = primitive_reciprocal_sqrt_quadratic(&p);
        assert_eq!(prim.case, CaseTag::C);
        assert!(derivative_residual(&prim, &p, Complex64::new(0.7, 0.2)).unwrap() < 1e-12);
    }

    #[test]
    fn zero_quadratic_rejected() {
        assert!(QuadraticPolynomial::real(0.0, 0.0, 0.0).is_err());
    }
}
