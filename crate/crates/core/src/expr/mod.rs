//! A closed expression language over complex scalars.
//!
//! Expressions are trees over constants, coordinate variables `u1..uN`, the
//! elementary functions `exp, log, sin, cos, tan, cosh, sinh, sqrt` and the
//! operators `+ - * /` plus integer powers. Every expression can be evaluated
//! either to a plain value ([`Expr::eval`]) or together with its exact
//! partial derivatives in every coordinate ([`Expr::eval_with_partials`]).
//!
//! Evaluation is principal-branch: `sqrt` and `log` use the principal
//! argument. Multi-valued behaviour along paths is handled by
//! [`crate::continuation`], which drives the same evaluator with a tracked
//! argument per branching node.

mod dual;
mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::ops;

use num_complex::Complex64;

pub use dual::DualValue;
pub(crate) use eval::{eval_generic, BranchPolicy, Principal};
pub use parse::ParseError;

/// Magnitude below which a denominator is treated as an exact zero.
pub const POLE_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Cosh,
    Sinh,
    Sqrt,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Sqrt => "sqrt",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "cosh" => UnaryOp::Cosh,
            "sinh" => UnaryOp::Sinh,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }

    /// `sqrt` and `log` are the only nodes whose value depends on a branch.
    pub fn is_branching(self) -> bool {
        matches!(self, UnaryOp::Sqrt | UnaryOp::Log)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

/// Expression tree. Variable indices are zero-based (`Var(0)` is `u1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Powi(Box<Expr>, i32),
}

/// Typed evaluation failure. Evaluation never yields a silent NaN.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("pole at {location:?}")]
    Pole { location: Vec<Complex64> },
    #[error("branch-ambiguous {op} at zero, point {location:?}")]
    BranchAmbiguous {
        op: &'static str,
        location: Vec<Complex64>,
    },
    #[error("variable u{} out of range for dimension {dim}", .index + 1)]
    Dimension { index: usize, dim: usize },
}

impl Expr {
    pub fn constant(c: impl Into<Complex64>) -> Self {
        Expr::Const(c.into())
    }

    pub fn real(x: f64) -> Self {
        Expr::Const(Complex64::new(x, 0.0))
    }

    /// Coordinate `u{index+1}`.
    pub fn var(index: usize) -> Self {
        Expr::Var(index)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Self {
        Expr::Unary(op, Box::new(e))
    }

    pub fn exp(self) -> Self {
        Expr::unary(UnaryOp::Exp, self)
    }
    pub fn log(self) -> Self {
        Expr::unary(UnaryOp::Log, self)
    }
    pub fn sin(self) -> Self {
        Expr::unary(UnaryOp::Sin, self)
    }
    pub fn cos(self) -> Self {
        Expr::unary(UnaryOp::Cos, self)
    }
    pub fn tan(self) -> Self {
        Expr::unary(UnaryOp::Tan, self)
    }
    pub fn cosh(self) -> Self {
        Expr::unary(UnaryOp::Cosh, self)
    }
    pub fn sinh(self) -> Self {
        Expr::unary(UnaryOp::Sinh, self)
    }
    pub fn sqrt(self) -> Self {
        Expr::unary(UnaryOp::Sqrt, self)
    }
    pub fn powi(self, n: i32) -> Self {
        Expr::Powi(Box::new(self), n)
    }

    /// Parses the infix grammar (`u1..uN`, `i`, `pi`, functions, `+ - * / ^`).
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse(text)
    }

    /// Parses and checks that every variable index is below `dim`.
    pub fn parse_with_dim(text: &str, dim: usize) -> Result<Self, ParseError> {
        let e = parse::parse(text)?;
        if let Some(max) = e.max_var() {
            if max >= dim {
                return Err(ParseError {
                    position: text.find(&format!("u{}", max + 1)).unwrap_or(0),
                    message: format!("variable u{} exceeds dimension {dim}", max + 1),
                });
            }
        }
        Ok(e)
    }

    /// Largest zero-based variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.variables().into_iter().next_back()
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(i) = e {
                out.insert(*i);
            }
        });
        out
    }

    /// Pre-order traversal; children are visited left to right.
    pub fn visit<F: FnMut(&Expr)>(&self, f: &mut F) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Unary(_, a) | Expr::Powi(a, _) => a.visit(f),
            Expr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Number of `sqrt`/`log` nodes.
    pub fn branch_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |e| {
            if let Expr::Unary(op, _) = e {
                if op.is_branching() {
                    n += 1;
                }
            }
        });
        n
    }

    pub fn contains_op(&self, op: UnaryOp) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if let Expr::Unary(o, _) = e {
                found |= *o == op;
            }
        });
        found
    }

    /// True for a variable-free expression that evaluates to exactly zero.
    pub fn is_zero(&self) -> bool {
        self.variables().is_empty()
            && matches!(self.eval(&[]), Ok(v) if v == Complex64::new(0.0, 0.0))
    }

    /// Replaces `Var(index)` with `with` everywhere.
    pub fn substitute(&self, index: usize, with: &Expr) -> Expr {
        match self {
            Expr::Var(i) if *i == index => with.clone(),
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(a.substitute(index, with))),
            Expr::Powi(a, n) => Expr::Powi(Box::new(a.substitute(index, with)), *n),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.substitute(index, with)),
                Box::new(b.substitute(index, with)),
            ),
        }
    }

    /// Renames variable indices through `map`.
    pub fn remap_vars(&self, map: &impl Fn(usize) -> usize) -> Expr {
        match self {
            Expr::Var(i) => Expr::Var(map(*i)),
            Expr::Const(_) => self.clone(),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(a.remap_vars(map))),
            Expr::Powi(a, n) => Expr::Powi(Box::new(a.remap_vars(map)), *n),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.remap_vars(map)),
                Box::new(b.remap_vars(map)),
            ),
        }
    }

    /// Principal-branch value at `point`.
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64, EvalError> {
        eval_generic::<Complex64, _>(self, point, &mut Principal)
    }

    /// Value and all partial derivatives `∂/∂u1..∂/∂uN`, `N = point.len()`.
    pub fn eval_with_partials(&self, point: &[Complex64]) -> Result<DualValue, EvalError> {
        eval_generic::<DualValue, _>(self, point, &mut Principal)
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Self {
        Expr::real(x)
    }
}

impl From<Complex64> for Expr {
    fn from(c: Complex64) -> Self {
        Expr::Const(c)
    }
}

macro_rules! impl_binop {
    ($tr:ident, $m:ident, $op:expr) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::Binary($op, Box::new(self), Box::new(rhs))
            }
        }
    };
}
impl_binop!(Add, add, BinaryOp::Add);
impl_binop!(Sub, sub, BinaryOp::Sub);
impl_binop!(Mul, mul, BinaryOp::Mul);
impl_binop!(Div, div, BinaryOp::Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

fn fmt_complex(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        if c.re < 0.0 {
            write!(f, "({:?})", c.re)
        } else {
            write!(f, "{:?}", c.re)
        }
    } else if c.re == 0.0 {
        write!(f, "({:?}*i)", c.im)
    } else {
        write!(f, "({:?}+{:?}*i)", c.re, c.im)
    }
}

/// Fully parenthesised rendering that [`Expr::parse`] reads back.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_complex(*c, f),
            Expr::Var(i) => write!(f, "u{}", i + 1),
            Expr::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Expr::Powi(a, n) => write!(f, "({a}^({n}))"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polynomial_value() {
        let e = Expr::parse("u1*u1 + u2").unwrap();
        assert_eq!(e.eval(&[c(2.0, 0.0), c(3.0, 0.0)]).unwrap(), c(7.0, 0.0));
    }

    #[test]
    fn pole_of_reciprocal_quadratic() {
        let e = Expr::parse("1/(u1^2+u2^2)").unwrap();
        let err = e.eval(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap_err();
        assert!(matches!(err, EvalError::Pole { .. }), "{err:?}");
    }

    #[test]
    fn tan_pole_at_half_pi() {
        let e = Expr::parse("tan(u1)").unwrap();
        assert!(matches!(
            e.eval(&[c(PI / 2.0, 0.0)]),
            Err(EvalError::Pole { .. })
        ));
        assert!(e.eval(&[c(PI / 2.0 - 1e-6, 0.0)]).is_ok());
    }

    #[test]
    fn sqrt_and_log_at_zero_are_ambiguous() {
        for text in ["sqrt(u1)", "log(u1)"] {
            let e = Expr::parse(text).unwrap();
            assert!(matches!(
                e.eval(&[c(0.0, 0.0)]),
                Err(EvalError::BranchAmbiguous { .. })
            ));
        }
    }

    #[test]
    fn negative_power_of_zero_is_pole() {
        let e = Expr::parse("u1^-2").unwrap();
        assert!(matches!(
            e.eval(&[c(0.0, 0.0)]),
            Err(EvalError::Pole { .. })
        ));
    }

    #[test]
    fn overflow_is_not_silent() {
        let e = Expr::parse("exp(u1)").unwrap();
        assert!(matches!(
            e.eval(&[c(1000.0, 0.0)]),
            Err(EvalError::Pole { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let e = Expr::parse("u3").unwrap();
        assert_eq!(
            e.eval(&[c(1.0, 0.0)]),
            Err(EvalError::Dimension { index: 2, dim: 1 })
        );
        assert!(Expr::parse_with_dim("u1+u3", 2).is_err());
    }

    #[test]
    fn exp_partial() {
        let d = Expr::parse("exp(u1)")
            .unwrap()
            .eval_with_partials(&[c(0.0, 0.0)])
            .unwrap();
        assert_eq!(d.value, c(1.0, 0.0));
        assert_eq!(d.partials, vec![c(1.0, 0.0)]);
    }

    #[test]
    fn product_rule() {
        let d = Expr::parse("u1*u2")
            .unwrap()
            .eval_with_partials(&[c(2.0, 0.0), c(3.0, 0.0)])
            .unwrap();
        assert_eq!(d.value, c(6.0, 0.0));
        assert_eq!(d.partials, vec![c(3.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "u1*u1 + u2",
            "-u1^2 + 3*i",
            "exp(-1/sqrt(u1))",
            "log(u1 + sqrt(u1^2 - 1))",
            "cosh(u2)/(1.5e-3 - u1)^(-3)",
        ] {
            let e = Expr::parse(text).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{text} -> {e}");
        }
    }

    #[test]
    fn substitution_composes() {
        let phi = Expr::parse("log(u1)").unwrap();
        let h = Expr::parse("exp(u1)").unwrap();
        let comp = phi.substitute(0, &h);
        let v = comp.eval(&[c(0.3, 0.2)]).unwrap();
        assert!((v - c(0.3, 0.2)).norm() < 1e-15);
    }

    #[test]
    fn zero_detection() {
        assert!(Expr::parse("0").unwrap().is_zero());
        assert!(Expr::parse("1-1").unwrap().is_zero());
        assert!(!Expr::parse("u1-u1").unwrap().is_zero());
        assert!(!Expr::parse("2").unwrap().is_zero());
    }
}
