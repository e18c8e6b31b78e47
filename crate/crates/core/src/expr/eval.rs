use num_complex::Complex64;

use super::{BinaryOp, DualValue, EvalError, Expr, UnaryOp, POLE_THRESHOLD};

/// Number types the evaluator can run on. The value part is always computed
/// with the same `Complex64` operations, so plain and dual evaluation agree
/// bit for bit on the value.
pub(crate) trait Scalar: Sized {
    fn value(&self) -> Complex64;
    fn constant(c: Complex64, dim: usize) -> Self;
    fn variable(x: Complex64, index: usize, dim: usize) -> Self;
    fn unary(&self, f: Complex64, slope: impl FnOnce() -> Complex64) -> Self;
    fn binary(
        &self,
        other: &Self,
        value: Complex64,
        slopes: impl FnOnce() -> (Complex64, Complex64),
    ) -> Self;
}

impl Scalar for Complex64 {
    fn value(&self) -> Complex64 {
        *self
    }
    fn constant(c: Complex64, _dim: usize) -> Self {
        c
    }
    fn variable(x: Complex64, _index: usize, _dim: usize) -> Self {
        x
    }
    fn unary(&self, f: Complex64, _slope: impl FnOnce() -> Complex64) -> Self {
        f
    }
    fn binary(
        &self,
        _other: &Self,
        value: Complex64,
        _slopes: impl FnOnce() -> (Complex64, Complex64),
    ) -> Self {
        value
    }
}

impl Scalar for DualValue {
    fn value(&self) -> Complex64 {
        self.value
    }
    fn constant(c: Complex64, dim: usize) -> Self {
        DualValue::constant(c, dim)
    }
    fn variable(x: Complex64, index: usize, dim: usize) -> Self {
        DualValue::variable(x, index, dim)
    }
    fn unary(&self, f: Complex64, slope: impl FnOnce() -> Complex64) -> Self {
        self.chain(f, slope())
    }
    fn binary(
        &self,
        other: &Self,
        value: Complex64,
        slopes: impl FnOnce() -> (Complex64, Complex64),
    ) -> Self {
        let (da, db) = slopes();
        self.combine(other, value, da, db)
    }
}

/// How `sqrt` and `log` pick their branch. Called once per branching node,
/// in evaluation order (children first), with a nonzero argument.
pub(crate) trait BranchPolicy {
    fn sqrt(&mut self, w: Complex64) -> Complex64;
    fn log(&mut self, w: Complex64) -> Complex64;
}

pub(crate) struct Principal;

impl BranchPolicy for Principal {
    fn sqrt(&mut self, w: Complex64) -> Complex64 {
        w.sqrt()
    }
    fn log(&mut self, w: Complex64) -> Complex64 {
        w.ln()
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

struct Evaluator<'a, B> {
    point: &'a [Complex64],
    policy: &'a mut B,
}

impl<B: BranchPolicy> Evaluator<'_, B> {
    fn pole(&self) -> EvalError {
        EvalError::Pole {
            location: self.point.to_vec(),
        }
    }

    fn checked(&self, f: Complex64) -> Result<Complex64, EvalError> {
        if finite(f) {
            Ok(f)
        } else {
            Err(self.pole())
        }
    }

    fn run<S: Scalar>(&mut self, e: &Expr) -> Result<S, EvalError> {
        let dim = self.point.len();
        match e {
            Expr::Const(c) => Ok(S::constant(*c, dim)),
            Expr::Var(i) => {
                if *i >= dim {
                    return Err(EvalError::Dimension { index: *i, dim });
                }
                Ok(S::variable(self.point[*i], *i, dim))
            }
            Expr::Unary(op, a) => {
                let x: S = self.run(a)?;
                let v = x.value();
                let out = match op {
                    UnaryOp::Neg => x.unary(-v, || Complex64::new(-1.0, 0.0)),
                    UnaryOp::Exp => {
                        let f = self.checked(v.exp())?;
                        x.unary(f, || f)
                    }
                    UnaryOp::Log | UnaryOp::Sqrt => {
                        if v == Complex64::new(0.0, 0.0) {
                            return Err(EvalError::BranchAmbiguous {
                                op: op.name(),
                                location: self.point.to_vec(),
                            });
                        }
                        if *op == UnaryOp::Log {
                            let raw = self.policy.log(v);
                            let f = self.checked(raw)?;
                            x.unary(f, || v.inv())
                        } else {
                            let raw = self.policy.sqrt(v);
                            let f = self.checked(raw)?;
                            x.unary(f, || (2.0 * f).inv())
                        }
                    }
                    UnaryOp::Sin => {
                        let f = self.checked(v.sin())?;
                        x.unary(f, || v.cos())
                    }
                    UnaryOp::Cos => {
                        let f = self.checked(v.cos())?;
                        x.unary(f, || -v.sin())
                    }
                    UnaryOp::Tan => {
                        // cos vanishing to within the rounding of its argument
                        let cos = v.cos();
                        if cos.norm() <= 4.0 * f64::EPSILON * (1.0 + v.norm()) {
                            return Err(self.pole());
                        }
                        let f = self.checked(v.tan())?;
                        x.unary(f, || 1.0 + f * f)
                    }
                    UnaryOp::Cosh => {
                        let f = self.checked(v.cosh())?;
                        x.unary(f, || v.sinh())
                    }
                    UnaryOp::Sinh => {
                        let f = self.checked(v.sinh())?;
                        x.unary(f, || v.cosh())
                    }
                };
                Ok(out)
            }
            Expr::Binary(op, a, b) => {
                let x: S = self.run(a)?;
                let y: S = self.run(b)?;
                let (p, q) = (x.value(), y.value());
                let one = Complex64::new(1.0, 0.0);
                let out = match op {
                    BinaryOp::Add => x.binary(&y, self.checked(p + q)?, || (one, one)),
                    BinaryOp::Sub => x.binary(&y, self.checked(p - q)?, || (one, -one)),
                    BinaryOp::Mul => x.binary(&y, self.checked(p * q)?, || (q, p)),
                    BinaryOp::Div => {
                        if q.norm() < POLE_THRESHOLD {
                            return Err(self.pole());
                        }
                        let f = self.checked(p / q)?;
                        x.binary(&y, f, || (q.inv(), -f / q))
                    }
                };
                Ok(out)
            }
            Expr::Powi(a, n) => {
                let x: S = self.run(a)?;
                let v = x.value();
                if *n < 0 && v.norm() < POLE_THRESHOLD {
                    return Err(self.pole());
                }
                let f = self.checked(v.powi(*n))?;
                let n = *n;
                Ok(x.unary(f, || {
                    if n == 0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        f64::from(n) * v.powi(n - 1)
                    }
                }))
            }
        }
    }
}

pub(crate) fn eval_generic<S: Scalar, B: BranchPolicy>(
    e: &Expr,
    point: &[Complex64],
    policy: &mut B,
) -> Result<S, EvalError> {
    Evaluator { point, policy }.run(e)
}
