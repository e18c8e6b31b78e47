use std::f64::consts::PI;

use num_complex::Complex64;

use crate::expr::BranchPolicy;

/// Branch policy driven by one unwrapped argument per `sqrt`/`log` node.
///
/// Each call picks the argument of `w` nearest to the stored one, so a
/// sequence of small steps follows a single continuous branch. Nodes without
/// a stored argument start on the principal branch.
pub(crate) struct Tracked<'a> {
    prior: &'a [f64],
    next: Vec<f64>,
    max_jump: f64,
}

fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

impl<'a> Tracked<'a> {
    pub(crate) fn new(prior: &'a [f64]) -> Self {
        Self {
            prior,
            next: Vec::with_capacity(prior.len()),
            max_jump: 0.0,
        }
    }

    /// Largest argument change seen relative to the stored arguments.
    pub(crate) fn max_jump(&self) -> f64 {
        self.max_jump
    }

    pub(crate) fn into_args(self) -> Vec<f64> {
        self.next
    }

    fn track(&mut self, w: Complex64) -> f64 {
        let idx = self.next.len();
        let arg = match self.prior.get(idx) {
            Some(&prev) => {
                let d = wrap(w.arg() - prev);
                self.max_jump = self.max_jump.max(d.abs());
                prev + d
            }
            None => w.arg(),
        };
        self.next.push(arg);
        arg
    }
}

impl BranchPolicy for Tracked<'_> {
    fn sqrt(&mut self, w: Complex64) -> Complex64 {
        let a = self.track(w);
        Complex64::from_polar(w.norm().sqrt(), 0.5 * a)
    }

    fn log(&mut self, w: Complex64) -> Complex64 {
        let a = self.track(w);
        Complex64::new(w.norm().ln(), a)
    }
}
