use num_complex::Complex64;

use super::{
    ComplexField, ComplexPath, FieldError, IntegratorConfig, OdeError, Sample, Segment,
    SingularityKind, Termination, Trajectory,
};

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights equal the last row of A; E holds their difference from the fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

fn finite(w: &[Complex64]) -> bool {
    w.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn max_norm(w: &[Complex64]) -> f64 {
    w.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct Stepper<'a, F: ?Sized> {
    field: &'a F,
    config: &'a IntegratorConfig,
    k: [Vec<Complex64>; 7],
    tmp: Vec<Complex64>,
    w5: Vec<Complex64>,
}

enum StepOutcome {
    Accepted { err: f64 },
    Rejected { err: f64 },
    Failed(FieldError),
}

impl<'a, F: ComplexField + ?Sized> Stepper<'a, F> {
    /// `dw/ds = F(z(s), w) · z'(s)` on one segment.
    fn rhs(
        &self,
        seg: &Segment,
        s: f64,
        w: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<(), FieldError> {
        self.field.eval(seg.point(s), w, out)?;
        let t = seg.tangent(s);
        for v in out.iter_mut() {
            *v *= t;
        }
        if finite(out) {
            Ok(())
        } else {
            Err(FieldError::Other("non-finite field value".into()))
        }
    }

    fn error_norm(&self, w: &[Complex64], w_new: &[Complex64], err: &[Complex64]) -> f64 {
        let n = w.len().max(1) as f64;
        let sum: f64 = w
            .iter()
            .zip(w_new)
            .zip(err)
            .map(|((a, b), e)| {
                let sc = self.config.abs_tol + self.config.rel_tol * a.norm().max(b.norm());
                (e.norm() / sc).powi(2)
            })
            .sum();
        (sum / n).sqrt()
    }

    /// One trial step from `(s, w)` with `k[0]` holding `F` at the start.
    fn attempt(&mut self, seg: &Segment, s: f64, h: f64, w: &[Complex64]) -> StepOutcome {
        let m = w.len();
        for stage in 1..7 {
            for i in 0..m {
                let mut acc = w[i];
                for (j, a) in A[stage].iter().enumerate().take(stage) {
                    if *a != 0.0 {
                        acc += self.k[j][i] * (h * a);
                    }
                }
                self.tmp[i] = acc;
            }
            let mut out = std::mem::take(&mut self.k[stage]);
            let r = self.rhs(seg, s + C[stage] * h, &self.tmp, &mut out);
            self.k[stage] = out;
            if let Err(e) = r {
                return StepOutcome::Failed(e);
            }
            if stage == 6 {
                // stage 6 is evaluated at the 5th-order solution
                self.w5.copy_from_slice(&self.tmp);
            }
        }
        let mut err = vec![Complex64::new(0.0, 0.0); m];
        for (i, e) in err.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, ej) in E.iter().enumerate() {
                acc += self.k[j][i] * (h * ej);
            }
            *e = acc;
        }
        let norm = self.error_norm(w, &self.w5, &err);
        if !norm.is_finite() {
            return StepOutcome::Rejected { err: f64::INFINITY };
        }
        if norm <= 1.0 {
            StepOutcome::Accepted { err: norm }
        } else {
            StepOutcome::Rejected { err: norm }
        }
    }
}

fn initial_step(
    len: f64,
    config: &IntegratorConfig,
    w: &[Complex64],
    f: &[Complex64],
    min_step: f64,
) -> f64 {
    let sc = |z: &Complex64| config.abs_tol + config.rel_tol * z.norm();
    let d0 = w
        .iter()
        .map(|z| (z.norm() / sc(z)).powi(2))
        .sum::<f64>()
        .sqrt();
    let d1 = w
        .iter()
        .zip(f)
        .map(|(z, d)| (d.norm() / sc(z)).powi(2))
        .sum::<f64>()
        .sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(config.max_step).min(len).max(10.0 * min_step)
}

/// Integrates `w' = F(w, z)` from `w0` at `path.start()` along `path`.
///
/// Early stops are reported in [`Trajectory::termination`], not as errors;
/// `Err` is returned only for invalid inputs.
pub fn integrate_along<F: ComplexField + ?Sized>(
    field: &F,
    w0: &[Complex64],
    path: &ComplexPath,
    config: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    config.validate()?;
    let m = field.dim();
    if w0.len() != m {
        return Err(OdeError::Dimension {
            expected: m,
            got: w0.len(),
        });
    }
    let mut probe = vec![Complex64::new(0.0, 0.0); m];
    field
        .eval(path.start(), w0, &mut probe)
        .map_err(OdeError::InitialField)?;

    let min_step = config.min_step * path.length().max(1.0);
    let zero = || vec![Complex64::new(0.0, 0.0); m];
    let mut st = Stepper {
        field,
        config,
        k: [zero(), zero(), zero(), zero(), zero(), zero(), zero()],
        tmp: zero(),
        w5: zero(),
    };

    let mut samples = vec![Sample {
        s: 0.0,
        z: path.start(),
        w: w0.to_vec(),
    }];
    let mut w = w0.to_vec();
    let mut s_base = 0.0;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut h_carry: Option<f64> = None;

    for seg in path.segments() {
        let len = seg.length();
        if len == 0.0 {
            continue;
        }
        let mut s = 0.0;
        let mut k0 = zero();
        if let Err(e) = st.rhs(seg, 0.0, &w, &mut k0) {
            return Ok(finish(
                samples,
                Termination::FieldFailure {
                    z: seg.point(0.0),
                    s: s_base,
                    message: e.to_string(),
                },
                accepted,
                rejected,
            ));
        }
        st.k[0] = k0;
        let mut h = h_carry.unwrap_or_else(|| initial_step(len, config, &w, &st.k[0], min_step));
        let mut err_old: f64 = 1e-4;
        let mut last_failure: Option<FieldError> = None;

        while s < len {
            h = h.min(config.max_step);
            let remaining = len - s;
            let mut last = false;
            if h >= remaining * (1.0 - 1e-12) {
                h = remaining;
                last = true;
            }
            match st.attempt(seg, s, h, &w) {
                StepOutcome::Accepted { err } => {
                    accepted += 1;
                    s = if last { len } else { s + h };
                    w.copy_from_slice(&st.w5);
                    st.k.swap(0, 6);
                    samples.push(Sample {
                        s: s_base + s,
                        z: seg.point(s),
                        w: w.clone(),
                    });
                    if max_norm(&w) > config.blowup_threshold {
                        let z_est = seg.point(s);
                        return Ok(finish(
                            samples,
                            Termination::Singularity {
                                z_est,
                                s: s_base + s,
                                kind: SingularityKind::Pole,
                            },
                            accepted,
                            rejected,
                        ));
                    }
                    let err = err.max(1e-10);
                    let fac = (err.powf(0.2 - 0.75 * BETA) / err_old.powf(BETA) / SAFETY)
                        .clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                    err_old = err.max(1e-4);
                    h /= fac;
                    last_failure = None;
                }
                StepOutcome::Rejected { err } => {
                    rejected += 1;
                    let fac = if err.is_finite() {
                        (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0)
                    } else {
                        FAC_MIN
                    };
                    h *= fac;
                }
                StepOutcome::Failed(e) => {
                    rejected += 1;
                    h *= 0.25;
                    last_failure = Some(e);
                }
            }
            if h < min_step {
                let z = seg.point(s);
                let term = if max_norm(&w) > config.blowup_threshold {
                    Termination::Singularity {
                        z_est: z,
                        s: s_base + s,
                        kind: SingularityKind::Pole,
                    }
                } else if let Some(e) = last_failure {
                    Termination::FieldFailure {
                        z,
                        s: s_base + s,
                        message: e.to_string(),
                    }
                } else {
                    Termination::StepCollapse { z, s: s_base + s }
                };
                return Ok(finish(samples, term, accepted, rejected));
            }
        }
        h_carry = Some(h);
        s_base += len;
    }
    Ok(finish(samples, Termination::Completed, accepted, rejected))
}

fn finish(
    samples: Vec<Sample>,
    termination: Termination,
    accepted: usize,
    rejected: usize,
) -> Trajectory {
    Trajectory {
        samples,
        termination,
        accepted_steps: accepted,
        rejected_steps: rejected,
    }
}

/// Continues `w0` once around the closed `loop_path`.
pub fn integrate_loop<F: ComplexField + ?Sized>(
    field: &F,
    w0: &[Complex64],
    loop_path: &ComplexPath,
    config: &IntegratorConfig,
) -> Result<(Vec<Complex64>, Trajectory), OdeError> {
    if !loop_path.is_closed() {
        return Err(OdeError::OpenLoop {
            start: loop_path.start(),
            end: loop_path.end(),
        });
    }
    let traj = integrate_along(field, w0, loop_path, config)?;
    Ok((traj.final_state().to_vec(), traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_ode::FnField;
    use std::f64::consts::{E as EULER, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exp_field() -> impl ComplexField {
        FnField::new(1, |_z, w: &[Complex64], dw: &mut [Complex64]| {
            dw[0] = w[0];
            Ok(())
        })
    }

    fn square_field() -> impl ComplexField {
        FnField::new(1, |_z, w: &[Complex64], dw: &mut [Complex64]| {
            dw[0] = w[0] * w[0];
            Ok(())
        })
    }

    #[test]
    fn exponential_on_unit_segment() {
        let path = ComplexPath::line(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let tr = integrate_along(
            &exp_field(),
            &[c(1.0, 0.0)],
            &path,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(tr.termination.is_completed());
        let w = tr.final_state()[0];
        assert!(((w - EULER) / EULER).norm() <= 1e-9, "{w}");
    }

    #[test]
    fn pole_of_riccati_located() {
        let path = ComplexPath::line(c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        let tr = integrate_along(
            &square_field(),
            &[c(1.0, 0.0)],
            &path,
            &IntegratorConfig::default(),
        )
        .unwrap();
        match tr.termination {
            Termination::Singularity { z_est, kind, .. } => {
                assert_eq!(kind, SingularityKind::Pole);
                assert!((z_est - 1.0).norm() <= 1e-2, "{z_est}");
            }
            t => panic!("expected singularity, got {t:?}"),
        }
    }

    #[test]
    fn riccati_continued_around_pole() {
        let path = ComplexPath::polyline(&[c(0.0, 0.0), c(1.0, -0.2), c(2.0, 0.0)]).unwrap();
        let tr = integrate_along(
            &square_field(),
            &[c(1.0, 0.0)],
            &path,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(tr.termination.is_completed());
        let w = tr.final_state()[0];
        assert!((w + 1.0).norm() <= 1e-8, "{w}");
    }

    #[test]
    fn sqrt_loop_changes_sign() {
        let f = FnField::new(1, |z: Complex64, w: &[Complex64], dw: &mut [Complex64]| {
            dw[0] = w[0] / (2.0 * z);
            Ok(())
        });
        let circle = ComplexPath::circle(c(0.0, 0.0), 1.0, 0.0, 1.0).unwrap();
        let (w, tr) =
            integrate_loop(&f, &[c(1.0, 0.0)], &circle, &IntegratorConfig::default()).unwrap();
        assert!(tr.termination.is_completed());
        assert!((w[0] + 1.0).norm() <= 1e-10, "{}", w[0]);
    }

    #[test]
    fn log_loop_gains_two_pi_i() {
        let f = FnField::new(1, |z: Complex64, _w: &[Complex64], dw: &mut [Complex64]| {
            dw[0] = z.inv();
            Ok(())
        });
        let circle = ComplexPath::circle(c(0.0, 0.0), 1.0, 0.0, 1.0).unwrap();
        let (w, _) =
            integrate_loop(&f, &[c(0.0, 0.0)], &circle, &IntegratorConfig::default()).unwrap();
        assert!((w[0] - c(0.0, 2.0 * PI)).norm() <= 1e-10, "{}", w[0]);
    }

    #[test]
    fn entire_solution_has_trivial_monodromy() {
        let loop_path = ComplexPath::circle(c(0.5, 0.5), 1.25, -PI * 0.75, 1.0).unwrap();
        let start = loop_path.start();
        let w0 = [start.exp()];
        let (w, _) =
            integrate_loop(&exp_field(), &w0, &loop_path, &IntegratorConfig::default()).unwrap();
        assert!(((w[0] - w0[0]) / w0[0]).norm() <= 1e-10);
    }

    #[test]
    fn open_loop_rejected() {
        let p = ComplexPath::line(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(matches!(
            integrate_loop(
                &exp_field(),
                &[c(1.0, 0.0)],
                &p,
                &IntegratorConfig::default()
            ),
            Err(OdeError::OpenLoop { .. })
        ));
    }

    #[test]
    fn branch_point_on_path_is_not_a_pole() {
        // w = sqrt(z) from 1 straight through the branch point at 0
        let f = FnField::new(1, |z: Complex64, w: &[Complex64], dw: &mut [Complex64]| {
            dw[0] = w[0] / (2.0 * z);
            Ok(())
        });
        let p = ComplexPath::line(c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        let tr = integrate_along(&f, &[c(1.0, 0.0)], &p, &IntegratorConfig::default()).unwrap();
        assert!(!tr.termination.is_completed());
        let z = tr.termination.location().unwrap();
        assert!(z.norm() < 1e-3, "{z}");
        assert_ne!(tr.termination.singularity_kind(), None);
        assert!(!matches!(
            tr.termination,
            Termination::Singularity {
                kind: SingularityKind::Pole,
                ..
            }
        ));
    }

    #[test]
    fn field_failure_at_start_is_an_error() {
        let f = FnField::new(1, |_z, _w: &[Complex64], _dw: &mut [Complex64]| {
            Err(FieldError::NotOrdinary)
        });
        let p = ComplexPath::line(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(matches!(
            integrate_along(&f, &[c(1.0, 0.0)], &p, &IntegratorConfig::default()),
            Err(OdeError::InitialField(_))
        ));
    }

    #[test]
    fn samples_monotone_in_arc_length() {
        let path = ComplexPath::polyline(&[c(0.0, 0.0), c(1.0, -0.2), c(2.0, 0.0)]).unwrap();
        let tr = integrate_along(
            &square_field(),
            &[c(1.0, 0.0)],
            &path,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(tr.samples.windows(2).all(|w| w[1].s > w[0].s));
        assert!((tr.last().s - path.length()).abs() < 1e-12);
    }
}
