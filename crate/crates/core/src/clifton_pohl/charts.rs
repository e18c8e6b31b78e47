//! Chart-switching integration: logarithmic coordinates away from the axes,
//! plane coordinates `(u, v)` near them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    classify, metric, CPClassification, CPError, CPInitial, CPVerdict, LogChartField,
    PlaneChartField,
};
use crate::complex_ode::{
    integrate_along, ComplexPath, IntegratorConfig, Sample, Termination, Trajectory,
};
use crate::geodesic::{
    probe_real_completeness, CompletenessEvidence, GeodesicMetric, ProbeConfig, Verdict,
};

/// The log chart is used while `min(|u|, |v|) ≥ CHART_SWITCH`.
pub const CHART_SWITCH: f64 = 0.1;

/// Longest chord integrated in a single chart.
const CHUNK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Log,
    Plane,
}

/// `U` is the axis `u = 0`, `V` the axis `v = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisCrossing {
    pub axis: Axis,
    /// Linear interpolation of the crossing point between samples.
    pub z: Complex64,
    /// Velocity component across the axis at the nearer sample.
    pub normal_velocity: Complex64,
    pub octant_before: (i8, i8),
    pub octant_after: (i8, i8),
}

/// A trajectory whose samples are always `(u, v, u̇, v̇)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartedTrajectory {
    pub trajectory: Trajectory,
    /// Chart used to reach each sample.
    pub charts: Vec<Chart>,
    /// `(sign Re u, sign Re v)` per sample.
    pub octants: Vec<(i8, i8)>,
    pub crossings: Vec<AxisCrossing>,
}

fn octant(w: &[Complex64]) -> (i8, i8) {
    let s = |x: f64| if x < 0.0 { -1 } else { 1 };
    (s(w[0].re), s(w[1].re))
}

fn shift_termination(t: Termination, ds: f64) -> Termination {
    match t {
        Termination::Completed => Termination::Completed,
        Termination::Singularity { z_est, s, kind } => Termination::Singularity {
            z_est,
            s: s + ds,
            kind,
        },
        Termination::StepCollapse { z, s } => Termination::StepCollapse { z, s: s + ds },
        Termination::FieldFailure { z, s, message } => Termination::FieldFailure {
            z,
            s: s + ds,
            message,
        },
    }
}

fn chunk_in_log(
    w: &[Complex64],
    chord: &ComplexPath,
    config: &IntegratorConfig,
) -> Result<Trajectory, CPError> {
    let s_u = if w[0].re < 0.0 { -1.0 } else { 1.0 };
    let s_v = if w[1].re < 0.0 { -1.0 } else { 1.0 };
    let start = [
        (s_u * w[0]).ln(),
        (s_v * w[1]).ln(),
        w[2] / w[0],
        w[3] / w[1],
    ];
    let mut traj = integrate_along(&LogChartField, &start, chord, config)?;
    for sample in &mut traj.samples {
        let l = &sample.w;
        let u = s_u * l[0].exp();
        let v = s_v * l[1].exp();
        sample.w = vec![u, v, l[2] * u, l[3] * v];
    }
    Ok(traj)
}

/// Integrates the geodesic from `w0` along `path`, switching charts on chords
/// of length at most 0.05.
pub fn integrate_charted(
    w0: [Complex64; 4],
    path: &ComplexPath,
    config: &IntegratorConfig,
) -> Result<ChartedTrajectory, CPError> {
    let total = path.length();
    let pieces = (total / CHUNK).ceil().max(1.0) as usize;
    let mut samples = vec![Sample {
        s: 0.0,
        z: path.start(),
        w: w0.to_vec(),
    }];
    let mut charts = vec![if w0[0].norm().min(w0[1].norm()) >= CHART_SWITCH {
        Chart::Log
    } else {
        Chart::Plane
    }];
    let (mut accepted, mut rejected) = (0, 0);
    let mut termination = Termination::Completed;
    for j in 0..pieces {
        let sa = total * j as f64 / pieces as f64;
        let sb = total * (j + 1) as f64 / pieces as f64;
        let (za, zb) = (path.point_at(sa), path.point_at(sb));
        let chord = ComplexPath::line(za, zb)?;
        let w = samples.last().expect("nonempty").w.clone();
        let chart = if w[0].norm().min(w[1].norm()) >= CHART_SWITCH {
            Chart::Log
        } else {
            Chart::Plane
        };
        let piece = match chart {
            Chart::Log => chunk_in_log(&w, &chord, config)?,
            Chart::Plane => integrate_along(&PlaneChartField, &w, &chord, config)?,
        };
        accepted += piece.accepted_steps;
        rejected += piece.rejected_steps;
        for sample in piece.samples.into_iter().skip(1) {
            samples.push(Sample {
                s: sample.s + sa,
                ..sample
            });
            charts.push(chart);
        }
        if !piece.termination.is_completed() {
            termination = shift_termination(piece.termination, sa);
            break;
        }
    }
    let octants: Vec<(i8, i8)> = samples.iter().map(|s| octant(&s.w)).collect();
    let mut crossings = Vec::new();
    for k in 1..samples.len() {
        let (a, b) = (&samples[k - 1], &samples[k]);
        for (axis, i) in [(Axis::U, 0), (Axis::V, 1)] {
            let (fa, fb) = (a.w[i].re, b.w[i].re);
            if (fa < 0.0) != (fb < 0.0) && fa != fb {
                let lam = fa / (fa - fb);
                let near = if lam < 0.5 { a } else { b };
                crossings.push(AxisCrossing {
                    axis,
                    z: a.z + lam * (b.z - a.z),
                    normal_velocity: near.w[i + 2],
                    octant_before: octants[k - 1],
                    octant_after: octants[k],
                });
            }
        }
    }
    Ok(ChartedTrajectory {
        trajectory: Trajectory {
            samples,
            termination,
            accepted_steps: accepted,
            rejected_steps: rejected,
        },
        charts,
        octants,
        crossings,
    })
}

/// Continues a trajectory ending near a coordinate axis by `length` along
/// the real direction, crossing the axis in plane coordinates.
pub fn axis_crossing_continue(
    traj: &Trajectory,
    length: f64,
    config: &IntegratorConfig,
) -> Result<ChartedTrajectory, CPError> {
    let last = traj.last();
    let w = &last.w;
    if w.len() != 4 || w.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(CPError::SingularCrossing(
            "state is not a finite (u, v, u̇, v̇)".into(),
        ));
    }
    let (nu, nv) = (w[0].norm(), w[1].norm());
    if nu.max(nv) < 1e-8 {
        return Err(CPError::SingularCrossing(
            "trajectory approaches the origin".into(),
        ));
    }
    if nu.min(nv) >= CHART_SWITCH {
        return Err(CPError::SingularCrossing(format!(
            "no axis within {CHART_SWITCH} of ({}, {})",
            w[0], w[1]
        )));
    }
    let z = last.z;
    let path = ComplexPath::line(z, z + length)?;
    let state = [w[0], w[1], w[2], w[3]];
    integrate_charted(state, &path, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub classification: CPClassification,
    pub evidence: CompletenessEvidence,
    /// Whether the probe verdict matches the impulse classifier.
    pub agree: bool,
}

/// Runs the impulse classifier and the geodesic probe over `horizon`.
pub fn cross_validate(
    c: &CPInitial,
    horizon: (f64, f64),
    config: &ProbeConfig,
) -> Result<CrossValidation, CPError> {
    let classification = classify(c)?;
    let m = GeodesicMetric::General(metric());
    let evidence = probe_real_completeness(&m, &c.germ(0.0), horizon, config);
    let agree = matches!(
        (classification.verdict, evidence.verdict),
        (CPVerdict::Complete, Verdict::CompleteProbed)
            | (CPVerdict::Incomplete, Verdict::IncompleteProbed)
    );
    Ok(CrossValidation {
        classification,
        evidence,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifton_pohl::impulse;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plane(w0: [Complex64; 4], path: &ComplexPath) -> Trajectory {
        integrate_along(&PlaneChartField, &w0, path, &IntegratorConfig::default()).unwrap()
    }

    #[test]
    fn charted_matches_plane_chart() {
        let w0 = CPInitial::new(1.0, 0.5, 0.3, -0.6).state();
        let path = ComplexPath::line(c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        let charted = integrate_charted(w0, &path, &IntegratorConfig::default()).unwrap();
        assert!(charted.trajectory.termination.is_completed());
        assert!(charted.charts.contains(&Chart::Log) && charted.charts.contains(&Chart::Plane));
        let direct = plane(w0, &path);
        let a = charted.trajectory.final_state();
        let b = direct.final_state();
        for k in 0..4 {
            assert!(
                (a[k] - b[k]).norm() < 1e-8 * (1.0 + b[k].norm()),
                "{k}: {} {}",
                a[k],
                b[k]
            );
        }
        assert_eq!(charted.crossings.len(), 1);
        let x = charted.crossings[0];
        assert_eq!(x.axis, Axis::V);
        assert_eq!((x.octant_before, x.octant_after), ((1, 1), (1, -1)));
    }

    #[test]
    fn crossing_continuation() {
        let w0 = CPInitial::new(1.0, 0.5, 0.3, -0.6).state();
        let path = ComplexPath::line(c(0.0, 0.0), c(0.75, 0.0)).unwrap();
        let head = plane(w0, &path);
        assert!(head.final_state()[1].norm() < CHART_SWITCH);
        let cont = axis_crossing_continue(&head, 0.5, &IntegratorConfig::default()).unwrap();
        assert_eq!(cont.crossings.len(), 1);
        let full = plane(w0, &ComplexPath::line(c(0.0, 0.0), c(1.25, 0.0)).unwrap());
        let a = cont.trajectory.final_state();
        let b = full.final_state();
        for k in 0..4 {
            assert!((a[k] - b[k]).norm() < 1e-8 * (1.0 + b[k].norm()));
        }
    }

    #[test]
    fn on_axis_null_geodesic_has_no_crossing() {
        let head = plane(
            CPInitial::new(1.0, 0.0, 0.2, 0.0).state(),
            &ComplexPath::line(c(0.0, 0.0), c(0.1, 0.0)).unwrap(),
        );
        let cont = axis_crossing_continue(&head, 1.0, &IntegratorConfig::default()).unwrap();
        assert!(cont.crossings.is_empty());
        assert!(cont
            .trajectory
            .samples
            .iter()
            .all(|s| s.w[1] == c(0.0, 0.0)));
    }

    #[test]
    fn crossing_rejects_origin_and_far_states() {
        let head = plane(
            CPInitial::new(1.0, 1.0, 0.2, 0.1).state(),
            &ComplexPath::line(c(0.0, 0.0), c(0.1, 0.0)).unwrap(),
        );
        assert!(matches!(
            axis_crossing_continue(&head, 1.0, &IntegratorConfig::default()),
            Err(CPError::SingularCrossing(_))
        ));
    }

    #[test]
    fn mirror_germs_share_probe_verdict() {
        // (u, v) ↦ (u, −v) is an isometry sending P to −P, so a probe cannot
        // separate a germ from its mirror image.
        let g = CPInitial::new(1.0, 0.0, 1.0, 1.0);
        let mirror = CPInitial::new(1.0, 0.0, 1.0, -1.0);
        assert_eq!(impulse(&g).unwrap(), -impulse(&mirror).unwrap());
        let cfg = ProbeConfig::default();
        let a = cross_validate(&g, (0.0, 3.0), &cfg).unwrap();
        let b = cross_validate(&mirror, (0.0, 3.0), &cfg).unwrap();
        assert_eq!(a.classification.verdict, CPVerdict::Complete);
        assert_eq!(b.classification.verdict, CPVerdict::Incomplete);
        assert_eq!(a.evidence.verdict, b.evidence.verdict);
        assert_eq!(a.evidence.obstructions.len(), b.evidence.obstructions.len());
    }
}
