use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_germ, geodesic_field, GeodesicField, GeodesicGerm, GeodesicMetric, HalfPlane};
use crate::complex_ode::{integrate_along, ComplexPath, IntegratorConfig, Termination, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub integrator: IntegratorConfig,
    /// Detour radii, tried in order, each multiplied by `radius_scale`.
    pub detour_radii: Vec<f64>,
    pub radius_scale: f64,
    /// A detour returns to the real slice when `|Im u^k| ≤ real_tol·(1 + |u^k|)`.
    pub real_tol: f64,
    /// Beyond this many obstructions the verdict is `unknown`.
    pub max_obstructions: usize,
    /// Keep the stitched real segments and chosen detours.
    pub keep_trajectory: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            detour_radii: vec![0.05, 0.1, 0.2],
            radius_scale: 1.0,
            real_tol: 1e-6,
            max_obstructions: 256,
            keep_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CompleteProbed,
    IncompleteProbed,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionKind {
    Pole,
    SuspectedBranchPoint,
    FieldFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DetourOutcome {
    /// Landed on the real slice.
    Returned,
    /// Landed off the real slice; `imag_ratio` is the worst `|Im u|/(1+|u|)`.
    NonReal { imag_ratio: f64 },
    /// The state blew up during the detour.
    Escaped,
    /// Step collapse or field failure during the detour.
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetourRecord {
    pub radius: f64,
    pub half_plane: HalfPlane,
    #[serde(flatten)]
    pub outcome: DetourOutcome,
    pub landing_position: Option<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeObstruction {
    pub t: f64,
    pub kind: ObstructionKind,
    pub attempts: Vec<DetourRecord>,
    pub flanked: bool,
    /// Whether both half-planes landed at the same real state, when both returned.
    pub half_planes_agree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessEvidence {
    pub verdict: Verdict,
    /// Disjoint, sorted real intervals reached on the real slice.
    pub covered: Vec<[f64; 2]>,
    pub obstructions: Vec<ProbeObstruction>,
    /// Obstructions within one detour radius of a horizon endpoint.
    pub boundary: Vec<f64>,
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Trajectory>>,
}

enum Stop {
    Reached,
    Boundary,
    Blocked { incomplete: bool },
    Capped,
}

struct Run<'a> {
    field: GeodesicField,
    cfg: &'a ProbeConfig,
    n: usize,
    covered: Vec<[f64; 2]>,
    obstructions: Vec<ProbeObstruction>,
    boundary: Vec<f64>,
    pieces: Vec<Trajectory>,
}

fn real(t: f64) -> Complex64 {
    Complex64::new(t, 0.0)
}

fn kind_of(t: &Termination) -> ObstructionKind {
    match t {
        Termination::Singularity { .. } => ObstructionKind::Pole,
        Termination::StepCollapse { .. } => ObstructionKind::SuspectedBranchPoint,
        _ => ObstructionKind::FieldFailure,
    }
}

impl Run<'_> {
    fn push_piece(&mut self, a: f64, b: f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        if hi > lo {
            self.covered.push([lo, hi]);
        }
    }

    fn keep(&mut self, t: Trajectory) {
        if self.cfg.keep_trajectory {
            self.pieces.push(t);
        }
    }

    fn imag_ratio(&self, state: &[Complex64]) -> f64 {
        state[..self.n]
            .iter()
            .map(|u| u.im.abs() / (1.0 + u.norm()))
            .fold(0.0, f64::max)
    }

    fn march(&mut self, mut t_c: f64, mut state: Vec<Complex64>, t_end: f64) -> Stop {
        let dir = if t_end >= t_c { 1.0 } else { -1.0 };
        loop {
            if t_c == t_end {
                return Stop::Reached;
            }
            let line = ComplexPath::line(real(t_c), real(t_end)).expect("distinct real points");
            let traj = match integrate_along(&self.field, &state, &line, &self.cfg.integrator) {
                Ok(t) => t,
                Err(_) => return Stop::Blocked { incomplete: false },
            };
            let termination = traj.termination.clone();
            self.keep(traj);
            let Some(z) = termination.location() else {
                self.push_piece(t_c, t_end);
                return Stop::Reached;
            };
            let t_star = z.re;
            let kind = kind_of(&termination);
            let dist_end = (t_end - t_star) * dir;
            let radii: Vec<f64> = self
                .cfg
                .detour_radii
                .iter()
                .map(|r| r * self.cfg.radius_scale)
                .filter(|r| *r < dist_end)
                .collect();
            if radii.is_empty() {
                self.push_piece(t_c, t_star);
                self.boundary.push(t_star);
                return Stop::Boundary;
            }
            if self.obstructions.len() >= self.cfg.max_obstructions {
                self.push_piece(t_c, t_star);
                return Stop::Capped;
            }
            let mut attempts = Vec::new();
            let mut chosen: Option<(f64, Trajectory)> = None;
            let mut agree = None;
            for r in radii {
                let landing = t_star + dir * r;
                let mut returned: Vec<Trajectory> = Vec::new();
                for (half_plane, upper) in [(HalfPlane::Upper, true), (HalfPlane::Lower, false)] {
                    let outcome = ComplexPath::real_detour(t_c, landing, t_star, r, upper)
                        .map_err(|e| e.to_string())
                        .and_then(|p| {
                            integrate_along(&self.field, &state, &p, &self.cfg.integrator)
                                .map_err(|e| e.to_string())
                        });
                    let (outcome, landing_position) = match outcome {
                        Err(message) => (DetourOutcome::Failed { message }, None),
                        Ok(tr) => {
                            let pos = tr.final_state()[..self.n].to_vec();
                            let o = match &tr.termination {
                                Termination::Completed => {
                                    let ratio = self.imag_ratio(tr.final_state());
                                    if ratio <= self.cfg.real_tol {
                                        returned.push(tr);
                                        DetourOutcome::Returned
                                    } else {
                                        DetourOutcome::NonReal { imag_ratio: ratio }
                                    }
                                }
                                Termination::Singularity { .. } => DetourOutcome::Escaped,
                                other => DetourOutcome::Failed {
                                    message: format!("{other:?}"),
                                },
                            };
                            (o, Some(pos))
                        }
                    };
                    attempts.push(DetourRecord {
                        radius: r,
                        half_plane,
                        outcome,
                        landing_position,
                    });
                }
                if returned.len() == 2 {
                    let (a, b) = (returned[0].final_state(), returned[1].final_state());
                    let same = a
                        .iter()
                        .zip(b)
                        .all(|(x, y)| (x - y).norm() <= self.cfg.real_tol * (1.0 + x.norm()));
                    agree = Some(same);
                }
                if let Some(tr) = returned.into_iter().next() {
                    chosen = Some((landing, tr));
                    break;
                }
            }
            let flanked = chosen.is_some();
            let incomplete = attempts.iter().any(|a| {
                matches!(
                    a.outcome,
                    DetourOutcome::Escaped | DetourOutcome::NonReal { .. }
                )
            });
            let r_used = chosen.as_ref().map(|(l, _)| (l - t_star).abs());
            self.obstructions.push(ProbeObstruction {
                t: t_star,
                kind,
                attempts,
                flanked,
                half_planes_agree: agree,
            });
            match chosen {
                Some((landing, tr)) => {
                    let r = r_used.expect("set with chosen");
                    if (t_star - dir * r - t_c) * dir > 0.0 {
                        self.push_piece(t_c, t_star - dir * r);
                    }
                    state = tr.final_state().to_vec();
                    self.keep(tr);
                    t_c = landing;
                }
                None => {
                    self.push_piece(t_c, t_star);
                    return Stop::Blocked { incomplete };
                }
            }
        }
    }
}

fn merge(mut v: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    v.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut out: Vec<[f64; 2]> = Vec::new();
    for iv in v {
        match out.last_mut() {
            Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
            _ => out.push(iv),
        }
    }
    out
}

/// Marches the geodesic through `g` along the real axis over `horizon`,
/// flanking each obstruction by semicircular detours in both half-planes.
pub fn probe_real_completeness(
    m: &GeodesicMetric,
    g: &GeodesicGerm,
    horizon: (f64, f64),
    config: &ProbeConfig,
) -> CompletenessEvidence {
    let unknown = |note: &str| CompletenessEvidence {
        verdict: Verdict::Unknown,
        covered: Vec::new(),
        obstructions: Vec::new(),
        boundary: Vec::new(),
        note: Some(note.to_string()),
        trajectory: None,
    };
    let (t0, t1) = (horizon.0.min(horizon.1), horizon.0.max(horizon.1));
    if check_germ(m.dim(), g).is_err() {
        return unknown("germ dimension does not match the metric");
    }
    if g.z0.im != 0.0 || g.z0.re < t0 || g.z0.re > t1 {
        return unknown("germ time must be real and inside the horizon");
    }
    if !m.is_ordinary(&g.position) {
        return unknown("germ position is not metrically ordinary");
    }
    let mut run = Run {
        field: geodesic_field(m.clone()),
        cfg: config,
        n: m.dim(),
        covered: Vec::new(),
        obstructions: Vec::new(),
        boundary: Vec::new(),
        pieces: Vec::new(),
    };
    let start = g.z0.re;
    let right = run.march(start, g.state(), t1);
    let left = run.march(start, g.state(), t0);
    let mut incomplete = false;
    let mut open = false;
    let mut note = None;
    for stop in [right, left] {
        match stop {
            Stop::Reached | Stop::Boundary => {}
            Stop::Blocked { incomplete: true } => incomplete = true,
            Stop::Blocked { incomplete: false } => open = true,
            Stop::Capped => {
                open = true;
                note = Some("obstruction cap reached".to_string());
            }
        }
    }
    let verdict = if incomplete {
        Verdict::IncompleteProbed
    } else if open {
        Verdict::Unknown
    } else {
        Verdict::CompleteProbed
    };
    let mut obstructions = run.obstructions;
    obstructions.sort_by(|a, b| a.t.total_cmp(&b.t));
    run.boundary.sort_by(f64::total_cmp);
    CompletenessEvidence {
        verdict,
        covered: merge(run.covered),
        obstructions,
        boundary: run.boundary,
        note,
        trajectory: config.keep_trajectory.then_some(run.pieces),
    }
}
