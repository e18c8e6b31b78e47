//! One function per verb. Each returns the `result` section of its report.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use holgeo::clifton_pohl::{self, integrate_charted, CPInitial};
use holgeo::coercivity::{classify_example_class_coeffs, classify_warped_spec};
use holgeo::complex_ode::{termination_json, write_csv};
use holgeo::continuation::{monodromy, Germ};
use holgeo::geodesic::{probe_real_completeness, shoot, GeodesicMetric};
use holgeo::metric::{christoffel_general, christoffel_warped};
use holgeo::{ComplexPath, Trajectory};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::scenario::{self, MetricInput, Scenario, ValidationError};

/// Where artifacts go: a directory, or stdout for the report alone.
pub struct Output {
    pub dir: Option<PathBuf>,
}

impl Output {
    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        match &self.dir {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let file = dir.join(name);
                fs::write(&file, contents).with_context(|| format!("writing {}", file.display()))
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(contents.as_bytes())?;
                Ok(())
            }
        }
    }

    /// CSV is written only into an output directory.
    pub fn csv(&self, name: &str, traj: &Trajectory) -> Result<Option<String>> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        fs::create_dir_all(dir)?;
        let file = dir.join(name);
        let mut w = std::io::BufWriter::new(
            fs::File::create(&file).with_context(|| format!("creating {}", file.display()))?,
        );
        write_csv(traj, &mut w)?;
        w.flush()?;
        Ok(Some(name.to_string()))
    }
}

fn metric_of(sc: &Scenario, verb: &str) -> Result<GeodesicMetric, ValidationError> {
    scenario::geodesic_metric(Scenario::require(&sc.metric, "metric", verb)?, verb)
}

pub fn christoffel(sc: &Scenario) -> Result<Value> {
    let m = metric_of(sc, "christoffel")?;
    let point = Scenario::require(&sc.point, "point", "christoffel")?;
    if point.len() != m.dim() {
        return Err(ValidationError::new(
            "/point",
            format!("expected {} components, got {}", m.dim(), point.len()),
        )
        .into());
    }
    let p: Vec<Complex64> = point.iter().map(|x| x.value()).collect();
    let ordinary = m.is_ordinary(&p);
    let (method, gamma) = match &m {
        GeodesicMetric::Warped(w) => ("warped", christoffel_warped(w, &p)),
        GeodesicMetric::General(g) => ("general", christoffel_general(g, &p)),
    };
    let gamma = gamma.map_err(|e| anyhow!("Christoffel symbols undefined at the point: {e}"))?;
    Ok(json!({
        "method": method,
        "metrically_ordinary": ordinary,
        "gamma": gamma.to_nested(),
        "max_abs": gamma.max_abs(),
    }))
}

fn summary_of(traj: &Trajectory) -> Value {
    termination_json(traj)
}

pub fn integrate(sc: &Scenario, out: &Output) -> Result<(Value, bool)> {
    let m = metric_of(sc, "integrate")?;
    let g = scenario::germ(
        Scenario::require(&sc.germ, "germ", "integrate")?,
        m.dim(),
        "/germ",
    )?;
    let path = scenario::path(Scenario::require(&sc.path, "path", "integrate")?)?;
    let shot =
        shoot(&m, &g, &path, &sc.integrator).map_err(|e| anyhow!("integration failed: {e}"))?;
    let csv = out.csv("trajectory.csv", &shot.trajectory)?;
    let completed = shot.trajectory.termination.is_completed();
    let result = json!({
        "summary": summary_of(&shot.trajectory),
        "final_position": shot.final_position(),
        "final_velocity": shot.final_velocity(),
        "first_integrals": shot.first_integrals,
        "max_first_integral_drift": shot.first_integrals.as_ref().map(|_| shot.max_drift()),
        "trajectory_csv": csv,
    });
    Ok((result, completed))
}

pub fn probe(sc: &Scenario, pool: &rayon::ThreadPool) -> Result<Value> {
    let m = metric_of(sc, "probe")?;
    let horizon = *Scenario::require(&sc.horizon, "horizon", "probe")?;
    let (germs, batch) = match (&sc.germ, &sc.germs) {
        (Some(_), Some(_)) => {
            return Err(
                ValidationError::new("/germs", "give either `germ` or `germs`, not both").into(),
            )
        }
        (Some(g), None) => (vec![scenario::germ(g, m.dim(), "/germ")?], false),
        (None, Some(gs)) => (
            gs.iter()
                .enumerate()
                .map(|(i, g)| scenario::germ(g, m.dim(), &format!("/germs/{i}")))
                .collect::<Result<Vec<_>, _>>()?,
            true,
        ),
        (None, None) => return Err(ValidationError::new("/germ", "required by `probe`").into()),
    };
    let evidence: Vec<_> = pool.install(|| {
        germs
            .par_iter()
            .map(|g| probe_real_completeness(&m, g, (horizon[0], horizon[1]), &sc.probe))
            .collect()
    });
    Ok(if batch {
        serde_json::to_value(evidence)?
    } else {
        serde_json::to_value(&evidence[0])?
    })
}

pub fn classify_warped(sc: &Scenario) -> Result<Value> {
    let metric = Scenario::require(&sc.metric, "metric", "classify-warped")?;
    let verdict = match scenario::example_class(metric)? {
        Some((h, f, p)) => classify_example_class_coeffs(&h, &f, &p, &sc.classify),
        None => match metric {
            MetricInput::Warped { b1, a, f } => {
                classify_warped_spec(&scenario::warped_spec(b1, a, f)?)
            }
            _ => {
                return Err(ValidationError::new(
                    "/metric/type",
                    "classify-warped needs a warped or warped_example metric",
                )
                .into())
            }
        },
    };
    Ok(serde_json::to_value(verdict)?)
}

pub fn monodromy_cmd(sc: &Scenario) -> Result<Value> {
    let text = Scenario::require(&sc.expr, "expr", "monodromy")?;
    let expr = holgeo::Expr::parse_with_dim(text, 1)
        .map_err(|e| ValidationError::new("/expr", e.to_string()))?;
    let loop_path = scenario::path(Scenario::require(&sc.path, "path", "monodromy")?)?;
    if !loop_path.is_closed() {
        return Err(ValidationError::new("/path", "monodromy needs a closed loop").into());
    }
    let base = sc.base_point.map_or(loop_path.start(), |b| b.value());
    let germ =
        Germ::closed_form(expr, base).map_err(|e| ValidationError::new("/expr", e.to_string()))?;
    let r = monodromy(&germ, &loop_path, sc.max_turns, &sc.continuation)
        .map_err(|e| anyhow!("continuation failed: {e}"))?;
    Ok(json!({
        "base_value": germ.value(),
        "value_after_one_turn": r.germ_out.value(),
        "classification": r.classification,
        "turn_values": r.turn_values,
    }))
}

pub struct CpArgs {
    pub single: Option<CPInitial>,
    pub probe: bool,
}

pub fn clifton_pohl_classify(
    sc: &Scenario,
    args: &CpArgs,
    out: &Output,
    pool: &rayon::ThreadPool,
) -> Result<Value> {
    let initials: Vec<CPInitial> = match (&args.single, &sc.initial) {
        (Some(c), _) => vec![*c],
        (None, Some(list)) if !list.is_empty() => list.clone(),
        _ => {
            return Err(ValidationError::new(
                "/initial",
                "give --alpha --beta --x --y or a scenario with a non-empty `initial` list",
            )
            .into())
        }
    };
    for (i, c) in initials.iter().enumerate() {
        clifton_pohl::constants(c)
            .map_err(|e| ValidationError::new(format!("/initial/{i}"), e.to_string()))?;
    }
    let [t0, t1] = sc.horizon.unwrap_or([0.0, 5.0]);
    let items: Vec<Result<(Value, Trajectory)>> = pool.install(|| {
        initials
            .par_iter()
            .map(|c| -> Result<(Value, Trajectory)> {
                let path = ComplexPath::line(Complex64::new(t0, 0.0), Complex64::new(t1, 0.0))?;
                let charted = integrate_charted(c.state(), &path, &sc.integrator)?;
                let value = if args.probe {
                    let cv = clifton_pohl::cross_validate(c, (t0, t1), &sc.probe)?;
                    json!({
                        "initial": c,
                        "impulse": cv.classification.constants.p,
                        "classification": cv.classification,
                        "probe_verdict": cv.evidence.verdict,
                        "agree": cv.agree,
                        "evidence": cv.evidence,
                    })
                } else {
                    let k = clifton_pohl::classify(c)?;
                    json!({"initial": c, "impulse": k.constants.p, "classification": k})
                };
                Ok((value, charted.trajectory))
            })
            .collect()
    });
    let mut results = Vec::with_capacity(items.len());
    for (i, item) in items.into_iter().enumerate() {
        let (mut value, traj) = item?;
        let csv = out.csv(&format!("clifton_pohl_{i}.csv"), &traj)?;
        value["trajectory"] = json!({"summary": summary_of(&traj), "csv": csv});
        results.push(value);
    }
    Ok(Value::Array(results))
}
