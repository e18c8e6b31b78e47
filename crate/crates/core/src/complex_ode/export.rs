use std::io::{self, Write};

use serde_json::{json, Value};

use super::Trajectory;

/// Writes `s, Re(z), Im(z), Re(w_1), Im(w_1), ...` rows, one per sample.
pub fn write_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    let m = traj.samples.first().map_or(0, |s| s.w.len());
    let mut header = String::from("s,Re(z),Im(z)");
    for k in 1..=m {
        header.push_str(&format!(",Re(w_{k}),Im(w_{k})"));
    }
    writeln!(out, "{header}")?;
    for s in &traj.samples {
        write!(out, "{:.16e},{:.16e},{:.16e}", s.s, s.z.re, s.z.im)?;
        for w in &s.w {
            write!(out, ",{:.16e},{:.16e}", w.re, w.im)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Termination metadata for the JSON sidecar of a CSV export.
pub fn termination_json(traj: &Trajectory) -> Value {
    json!({
        "termination": traj.termination,
        "samples": traj.samples.len(),
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "final_s": traj.last().s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_ode::{Sample, Termination};
    use num_complex::Complex64;

    #[test]
    fn csv_layout() {
        let traj = Trajectory {
            samples: vec![Sample {
                s: 0.0,
                z: Complex64::new(1.0, 2.0),
                w: vec![Complex64::new(3.0, 4.0), Complex64::new(5.0, 6.0)],
            }],
            termination: Termination::Completed,
            accepted_steps: 0,
            rejected_steps: 0,
        };
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "s,Re(z),Im(z),Re(w_1),Im(w_1),Re(w_2),Im(w_2)"
        );
        assert_eq!(lines.next().unwrap().split(',').count(), 7);
        assert_eq!(
            termination_json(&traj)["termination"]["status"],
            "completed"
        );
    }
}
