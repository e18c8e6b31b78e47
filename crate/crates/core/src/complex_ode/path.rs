use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OdeError;

/// Contiguity tolerance between segment endpoints, scaled by `max(1, |z|)`.
pub const CONTIGUITY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

/// One piece of a [`ComplexPath`].
///
/// Arcs run from `angle_start` to `angle_end`; the sign of the difference
/// gives the orientation, so a full counter-clockwise turn is `0 → 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Line {
        start: Complex64,
        end: Complex64,
    },
    Arc {
        center: Complex64,
        radius: f64,
        angle_start: f64,
        angle_end: f64,
    },
}

impl Segment {
    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(self.length())
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => (end - start).norm(),
            Segment::Arc {
                radius,
                angle_start,
                angle_end,
                ..
            } => radius * (angle_end - angle_start).abs(),
        }
    }

    pub fn orientation(&self) -> Option<Orientation> {
        match *self {
            Segment::Line { .. } => None,
            Segment::Arc {
                angle_start,
                angle_end,
                ..
            } => Some(if angle_end >= angle_start {
                Orientation::CounterClockwise
            } else {
                Orientation::Clockwise
            }),
        }
    }

    /// Point at arc length `s` from the segment start.
    pub fn point(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Line { start, end } => {
                let len = (end - start).norm();
                if len == 0.0 {
                    start
                } else if s >= len {
                    end
                } else {
                    start + (end - start) * (s / len)
                }
            }
            Segment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
            } => {
                let sign = (angle_end - angle_start).signum();
                let theta = if s >= self.length() {
                    angle_end
                } else {
                    angle_start + sign * s / radius
                };
                center + Complex64::from_polar(radius, theta)
            }
        }
    }

    /// Unit tangent `dz/ds` at arc length `s`.
    pub fn tangent(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Line { start, end } => {
                let d = end - start;
                let n = d.norm();
                if n == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    d / n
                }
            }
            Segment::Arc {
                radius,
                angle_start,
                angle_end,
                ..
            } => {
                let sign = (angle_end - angle_start).signum();
                let theta = angle_start + sign * s / radius;
                Complex64::new(0.0, sign) * Complex64::from_polar(1.0, theta)
            }
        }
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { start, end } => Segment::Line {
                start: end,
                end: start,
            },
            Segment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
            } => Segment::Arc {
                center,
                radius,
                angle_start: angle_end,
                angle_end: angle_start,
            },
        }
    }
}

/// Piecewise path in the complex time plane, parametrised by arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPath {
    segments: Vec<Segment>,
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= CONTIGUITY_TOL * a.norm().max(b.norm()).max(1.0)
}

impl ComplexPath {
    pub fn new(segments: Vec<Segment>) -> Result<Self, OdeError> {
        if segments.is_empty() {
            return Err(OdeError::InvalidPath("path has no segments".into()));
        }
        for (k, seg) in segments.iter().enumerate() {
            let len = seg.length();
            if !len.is_finite() {
                return Err(OdeError::InvalidPath(format!(
                    "segment {k} has infinite length"
                )));
            }
            if let Segment::Arc { radius, .. } = seg {
                if !(*radius > 0.0) {
                    return Err(OdeError::InvalidPath(format!(
                        "segment {k}: radius must be positive"
                    )));
                }
            }
        }
        for (k, w) in segments.windows(2).enumerate() {
            if !close(w[0].end(), w[1].start()) {
                return Err(OdeError::InvalidPath(format!(
                    "segments {k} and {} are not contiguous: {} vs {}",
                    k + 1,
                    w[0].end(),
                    w[1].start()
                )));
            }
        }
        let path = Self { segments };
        if !(path.length() > 0.0) {
            return Err(OdeError::InvalidPath("path has zero length".into()));
        }
        Ok(path)
    }

    pub fn line(start: Complex64, end: Complex64) -> Result<Self, OdeError> {
        Self::new(vec![Segment::Line { start, end }])
    }

    pub fn polyline(points: &[Complex64]) -> Result<Self, OdeError> {
        let segs = points
            .windows(2)
            .filter(|w| w[0] != w[1])
            .map(|w| Segment::Line {
                start: w[0],
                end: w[1],
            })
            .collect();
        Self::new(segs)
    }

    /// Circle through `center + radius·e^{i·angle}` traversed `turns` times
    /// (negative for clockwise).
    pub fn circle(
        center: Complex64,
        radius: f64,
        angle: f64,
        turns: f64,
    ) -> Result<Self, OdeError> {
        Self::new(vec![Segment::Arc {
            center,
            radius,
            angle_start: angle,
            angle_end: angle + 2.0 * PI * turns,
        }])
    }

    /// Real segment `[a, b]` with a semicircular detour around `center`.
    /// `upper` picks the half-plane the detour runs through.
    pub fn real_detour(
        a: f64,
        b: f64,
        center: f64,
        radius: f64,
        upper: bool,
    ) -> Result<Self, OdeError> {
        let forward = b >= a;
        let (left, right) = (center - radius, center + radius);
        let (enter, leave) = if forward {
            (left, right)
        } else {
            (right, left)
        };
        let (angle_start, angle_end) = match (forward, upper) {
            (true, true) => (PI, 0.0),
            (true, false) => (-PI, 0.0),
            (false, true) => (0.0, PI),
            (false, false) => (0.0, -PI),
        };
        let mut segs = Vec::new();
        if enter != a {
            segs.push(Segment::Line {
                start: Complex64::new(a, 0.0),
                end: Complex64::new(enter, 0.0),
            });
        }
        let arc = Segment::Arc {
            center: Complex64::new(center, 0.0),
            radius,
            angle_start,
            angle_end,
        };
        segs.push(arc);
        if leave != b {
            segs.push(Segment::Line {
                start: arc.end(),
                end: Complex64::new(b, 0.0),
            });
        }
        Self::new(segs)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start(&self) -> Complex64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> Complex64 {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn is_closed(&self) -> bool {
        close(self.start(), self.end())
    }

    /// Point at global arc length `s`.
    pub fn point_at(&self, s: f64) -> Complex64 {
        let mut rem = s.max(0.0);
        for seg in &self.segments {
            let len = seg.length();
            if rem <= len {
                return seg.point(rem);
            }
            rem -= len;
        }
        self.end()
    }

    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    /// `self` followed by `other`; fails unless `other` starts where `self` ends.
    pub fn concat(&self, other: &ComplexPath) -> Result<Self, OdeError> {
        let mut segs = self.segments.clone();
        segs.extend_from_slice(&other.segments);
        Self::new(segs)
    }

    /// The path repeated `n` times (only meaningful for closed paths).
    pub fn repeated(&self, n: usize) -> Result<Self, OdeError> {
        let mut segs = Vec::with_capacity(self.segments.len() * n);
        for _ in 0..n {
            segs.extend_from_slice(&self.segments);
        }
        Self::new(segs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn contiguity_enforced() {
        let bad = ComplexPath::new(vec![
            Segment::Line {
                start: c(0.0, 0.0),
                end: c(1.0, 0.0),
            },
            Segment::Line {
                start: c(1.1, 0.0),
                end: c(2.0, 0.0),
            },
        ]);
        assert!(bad.is_err());
        assert!(ComplexPath::new(vec![]).is_err());
        assert!(ComplexPath::line(c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn unit_circle_is_closed() {
        let p = ComplexPath::circle(c(0.0, 0.0), 1.0, 0.0, 1.0).unwrap();
        assert!(p.is_closed());
        assert!((p.length() - 2.0 * PI).abs() < 1e-15);
        assert!((p.point_at(PI / 2.0) - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(
            p.segments()[0].orientation(),
            Some(Orientation::CounterClockwise)
        );
    }

    #[test]
    fn detour_geometry() {
        let up = ComplexPath::real_detour(0.0, 2.0, 1.0, 0.1, true).unwrap();
        assert_eq!(up.segments().len(), 3);
        assert!((up.point_at(0.9 + 0.1 * PI / 2.0) - c(1.0, 0.1)).norm() < 1e-14);
        let down = ComplexPath::real_detour(0.0, 2.0, 1.0, 0.1, false).unwrap();
        assert!((down.point_at(0.9 + 0.1 * PI / 2.0) - c(1.0, -0.1)).norm() < 1e-14);
        let back = ComplexPath::real_detour(2.0, 0.0, 1.0, 0.1, true).unwrap();
        assert!((back.point_at(0.9 + 0.1 * PI / 2.0) - c(1.0, 0.1)).norm() < 1e-14);
        assert!((back.end() - c(0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reversal_swaps_ends() {
        let p = ComplexPath::real_detour(0.0, 2.0, 1.0, 0.2, true).unwrap();
        let r = p.reversed();
        assert!((r.start() - p.end()).norm() < 1e-15);
        assert!((r.end() - p.start()).norm() < 1e-15);
        assert!((r.length() - p.length()).abs() < 1e-14);
    }
}
