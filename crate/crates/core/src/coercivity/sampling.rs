use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex_ode::ComplexPath;
use crate::continuation::{continue_germ, ContinuationConfig, Germ};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub seed: u64,
    /// Random Newton starts per target.
    pub newton_starts: usize,
    /// Starts are drawn uniformly from this disc around the germ's base point.
    pub start_radius: f64,
    pub max_iterations: usize,
    /// Required `|Φ(u) − w|` at convergence.
    pub residual_tol: f64,
    /// Largest Newton step; longer steps are shortened.
    pub max_newton_step: f64,
    pub continuation: ContinuationConfig,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            newton_starts: 8,
            start_radius: 2.0,
            max_iterations: 60,
            residual_tol: 1e-8,
            max_newton_step: 1.0,
            continuation: ContinuationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingStats {
    pub hit_rate: f64,
    pub hits: usize,
    pub targets: usize,
    pub seed: u64,
    /// `hit[j]` tells whether target `j` was reached.
    pub hit: Vec<bool>,
}

/// `n` points uniform in the disc `|w − center| ≤ radius`.
pub fn disc_targets(n: usize, center: Complex64, radius: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let th = 2.0 * PI * rng.random::<f64>();
            center + Complex64::from_polar(r, th)
        })
        .collect()
}

fn line(a: Complex64, b: Complex64) -> Option<ComplexPath> {
    ComplexPath::line(a, b).ok()
}

/// Damped Newton iteration on `Φ(u) − w`, continuing the germ along every step.
fn newton(g: Germ, w: Complex64, cfg: &SamplingConfig) -> bool {
    let mut g = g;
    let mut f = g.value() - w;
    for _ in 0..cfg.max_iterations {
        let Ok(d) = g.derivative() else { return false };
        if d.norm() == 0.0 || !d.norm().is_finite() {
            return false;
        }
        let mut delta = -f / d;
        let len = delta.norm();
        let full_step_small = len <= 1e-6 * (1.0 + g.base_point().norm());
        if f.norm() <= cfg.residual_tol && full_step_small {
            return true;
        }
        if len > cfg.max_newton_step {
            delta *= cfg.max_newton_step / len;
        }
        let mut moved = false;
        for _ in 0..12 {
            let u = g.base_point();
            if let Some(next) =
                line(u, u + delta).and_then(|p| continue_germ(&g, &p, &cfg.continuation).ok())
            {
                let f_next = next.value() - w;
                if f_next.norm() < f.norm() || f_next.norm() <= cfg.residual_tol {
                    g = next;
                    f = f_next;
                    moved = true;
                    break;
                }
            }
            delta *= 0.5;
        }
        if !moved {
            return f.norm() <= cfg.residual_tol && full_step_small;
        }
    }
    false
}

/// Fraction of `targets` that damped Newton iteration on `Φ(u) − w` reaches
/// from random starts, with random `±2π` re-seeding of tracked branches.
pub fn surjectivity_sample(
    germ: &Germ,
    targets: &[Complex64],
    cfg: &SamplingConfig,
) -> SamplingStats {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let base = germ.base_point();
    let branches = germ.branch_args().map_or(0, <[f64]>::len);
    let mut hit = Vec::with_capacity(targets.len());
    for &w in targets {
        let mut reached = false;
        for start in 0..cfg.newton_starts.max(1) {
            let r = cfg.start_radius * rng.random::<f64>().sqrt();
            let th = 2.0 * PI * rng.random::<f64>();
            let shifts: Vec<i32> = (0..branches)
                .map(|_| {
                    if start == 0 {
                        0
                    } else {
                        rng.random_range(-1..=1)
                    }
                })
                .collect();
            if reached {
                continue;
            }
            let u0 = if start == 0 {
                base
            } else {
                base + Complex64::from_polar(r, th)
            };
            let g0 = if u0 == base {
                Some(germ.clone())
            } else {
                line(base, u0).and_then(|p| continue_germ(germ, &p, &cfg.continuation).ok())
            };
            let Some(g0) = g0 else { continue };
            if newton(g0.with_branch_shift(&shifts), w, cfg) {
                reached = true;
            }
        }
        hit.push(reached);
    }
    let hits = hit.iter().filter(|h| **h).count();
    SamplingStats {
        hit_rate: if targets.is_empty() {
            1.0
        } else {
            hits as f64 / targets.len() as f64
        },
        hits,
        targets: targets.len(),
        seed: cfg.seed,
        hit,
    }
}
