//! Completeness certificates for warped products.
//!
//! The example class has metric `h′(u¹)² (du¹)² + Σ_k f_k(u^k)² (du^k)² / P_k(h(u¹))`
//! with quadratic `P_k`. Along a geodesic the first coordinate satisfies
//! `∫ h′/√(Ψ∘h) = t` with `Ψ = A₁ − Σ A_l P_l`, so completeness reduces to the
//! value distribution of catalog primitives composed with `h`.

mod catalog;
mod sampling;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::continuation::Germ;
use crate::expr::{Expr, UnaryOp};
use crate::metric::WarpedSpec;

pub use catalog::{
    case_of, derivative_residual, primitive_reciprocal_sqrt_quadratic, CaseTag,
    ClosedFormPrimitive, QuadraticPolynomial, ZeroQuadratic, BRANCH_POLICY,
};
pub use sampling::{disc_targets, surjectivity_sample, SamplingConfig, SamplingStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coercivity {
    Coercive,
    NotCoercive,
    OutOfClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    #[default]
    Plane,
    /// Unit-disc factors; classified only when `asserted` is set by the user.
    Disc { asserted: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    pub domain: Domain,
    /// Enables the bounded-real-primitive test that can yield `not_coercive`.
    pub real_domain: bool,
    /// Number of sampled targets for the surjectivity evidence; 0 disables it.
    pub targets: usize,
    pub target_radius: f64,
    pub sampling: SamplingConfig,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            domain: Domain::Plane,
            real_domain: false,
            targets: 100,
            target_radius: 3.0,
            sampling: SamplingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingEvidence {
    /// Primitive of `Σ P_l` composed with `h`, in `u1`.
    pub germ: String,
    pub base_point: Complex64,
    pub case: CaseTag,
    pub stats: SamplingStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityVerdict {
    pub verdict: Coercivity,
    /// Catalog case of each `P_k`, in factor order.
    pub factor_cases: Vec<CaseTag>,
    /// Cases reachable by `Ψ = A₁ − Σ A_l P_l` as the constants vary.
    pub reachable_cases: Vec<CaseTag>,
    pub rationale: Vec<String>,
    pub evidence: Option<SamplingEvidence>,
}

impl CoercivityVerdict {
    fn out_of_class(reason: String) -> Self {
        Self {
            verdict: Coercivity::OutOfClass,
            factor_cases: Vec::new(),
            reachable_cases: Vec::new(),
            rationale: vec![reason],
            evidence: None,
        }
    }
}

/// True when `e` is built from operations meromorphic on all of ℂ.
fn globally_meromorphic(e: &Expr) -> bool {
    !(e.contains_op(UnaryOp::Sqrt) || e.contains_op(UnaryOp::Log))
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Cases of `Ψ = A₁ − Σ A_l P_l` over all constants: `D` always, `A` and `B`
/// when some `P_l` is quadratic, `C` when the linear coefficients are not
/// proportional to the quadratic ones.
fn reachable_cases(p: &[QuadraticPolynomial]) -> Vec<CaseTag> {
    let any_a = p.iter().any(|q| q.a() != ZERO);
    let any_b = p.iter().any(|q| q.b() != ZERO);
    let b_in_span_a = if !any_a {
        !any_b
    } else {
        // rank of the 2×L matrix [a; b] is 1
        let pivot = p
            .iter()
            .position(|q| q.a() != ZERO)
            .expect("some a nonzero");
        let (a0, b0) = (p[pivot].a(), p[pivot].b());
        p.iter().all(|q| {
            let lhs = q.a() * b0 - q.b() * a0;
            lhs.norm() <= 1e-14 * (q.a().norm() * b0.norm() + q.b().norm() * a0.norm())
        })
    };
    let mut out = Vec::new();
    if any_a {
        out.extend([CaseTag::A, CaseTag::B]);
    }
    if !b_in_span_a {
        out.push(CaseTag::C);
    }
    out.push(CaseTag::D);
    out
}

/// `∫ h′/√P(h)` over `[0, ±L]` for doubling `L` settles down on both tails.
fn real_primitive_bounded(h: &Expr, p: &QuadraticPolynomial) -> Option<bool> {
    let integrand = |t: f64| -> Option<f64> {
        let d = h.eval_with_partials(&[Complex64::new(t, 0.0)]).ok()?;
        let q = p.eval(d.value);
        if q.norm() == 0.0 {
            return None;
        }
        let v = (d.partials[0] / q.sqrt()).norm();
        v.is_finite().then_some(v)
    };
    // midpoint rule: integrable endpoint singularities are never sampled
    let midpoint = |a: f64, b: f64, n: usize| -> Option<f64> {
        let hstep = (b - a) / n as f64;
        let mut s = 0.0;
        for j in 0..n {
            s += integrand(a + (j as f64 + 0.5) * hstep)?;
        }
        Some(s * hstep)
    };
    let mut bounded = true;
    for sign in [1.0, -1.0] {
        let mut increments = Vec::new();
        let mut lo = 0.0;
        let mut l = 4.0;
        while l <= 256.0 {
            increments.push(midpoint(sign * lo, sign * l, 1024)?.abs());
            lo = l;
            l *= 2.0;
        }
        let total: f64 = increments.iter().sum();
        let last = *increments.last().expect("several windows");
        bounded &= last <= 1e-6 * total.max(1.0);
    }
    Some(bounded)
}

/// Classifies `h′(u¹)²(du¹)² + Σ f_k(u^k)²(du^k)²/P_k(h(u¹))`. `f[j]` is the
/// factor in `u{j+2}`.
pub fn classify_example_class(
    h: &Expr,
    f: &[Expr],
    p: &[QuadraticPolynomial],
    options: &ClassifyOptions,
) -> CoercivityVerdict {
    if f.len() != p.len() {
        return CoercivityVerdict::out_of_class(format!(
            "{} factors but {} quadratics",
            f.len(),
            p.len()
        ));
    }
    if let Domain::Disc { asserted: false } = options.domain {
        return CoercivityVerdict::out_of_class(
            "disc-domain factors require an explicit user assertion".into(),
        );
    }
    if h.variables().iter().any(|v| *v != 0) {
        return CoercivityVerdict::out_of_class("h must depend on u1 only".into());
    }
    if h.variables().is_empty() {
        return CoercivityVerdict::out_of_class("h is constant, so the metric degenerates".into());
    }
    if !globally_meromorphic(h) {
        return CoercivityVerdict::out_of_class(
            "h uses sqrt or log and is not recognised as meromorphic on the plane".into(),
        );
    }
    for (j, fk) in f.iter().enumerate() {
        let k = j + 2;
        if fk.variables().iter().any(|v| *v != j + 1) {
            return CoercivityVerdict::out_of_class(format!("f{k} must depend on u{k} only"));
        }
        if fk.is_zero() {
            return CoercivityVerdict::out_of_class(format!("f{k} vanishes identically"));
        }
        if !globally_meromorphic(fk) {
            return CoercivityVerdict::out_of_class(format!(
                "f{k} uses sqrt or log and is not recognised as meromorphic on the plane"
            ));
        }
    }
    let factor_cases: Vec<CaseTag> = p.iter().map(case_of).collect();
    let reachable = reachable_cases(p);
    let mut rationale = vec![
        "h and every f_k are meromorphic on the plane".to_string(),
        format!("primitives of Psi = A1 - sum A_l P_l fall in cases {reachable:?}"),
    ];
    let mut verdict = Coercivity::Coercive;
    if options.real_domain {
        // A_l = 0 for all l leaves Psi constant, so P = 1 is always reachable
        let unit = QuadraticPolynomial::real(0.0, 0.0, 1.0).expect("nonzero");
        if real_primitive_bounded(h, &unit) == Some(true) {
            verdict = Coercivity::NotCoercive;
            rationale.push("h has bounded image on the real line".into());
        }
        for (j, q) in p.iter().enumerate() {
            if real_primitive_bounded(h, q) == Some(true) {
                verdict = Coercivity::NotCoercive;
                rationale.push(format!(
                    "factor {}: real primitive of h'/sqrt(P(h)) has bounded image",
                    j + 2
                ));
            }
        }
    }
    if verdict == Coercivity::Coercive {
        rationale.push("composition with h omits at most finitely many values".into());
    }
    let evidence = if options.targets > 0 && !p.is_empty() {
        sampling_evidence(h, p, options)
    } else {
        None
    };
    CoercivityVerdict {
        verdict,
        factor_cases,
        reachable_cases: reachable,
        rationale,
        evidence,
    }
}

/// Like [`classify_example_class`] with raw coefficient lists
/// `[a, b, c]` (or shorter, lowest degree last); degree above two is out of class.
pub fn classify_example_class_coeffs(
    h: &Expr,
    f: &[Expr],
    coeffs: &[Vec<Complex64>],
    options: &ClassifyOptions,
) -> CoercivityVerdict {
    let mut p = Vec::with_capacity(coeffs.len());
    for (j, c) in coeffs.iter().enumerate() {
        let first = c.iter().position(|x| *x != ZERO);
        let degree = first.map_or(0, |i| c.len() - 1 - i);
        if degree > 2 {
            return CoercivityVerdict::out_of_class(format!(
                "P{} has degree {degree}; only degree at most two is catalogued",
                j + 2
            ));
        }
        let mut abc = [ZERO; 3];
        let tail = &c[c.len().saturating_sub(3)..];
        abc[3 - tail.len()..].copy_from_slice(tail);
        match QuadraticPolynomial::new(abc[0], abc[1], abc[2]) {
            Ok(q) => p.push(q),
            Err(_) => {
                return CoercivityVerdict::out_of_class(format!("P{} vanishes identically", j + 2))
            }
        }
    }
    classify_example_class(h, f, &p, options)
}

fn sampling_evidence(
    h: &Expr,
    p: &[QuadraticPolynomial],
    options: &ClassifyOptions,
) -> Option<SamplingEvidence> {
    let (mut a, mut b, mut c) = (ZERO, ZERO, ZERO);
    for q in p {
        a += q.a();
        b += q.b();
        c += q.c();
    }
    let total = QuadraticPolynomial::new(a, b, c).ok()?;
    let prim = primitive_reciprocal_sqrt_quadratic(&total);
    let composed = prim.expr.substitute(0, h);
    let base = (0..64)
        .map(|j| {
            let x = 0.5 * ((j + 1) / 2) as f64;
            Complex64::new(if j % 2 == 1 { x } else { -x }, 0.0)
        })
        .find_map(|z| {
            Germ::closed_form(composed.clone(), z)
                .ok()
                .filter(|g| g.derivative().is_ok())
        })?;
    let targets = disc_targets(
        options.targets,
        ZERO,
        options.target_radius,
        options.sampling.seed,
    );
    let stats = surjectivity_sample(&base, &targets, &options.sampling);
    Some(SamplingEvidence {
        germ: composed.to_string(),
        base_point: base.base_point(),
        case: prim.case,
        stats,
    })
}

/// A plain warped specification is certified only when it is flat.
pub fn classify_warped_spec(w: &WarpedSpec) -> CoercivityVerdict {
    let mut coeffs = vec![w.b1()];
    for k in 2..=w.dim() {
        coeffs.push(w.a(k));
        coeffs.push(w.f(k));
    }
    if coeffs.iter().all(|e| e.variables().is_empty()) {
        CoercivityVerdict {
            verdict: Coercivity::Coercive,
            factor_cases: vec![CaseTag::D; w.dim() - 1],
            reachable_cases: vec![CaseTag::D],
            rationale: vec!["constant coefficients give a flat metric".into()],
            evidence: None,
        }
    } else {
        CoercivityVerdict::out_of_class(
            "general warped coefficients are outside the certified example class".into(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn q(a: f64, b: f64, c: f64) -> QuadraticPolynomial {
        QuadraticPolynomial::real(a, b, c).unwrap()
    }

    fn quick() -> ClassifyOptions {
        ClassifyOptions {
            targets: 0,
            ..ClassifyOptions::default()
        }
    }

    #[test]
    fn exponential_example_is_coercive() {
        let v = classify_example_class(
            &e("exp(u1)"),
            &[Expr::real(1.0)],
            &[q(1.0, 0.0, -1.0)],
            &quick(),
        );
        assert_eq!(v.verdict, Coercivity::Coercive);
        assert_eq!(v.factor_cases, vec![CaseTag::A]);
        assert_eq!(v.reachable_cases, vec![CaseTag::A, CaseTag::B, CaseTag::D]);
    }

    #[test]
    fn polynomial_example_is_coercive_and_sampled() {
        let opts = ClassifyOptions {
            targets: 40,
            ..ClassifyOptions::default()
        };
        let v = classify_example_class(&e("u1"), &[e("u2")], &[q(0.0, 0.0, 1.0)], &opts);
        assert_eq!(v.verdict, Coercivity::Coercive);
        let ev = v.evidence.unwrap();
        assert_eq!(ev.case, CaseTag::D);
        assert!(ev.stats.hit_rate >= 0.95);
    }

    #[test]
    fn sqrt_in_h_is_out_of_class() {
        let v = classify_example_class(
            &e("sqrt(u1)"),
            &[Expr::real(1.0)],
            &[q(0.0, 0.0, 1.0)],
            &quick(),
        );
        assert_eq!(v.verdict, Coercivity::OutOfClass);
    }

    #[test]
    fn disc_requires_assertion() {
        let mut opts = quick();
        opts.domain = Domain::Disc { asserted: false };
        let v = classify_example_class(&e("u1"), &[Expr::real(1.0)], &[q(0.0, 0.0, 1.0)], &opts);
        assert_eq!(v.verdict, Coercivity::OutOfClass);
        opts.domain = Domain::Disc { asserted: true };
        let v = classify_example_class(&e("u1"), &[Expr::real(1.0)], &[q(0.0, 0.0, 1.0)], &opts);
        assert_eq!(v.verdict, Coercivity::Coercive);
    }

    #[test]
    fn high_degree_rejected() {
        let one = Complex64::new(1.0, 0.0);
        let v = classify_example_class_coeffs(
            &e("u1"),
            &[Expr::real(1.0)],
            &[vec![one, ZERO, ZERO, one]],
            &quick(),
        );
        assert_eq!(v.verdict, Coercivity::OutOfClass);
        let v = classify_example_class_coeffs(&e("u1"), &[Expr::real(1.0)], &[vec![one]], &quick());
        assert_eq!(v.verdict, Coercivity::Coercive);
        assert_eq!(v.factor_cases, vec![CaseTag::D]);
    }

    #[test]
    fn linear_factor_reaches_case_c() {
        assert_eq!(
            reachable_cases(&[q(0.0, 1.0, 0.0)]),
            vec![CaseTag::C, CaseTag::D]
        );
        assert_eq!(
            reachable_cases(&[q(1.0, 2.0, 0.0)]),
            vec![CaseTag::A, CaseTag::B, CaseTag::D]
        );
        assert_eq!(
            reachable_cases(&[q(1.0, 2.0, 0.0), q(1.0, 0.0, 0.0)]),
            vec![CaseTag::A, CaseTag::B, CaseTag::C, CaseTag::D]
        );
    }

    #[test]
    fn bounded_real_primitive_is_not_coercive() {
        let mut opts = quick();
        opts.real_domain = true;
        // ∫|h′| over the line is the total variation of tanh, which is 2
        let tanh = e("sinh(u1)/cosh(u1)");
        let v = classify_example_class(&tanh, &[Expr::real(1.0)], &[q(0.0, 0.0, 1.0)], &opts);
        assert_eq!(v.verdict, Coercivity::NotCoercive);
        // 1/√(1+t²) has logarithmically divergent tails
        let v = classify_example_class(&e("u1"), &[Expr::real(1.0)], &[q(1.0, 0.0, 1.0)], &opts);
        assert_eq!(v.verdict, Coercivity::Coercive);
        // without the flag the same input stays coercive
        let v = classify_example_class(&tanh, &[Expr::real(1.0)], &[q(0.0, 0.0, 1.0)], &quick());
        assert_eq!(v.verdict, Coercivity::Coercive);
    }
}
