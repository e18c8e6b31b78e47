use criterion::{criterion_group, criterion_main, Criterion};
use holgeo::clifton_pohl::{self, integrate_charted, CPInitial};
use holgeo::coercivity::{classify_example_class_coeffs, ClassifyOptions};
use holgeo::continuation::{monodromy, ContinuationConfig, Germ};
use holgeo::geodesic::{probe_real_completeness, shoot, ProbeConfig};
use holgeo::metric::christoffel_general;
use holgeo::{ComplexPath, Expr, IntegratorConfig};
use holgeo_bench::{clifton_pohl_germ, clifton_pohl_metric, detour_path, exp_warping, unit_loop};
use num_complex::Complex64;
use std::hint::black_box;

fn christoffel(c: &mut Criterion) {
    let m = clifton_pohl::metric();
    let p = [Complex64::new(1.0, 0.5), Complex64::new(0.3, -0.2)];
    c.bench_function("christoffel_general_cp", |b| {
        b.iter(|| christoffel_general(&m, black_box(&p)))
    });
}

fn shooting(c: &mut Criterion) {
    let m = clifton_pohl_metric();
    let g = clifton_pohl_germ();
    let path = detour_path();
    let cfg = IntegratorConfig::default();
    c.bench_function("shoot_cp_detour", |b| {
        b.iter(|| shoot(&m, black_box(&g), &path, &cfg))
    });
}

fn charted(c: &mut Criterion) {
    let init = CPInitial::new(1.0, 0.5, 0.3, -0.6);
    let path =
        ComplexPath::line(Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)).expect("valid line");
    let cfg = IntegratorConfig::default();
    c.bench_function("integrate_charted_cp", |b| {
        b.iter(|| integrate_charted(black_box(init.state()), &path, &cfg))
    });
    c.bench_function("classify_cp", |b| {
        b.iter(|| clifton_pohl::classify(black_box(&init)))
    });
}

fn probing(c: &mut Criterion) {
    let m = clifton_pohl_metric();
    let g = clifton_pohl_germ();
    let cfg = ProbeConfig::default();
    let mut group = c.benchmark_group("probe");
    group.sample_size(10);
    group.bench_function("probe_cp_0_3", |b| {
        b.iter(|| probe_real_completeness(&m, black_box(&g), (0.0, 3.0), &cfg))
    });
    group.finish();
}

fn continuation(c: &mut Criterion) {
    let germ = Germ::closed_form(
        Expr::parse("sqrt(u1)").expect("valid expression"),
        Complex64::new(1.0, 0.0),
    )
    .expect("ordinary base point");
    let path = unit_loop();
    let cfg = ContinuationConfig::default();
    c.bench_function("monodromy_sqrt", |b| {
        b.iter(|| monodromy(black_box(&germ), &path, 4, &cfg))
    });
}

fn coercivity(c: &mut Criterion) {
    let h = exp_warping();
    let f = [Expr::parse("1").expect("valid expression")];
    let p = [vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ]];
    let opts = ClassifyOptions::default();
    let mut group = c.benchmark_group("coercivity");
    group.sample_size(10);
    group.bench_function("classify_example_class", |b| {
        b.iter(|| classify_example_class_coeffs(&h, &f, black_box(&p), &opts))
    });
    group.finish();
}

criterion_group!(
    benches,
    christoffel,
    shooting,
    charted,
    probing,
    continuation,
    coercivity
);
criterion_main!(benches);
