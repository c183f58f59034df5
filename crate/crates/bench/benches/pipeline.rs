use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

use qe_core::geometry::{oracle_deviation, ricci, weyl, ORACLE_STEP};
use qe_core::ode::integrate_f0;
use qe_core::{classify, corpus, parse_with, Expr, PpWaveSpec, SamplePlan, Thresholds};

fn parsing(c: &mut Criterion) {
    let src = "exp(-(x1^2 + x2^2)/4) * sin(u) * x1 * x2 + u^3/6 - log(cosh(u))";
    c.bench_function("parse", |b| b.iter(|| parse_with(black_box(src), &["u", "x1", "x2"]).unwrap()));
    let e = parse_with(src, &["u", "x1", "x2"]).unwrap();
    c.bench_function("diff twice", |b| b.iter(|| black_box(&e).diff("x1").diff("u")));
}

fn curvature(c: &mut Criterion) {
    // fresh metrics each iteration: the curvature caches would otherwise hide the work
    let spec = PpWaveSpec::parse(3, "u*x1^2 - x2^3 + sin(u)*x1*x3").unwrap();
    c.bench_function("ricci pp-wave d=5", |b| b.iter_batched(|| spec.metric(), |g| ricci(&g), BatchSize::SmallInput));
    c.bench_function("weyl pp-wave d=5", |b| b.iter_batched(|| spec.metric(), |g| weyl(&g), BatchSize::SmallInput));
    let ds = corpus::de_sitter_slice(2);
    c.bench_function("ricci de Sitter d=4", |b| b.iter_batched(|| ds.clone_uncached(), |g| ricci(&g), BatchSize::SmallInput));
    let pts = SamplePlan::new().points(&ds, &[]).unwrap();
    c.bench_function("finite-difference oracle d=4", |b| b.iter(|| oracle_deviation(&ds, &pts, ORACLE_STEP).unwrap()));
}

fn classification(c: &mut Criterion) {
    let th = Thresholds::default();
    for case in [corpus::isotropic_ppwave(), corpus::de_sitter_qe(2, 0.5), corpus::conformal_branch(2)] {
        c.bench_function(&format!("classify {}", case.name), |b| {
            b.iter_batched(
                || case.metric.clone_uncached(),
                |g| classify(&g, &case.potential, &case.plan, &th).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
}

fn ode(c: &mut Criterion) {
    let a = Expr::coord("u");
    c.bench_function("rk4 airy 20k steps", |b| b.iter(|| integrate_f0(&a, 1, 1.0, (1.0, 0.0), (0.0, 20.0), 1e-3).unwrap()));
}

criterion_group!(benches, parsing, curvature, classification, ode);
criterion_main!(benches);
