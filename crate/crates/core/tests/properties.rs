use proptest::prelude::*;

use qe_core::corpus;
use qe_core::expr::fd_derivative;
use qe_core::geometry::{divergence, ricci, riemann, scalar_curvature};
use qe_core::{classify, parse_with, CoordinateChart, EvalPoint, Expr, MetricField, PpWaveSpec, SamplePlan, Thresholds};

const VARS: [&str; 2] = ["x", "y"];

/// Well-parenthesized expression strings in `x, y`.
fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (1i32..6).prop_map(|k| k.to_string()),
        (1i32..6, 2i32..5).prop_map(|(a, b)| format!("{a}/{b}")),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), 1i32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.prop_map(|a| format!("exp(({a})/4)")),
        ]
    })
}

fn point(x: f64, y: f64) -> EvalPoint {
    EvalPoint::from_coords(&VARS, &[x, y])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_round_trip(src in expr_source(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let e = parse_with(&src, &VARS).unwrap();
        let back = parse_with(&e.to_string(), &VARS).unwrap();
        prop_assert_eq!(&back, &e, "printed as `{}`", e);
        let p = point(x, y);
        if let (Ok(a), Ok(b)) = (e.eval(&p), back.eval(&p)) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn derivative_matches_central_difference(src in expr_source(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let e = parse_with(&src, &VARS).unwrap();
        let p = point(x, y);
        for v in VARS {
            let exact = e.diff(v).eval(&p);
            let fd = fd_derivative(&e, v, &p, 1e-5);
            if let (Ok(exact), Ok(fd)) = (exact, fd) {
                prop_assert!((exact - fd).abs() <= 1e-5 * exact.abs().max(1.0), "d/d{v} {e}: {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn derivative_is_linear(a in expr_source(), b in expr_source(), s in -3i64..4, t in -3i64..4) {
        let (ea, eb) = (parse_with(&a, &VARS).unwrap(), parse_with(&b, &VARS).unwrap());
        let combo = Expr::int(s) * ea.clone() + Expr::int(t) * eb.clone();
        let p = point(0.3, -0.7);
        let lhs = combo.diff("x").eval(&p);
        let rhs = ea.diff("x").eval(&p).and_then(|da| eb.diff("x").eval(&p).map(|db| s as f64 * da + t as f64 * db));
        if let (Ok(l), Ok(r)) = (lhs, rhs) {
            prop_assert!((l - r).abs() <= 1e-9 * l.abs().max(1.0));
        }
    }
}

/// Small-coefficient polynomial of total degree ≤ 2 in `vars`.
fn quadratic(vars: &'static [&'static str], coeffs: &[i64]) -> String {
    let mut monomials = vec!["1".to_string()];
    monomials.extend(vars.iter().map(|v| v.to_string()));
    for (i, a) in vars.iter().enumerate() {
        for b in &vars[i..] {
            monomials.push(format!("{a}*{b}"));
        }
    }
    monomials.iter().zip(coeffs).map(|(m, c)| format!("({c})*{m}/8")).collect::<Vec<_>>().join(" + ")
}

const TXY: [&str; 3] = ["t", "x1", "x2"];

/// `diag(−e^{p₀}, e^{p₁}, e^{p₂})`: Lorentzian everywhere, generically curved.
fn exp_diagonal(c: &[i64]) -> MetricField {
    let comps: Vec<Expr> = (0..3)
        .map(|i| {
            let e = parse_with(&format!("exp({})", quadratic(&TXY, &c[10 * i..10 * i + 10])), &TXY).unwrap();
            if i == 0 { -e } else { e }
        })
        .collect();
    MetricField::diagonal(CoordinateChart::new(&TXY).unwrap(), comps).unwrap()
}

fn random_metric() -> impl Strategy<Value = MetricField> {
    prop_oneof![
        prop::collection::vec(-3i64..4, 30).prop_map(|c| exp_diagonal(&c)),
        prop::collection::vec(-3i64..4, 10).prop_map(|c| {
            PpWaveSpec::parse(2, &quadratic(&["u", "x1", "x2"], &c).replace("*1/8", "/8")).unwrap().metric()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn curvature_symmetries_and_bianchi(g in random_metric(), seed in 0u64..1000) {
        let d = g.dim();
        let r = riemann(&g);
        let rho = ricci(&g);
        let div = divergence(&rho, &g);
        let tau = scalar_curvature(&g);
        let chart = g.chart().clone();
        for p in SamplePlan::new().with_count(3).with_seed(seed).points(&g, &[]).unwrap() {
            let v = r.eval(&p).unwrap();
            let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let at = |i: usize, j: usize, k: usize, l: usize| v[((i * d + j) * d + k) * d + l];
            for i in 0..d { for j in 0..d { for k in 0..d { for l in 0..d {
                let x = at(i, j, k, l);
                prop_assert!((x + at(j, i, k, l)).abs() <= 1e-10 * scale);
                prop_assert!((x + at(i, j, l, k)).abs() <= 1e-10 * scale);
                prop_assert!((x - at(k, l, i, j)).abs() <= 1e-10 * scale);
                prop_assert!((x + at(j, k, i, l) + at(k, i, j, l)).abs() <= 1e-10 * scale);
            }}}}
            let rv = rho.eval(&p).unwrap();
            for j in 0..d {
                for k in 0..j {
                    prop_assert!((rv[j * d + k] - rv[k * d + j]).abs() <= 1e-10 * scale);
                }
                // contracted Bianchi: 2 div ρ = dτ
                let dtau = tau.diff(chart.coord(j)).eval(&p).unwrap();
                let lhs = 2.0 * div.get(&[j]).eval(&p).unwrap();
                prop_assert!((lhs - dtau).abs() <= 1e-8 * dtau.abs().max(scale), "{lhs} vs {dtau}");
            }
        }
    }

    #[test]
    fn lambda_ignores_constant_shifts(c in -5.0..5.0f64, k in 0usize..4) {
        let case = &corpus::golden_cases()[k];
        let base = qe_core::qe::solve_lambda(&case.metric, &case.potential, &case.plan).unwrap();
        let shifted = qe_core::qe::solve_lambda(&case.metric, &case.potential.shifted(c), &case.plan).unwrap();
        prop_assert!((base - shifted).abs() < 1e-12);
    }

    #[test]
    fn classification_is_invariant(c in -3.0..3.0f64, shift in -0.5..0.5f64, scale in 0.5..2.0f64) {
        let th = Thresholds::default();
        for case in corpus::golden_cases() {
            let r = classify(&case.metric, &case.potential.shifted(c), &case.plan, &th).unwrap();
            prop_assert_eq!(r.branch, case.expected, "{} shifted by {}", case.name, c);
            let coord = if case.warped.is_some() { "t" } else { "x1" };
            let r = classify(&case.metric, &case.potential, &case.plan.translated(coord, shift), &th).unwrap();
            prop_assert_eq!(r.branch, case.expected, "{} translated by {}", case.name, shift);
        }
        for case in [corpus::de_sitter_qe(1, 1.0), corpus::conformal_branch(2)] {
            let g = case.metric.scaled(&Expr::real(scale * scale)).unwrap();
            let r = classify(&g, &case.potential, &case.plan, &th).unwrap();
            prop_assert_eq!(r.branch, case.expected, "{} scaled by {}", case.name, scale);
            prop_assert!((r.lambda.unwrap() - case.lambda / (scale * scale)).abs() < 1e-9);
        }
    }
}
