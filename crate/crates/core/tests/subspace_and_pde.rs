use fdrd_core::history::HistorySpec;
use fdrd_core::pde_verify::{default_params, named_solution, SolutionName};
use fdrd_core::subspace::catalog::{catalog, find, CatalogParams};
use fdrd_core::subspace::{
    apply_operator, reduce_to_fdde, theta, BasisFunction, Form, InvarianceOptions, OperatorSpec, Projector,
    ReductionKind, Subspace, DEFAULT_SEED,
};
use fdrd_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn decoupled_lambdas(op: &OperatorSpec, w: &Subspace) -> Vec<(f64, f64)> {
    match reduce_to_fdde(op, w).unwrap().kind {
        ReductionKind::Decoupled(modes) => modes.iter().map(|m| (m.lambda, m.forcing)).collect(),
        other => panic!("expected decoupled modes, got {other:?}"),
    }
}

#[test]
fn theta_reproduces_operator_off_the_sample_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let p = CatalogParams::default();
    for entry in catalog() {
        let (op, w) = entry.instantiate(&p).unwrap();
        let zeros = vec![vec![0.0; w.dim()]; op.delta.len()];
        for _ in 0..20 {
            let a: Vec<f64> = (0..w.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let th = theta(&op, &w, &a).unwrap();
            for k in 0..7 {
                let x = 0.17 + 0.27 * k as f64;
                let direct = apply_operator(&op, &a, &zeros, &w, x).unwrap();
                let expanded = w.value(&th, x).unwrap();
                let scale = direct.abs().max(th.iter().map(|v| v.abs()).sum::<f64>());
                assert!(
                    (direct - expanded).abs() <= 1e-9 * scale.max(1.0),
                    "{} at x = {x}: {direct} vs {expanded}",
                    entry.id
                );
            }
        }
    }
}

#[test]
fn projection_recovers_span_members() {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 1);
    let spaces = [
        vec![BasisFunction::Monomial(0), BasisFunction::Monomial(1), BasisFunction::Monomial(2)],
        vec![BasisFunction::Exponential(1.0), BasisFunction::Exponential(-2.0)],
        vec![BasisFunction::Monomial(0), BasisFunction::Cosine(1.5), BasisFunction::Sine(1.5)],
        vec![BasisFunction::ExpCosine { mu: 0.5, kappa: 2.0 }, BasisFunction::ExpSine { mu: 0.5, omega: 2.0 }],
    ];
    for basis in spaces {
        let w = Subspace::new(basis).unwrap();
        let proj = Projector::new(&w, &InvarianceOptions::default()).unwrap();
        for _ in 0..10 {
            let c: Vec<f64> = (0..w.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let values: Vec<f64> = proj.points().iter().map(|&x| w.value(&c, x).unwrap()).collect();
            let (got, resid) = proj.project(&values).unwrap();
            assert!(resid < 1e-11, "{}: residual {resid:e}", w.labels());
            for (g, e) in got.iter().zip(&c) {
                assert!((g - e).abs() < 1e-11 * (1.0 + e.abs()), "{}: {g} vs {e}", w.labels());
            }
        }
    }
}

#[test]
fn exponential_mode_rate() {
    // D = 0.5, R = -u + 0.2 ubar on span{e^x}
    let op = OperatorSpec::new(Form::H1, vec![0.5], vec![0.0, -1.0], vec![0.2]).unwrap();
    let w = Subspace::new(vec![BasisFunction::Exponential(1.0)]).unwrap();
    let modes = decoupled_lambdas(&op, &w);
    assert!((modes[0].0 + 0.5).abs() < 1e-10);

    let sol = named_solution(SolutionName::Exp1dH1, &default_params(SolutionName::Exp1dH1)).unwrap();
    let via_reduction = decoupled_lambdas(&sol.operator, &sol.subspace);
    let (l, _) = sol.modes()[0].unwrap();
    assert!((l - via_reduction[0].0).abs() < 1e-9);
}

#[test]
fn trigonometric_modes() {
    let mut p = default_params(SolutionName::Trig3dH1);
    p.a = 1.0;
    p.b = vec![1.0];
    p.c1 = 0.5;
    p.c0 = 0.0;
    let sol = named_solution(SolutionName::Trig3dH1, &p).unwrap();
    let modes: Vec<f64> = sol.modes().iter().map(|m| m.unwrap().0).collect();
    assert_eq!(modes.len(), 3);
    assert!((modes[1] + 0.5).abs() < 1e-15 && (modes[2] + 0.5).abs() < 1e-15);

    let p = default_params(SolutionName::TwoDelayTrigH2);
    let sol = named_solution(SolutionName::TwoDelayTrigH2, &p).unwrap();
    let want = p.c1 - p.a * p.b[0];
    for m in sol.modes() {
        assert!((m.unwrap().0 - want).abs() < 1e-15);
    }
}

#[test]
fn named_solutions_agree_with_reduction() {
    for name in SolutionName::ALL {
        let sol = named_solution(name, &default_params(name)).unwrap();
        let reduced = decoupled_lambdas(&sol.operator, &sol.subspace);
        for (m, (l, f)) in sol.modes().iter().zip(&reduced) {
            let (lm, cm) = m.unwrap();
            assert!((lm - l).abs() < 1e-9 * (1.0 + l.abs()), "{name}: {lm} vs {l}");
            assert!((cm - f).abs() < 1e-9, "{name}: forcing {cm} vs {f}");
        }
    }
}

#[test]
fn initial_history_is_reproduced() {
    for name in SolutionName::ALL {
        let p = default_params(name);
        let sol = named_solution(name, &p).unwrap();
        let tau = sol.tau_star();
        let hist: Vec<_> = p.histories.iter().map(|h| h.build(tau).unwrap()).collect();
        for k in 0..=20 {
            let t = -tau * k as f64 / 20.0;
            let a: Vec<f64> = hist.iter().map(|h| h.value(t)).collect();
            for x in [0.0, 0.3, 0.9] {
                let want = sol.subspace.value(&a, x).unwrap();
                let got = sol.eval(x, t).unwrap();
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{name} at ({x}, {t})");
            }
        }
    }
}

#[test]
fn modes_do_not_leak() {
    for name in [SolutionName::Poly2dH2, SolutionName::Trig3dH1, SolutionName::TwoDelayTrigH2] {
        let p = default_params(name);
        let base = named_solution(name, &p).unwrap();
        let mut q = p.clone();
        q.histories[0] = HistorySpec::Polynomial(vec![2.5, -1.0, 0.3]);
        let changed = named_solution(name, &q).unwrap();
        for t in [0.3, 1.1, 1.9] {
            let a = base.coefficients_at(t).unwrap();
            let b = changed.coefficients_at(t).unwrap();
            assert_ne!(a[0], b[0]);
            assert_eq!(&a[1..], &b[1..], "{name} at t = {t}");
        }
    }
}

#[test]
fn catalog_ids_resolve() {
    assert!(catalog().len() >= 20);
    for e in catalog() {
        assert_eq!(find(e.id).unwrap().id, e.id);
    }
    assert!(find("nope").is_none());
}

#[test]
fn broken_constraint_is_reported() {
    let mut p = default_params(SolutionName::Trig2dH2);
    p.c0 = 0.7;
    match named_solution(SolutionName::Trig2dH2, &p) {
        Err(e @ Error::ConstraintViolation(_)) => assert!(e.is_validation()),
        other => panic!("expected a constraint violation, got {other:?}"),
    }
    let mut p = default_params(SolutionName::Exp1dH2);
    p.reaction = Some(vec![0.0, -1.0, 0.3]);
    assert!(matches!(named_solution(SolutionName::Exp1dH2, &p), Err(Error::ConstraintViolation(_))));
}

#[test]
fn sampled_history_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist.csv");
    let mut text = String::from("t,value\n");
    for k in 0..=40 {
        let t = -1.0 + k as f64 / 40.0;
        text.push_str(&format!("{t},{}\n", 1.0 + 0.5 * t));
    }
    std::fs::write(&path, text).unwrap();
    let from_file = HistorySpec::File(path).build(1.0).unwrap();
    let poly = HistorySpec::Polynomial(vec![1.0, 0.5]).build(1.0).unwrap();
    for k in 0..=30 {
        let t = -1.0 + k as f64 / 30.0;
        assert!((from_file.value(t) - poly.value(t)).abs() < 1e-14);
    }

    let name = SolutionName::Exp1dH2;
    let mut p = default_params(name);
    p.histories = vec![HistorySpec::File(dir.path().join("hist.csv"))];
    let sampled = named_solution(name, &p).unwrap();
    p.histories = vec![HistorySpec::Polynomial(vec![1.0, 0.5])];
    let exact = named_solution(name, &p).unwrap();
    for t in [0.25, 0.75, 1.3, 1.9] {
        let (a, b) = (sampled.eval(0.5, t).unwrap(), exact.eval(0.5, t).unwrap());
        assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "t = {t}: {a} vs {b}");
    }

    let missing = HistorySpec::File(dir.path().join("absent.csv")).build(1.0);
    assert!(matches!(missing, Err(Error::Io(_))));
}
