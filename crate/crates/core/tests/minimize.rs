use sphere_mt::build_grid;
use sphere_mt::conformal::max_resolvable_t;
use sphere_mt::functional::Functional;
use sphere_mt::optimize::{continuation, minimize, Branch, Init, MinimizeConfig, Status};

#[test]
fn zero_and_random_starts_agree() {
    let zero = minimize(&MinimizeConfig::<f64>::new(0.25)).unwrap();
    let random = minimize(
        &MinimizeConfig::<f64>::new(0.25).with_init(Init::Random { seed: 1, scale: 0.1 }),
    )
    .unwrap();
    for r in [&zero, &random] {
        assert_eq!(r.status, Status::Converged);
        assert!(r.value <= 1e-8);
        assert!(r.constraint_violation < 1e-8);
        assert!(r.el_residual_norm < 1e-6);
        assert!(r.kw_residual_max < 1e-6);
        assert!(r.u_star.average().abs() < 1e-12);
    }
    assert!((zero.value - random.value).abs() < 1e-6);
}

#[test]
fn bubble_start_descends_monotonically() {
    let cfg = MinimizeConfig::<f64>::new(0.45).with_init(Init::BubblePair { t: 8.0 });
    let r = minimize(&cfg).unwrap();
    let mut steps = 0;
    for e in &r.trace {
        for w in e.objective_history.windows(2) {
            assert!(w[1] < w[0], "{} !< {}", w[1], w[0]);
            steps += 1;
        }
    }
    assert!(steps > 0);
    assert!(r.value_eps < r.initial_value_eps);
}

#[test]
fn runs_are_reproducible() {
    let cfg = MinimizeConfig::<f64>::new(0.3)
        .with_grid(24, 48)
        .with_l_max(12)
        .with_init(Init::Random { seed: 42, scale: 0.2 });
    let a = minimize(&cfg).unwrap();
    let b = minimize(&cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.u_star.values(), b.u_star.values());
}

#[test]
fn continuation_from_zero_is_compact() {
    let rep = continuation(&[0.4, 0.3, 0.2, 0.1, 0.05], &MinimizeConfig::<f64>::new(0.4)).unwrap();
    assert_eq!(rep.summary.branch, Branch::Compact);
    for r in &rep.runs {
        assert_eq!(r.status, Status::Converged);
        assert!(r.mass.unwrap() < 2.0 * 4.0 * std::f64::consts::PI);
        assert!(r.value <= 1e-8);
    }
}

#[test]
fn warm_start_objective_is_continuous() {
    let base = MinimizeConfig::<f64>::new(0.4)
        .with_grid(32, 64)
        .with_l_max(12)
        .with_init(Init::BubblePair { t: 3.0 });
    let rep = continuation(&[0.4, 0.3, 0.2], &base).unwrap();
    let f = Functional::for_grid(build_grid::<f64>(32, 64).unwrap());
    for w in rep.runs.windows(2) {
        let carried = f.shifted_perturbed(&w[0].u_star, w[1].eps).unwrap();
        assert!((carried - w[1].initial_value_eps).abs() < 1e-12);
    }
}

#[test]
fn coarse_bubble_start_has_a_definite_status() {
    let grid = build_grid::<f64>(24, 48).unwrap();
    let t = 24.0 / 8.0;
    assert!(t <= max_resolvable_t(&grid));
    let base = MinimizeConfig::<f64>::new(0.4)
        .with_grid(24, 48)
        .with_l_max(16)
        .with_init(Init::BubblePair { t });
    let rep = continuation(&[0.4], &base).unwrap();
    let s = rep.runs[0].status;
    assert!(matches!(s, Status::Converged | Status::BlowupDetected));
    assert_eq!(rep.summary.statuses, vec![s]);
}

#[test]
fn iteration_cap_is_reported() {
    let mut cfg = MinimizeConfig::<f64>::new(0.2)
        .with_grid(24, 48)
        .with_l_max(12)
        .with_init(Init::Random { seed: 5, scale: 0.5 });
    cfg.max_outer = 1;
    cfg.max_inner = 2;
    let r = minimize(&cfg).unwrap();
    assert_eq!(r.status, Status::IterationCap);
    assert_eq!(r.trace.len(), 1);
    assert_eq!(r.trace[0].inner_iterations, 2);
}

#[test]
fn concentrated_start_is_detected() {
    let grid = build_grid::<f64>(32, 64).unwrap();
    let values: Vec<f64> = grid
        .xyz()
        .iter()
        .map(|x| 40.0 * (-(1.0 - x[2]) * 20.0).exp())
        .collect();
    let cfg = MinimizeConfig::<f64>::new(0.01)
        .with_grid(32, 64)
        .with_l_max(20)
        .with_init(Init::Values(values));
    let r = minimize(&cfg).unwrap();
    assert_eq!(r.status, Status::BlowupDetected);
    assert!(r.max_u > 30.0);
    assert!(r.concentration.lambda.is_finite() && r.concentration.tau > 1.0);
}
