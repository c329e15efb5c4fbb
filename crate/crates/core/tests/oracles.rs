//! Comparisons against independent one-dimensional quadratures and closed forms.

use std::f64::consts::PI;
use std::sync::Arc;

use sphere_mt::conformal::{
    bubble_pair, green_two_pole, mobius_factor, mobius_pullback, BubblePairProfile, MobiusMap,
};
use sphere_mt::functional::{linspace, pair_mass, Functional};
use sphere_mt::harmonics::Transform;
use sphere_mt::{bubble_pair_sweep, build_grid, ScalarField};

/// Composite Simpson on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫|∇u|²` of the bubble pair from its axisymmetric profile.
fn pair_energy(t: f64) -> f64 {
    let (a, b) = (1.0 + t * t, t * t - 1.0);
    2.0 * PI
        * simpson(
            |th| {
                let (s, c) = th.sin_cos();
                let d = s * (b / (a - b * c) - b / (a + b * c));
                d * d * s
            },
            0.0,
            PI,
            400_000,
        )
}

#[test]
fn pair_energy_matches_profile_quadrature() {
    let grid = build_grid::<f64>(64, 128).unwrap();
    let tr = Transform::for_grid(Arc::clone(&grid));
    for t in [2.0, 5.0, 10.0, 20.0] {
        let pair = bubble_pair(t, &grid).unwrap();
        let e = tr.analyze(&pair.field).unwrap().dirichlet_energy();
        let oracle = pair_energy(t);
        assert!(((e - oracle) / oracle).abs() < 2e-5, "t = {t}: {e} vs {oracle}");
    }
}

#[test]
fn pair_energy_grows_like_sixteen_pi_log_t() {
    // E(t) = 16π ln t − 24π + o(1)
    let e = pair_energy(2000.0);
    assert!((e - 16.0 * PI * 2000f64.ln() + 24.0 * PI).abs() < 1e-3);
    let slope = (pair_energy(4000.0) - pair_energy(2000.0)) / 2f64.ln();
    assert!((slope / (16.0 * PI) - 1.0).abs() < 1e-4);
    // not 32π ln t
    assert!(pair_energy(20.0) / (32.0 * PI * 20f64.ln()) < 0.3);
}

#[test]
fn pair_mass_matches_profile_quadrature() {
    for t in [2.0, 7.0, 20.0] {
        let p = BubblePairProfile::new(t).unwrap();
        let oracle = 2.0 * PI * simpson(|th| p.exp2(th.cos()) * th.sin(), 0.0, PI, 400_000);
        let m = pair_mass(t).unwrap();
        assert!(((m - oracle) / oracle).abs() < 1e-10);
    }
}

#[test]
fn aubin_columns_have_the_profile_shape() {
    let grid = build_grid::<f64>(64, 128).unwrap();
    let rows = bubble_pair_sweep(&grid, &[1.0, 2.0, 4.0, 8.0, 10.0, 16.0, 20.0], &[0.4, 0.5, 0.6])
        .unwrap();
    assert!(rows[0].i_alpha.iter().all(|v| v.abs() < 1e-13));
    let c04: Vec<f64> = rows.iter().map(|r| r.i_alpha[0]).collect();
    // I_0.4 first rises (positive l = 2 curvature) and then diverges downwards
    assert!(c04[2] > c04[1]);
    assert!(c04[2..].windows(2).all(|w| w[1] < w[0]));
    let c05: Vec<f64> = rows.iter().map(|r| r.i_alpha[1]).collect();
    assert!((c05[6] - c05[4]).abs() < 0.5);
    let c06: Vec<f64> = rows.iter().map(|r| r.i_alpha[2]).collect();
    assert!(c06.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn aubin_slope_is_four_alpha_minus_two() {
    // large-t slope of I_α in ln t, from the exact profile
    let sweep_slope = |alpha: f64, t: f64| {
        let i = |t: f64| {
            let (a, b) = (1.0 + t * t, t * t - 1.0);
            let u = |c: f64| (2.0 * t / (a - b * c)).ln() + (2.0 * t / (a + b * c)).ln();
            let mean = simpson(|th| u(th.cos()) * th.sin(), 0.0, PI, 400_000) / 2.0;
            alpha * pair_energy(t) / (4.0 * PI) + 2.0 * mean - (pair_mass(t).unwrap() / (4.0 * PI)).ln()
        };
        (i(2.0 * t) - i(t)) / 2f64.ln()
    };
    for alpha in [0.4, 0.5, 0.6] {
        let s = sweep_slope(alpha, 1000.0);
        assert!((s - (4.0 * alpha - 2.0)).abs() < 1e-3, "α = {alpha}: {s}");
    }
}

#[test]
fn green_mean_converges_at_second_order() {
    let err = |n: usize| green_two_pole(&build_grid::<f64>(n, 4).unwrap()).average().abs();
    let (e1, e2, e3) = (err(64), err(128), err(256));
    assert!((e1 - 6.07e-4).abs() < 1e-5);
    for ratio in [e1 / e2, e2 / e3] {
        assert!((ratio.log2() - 2.0).abs() < 0.05, "{ratio}");
    }
    let g = build_grid::<f64>(64, 128).unwrap();
    let axisym = green_two_pole(&build_grid::<f64>(64, 4).unwrap()).average();
    assert!((green_two_pole(&g).average() - axisym).abs() < 1e-15);
}

#[test]
fn pullback_preserves_mass_and_composes() {
    let grid = build_grid::<f64>(48, 96).unwrap();
    let tr = Transform::new(Arc::clone(&grid), 8).unwrap();
    let mut s = sphere_mt::HarmonicSpectrum::zeros(8);
    s.set(2, 1, 0.3);
    s.set(3, -2, -0.2);
    s.set(1, 0, 0.1);
    let u = tr.synthesize(&s).unwrap();
    let map = MobiusMap::new([0.3, -0.4, 0.8], 2.5).unwrap();
    let pulled = mobius_pullback(&u, &map).unwrap();
    let m0 = u.exp2().unwrap().integrate();
    let m1 = pulled.exp2().unwrap().integrate();
    assert!(((m1 - m0) / m0).abs() < 1e-8, "{m0} {m1}");

    let f = Functional::for_grid(Arc::clone(&grid));
    let j0 = f.evaluate(&u, None, None).unwrap().onofri_j;
    let j1 = f.evaluate(&pulled, None, None).unwrap().onofri_j;
    assert!((j0 - j1).abs() < 1e-6, "{j0} {j1}");

    let zero = ScalarField::zeros(Arc::clone(&grid));
    let w = mobius_factor(&map, &grid).unwrap();
    let pw = mobius_pullback(&zero, &map).unwrap();
    assert!(w.sub(&pw).unwrap().max_abs() < 1e-14);
}

#[test]
fn single_precision_pipeline() {
    let grid = build_grid::<f32>(24, 48).unwrap();
    let w = mobius_factor(&MobiusMap::north(2.0f32).unwrap(), &grid).unwrap();
    let f = Functional::for_grid(Arc::clone(&grid));
    let rep = f.evaluate(&w, None, None).unwrap();
    assert!(rep.onofri_j.abs() < 1e-4);
    assert!((rep.mass - 4.0 * std::f32::consts::PI).abs() < 1e-4);
}

#[test]
fn linspace_covers_sweep_range() {
    let ts = linspace(2.0f64, 20.0, 19);
    assert_eq!(ts.len(), 19);
    assert!((ts[18] - 20.0).abs() < 1e-14);
}
