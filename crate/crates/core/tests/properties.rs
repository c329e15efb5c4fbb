use std::sync::Arc;

use proptest::prelude::*;
use sphere_mt::functional::Functional;
use sphere_mt::harmonics::{HarmonicSpectrum, Transform};
use sphere_mt::{build_grid, ScalarField, SphericalGrid};

const L: usize = 10;

fn grid() -> Arc<SphericalGrid<f64>> {
    build_grid(24, 48).unwrap()
}

fn spectrum(scale: f64) -> impl Strategy<Value = HarmonicSpectrum<f64>> {
    prop::collection::vec(-1.0f64..1.0, (L + 1) * (L + 1)).prop_map(move |c| {
        let s = HarmonicSpectrum::from_coeffs(L, c).unwrap();
        s.map_degree(|l, c| scale * c / (1.0 + l as f64))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn onofri_is_nonnegative(s in spectrum(1.5)) {
        let f = Functional::new(grid(), L).unwrap();
        let u = f.transform().synthesize(&s).unwrap();
        let rep = f.evaluate(&u, None, None).unwrap();
        prop_assert!(rep.onofri_j >= -1e-10, "J = {}", rep.onofri_j);
    }

    #[test]
    fn synthesis_round_trip(s in spectrum(1.0)) {
        let tr = Transform::new(grid(), L).unwrap();
        let back = tr.analyze(&tr.synthesize(&s).unwrap()).unwrap();
        prop_assert!(back.add_scaled(&s, -1.0).max_abs() < 1e-12);
    }

    #[test]
    fn analysis_is_linear(a in spectrum(1.0), b in spectrum(1.0), k in -3.0f64..3.0) {
        let tr = Transform::new(grid(), L).unwrap();
        let fa = tr.synthesize(&a).unwrap();
        let fb = tr.synthesize(&b).unwrap();
        let combo = tr.analyze(&fa.axpby(1.0, &fb, k).unwrap()).unwrap();
        let expect = tr.analyze(&fa).unwrap().add_scaled(&tr.analyze(&fb).unwrap(), k);
        prop_assert!(combo.add_scaled(&expect, -1.0).max_abs() < 1e-12);
    }

    #[test]
    fn shifted_functional_ignores_constants(s in spectrum(1.0), c in -5.0f64..5.0) {
        let f = Functional::new(grid(), L).unwrap();
        let u = f.transform().synthesize(&s).unwrap();
        let a = f.evaluate(&u, Some(0.4), Some(0.2)).unwrap();
        let b = f.evaluate(&u.shifted(c), Some(0.4), Some(0.2)).unwrap();
        prop_assert!((a.shifted_i - b.shifted_i).abs() < 1e-12);
        prop_assert!((a.onofri_j - b.onofri_j).abs() < 1e-12);
        prop_assert!(
            (a.perturbed.unwrap().shifted_value - b.perturbed.unwrap().shifted_value).abs() < 1e-12
        );
        for i in 0..3 {
            prop_assert!((a.normalized_moments[i] - b.normalized_moments[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn residual_integrates_to_zero(s in spectrum(1.0), eps in 0.0f64..0.5) {
        let f = Functional::new(grid(), L).unwrap();
        let u = f.transform().synthesize(&s).unwrap();
        let r = f.el_residual(&u, eps, sphere_mt::Normalization::U).unwrap();
        prop_assert!(r.residual_integral.abs() < 1e-11);
    }

    #[test]
    fn dirichlet_energy_is_quadrature_of_gradient_pairing(s in spectrum(1.0)) {
        // ∫|∇u|² = ∫ u (−Δu)
        let tr = Transform::new(grid(), L).unwrap();
        let u = tr.synthesize(&s).unwrap();
        let lap = tr.laplacian_field(&u).unwrap();
        let pairing = -u.inner(&lap).unwrap();
        prop_assert!((pairing - s.dirichlet_energy()).abs() < 1e-10 * (1.0 + pairing.abs()));
    }
}

#[test]
fn field_constructors_reject_bad_lengths() {
    let g = grid();
    assert!(ScalarField::from_values(Arc::clone(&g), vec![0.0; 3]).is_err());
    assert!(ScalarField::from_values(g, vec![f64::NAN; 24 * 48]).is_err());
}
