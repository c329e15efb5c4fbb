//! Real spherical-harmonic analysis and synthesis on a [`SphericalGrid`].
//!
//! Basis (orthonormal on S², no Condon-Shortley phase):
//!
//! ```text
//! Y_{l0}  = P̄_l^0(cos θ)
//! Y_{lm}  = √2 P̄_l^m(cos θ) cos(mφ)     m > 0
//! Y_{l,-m} = √2 P̄_l^m(cos θ) sin(mφ)    m > 0
//! ```
//!
//! where `P̄` are the associated Legendre functions normalized so that
//! `∫ |P̄_l^m e^{imφ}|² = 1`. With this choice `x₁ ∝ Y_{11}`, `x₂ ∝ Y_{1,-1}`
//! and `x₃ ∝ Y_{10}` with positive constants.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, SphericalGrid};
use crate::scalar::Real;

/// Flat index of `(l, m)` in a spectrum, `-l ≤ m ≤ l`.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

#[inline]
fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Number of coefficients up to degree `l_max`.
pub fn spectrum_len(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Real spherical-harmonic coefficients `c_{lm}` for `0 ≤ l ≤ L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpectrum<T> {
    l_max: usize,
    coeff: Vec<T>,
}

impl<T: Real> HarmonicSpectrum<T> {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            l_max,
            coeff: vec![T::zero(); spectrum_len(l_max)],
        }
    }

    pub fn from_coeffs(l_max: usize, coeff: Vec<T>) -> Result<Self> {
        if coeff.len() != spectrum_len(l_max) {
            return Err(Error::Length {
                expected: spectrum_len(l_max),
                got: coeff.len(),
            });
        }
        if let Some((index, v)) = coeff.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: v.as_f64(),
            });
        }
        Ok(Self { l_max, coeff })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeff
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeff
    }

    pub fn get(&self, l: usize, m: i64) -> T {
        self.coeff[lm_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, value: T) {
        self.coeff[lm_index(l, m)] = value;
    }

    /// Iterator over `(l, m, c_lm)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, T)> + '_ {
        (0..=self.l_max).flat_map(move |l| {
            (-(l as i64)..=l as i64).map(move |m| (l, m, self.coeff[lm_index(l, m)]))
        })
    }

    /// Coefficient-wise `f(l, c_lm)`.
    pub fn map_degree<F: Fn(usize, T) -> T>(&self, f: F) -> Self {
        let mut out = self.clone();
        for l in 0..=self.l_max {
            for i in l * l..(l + 1) * (l + 1) {
                out.coeff[i] = f(l, self.coeff[i]);
            }
        }
        out
    }

    /// Spectral Laplace-Beltrami operator: `c_lm ↦ -l(l+1) c_lm`.
    pub fn laplacian(&self) -> Self {
        self.map_degree(|l, c| -T::from_count(l * (l + 1)) * c)
    }

    /// `∫ |∇u|² = Σ l(l+1) c_lm²`.
    pub fn dirichlet_energy(&self) -> T {
        self.iter()
            .map(|(l, _, c)| T::from_count(l * (l + 1)) * c * c)
            .sum()
    }

    /// `(1 - Δ)⁻¹`: `c_lm ↦ c_lm / (1 + l(l+1))`.
    pub fn sobolev_precondition(&self) -> Self {
        self.map_degree(|l, c| c / (T::one() + T::from_count(l * (l + 1))))
    }

    /// `(1 - Δ)`: inverse of [`Self::sobolev_precondition`].
    pub fn sobolev_unprecondition(&self) -> Self {
        self.map_degree(|l, c| c * (T::one() + T::from_count(l * (l + 1))))
    }

    /// Truncates or zero-pads to degree `l_max`.
    pub fn resized(&self, l_max: usize) -> Self {
        let mut out = Self::zeros(l_max);
        let n = spectrum_len(l_max.min(self.l_max));
        out.coeff[..n].copy_from_slice(&self.coeff[..n]);
        out
    }

    pub fn scaled(&self, a: T) -> Self {
        self.map_degree(|_, c| a * c)
    }

    /// `self + a·other`; degrees must match.
    pub fn add_scaled(&self, other: &Self, a: T) -> Self {
        assert_eq!(self.l_max, other.l_max, "spectrum degree mismatch");
        Self {
            l_max: self.l_max,
            coeff: self
                .coeff
                .iter()
                .zip(&other.coeff)
                .map(|(&x, &y)| x + a * y)
                .collect(),
        }
    }

    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.l_max, other.l_max, "spectrum degree mismatch");
        self.coeff.iter().zip(&other.coeff).map(|(&a, &b)| a * b).sum()
    }

    /// Euclidean norm of the coefficients (the L² norm of the field).
    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.coeff.iter().fold(T::zero(), |a, &c| a.max(c.abs()))
    }
}

/// Fills `out[tri_index(l, m)]` with `P̄_l^m(cos θ)` for `0 ≤ m ≤ l ≤ l_max`.
fn legendre_row<T: Real>(l_max: usize, cos_t: T, sin_t: T, out: &mut [T]) {
    let two = T::lit(2.0);
    let mut pmm = T::one() / T::four_pi().sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = T::from_count(m);
            pmm = pmm * ((two * mf + T::one()) / (two * mf)).sqrt() * sin_t;
        }
        out[tri_index(m, m)] = pmm;
        if m == l_max {
            break;
        }
        let mf = T::from_count(m);
        let mut p_prev = pmm;
        let mut p_cur = (two * mf + T::lit(3.0)).sqrt() * cos_t * pmm;
        out[tri_index(m + 1, m)] = p_cur;
        for l in m + 2..=l_max {
            let lf = T::from_count(l);
            let a = ((T::lit(4.0) * lf * lf - T::one()) / (lf * lf - mf * mf)).sqrt();
            let lm1 = lf - T::one();
            let b = ((lm1 * lm1 - mf * mf) / (T::lit(4.0) * lm1 * lm1 - T::one())).sqrt();
            let p_next = a * (cos_t * p_cur - b * p_prev);
            out[tri_index(l, m)] = p_next;
            p_prev = p_cur;
            p_cur = p_next;
        }
    }
}

/// Precomputed analysis/synthesis tables for one grid and one degree.
#[derive(Debug, Clone)]
pub struct Transform<T> {
    grid: Arc<SphericalGrid<T>>,
    l_max: usize,
    /// `n_theta` rows of `(L+1)(L+2)/2` normalized Legendre values.
    plm: Vec<T>,
    /// `(L+1)` rows of `n_phi` values of `cos(mφ_k)` and `sin(mφ_k)`.
    cos_m: Vec<T>,
    sin_m: Vec<T>,
}

impl<T: Real> Transform<T> {
    /// Rejects `l_max` above [`SphericalGrid::max_degree`].
    pub fn new(grid: Arc<SphericalGrid<T>>, l_max: usize) -> Result<Self> {
        let bound = grid.max_degree();
        if l_max > bound {
            return Err(Error::AntiAliasing { l_max, bound });
        }
        let ntri = tri_index(l_max, l_max) + 1;
        let mut plm = vec![T::zero(); grid.n_theta() * ntri];
        for j in 0..grid.n_theta() {
            legendre_row(
                l_max,
                grid.cos_theta()[j],
                grid.sin_theta()[j],
                &mut plm[j * ntri..(j + 1) * ntri],
            );
        }
        let n_phi = grid.n_phi();
        let mut cos_m = vec![T::zero(); (l_max + 1) * n_phi];
        let mut sin_m = vec![T::zero(); (l_max + 1) * n_phi];
        for m in 0..=l_max {
            for k in 0..n_phi {
                // reduce m·k mod n_phi so large products keep full accuracy
                let r = (m * k) % n_phi;
                let ang = T::lit(2.0) * T::PI() * T::from_count(r) / T::from_count(n_phi);
                cos_m[m * n_phi + k] = ang.cos();
                sin_m[m * n_phi + k] = ang.sin();
            }
        }
        Ok(Self {
            grid,
            l_max,
            plm,
            cos_m,
            sin_m,
        })
    }

    /// Transform at the largest degree the grid admits.
    pub fn for_grid(grid: Arc<SphericalGrid<T>>) -> Self {
        let l = grid.max_degree();
        Self::new(grid, l).expect("max_degree is always admissible")
    }

    pub fn grid(&self) -> &Arc<SphericalGrid<T>> {
        &self.grid
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    fn ntri(&self) -> usize {
        tri_index(self.l_max, self.l_max) + 1
    }

    fn check_grid(&self, f: &ScalarField<T>) -> Result<()> {
        let g = f.grid();
        if Arc::ptr_eq(g, &self.grid)
            || (g.n_theta() == self.grid.n_theta() && g.n_phi() == self.grid.n_phi())
        {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `c_lm = ∫ f Y_lm` by quadrature.
    pub fn analyze(&self, f: &ScalarField<T>) -> Result<HarmonicSpectrum<T>> {
        self.check_grid(f)?;
        let l_max = self.l_max;
        let n_phi = self.grid.n_phi();
        let ntri = self.ntri();
        let sqrt2 = T::lit(2.0).sqrt();
        let mut out = HarmonicSpectrum::zeros(l_max);
        let mut a = vec![T::zero(); l_max + 1];
        let mut b = vec![T::zero(); l_max + 1];
        for (j, ring) in f.values().chunks_exact(n_phi).enumerate() {
            for m in 0..=l_max {
                let cr = &self.cos_m[m * n_phi..(m + 1) * n_phi];
                let sr = &self.sin_m[m * n_phi..(m + 1) * n_phi];
                let mut sa = T::zero();
                let mut sb = T::zero();
                for k in 0..n_phi {
                    sa += ring[k] * cr[k];
                    sb += ring[k] * sr[k];
                }
                a[m] = sa;
                b[m] = sb;
            }
            let w = self.grid.node_weight()[j];
            let p = &self.plm[j * ntri..(j + 1) * ntri];
            for l in 0..=l_max {
                out.coeff[lm_index(l, 0)] += w * p[tri_index(l, 0)] * a[0];
                for m in 1..=l {
                    let pw = w * sqrt2 * p[tri_index(l, m)];
                    out.coeff[lm_index(l, m as i64)] += pw * a[m];
                    out.coeff[lm_index(l, -(m as i64))] += pw * b[m];
                }
            }
        }
        Ok(out)
    }

    /// `Σ c_lm Y_lm` at every node. Spectra above this transform's degree are
    /// rejected; lower-degree spectra are zero-padded.
    pub fn synthesize(&self, s: &HarmonicSpectrum<T>) -> Result<ScalarField<T>> {
        if s.l_max > self.l_max {
            return Err(Error::AntiAliasing {
                l_max: s.l_max,
                bound: self.l_max,
            });
        }
        let l_max = s.l_max;
        let n_phi = self.grid.n_phi();
        let ntri = self.ntri();
        let sqrt2 = T::lit(2.0).sqrt();
        let mut values = vec![T::zero(); self.grid.len()];
        let mut a = vec![T::zero(); l_max + 1];
        let mut b = vec![T::zero(); l_max + 1];
        for (j, ring) in values.chunks_exact_mut(n_phi).enumerate() {
            let p = &self.plm[j * ntri..(j + 1) * ntri];
            for m in 0..=l_max {
                let mut sa = T::zero();
                let mut sb = T::zero();
                for l in m..=l_max {
                    let pl = p[tri_index(l, m)];
                    sa += s.coeff[lm_index(l, m as i64)] * pl;
                    if m > 0 {
                        sb += s.coeff[lm_index(l, -(m as i64))] * pl;
                    }
                }
                a[m] = if m > 0 { sqrt2 * sa } else { sa };
                b[m] = sqrt2 * sb;
            }
            for (k, v) in ring.iter_mut().enumerate() {
                let mut acc = a[0];
                for m in 1..=l_max {
                    acc += a[m] * self.cos_m[m * n_phi + k] + b[m] * self.sin_m[m * n_phi + k];
                }
                *v = acc;
            }
        }
        ScalarField::from_values(Arc::clone(&self.grid), values)
    }

    /// `Δf` through the spectrum truncated at this transform's degree.
    pub fn laplacian_field(&self, f: &ScalarField<T>) -> Result<ScalarField<T>> {
        self.synthesize(&self.analyze(f)?.laplacian())
    }
}

/// Analyzes `f` up to degree `l_max`.
pub fn analyze<T: Real>(f: &ScalarField<T>, l_max: usize) -> Result<HarmonicSpectrum<T>> {
    Transform::new(Arc::clone(f.grid()), l_max)?.analyze(f)
}

/// Synthesizes `s` on `grid`; the grid must resolve `s.l_max()`.
pub fn synthesize<T: Real>(
    s: &HarmonicSpectrum<T>,
    grid: &Arc<SphericalGrid<T>>,
) -> Result<ScalarField<T>> {
    Transform::new(Arc::clone(grid), s.l_max())?.synthesize(s)
}

/// Evaluates `Σ c_lm Y_lm` at arbitrary unit vectors.
pub fn evaluate_at<T: Real>(s: &HarmonicSpectrum<T>, points: &[[T; 3]]) -> Vec<T> {
    let l_max = s.l_max;
    let sqrt2 = T::lit(2.0).sqrt();
    let mut p = vec![T::zero(); tri_index(l_max, l_max) + 1];
    points
        .iter()
        .map(|x| {
            let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let norm = (rho * rho + x[2] * x[2]).sqrt();
            let cos_t = x[2] / norm;
            let sin_t = rho / norm;
            legendre_row(l_max, cos_t, sin_t, &mut p);
            let phi = x[1].atan2(x[0]);
            let mut acc = T::zero();
            for l in 0..=l_max {
                acc += s.coeff[lm_index(l, 0)] * p[tri_index(l, 0)];
            }
            for m in 1..=l_max {
                let (sm, cm) = (T::from_count(m) * phi).sin_cos();
                let mut sa = T::zero();
                let mut sb = T::zero();
                for l in m..=l_max {
                    let pl = p[tri_index(l, m)];
                    sa += s.coeff[lm_index(l, m as i64)] * pl;
                    sb += s.coeff[lm_index(l, -(m as i64))] * pl;
                }
                acc += sqrt2 * (sa * cm + sb * sm);
            }
            acc
        })
        .collect()
}

/// Samples the single basis function `Y_lm` on `grid`.
pub fn basis_field<T: Real>(
    grid: &Arc<SphericalGrid<T>>,
    l: usize,
    m: i64,
) -> Result<ScalarField<T>> {
    let mut s = HarmonicSpectrum::zeros(l);
    s.set(l, m, T::one());
    // basis functions are evaluated directly: no anti-aliasing bound applies
    let values = evaluate_at(&s, grid.xyz());
    ScalarField::from_values(Arc::clone(grid), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_spectrum(l_max: usize, seed: u64) -> HarmonicSpectrum<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = (0..spectrum_len(l_max))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        HarmonicSpectrum::from_coeffs(l_max, c).unwrap()
    }

    #[test]
    fn index_layout() {
        assert_eq!(lm_index(0, 0), 0);
        assert_eq!(lm_index(1, -1), 1);
        assert_eq!(lm_index(1, 1), 3);
        assert_eq!(lm_index(2, -2), 4);
        assert_eq!(spectrum_len(3), 16);
    }

    #[test]
    fn single_mode_analysis() {
        let g = build_grid::<f64>(24, 48).unwrap();
        let y = basis_field(&g, 2, 1).unwrap();
        let s = analyze(&y, 10).unwrap();
        for (l, m, c) in s.iter() {
            let expect = if (l, m) == (2, 1) { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-10, "({l},{m}) = {c}");
        }
    }

    #[test]
    fn constant_and_x3() {
        let g = build_grid::<f64>(24, 48).unwrap();
        let one = ScalarField::constant(g.clone(), 1.0);
        let s = analyze(&one, 8).unwrap();
        assert!((s.get(0, 0) - (4.0 * PI).sqrt()).abs() < 1e-12);
        assert!(s.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));

        let x3 = ScalarField::coordinate(g.clone(), 2);
        let s = analyze(&x3, 8).unwrap();
        assert!((s.get(1, 0) - (4.0 * PI / 3.0).sqrt()).abs() < 1e-12);
        for (l, m, c) in s.iter() {
            if (l, m) != (1, 0) {
                assert!(c.abs() < 1e-12);
            }
        }
        // positive orientation of the l = 1 real basis
        let x1 = ScalarField::coordinate(g.clone(), 0);
        let x2 = ScalarField::coordinate(g, 1);
        assert!((analyze(&x1, 2).unwrap().get(1, 1) - (4.0 * PI / 3.0).sqrt()).abs() < 1e-12);
        assert!((analyze(&x2, 2).unwrap().get(1, -1) - (4.0 * PI / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn round_trip_l16() {
        let g = build_grid::<f64>(64, 128).unwrap();
        let s = random_spectrum(16, 7);
        let f = synthesize(&s, &g).unwrap();
        let back = analyze(&f, 16).unwrap();
        let err = back.add_scaled(&s, -1.0).max_abs();
        assert!(err < 1e-10, "{err}");
        let zero = synthesize(&HarmonicSpectrum::zeros(5), &g).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn anti_aliasing_rejection() {
        let g = build_grid::<f64>(2, 4).unwrap();
        let f = ScalarField::zeros(g.clone());
        assert_eq!(
            analyze(&f, 16).unwrap_err(),
            Error::AntiAliasing { l_max: 16, bound: 0 }
        );
        assert!(synthesize(&HarmonicSpectrum::zeros(3), &g).is_err());
    }

    #[test]
    fn laplacian_eigenvalues() {
        let mut s = HarmonicSpectrum::<f64>::zeros(6);
        s.set(0, 0, 2.0);
        s.set(1, 0, 1.0);
        s.set(5, 3, 1.0);
        let d = s.laplacian();
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.get(1, 0), -2.0);
        assert_eq!(d.get(5, 3), -30.0);
    }

    #[test]
    fn dirichlet_energy_of_x3() {
        let g = build_grid::<f64>(24, 48).unwrap();
        let x3 = ScalarField::coordinate(g, 2);
        let e = analyze(&x3, 4).unwrap().dirichlet_energy();
        // -∫ x₃ Δx₃ = 2 ∫ x₃² = 8π/3
        assert!((e - 8.0 * PI / 3.0).abs() < 1e-12);
        let e3 = analyze(&x3.scaled(3.0), 4).unwrap().dirichlet_energy();
        assert!((e3 - 9.0 * e).abs() < 1e-11);
    }

    #[test]
    fn sobolev_scaling() {
        let s = random_spectrum(6, 3);
        let p = s.sobolev_precondition();
        assert_eq!(p.get(0, 0), s.get(0, 0));
        assert!((p.get(1, 1) - s.get(1, 1) / 3.0).abs() < 1e-16);
        let back = p.sobolev_unprecondition();
        assert!(back.add_scaled(&s, -1.0).max_abs() < 1e-14);
    }

    #[test]
    fn evaluate_at_matches_synthesis_on_nodes() {
        let g = build_grid::<f64>(20, 40).unwrap();
        let s = random_spectrum(9, 11);
        let f = synthesize(&s, &g).unwrap();
        let direct = evaluate_at(&s, g.xyz());
        for (a, b) in f.values().iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_precision_round_trip() {
        let g = build_grid::<f32>(16, 32).unwrap();
        let mut s = HarmonicSpectrum::<f32>::zeros(6);
        s.set(3, -2, 0.5);
        s.set(6, 6, -1.0);
        let back = analyze(&synthesize(&s, &g).unwrap(), 6).unwrap();
        assert!(back.add_scaled(&s, -1.0).max_abs() < 1e-5);
    }
}
