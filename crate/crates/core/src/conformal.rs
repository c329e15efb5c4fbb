//! Möbius dilations of S², their conformal factors ("bubbles"), the
//! antipodal bubble pair, the planar bubble profile, and the two-pole
//! Green's function.
//!
//! A dilation with pole `p` and parameter `t ≥ 1` acts in stereographic
//! coordinates centred at `p` as `z ↦ t z`. Its conformal factor is
//!
//! ```text
//! e^{w_t(x)} = t (1 + |z|²) / (1 + t² |z|²) = 2t / ((1 + t²) - (t² - 1) x·p)
//! ```
//!
//! so `w_1 = 0`, `w_t(p) = ln t`, `∫ e^{2 w_t} = 4π` and `-Δ w_t = e^{2 w_t} - 1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, SphericalGrid};
use crate::harmonics::{evaluate_at, Transform};
use crate::scalar::Real;

/// Largest dilation a grid resolves: `n_theta / 3`.
///
/// The bubble core has angular width `~2/t`; Gauss-Legendre quadrature of
/// `e^{2 w_t}` converges like `exp(-4 n_theta / t)`, so this bound keeps the
/// area error near `1e-5` or below.
pub fn max_resolvable_t<T: Real>(grid: &SphericalGrid<T>) -> T {
    T::from_count(grid.n_theta()) / T::lit(3.0)
}

fn check_resolvable<T: Real>(t: T, grid: &SphericalGrid<T>) -> Result<()> {
    let max_t = max_resolvable_t(grid);
    if t > max_t {
        return Err(Error::Resolution {
            t: t.as_f64(),
            max_t: max_t.as_f64(),
        });
    }
    Ok(())
}

/// Dilation of S² about `pole` by `t ≥ 1`; `t = 1` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap<T> {
    pole: [T; 3],
    t: T,
}

impl<T: Real> MobiusMap<T> {
    /// `pole` is normalized; `t` must be finite and `≥ 1`.
    pub fn new(pole: [T; 3], t: T) -> Result<Self> {
        let n = (pole[0] * pole[0] + pole[1] * pole[1] + pole[2] * pole[2]).sqrt();
        if !n.is_finite() || n <= T::zero() {
            return Err(Error::InvalidParameter("pole must be a nonzero vector".into()));
        }
        if !t.is_finite() || t < T::one() {
            return Err(Error::InvalidParameter(format!(
                "dilation must satisfy t >= 1, got {t}"
            )));
        }
        Ok(Self {
            pole: [pole[0] / n, pole[1] / n, pole[2] / n],
            t,
        })
    }

    pub fn north(t: T) -> Result<Self> {
        Self::new([T::zero(), T::zero(), T::one()], t)
    }

    pub fn south(t: T) -> Result<Self> {
        Self::new([T::zero(), T::zero(), -T::one()], t)
    }

    pub fn pole(&self) -> [T; 3] {
        self.pole
    }

    pub fn t(&self) -> T {
        self.t
    }

    fn cos_angle(&self, x: &[T; 3]) -> T {
        x[0] * self.pole[0] + x[1] * self.pole[1] + x[2] * self.pole[2]
    }

    fn denominator(&self, c: T) -> T {
        let t2 = self.t * self.t;
        (T::one() + t2) - (t2 - T::one()) * c
    }

    /// `w_t(x)`.
    pub fn factor_at(&self, x: &[T; 3]) -> T {
        let c = self.cos_angle(x);
        (T::lit(2.0) * self.t).ln() - self.denominator(c).ln()
    }

    /// Image of `x`: same azimuth about the pole, `tan(θ'/2) = t tan(θ/2)`.
    pub fn apply(&self, x: &[T; 3]) -> [T; 3] {
        let c = self.cos_angle(x);
        let t2 = self.t * self.t;
        let d = self.denominator(c);
        let cos_new = ((T::one() + c) - t2 * (T::one() - c)) / d;
        // sin θ' / sin θ equals the conformal factor e^{w}
        let stretch = T::lit(2.0) * self.t / d;
        let p = self.pole;
        [
            cos_new * p[0] + stretch * (x[0] - c * p[0]),
            cos_new * p[1] + stretch * (x[1] - c * p[1]),
            cos_new * p[2] + stretch * (x[2] - c * p[2]),
        ]
    }

    /// Dilation by `t₁ t₂` about the same pole.
    pub fn then(&self, other_t: T) -> Result<Self> {
        Self::new(self.pole, self.t * other_t)
    }
}

/// Samples the conformal factor `w_t` of `map` on `grid`.
pub fn mobius_factor<T: Real>(
    map: &MobiusMap<T>,
    grid: &Arc<SphericalGrid<T>>,
) -> Result<ScalarField<T>> {
    check_resolvable(map.t, grid)?;
    if map.t == T::one() {
        return Ok(ScalarField::zeros(Arc::clone(grid)));
    }
    ScalarField::from_fn(Arc::clone(grid), |x| map.factor_at(x))
}

/// `T u = u ∘ φ + w_φ`, which leaves `∫ e^{2u}` and the Onofri functional
/// unchanged.
///
/// `u ∘ φ` is evaluated from the spherical-harmonic expansion of `u` at the
/// grid's maximum degree (band-limited interpolation).
pub fn mobius_pullback<T: Real>(u: &ScalarField<T>, map: &MobiusMap<T>) -> Result<ScalarField<T>> {
    let grid = u.grid();
    check_resolvable(map.t, grid)?;
    if map.t == T::one() {
        return Ok(u.clone());
    }
    let spectrum = Transform::for_grid(Arc::clone(grid)).analyze(u)?;
    let images: Vec<[T; 3]> = grid.xyz().iter().map(|x| map.apply(x)).collect();
    let composed = evaluate_at(&spectrum, &images);
    let values = composed
        .into_iter()
        .zip(grid.xyz())
        .map(|(v, x)| v + map.factor_at(x))
        .collect();
    ScalarField::from_values(Arc::clone(grid), values)
}

/// `w_t(n) + w_t(s)`: antipodally symmetric superposition of two bubbles at
/// the north and south poles.
#[derive(Debug, Clone)]
pub struct BubblePairField<T> {
    pub t: T,
    pub field: ScalarField<T>,
}

/// Builds the bubble pair. Requires even `n_phi` so the antipodal map is an
/// exact node permutation.
pub fn bubble_pair<T: Real>(t: T, grid: &Arc<SphericalGrid<T>>) -> Result<BubblePairField<T>> {
    if !grid.n_phi().is_multiple_of(2) {
        return Err(Error::InvalidParameter(
            "bubble pair needs an even number of longitudes".into(),
        ));
    }
    let north = MobiusMap::north(t)?;
    check_resolvable(t, grid)?;
    let n_phi = grid.n_phi();
    let mut values = Vec::with_capacity(grid.len());
    for &c in grid.cos_theta() {
        let up = north.factor_at(&[T::zero(), T::zero(), c]);
        let down = north.factor_at(&[T::zero(), T::zero(), -c]);
        values.extend(std::iter::repeat_n(up + down, n_phi));
    }
    Ok(BubblePairField {
        t,
        field: ScalarField::from_values(Arc::clone(grid), values)?,
    })
}

/// Closed-form pieces of the pair `u = w_t(n) + w_t(s)` as functions of
/// `c = cos θ`.
#[derive(Debug, Clone, Copy)]
pub struct BubblePairProfile<T> {
    t: T,
}

impl<T: Real> BubblePairProfile<T> {
    pub fn new(t: T) -> Result<Self> {
        MobiusMap::north(t)?;
        Ok(Self { t })
    }

    fn ab(&self) -> (T, T) {
        let t2 = self.t * self.t;
        (T::one() + t2, t2 - T::one())
    }

    /// `u(c)`.
    pub fn value(&self, c: T) -> T {
        let (a, b) = self.ab();
        let two_t = T::lit(2.0) * self.t;
        T::lit(2.0) * two_t.ln() - (a - b * c).ln() - (a + b * c).ln()
    }

    /// `du/dc`.
    pub fn d_dc(&self, c: T) -> T {
        let (a, b) = self.ab();
        b / (a - b * c) - b / (a + b * c)
    }

    /// `e^{2u(c)} = 16 t⁴ / (a² - b² c²)²`.
    pub fn exp2(&self, c: T) -> T {
        let (a, b) = self.ab();
        let t2 = self.t * self.t;
        let d = a * a - b * b * c * c;
        T::lit(16.0) * t2 * t2 / (d * d)
    }
}

/// `φ₀(x) = 2 ln(1 / (1 + 2π|x|²))`, the planar bubble solving
/// `-Δφ₀ = 16π e^{φ₀}` with `φ₀(0) = 0`.
pub fn planar_bubble<T: Real>(x: [T; 2]) -> T {
    let r2 = x[0] * x[0] + x[1] * x[1];
    -T::lit(2.0) * (T::lit(2.0) * T::PI() * r2).ln_1p()
}

/// `∫_{B_R(0)} e^{φ₀} = πR² / (1 + 2πR²)`; tends to 1/2 as `R → ∞`.
pub fn bubble_mass<T: Real>(r: T) -> T {
    let pr2 = T::PI() * r * r;
    pr2 / (T::one() + T::lit(2.0) * pr2)
}

/// `G(θ) = -4 ln sin θ - 4(1 - ln 2)`: zero-mean solution of
/// `-ΔG + 4 = 8π(δ_n + δ_s)`.
pub fn green_two_pole_at<T: Real>(theta: T) -> T {
    let four = T::lit(4.0);
    -four * theta.sin().ln() - four * (T::one() - T::LN_2())
}

/// Samples `G` on `grid`; no node sits on a pole so every sample is finite.
pub fn green_two_pole<T: Real>(grid: &Arc<SphericalGrid<T>>) -> ScalarField<T> {
    let four = T::lit(4.0);
    let k = four * (T::one() - T::LN_2());
    let n_phi = grid.n_phi();
    let mut values = Vec::with_capacity(grid.len());
    for &s in grid.sin_theta() {
        values.extend(std::iter::repeat_n(-four * s.ln() - k, n_phi));
    }
    ScalarField::from_values(Arc::clone(grid), values).expect("interior samples are finite")
}
