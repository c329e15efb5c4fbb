//! Blow-up energy bookkeeping: the planar bubble energy `I₁` on `B_R`, the
//! boundary constant `D(λ, R)`, the obstruction constant `1 − ln 2`, and the
//! bridge to the sphere through the bubble pair `w_t(n) + w_t(s)`.

use serde::{Deserialize, Serialize};

use crate::conformal::{bubble_mass, BubblePairProfile};
use crate::error::{Error, Result};
use crate::quad::{graded_breakpoints, integrate_panels, GaussRule};
use crate::scalar::Real;

const RULE_POINTS: usize = 24;

/// One row of the energy-expansion table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport<T> {
    pub t: T,
    pub r: T,
    /// `max v_t` for `v_t = 2u − ln ∫e^{2u}`, `u` the bubble pair.
    pub lambda: T,
    /// `e^{λ/2}`.
    pub tau: T,
    /// Geodesic radius `R/τ` of the sphere ball (capped at π/2).
    pub ball_radius: T,
    /// `16π(ln(1+2πR²) + 1/(1+2πR²) − 1)`.
    pub i1_closed: T,
    /// Radial quadrature of `∫_{B_R} |∇φ₀|²`.
    pub i1_numeric: T,
    /// `16π(ln(1+2πR²) − 1)`.
    pub i1_truncated: T,
    /// `i1_closed − i1_truncated = 16π/(1+2πR²)`.
    pub truncation_gap: T,
    /// `∫_{B_{R/τ}(n)} |∇v_t|²`; tends to `i1_closed` as `t → ∞`.
    pub i1_sphere: T,
    /// `πR²/(1+2πR²)`.
    pub bubble_mass_closed: T,
    /// Radial quadrature of `∫_{B_R} e^{φ₀}`.
    pub bubble_mass_numeric: T,
    /// `∫_{B_{R/τ}(n)} e^{v_t}`; tends to `bubble_mass_closed`.
    pub ball_mass_sphere: T,
    /// `D(λ, R) = −λ + 2 ln(R²/(1+2πR²)) + 4(1 − ln 2)`.
    pub d_value: T,
    /// `1 − ln 2`.
    pub obstruction: T,
}

pub fn obstruction_constant<T: Real>() -> T {
    T::one() - T::LN_2()
}

fn two_pi_r2_plus_one<T: Real>(r: T) -> T {
    T::one() + T::lit(2.0) * T::PI() * r * r
}

/// `16π(ln(1+2πR²) + 1/(1+2πR²) − 1)` from the exact antiderivative.
pub fn i1_closed<T: Real>(r: T) -> T {
    let s = two_pi_r2_plus_one(r);
    T::lit(16.0) * T::PI() * (s.ln() + T::one() / s - T::one())
}

/// `16π(ln(1+2πR²) − 1)`, the truncated form valid up to `o_R(1)`.
pub fn i1_truncated<T: Real>(r: T) -> T {
    T::lit(16.0) * T::PI() * (two_pi_r2_plus_one(r).ln() - T::one())
}

fn radial_panels<T: Real>(r: T) -> Vec<T> {
    // φ₀ varies on the scale 1/√(2π); panels of width ≤ 1/4 resolve it
    let n = (r / T::lit(0.25)).ceil().to_usize().unwrap_or(1).clamp(4, 4000);
    (0..=n)
        .map(|i| r * T::from_count(i) / T::from_count(n))
        .collect()
}

/// `∫_{B_R} |∇φ₀|² = 2π ∫₀^R |φ₀'(ρ)|² ρ dρ` by composite Gauss-Legendre.
pub fn i1_numeric<T: Real>(r: T) -> T {
    let rule = GaussRule::new(RULE_POINTS);
    let two_pi = T::lit(2.0) * T::PI();
    two_pi
        * integrate_panels(&rule, &radial_panels(r), |rho| {
            // φ₀'(ρ) = −8πρ / (1 + 2πρ²)
            let d = -T::lit(8.0) * T::PI() * rho / two_pi_r2_plus_one(rho);
            d * d * rho
        })
}

fn bubble_mass_numeric<T: Real>(r: T) -> T {
    let rule = GaussRule::new(RULE_POINTS);
    let two_pi = T::lit(2.0) * T::PI();
    two_pi
        * integrate_panels(&rule, &radial_panels(r), |rho| {
            let s = two_pi_r2_plus_one(rho);
            rho / (s * s)
        })
}

fn theta_panels<T: Real>(t: T, upper: T) -> Vec<T> {
    let width = T::lit(0.05) / t;
    let full = graded_breakpoints(T::zero(), T::PI(), width, T::lit(0.4));
    let mut out: Vec<T> = full.into_iter().filter(|&b| b < upper).collect();
    out.push(upper);
    out
}

/// `∫ e^{2u}` of the bubble pair, by graded quadrature in θ.
pub fn pair_mass<T: Real>(t: T) -> Result<T> {
    let prof = BubblePairProfile::new(t)?;
    let rule = GaussRule::new(RULE_POINTS);
    let two_pi = T::lit(2.0) * T::PI();
    Ok(two_pi
        * integrate_panels(&rule, &theta_panels(t, T::PI()), |th| {
            prof.exp2(th.cos()) * th.sin()
        }))
}

/// Builds the report for dilation `t` and planar radius `R > 0`.
pub fn energy_expansion_report<T: Real>(t: T, r: T) -> Result<ExpansionReport<T>> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("R must be positive, got {r}")));
    }
    let prof = BubblePairProfile::new(t)?;
    let mass = pair_mass(t)?;
    // u attains its maximum 0 at both poles, so max v = −ln mass
    let lambda = -mass.ln();
    let tau = (lambda / T::lit(2.0)).exp();
    let ball_radius = (r / tau).min(T::FRAC_PI_2());

    let rule = GaussRule::new(RULE_POINTS);
    let two_pi = T::lit(2.0) * T::PI();
    let four = T::lit(4.0);
    let panels = theta_panels(t, ball_radius);
    let i1_sphere = two_pi
        * integrate_panels(&rule, &panels, |th| {
            let (s, c) = th.sin_cos();
            // |∇v|² = 4 (du/dθ)², du/dθ = −sin θ du/dc
            let du = s * prof.d_dc(c);
            four * du * du * s
        });
    let ball_mass_sphere =
        two_pi * integrate_panels(&rule, &panels, |th| prof.exp2(th.cos()) / mass * th.sin());

    let i1c = i1_closed(r);
    let i1t = i1_truncated(r);
    let obstruction = obstruction_constant::<T>();
    let d_value = -lambda
        + T::lit(2.0) * (r * r / two_pi_r2_plus_one(r)).ln()
        + four * obstruction;
    Ok(ExpansionReport {
        t,
        r,
        lambda,
        tau,
        ball_radius,
        i1_closed: i1c,
        i1_numeric: i1_numeric(r),
        i1_truncated: i1t,
        truncation_gap: i1c - i1t,
        i1_sphere,
        bubble_mass_closed: bubble_mass(r),
        bubble_mass_numeric: bubble_mass_numeric(r),
        ball_mass_sphere,
        d_value,
        obstruction,
    })
}
