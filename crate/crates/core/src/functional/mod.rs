//! Functionals, gradients and residuals of the Moser-Trudinger family.
//!
//! Averages are `⨍ f = ∫ f / 4π`. For a field `u`:
//!
//! ```text
//! onofri_J   = ⨍|∇u|² + 2⨍u − ln ⨍e^{2u}                 (≥ 0)
//! improved_I = ½⨍|∇u|² − ln ⨍e^{2u}                        (on ⨍u = 0)
//! shifted_I  = ½⨍|∇u|² + 2⨍u − ln ⨍e^{2u}                  (shift invariant)
//! I_α        = α⨍|∇u|² + 2⨍u − ln ⨍e^{2u}
//! I_ε        = 1/(2(1−ε)) ⨍|∇u|² − ln ⨍e^{2u}
//! ```
//!
//! Dirichlet energies and Laplacians are spectral; nonlinear terms are
//! evaluated pointwise on the grid.

mod expansion;
mod sweep;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use expansion::{
    energy_expansion_report, i1_closed, i1_numeric, i1_truncated, obstruction_constant,
    pair_mass, ExpansionReport,
};
pub use sweep::{bubble_pair_sweep, linspace, SweepRow};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, SphericalGrid};
use crate::harmonics::Transform;
use crate::scalar::Real;

/// `I_α` at a given coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AubinValue<T> {
    pub alpha: T,
    pub value: T,
}

/// `I_ε` at a given ε; `shifted_value` adds `2⨍u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedValue<T> {
    pub eps: T,
    pub value: T,
    pub shifted_value: T,
}

/// Scalar diagnostics of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport<T> {
    pub avg_grad_sq: T,
    pub avg_u: T,
    pub log_avg_exp: T,
    pub mass: T,
    pub moments: [T; 3],
    pub normalized_moments: [T; 3],
    pub onofri_j: T,
    pub improved_i: T,
    pub shifted_i: T,
    pub aubin: Option<AubinValue<T>>,
    pub perturbed: Option<PerturbedValue<T>>,
}

impl<T: Real> FunctionalReport<T> {
    /// `max_i |m_i / mass|`.
    pub fn moment_violation(&self) -> T {
        self.normalized_moments
            .iter()
            .fold(T::zero(), |a, &m| a.max(m.abs()))
    }
}

/// Which form of the mean-field equation a residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `-Δu = 8π(1−ε)(e^{2u}/∫e^{2u} − 1/4π)`.
    #[default]
    U,
    /// `-Δv = 16π(1−ε)(e^{v}/∫e^{v} − 1/4π)`, i.e. `v = 2u − ln ∫e^{2u}`.
    V,
}

/// Euler-Lagrange residual of a field.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport<T> {
    #[serde(skip)]
    pub el_residual_field: ScalarField<T>,
    pub el_residual_norm: T,
    /// `∫ r`; zero up to rounding since both sides of the equation integrate to 0.
    pub residual_integral: T,
    pub normalization: Normalization,
    pub eps: T,
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if !eps.is_finite() || eps < T::zero() || eps >= T::one() {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in [0, 1), got {eps}"
        )));
    }
    Ok(())
}

/// Evaluator bound to one grid and one spectral degree.
#[derive(Debug, Clone)]
pub struct Functional<T> {
    transform: Transform<T>,
}

/// Pointwise exponential data shared by several evaluations.
struct ExpData<T> {
    exp2u: ScalarField<T>,
    mass: T,
}

impl<T: Real> Functional<T> {
    pub fn new(grid: Arc<SphericalGrid<T>>, l_max: usize) -> Result<Self> {
        Ok(Self {
            transform: Transform::new(grid, l_max)?,
        })
    }

    /// Evaluator at the grid's maximum degree.
    pub fn for_grid(grid: Arc<SphericalGrid<T>>) -> Self {
        Self {
            transform: Transform::for_grid(grid),
        }
    }

    pub fn transform(&self) -> &Transform<T> {
        &self.transform
    }

    pub fn grid(&self) -> &Arc<SphericalGrid<T>> {
        self.transform.grid()
    }

    fn exp_data(&self, u: &ScalarField<T>) -> Result<ExpData<T>> {
        let exp2u = u.exp2()?;
        let mass = exp2u.integrate();
        if !mass.is_finite() {
            return Err(u.range_error());
        }
        Ok(ExpData { exp2u, mass })
    }

    /// Full set of scalar diagnostics; `alpha` and `eps` add `I_α` and `I_ε`.
    ///
    /// Overflow of `e^{2u}` is returned as [`Error::Range`].
    pub fn evaluate(
        &self,
        u: &ScalarField<T>,
        alpha: Option<T>,
        eps: Option<T>,
    ) -> Result<FunctionalReport<T>> {
        if let Some(e) = eps {
            check_eps(e)?;
        }
        let four_pi = T::four_pi();
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let spectrum = self.transform.analyze(u)?;
        let avg_grad_sq = spectrum.dirichlet_energy() / four_pi;
        let avg_u = u.average();
        let ExpData { exp2u, mass } = self.exp_data(u)?;
        let log_avg_exp = (mass / four_pi).ln();
        let moments = moments_of(&exp2u);
        let normalized_moments = moments.map(|m| m / mass);
        let aubin = alpha.map(|alpha| AubinValue {
            alpha,
            value: alpha * avg_grad_sq + two * avg_u - log_avg_exp,
        });
        let perturbed = eps.map(|eps| {
            let value = avg_grad_sq / (two * (T::one() - eps)) - log_avg_exp;
            PerturbedValue {
                eps,
                value,
                shifted_value: value + two * avg_u,
            }
        });
        Ok(FunctionalReport {
            avg_grad_sq,
            avg_u,
            log_avg_exp,
            mass,
            moments,
            normalized_moments,
            onofri_j: avg_grad_sq + two * avg_u - log_avg_exp,
            improved_i: half * avg_grad_sq - log_avg_exp,
            shifted_i: half * avg_grad_sq + two * avg_u - log_avg_exp,
            aubin,
            perturbed,
        })
    }

    /// Shift-invariant `I_ε` alone.
    pub fn shifted_perturbed(&self, u: &ScalarField<T>, eps: T) -> Result<T> {
        Ok(self
            .evaluate(u, None, Some(eps))?
            .perturbed
            .expect("eps supplied")
            .shifted_value)
    }

    /// L² gradient of the shifted `I_ε`:
    /// `g = −Δu / (4π(1−ε)) + 1/(2π) − 2 e^{2u} / ∫e^{2u}`.
    pub fn l2_gradient(&self, u: &ScalarField<T>, eps: T) -> Result<ScalarField<T>> {
        check_eps(eps)?;
        let four_pi = T::four_pi();
        let two = T::lit(2.0);
        let lap = self.transform.laplacian_field(u)?;
        let ExpData { exp2u, mass } = self.exp_data(u)?;
        let k = T::one() / (four_pi * (T::one() - eps));
        let c = two / four_pi;
        lap.zip_map(&exp2u, |l, e| -k * l + c - two * e / mass)
    }

    /// Residual of the mean-field equation. With [`Normalization::V`] the
    /// input is read as `v` and the residual equals twice the `u`-form
    /// residual of any `u` with `v = 2u − ln ∫e^{2u}`.
    pub fn el_residual(
        &self,
        field: &ScalarField<T>,
        eps: T,
        normalization: Normalization,
    ) -> Result<ResidualReport<T>> {
        check_eps(eps)?;
        let four_pi = T::four_pi();
        let (exp_field, coupling) = match normalization {
            Normalization::U => (field.exp2()?, T::lit(8.0) * T::PI() * (T::one() - eps)),
            Normalization::V => (
                field.map(|v| v.exp())?,
                T::lit(16.0) * T::PI() * (T::one() - eps),
            ),
        };
        let mass = exp_field.integrate();
        if !mass.is_finite() {
            return Err(field.range_error());
        }
        let lap = self.transform.laplacian_field(field)?;
        let inv_area = T::one() / four_pi;
        let r = lap.zip_map(&exp_field, |l, e| -l - coupling * (e / mass - inv_area))?;
        let integral = r.integrate();
        let scale: T = r
            .values()
            .iter()
            .zip(lap.values())
            .map(|(&a, &b)| a.abs() + b.abs())
            .zip(r.grid().node_weight().iter().flat_map(|&w| {
                std::iter::repeat_n(w, r.grid().n_phi())
            }))
            .map(|(a, w)| a * w)
            .sum::<T>()
            + T::lit(2.0) * coupling;
        let tolerance = T::lit(1e-9) * (T::one() + scale);
        if integral.abs() > tolerance {
            return Err(Error::Balance {
                integral: integral.as_f64(),
                tolerance: tolerance.as_f64(),
            });
        }
        Ok(ResidualReport {
            el_residual_norm: r.l2_norm(),
            el_residual_field: r,
            residual_integral: integral,
            normalization,
            eps,
        })
    }

    /// Kazdan-Warner defects for `Δv + h e^v = c`:
    ///
    /// `r_i = ⨍ e^v ∇h·∇x_i − (2 − c) ⨍ e^v h x_i`, `i = 1, 2, 3`.
    ///
    /// `∇h·∇x_i` is formed as `½[Δ(h x_i) − x_i Δh − h Δx_i]` with spectral
    /// Laplacians; `h x_i` is truncated at this evaluator's degree.
    pub fn kazdan_warner_residual(
        &self,
        v: &ScalarField<T>,
        h: &ScalarField<T>,
        c: T,
    ) -> Result<[T; 3]> {
        let four_pi = T::four_pi();
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let ev = v.map(|x| x.exp())?;
        let lap_h = self.transform.laplacian_field(h)?;
        let grid = Arc::clone(v.grid());
        let mut out = [T::zero(); 3];
        for (i, slot) in out.iter_mut().enumerate() {
            let xi = ScalarField::coordinate(Arc::clone(&grid), i);
            let hx = h.mul(&xi)?;
            let lap_hx = self.transform.laplacian_field(&hx)?;
            // Δx_i = −2 x_i
            let grad_dot: Vec<T> = (0..grid.len())
                .map(|n| {
                    half * (lap_hx.values()[n] - xi.values()[n] * lap_h.values()[n]
                        + two * hx.values()[n])
                })
                .collect();
            let lhs: Vec<T> = grad_dot
                .iter()
                .zip(ev.values())
                .map(|(&g, &e)| e * g)
                .collect();
            let rhs: Vec<T> = hx
                .values()
                .iter()
                .zip(ev.values())
                .map(|(&hxv, &e)| e * hxv)
                .collect();
            let lhs = grid.integrate_values(&lhs)? / four_pi;
            let rhs = grid.integrate_values(&rhs)? / four_pi;
            *slot = lhs - (two - c) * rhs;
        }
        Ok(out)
    }
}

/// `m_i = ∫ f x_i`.
pub fn moments_of<T: Real>(f: &ScalarField<T>) -> [T; 3] {
    let grid = f.grid();
    let n_phi = grid.n_phi();
    let mut m = [T::zero(); 3];
    for (j, ring) in f.values().chunks_exact(n_phi).enumerate() {
        let w = grid.node_weight()[j];
        let base = j * n_phi;
        let mut acc = [T::zero(); 3];
        for (k, &v) in ring.iter().enumerate() {
            let x = grid.xyz()[base + k];
            acc[0] += v * x[0];
            acc[1] += v * x[1];
            acc[2] += v * x[2];
        }
        for i in 0..3 {
            m[i] += w * acc[i];
        }
    }
    m
}

/// Evaluates at the grid's maximum degree.
pub fn evaluate<T: Real>(
    u: &ScalarField<T>,
    alpha: Option<T>,
    eps: Option<T>,
) -> Result<FunctionalReport<T>> {
    Functional::for_grid(Arc::clone(u.grid())).evaluate(u, alpha, eps)
}

pub fn l2_gradient<T: Real>(u: &ScalarField<T>, eps: T) -> Result<ScalarField<T>> {
    Functional::for_grid(Arc::clone(u.grid())).l2_gradient(u, eps)
}

pub fn el_residual<T: Real>(
    field: &ScalarField<T>,
    eps: T,
    normalization: Normalization,
) -> Result<ResidualReport<T>> {
    Functional::for_grid(Arc::clone(field.grid())).el_residual(field, eps, normalization)
}

pub fn kazdan_warner_residual<T: Real>(
    v: &ScalarField<T>,
    h: &ScalarField<T>,
    c: T,
) -> Result<[T; 3]> {
    Functional::for_grid(Arc::clone(v.grid())).kazdan_warner_residual(v, h, c)
}
