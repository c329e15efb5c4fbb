//! Minimization of the perturbed functional `I_ε` over the zero-moment class.
//!
//! The search space is the span of real harmonics of degree `1..=L`; the
//! degree-0 coefficient is frozen at zero, which fixes the gauge `⨍u = 0`.
//! The moment constraints `∫e^{2u}x_i = 0` are imposed on the normalized
//! moments `m̂_i = ∫e^{2u}x_i / ∫e^{2u}` by an augmented Lagrangian
//!
//! ```text
//! F(u) = I_ε(u) + Σ λ_i m̂_i(u) + (μ/2) Σ m̂_i(u)²
//! ```
//!
//! whose inner minimization is Sobolev-preconditioned gradient descent with
//! Armijo backtracking. Exponentials are always taken relative to `max u`, so
//! no iterate can overflow; concentration is reported through the blow-up
//! thresholds instead.

mod continuation;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use continuation::{continuation, Branch, ContinuationReport, ContinuationSummary};

use crate::conformal::bubble_pair;
use crate::error::{Error, Result};
use crate::functional::{moments_of, Functional, Normalization};
use crate::grid::{build_grid, ScalarField, SphericalGrid};
use crate::harmonics::{HarmonicSpectrum, Transform};
use crate::scalar::Real;
use crate::{DEFAULT_N_PHI, DEFAULT_N_THETA};

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;
const MAX_STEP: f64 = 1e4;

/// Starting point of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init<T> {
    Zero,
    /// Coefficients of degree `1..=L` drawn uniformly from `[-scale, scale]`.
    Random { seed: u64, scale: T },
    BubblePair { t: T },
    /// Node values on the configured grid.
    Values(Vec<T>),
    Spectrum(HarmonicSpectrum<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeConfig<T> {
    pub eps: T,
    pub l_max: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub tol_grad: T,
    pub tol_constraint: T,
    pub mu0: T,
    pub mu_growth: T,
    pub max_outer: usize,
    pub max_inner: usize,
    pub blowup_max_u: T,
    pub blowup_mass: T,
    pub init: Init<T>,
}

impl<T: Real> MinimizeConfig<T> {
    /// Defaults: `L = 16` on the default grid, tolerances `1e-8`,
    /// `μ₀ = 10`, growth 4, blow-up at `max u > 30` or mass `> 1e12`.
    pub fn new(eps: T) -> Self {
        Self {
            eps,
            l_max: 16,
            n_theta: DEFAULT_N_THETA,
            n_phi: DEFAULT_N_PHI,
            tol_grad: T::lit(1e-8),
            tol_constraint: T::lit(1e-8),
            mu0: T::lit(10.0),
            mu_growth: T::lit(4.0),
            max_outer: 40,
            max_inner: 500,
            blowup_max_u: T::lit(30.0),
            blowup_mass: T::lit(1e12),
            init: Init::Zero,
        }
    }

    pub fn with_init(mut self, init: Init<T>) -> Self {
        self.init = init;
        self
    }

    pub fn with_grid(mut self, n_theta: usize, n_phi: usize) -> Self {
        self.n_theta = n_theta;
        self.n_phi = n_phi;
        self
    }

    pub fn with_l_max(mut self, l_max: usize) -> Self {
        self.l_max = l_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.eps >= T::zero() && self.eps < T::lit(0.5)) {
            return bad(format!("eps must lie in [0, 1/2), got {}", self.eps));
        }
        for (name, v) in [
            ("tol_grad", self.tol_grad),
            ("tol_constraint", self.tol_constraint),
            ("mu0", self.mu0),
            ("blowup_max_u", self.blowup_max_u),
            ("blowup_mass", self.blowup_mass),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.mu_growth > T::one()) || !self.mu_growth.is_finite() {
            return bad(format!("mu_growth must exceed 1, got {}", self.mu_growth));
        }
        if self.l_max == 0 {
            return bad("l_max must be at least 1".into());
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration caps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    BlowupDetected,
    IterationCap,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::BlowupDetected => "blowup_detected",
            Status::IterationCap => "iteration_cap",
        }
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry<T> {
    pub outer: usize,
    pub inner_iterations: usize,
    /// Shifted `I_ε` at the end of the inner loop.
    pub value: T,
    pub violation: T,
    /// `√(g·Pg)` for the augmented gradient `g` and preconditioner `P`.
    pub grad_norm: T,
    pub max_u: T,
    pub log_mass: T,
    /// `None` when `∫e^{2u}` is not representable.
    pub mass: Option<T>,
    pub mu: T,
    /// Multipliers `λ` used by this inner loop.
    pub multipliers: [T; 3],
    /// Augmented objective at the start and after every accepted step.
    pub objective_history: Vec<T>,
}

/// Concentration scales `λ = max(2u − ln ∫e^{2u})` and `τ = e^{λ/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration<T> {
    pub lambda: T,
    pub tau: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizeResult<T> {
    /// Minimizer with `⨍u = 0`.
    #[serde(skip)]
    pub u_star: ScalarField<T>,
    pub spectrum: HarmonicSpectrum<T>,
    pub eps: T,
    /// Shifted `I` (no ε) at `u_star`.
    pub value: T,
    /// Shifted `I_ε` at `u_star`.
    pub value_eps: T,
    /// Shifted `I_ε` at the projected starting point.
    pub initial_value_eps: T,
    /// Final augmented-Lagrangian estimates `λ + μ m̂`.
    pub multipliers: [T; 3],
    pub constraint_violation: T,
    pub el_residual_norm: T,
    /// Kazdan-Warner defects of `v = 2u` for the multiplier equation.
    pub kw_residual: [T; 3],
    pub kw_residual_max: T,
    pub max_u: T,
    pub log_mass: T,
    pub mass: Option<T>,
    pub concentration: Concentration<T>,
    pub status: Status,
    pub trace: Vec<TraceEntry<T>>,
}

/// Iterate data with exponentials scaled by `e^{−2 max u}`.
#[derive(Clone)]
struct Point<T> {
    coeff: HarmonicSpectrum<T>,
    u: ScalarField<T>,
    max_u: T,
    /// `e^{2(u − max u)} / ∫e^{2(u − max u)}`, a probability density.
    density: ScalarField<T>,
    log_mass: T,
    nm: [T; 3],
    value_eps: T,
}

impl<T: Real> Point<T> {
    fn augmented(&self, lambda: &[T; 3], mu: T) -> T {
        let half = T::lit(0.5);
        (0..3).fold(self.value_eps, |acc, i| {
            acc + lambda[i] * self.nm[i] + half * mu * self.nm[i] * self.nm[i]
        })
    }

    fn violation(&self) -> T {
        self.nm.iter().fold(T::zero(), |a, &m| a.max(m.abs()))
    }

    fn mass(&self) -> Option<T> {
        Some(self.log_mass.exp()).filter(|m| m.is_finite())
    }
}

struct Problem<T> {
    transform: Transform<T>,
    eps: T,
    coords: [ScalarField<T>; 3],
}

impl<T: Real> Problem<T> {
    fn new(grid: Arc<SphericalGrid<T>>, l_max: usize, eps: T) -> Result<Self> {
        let coords = [0, 1, 2].map(|i| ScalarField::coordinate(Arc::clone(&grid), i));
        Ok(Self {
            transform: Transform::new(grid, l_max)?,
            eps,
            coords,
        })
    }

    fn point(&self, mut coeff: HarmonicSpectrum<T>) -> Result<Point<T>> {
        coeff.set(0, 0, T::zero());
        let four_pi = T::four_pi();
        let two = T::lit(2.0);
        let u = self.transform.synthesize(&coeff)?;
        let max_u = u.max();
        let scaled = u.map(|x| (two * (x - max_u)).exp())?;
        let scaled_mass = scaled.integrate();
        let density = scaled.scaled(T::one() / scaled_mass);
        let log_mass = two * max_u + scaled_mass.ln();
        let nm = moments_of(&density);
        let avg_grad_sq = coeff.dirichlet_energy() / four_pi;
        let value_eps = avg_grad_sq / (two * (T::one() - self.eps)) - (log_mass - four_pi.ln());
        Ok(Point {
            coeff,
            u,
            max_u,
            density,
            log_mass,
            nm,
            value_eps,
        })
    }

    /// Coefficient gradient of the augmented objective, degree 0 zeroed.
    fn gradient(&self, p: &Point<T>, lambda: &[T; 3], mu: T) -> Result<HarmonicSpectrum<T>> {
        let two = T::lit(2.0);
        let big: [T; 3] = [0, 1, 2].map(|i| lambda[i] + mu * p.nm[i]);
        let c = T::one() / (two * T::PI());
        let values: Vec<T> = (0..p.u.values().len())
            .map(|n| {
                let d = two * p.density.values()[n];
                let mut g = c - d;
                for i in 0..3 {
                    g += big[i] * d * (self.coords[i].values()[n] - p.nm[i]);
                }
                g
            })
            .collect();
        let field = ScalarField::from_values(Arc::clone(self.transform.grid()), values)?;
        let mut a = self.transform.analyze(&field)?;
        let k = T::one() / (T::four_pi() * (T::one() - self.eps));
        let lap = p.coeff.map_degree(|l, c| T::from_count(l * (l + 1)) * c * k);
        a = a.add_scaled(&lap, T::one());
        a.set(0, 0, T::zero());
        Ok(a)
    }
}

struct InnerOutcome<T> {
    point: Point<T>,
    iterations: usize,
    grad_norm: T,
    history: Vec<T>,
    blowup: bool,
}

fn is_blowup<T: Real>(p: &Point<T>, cfg: &MinimizeConfig<T>) -> bool {
    p.max_u > cfg.blowup_max_u || p.log_mass > cfg.blowup_mass.ln()
}

fn inner_loop<T: Real>(
    problem: &Problem<T>,
    cfg: &MinimizeConfig<T>,
    start: Point<T>,
    lambda: &[T; 3],
    mu: T,
    step: &mut T,
) -> Result<InnerOutcome<T>> {
    let c1 = T::lit(ARMIJO_C1);
    let shrink = T::lit(BACKTRACK);
    let mut point = start;
    let mut f = point.augmented(lambda, mu);
    let mut history = vec![f];
    let mut grad_norm = T::infinity();
    let mut iterations = 0;
    let mut previous: Option<(HarmonicSpectrum<T>, HarmonicSpectrum<T>)> = None;
    while iterations < cfg.max_inner {
        let g = problem.gradient(&point, lambda, mu)?;
        let pg = g.sobolev_precondition();
        let gpg = g.dot(&pg);
        grad_norm = gpg.max(T::zero()).sqrt();
        if grad_norm <= cfg.tol_grad {
            break;
        }
        // d = −Pg, so the directional derivative is −g·Pg < 0
        let slope = -gpg;
        if let Some((c_prev, g_prev)) = &previous {
            // Barzilai-Borwein trial step in the preconditioned metric
            let s = point.coeff.add_scaled(c_prev, -T::one());
            let y = g.add_scaled(g_prev, -T::one());
            let sy = s.dot(&y);
            let ypy = y.dot(&y.sobolev_precondition());
            if sy > T::zero() && ypy > T::zero() {
                *step = (sy / ypy).min(T::lit(MAX_STEP));
            }
        }
        let mut alpha = *step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = problem.point(point.coeff.add_scaled(&pg, -alpha))?;
            let ft = trial.augmented(lambda, mu);
            if ft <= f + c1 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= shrink;
        }
        let Some((trial, ft)) = accepted else {
            break;
        };
        iterations += 1;
        previous = Some((point.coeff, g));
        point = trial;
        f = ft;
        history.push(f);
        *step = alpha;
        if is_blowup(&point, cfg) {
            return Ok(InnerOutcome {
                point,
                iterations,
                grad_norm,
                history,
                blowup: true,
            });
        }
    }
    Ok(InnerOutcome {
        point,
        iterations,
        grad_norm,
        history,
        blowup: false,
    })
}

fn initial_spectrum<T: Real>(
    cfg: &MinimizeConfig<T>,
    grid: &Arc<SphericalGrid<T>>,
    transform: &Transform<T>,
) -> Result<HarmonicSpectrum<T>> {
    let l_max = cfg.l_max;
    Ok(match &cfg.init {
        Init::Zero => HarmonicSpectrum::zeros(l_max),
        Init::Random { seed, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut s = HarmonicSpectrum::zeros(l_max);
            for c in s.coeffs_mut().iter_mut().skip(1) {
                *c = *scale * T::lit(rng.gen_range(-1.0..=1.0));
            }
            s
        }
        Init::BubblePair { t } => transform.analyze(&bubble_pair(*t, grid)?.field)?,
        Init::Values(values) => {
            transform.analyze(&ScalarField::from_values(Arc::clone(grid), values.clone())?)?
        }
        Init::Spectrum(s) => s.resized(l_max),
    })
}

/// Minimizes `I_ε` over the zero-moment class from `cfg.init`.
///
/// Invalid configurations are errors; every valid run ends with one of the
/// three [`Status`] values and a trace with one entry per outer iteration.
pub fn minimize<T: Real>(cfg: &MinimizeConfig<T>) -> Result<MinimizeResult<T>> {
    cfg.validate()?;
    let grid = build_grid::<T>(cfg.n_theta, cfg.n_phi)?;
    minimize_on(cfg, &grid)
}

pub(crate) fn minimize_on<T: Real>(
    cfg: &MinimizeConfig<T>,
    grid: &Arc<SphericalGrid<T>>,
) -> Result<MinimizeResult<T>> {
    let problem = Problem::new(Arc::clone(grid), cfg.l_max, cfg.eps)?;
    let diagnostics = Functional::for_grid(Arc::clone(grid));
    let start = problem.point(initial_spectrum(cfg, grid, &problem.transform)?)?;
    let initial_value_eps = start.value_eps;

    let mut lambda = [T::zero(); 3];
    let mut mu = cfg.mu0;
    let mut step = T::lit(4.0) * T::PI();
    let mut prev_violation = T::infinity();
    let mut trace = Vec::new();
    let mut status = Status::IterationCap;
    let mut point = start;
    let mut multipliers = lambda;

    if is_blowup(&point, cfg) {
        let g = problem.gradient(&point, &lambda, mu)?;
        let grad_norm = g.dot(&g.sobolev_precondition()).max(T::zero()).sqrt();
        trace.push(trace_entry(0, 0, &point, grad_norm, mu, lambda, vec![]));
        status = Status::BlowupDetected;
    } else {
        for outer in 0..cfg.max_outer {
            let out = inner_loop(&problem, cfg, point, &lambda, mu, &mut step)?;
            point = out.point;
            let violation = point.violation();
            multipliers = [0, 1, 2].map(|i| lambda[i] + mu * point.nm[i]);
            trace.push(trace_entry(
                outer,
                out.iterations,
                &point,
                out.grad_norm,
                mu,
                lambda,
                out.history,
            ));
            if out.blowup {
                status = Status::BlowupDetected;
                break;
            }
            if violation <= cfg.tol_constraint && out.grad_norm <= cfg.tol_grad {
                let el = el_residual_norm(&diagnostics, &point, cfg.eps)?;
                if el <= T::lit(100.0) * cfg.tol_grad {
                    status = Status::Converged;
                    break;
                }
            }
            lambda = multipliers;
            if violation > cfg.tol_constraint && violation > prev_violation / T::lit(4.0) {
                mu *= cfg.mu_growth;
            }
            prev_violation = violation;
        }
    }
    finish(cfg, &diagnostics, point, multipliers, initial_value_eps, status, trace)
}

fn trace_entry<T: Real>(
    outer: usize,
    inner_iterations: usize,
    p: &Point<T>,
    grad_norm: T,
    mu: T,
    multipliers: [T; 3],
    objective_history: Vec<T>,
) -> TraceEntry<T> {
    TraceEntry {
        outer,
        inner_iterations,
        value: p.value_eps,
        violation: p.violation(),
        grad_norm,
        max_u: p.max_u,
        log_mass: p.log_mass,
        mass: p.mass(),
        mu,
        multipliers,
        objective_history,
    }
}

/// The `u`-form residual is invariant under constant shifts, so it is
/// evaluated on `u − max u` where `e^{2u}` cannot overflow.
fn el_residual_norm<T: Real>(f: &Functional<T>, p: &Point<T>, eps: T) -> Result<T> {
    let shifted = p.u.shifted(-p.max_u);
    Ok(f.el_residual(&shifted, eps, Normalization::U)?.el_residual_norm)
}

/// Kazdan-Warner defects for `Δv + h e^v = 4(1−ε)` with `v = 2u` and
/// `h = 16π(1−ε)(1 − Σ Λ_i x_i) / ∫e^{2u}`, which is the Euler-Lagrange
/// equation with multipliers `Λ`. Both `v` and `h` are rescaled by `e^{∓2 max u}`;
/// `h e^v` and hence the defects are unchanged.
fn kw_defects<T: Real>(
    f: &Functional<T>,
    p: &Point<T>,
    multipliers: &[T; 3],
    eps: T,
) -> Result<[T; 3]> {
    let two = T::lit(2.0);
    let one_m = T::one() - eps;
    let v = p.u.map(|x| two * (x - p.max_u))?;
    let scaled_mass = (p.log_mass - two * p.max_u).exp();
    let k = T::lit(16.0) * T::PI() * one_m / scaled_mass;
    let h = ScalarField::from_fn(Arc::clone(p.u.grid()), |x| {
        k * (T::one() - multipliers[0] * x[0] - multipliers[1] * x[1] - multipliers[2] * x[2])
    })?;
    f.kazdan_warner_residual(&v, &h, T::lit(4.0) * one_m)
}

fn finish<T: Real>(
    cfg: &MinimizeConfig<T>,
    diagnostics: &Functional<T>,
    point: Point<T>,
    multipliers: [T; 3],
    initial_value_eps: T,
    status: Status,
    trace: Vec<TraceEntry<T>>,
) -> Result<MinimizeResult<T>> {
    let two = T::lit(2.0);
    let four_pi = T::four_pi();
    let el = el_residual_norm(diagnostics, &point, cfg.eps)?;
    let kw = kw_defects(diagnostics, &point, &multipliers, cfg.eps)?;
    let avg_grad_sq = point.coeff.dirichlet_energy() / four_pi;
    let lambda = two * point.max_u - point.log_mass;
    // the gauge is exact in coefficient space; remove the quadrature residue too
    let u_star = point.u.shifted(-point.u.average());
    Ok(MinimizeResult {
        u_star,
        eps: cfg.eps,
        value: avg_grad_sq / two - (point.log_mass - four_pi.ln()),
        value_eps: point.value_eps,
        initial_value_eps,
        multipliers,
        constraint_violation: point.violation(),
        el_residual_norm: el,
        kw_residual_max: kw.iter().fold(T::zero(), |a, &r| a.max(r.abs())),
        kw_residual: kw,
        max_u: point.max_u,
        log_mass: point.log_mass,
        mass: point.mass(),
        concentration: Concentration {
            lambda,
            tau: (lambda / two).exp(),
        },
        spectrum: point.coeff,
        status,
        trace,
    })
}
