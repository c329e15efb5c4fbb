//! Spectral toolkit for the improved Moser-Trudinger functional on the unit
//! sphere: quadrature grids, real spherical harmonics, conformal bubbles,
//! functional and residual evaluation, and constrained minimization over the
//! zero-moment class.
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar to `f64`, which is what the CLI and the test suites use.

pub mod conformal;
pub mod error;
pub mod functional;
pub mod grid;
pub mod harmonics;
pub mod optimize;
pub mod quad;
pub mod scalar;

pub use conformal::{
    bubble_mass, bubble_pair, green_two_pole, green_two_pole_at, max_resolvable_t,
    mobius_factor, mobius_pullback, planar_bubble, BubblePairField, BubblePairProfile, MobiusMap,
};
pub use error::{Error, Result};
pub use functional::{
    bubble_pair_sweep, energy_expansion_report, ExpansionReport, Functional, FunctionalReport,
    Normalization, ResidualReport, SweepRow,
};
pub use grid::{build_grid, ScalarField, SphericalGrid};
pub use harmonics::{analyze, evaluate_at, synthesize, HarmonicSpectrum, Transform};
pub use optimize::{
    continuation, minimize, ContinuationReport, Init, MinimizeConfig, MinimizeResult, Status,
};
pub use scalar::Real;

/// Default grid for experiments: resolves bubbles up to `t ≈ 21`.
pub const DEFAULT_N_THETA: usize = 64;
pub const DEFAULT_N_PHI: usize = 128;

pub type Grid = SphericalGrid<f64>;
pub type Field = ScalarField<f64>;
pub type Spectrum = HarmonicSpectrum<f64>;
pub type Mobius = MobiusMap<f64>;

pub type GridF32 = SphericalGrid<f32>;
pub type FieldF32 = ScalarField<f32>;
pub type SpectrumF32 = HarmonicSpectrum<f32>;
