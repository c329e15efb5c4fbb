//! Aubin-coefficient sweeps along the bubble-pair family.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Functional;
use crate::conformal::bubble_pair;
use crate::error::Result;
use crate::grid::SphericalGrid;
use crate::scalar::Real;

/// One sweep row: the bubble-pair energies and `I_α` for each requested α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub t: T,
    pub avg_grad_sq: T,
    pub avg_u: T,
    pub log_avg_exp: T,
    pub i_alpha: Vec<T>,
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, steps: usize) -> Vec<T> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|i| lo + (hi - lo) * T::from_count(i) / T::from_count(n - 1))
            .collect(),
    }
}

/// Evaluates `I_α` on `bubble_pair(t)` for every `t` and α.
pub fn bubble_pair_sweep<T: Real>(
    grid: &Arc<SphericalGrid<T>>,
    ts: &[T],
    alphas: &[T],
) -> Result<Vec<SweepRow<T>>> {
    let functional = Functional::for_grid(Arc::clone(grid));
    ts.iter()
        .map(|&t| sweep_row(&functional, t, alphas))
        .collect()
}

pub(crate) fn sweep_row<T: Real>(
    functional: &Functional<T>,
    t: T,
    alphas: &[T],
) -> Result<SweepRow<T>> {
    let pair = bubble_pair(t, functional.grid())?;
    let rep = functional.evaluate(&pair.field, None, None)?;
    let two = T::lit(2.0);
    Ok(SweepRow {
        t,
        avg_grad_sq: rep.avg_grad_sq,
        avg_u: rep.avg_u,
        log_avg_exp: rep.log_avg_exp,
        i_alpha: alphas
            .iter()
            .map(|&a| a * rep.avg_grad_sq + two * rep.avg_u - rep.log_avg_exp)
            .collect(),
    })
}
