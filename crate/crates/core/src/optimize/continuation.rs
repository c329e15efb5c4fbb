//! ε-continuation with warm starts.

use serde::{Deserialize, Serialize};

use super::{minimize_on, Init, MinimizeConfig, MinimizeResult, Status};
use crate::error::{Error, Result};
use crate::grid::build_grid;
use crate::scalar::Real;

/// Classification of a continuation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Mass stays bounded along the list.
    Compact,
    /// Some run blew up, or mass and `max u` grow strictly along a list of at
    /// least three runs with a tenfold total increase in mass.
    BlowingUp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSummary<T> {
    pub eps: Vec<T>,
    pub statuses: Vec<Status>,
    pub values: Vec<T>,
    pub masses: Vec<Option<T>>,
    pub log_masses: Vec<T>,
    pub max_u: Vec<T>,
    pub branch: Branch,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationReport<T> {
    pub runs: Vec<MinimizeResult<T>>,
    pub summary: ContinuationSummary<T>,
}

fn classify<T: Real>(runs: &[MinimizeResult<T>]) -> Branch {
    if runs.iter().any(|r| r.status == Status::BlowupDetected) {
        return Branch::BlowingUp;
    }
    let growing = runs.len() >= 3
        && runs.windows(2).all(|w| {
            w[1].log_mass > w[0].log_mass && w[1].max_u > w[0].max_u
        })
        && runs[runs.len() - 1].log_mass - runs[0].log_mass > T::lit(10.0).ln();
    if growing {
        Branch::BlowingUp
    } else {
        Branch::Compact
    }
}

/// Runs [`super::minimize`] at each ε of a strictly decreasing list, starting
/// each run from the previous minimizer. Individual blow-ups do not stop the
/// list.
pub fn continuation<T: Real>(
    eps_list: &[T],
    base: &MinimizeConfig<T>,
) -> Result<ContinuationReport<T>> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParameter("empty eps list".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter(
            "eps list must be strictly decreasing".into(),
        ));
    }
    for &eps in eps_list {
        MinimizeConfig { eps, ..base.clone() }.validate()?;
    }
    let grid = build_grid::<T>(base.n_theta, base.n_phi)?;
    let mut runs: Vec<MinimizeResult<T>> = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let init = match runs.last() {
            Some(prev) => Init::Spectrum(prev.spectrum.clone()),
            None => base.init.clone(),
        };
        let cfg = MinimizeConfig {
            eps,
            init,
            ..base.clone()
        };
        runs.push(minimize_on(&cfg, &grid)?);
    }
    let summary = ContinuationSummary {
        eps: eps_list.to_vec(),
        statuses: runs.iter().map(|r| r.status).collect(),
        values: runs.iter().map(|r| r.value).collect(),
        masses: runs.iter().map(|r| r.mass).collect(),
        log_masses: runs.iter().map(|r| r.log_mass).collect(),
        max_u: runs.iter().map(|r| r.max_u).collect(),
        branch: classify(&runs),
    };
    Ok(ContinuationReport { runs, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::Functional;

    #[test]
    fn rejects_bad_lists() {
        let base = MinimizeConfig::<f64>::new(0.3).with_grid(12, 24).with_l_max(6);
        assert!(continuation(&[], &base).is_err());
        assert!(continuation(&[0.2, 0.3], &base).is_err());
        assert!(continuation(&[0.6, 0.3], &base).is_err());
    }

    #[test]
    fn warm_start_carries_previous_minimizer() {
        let base = MinimizeConfig::<f64>::new(0.4)
            .with_grid(16, 32)
            .with_l_max(8)
            .with_init(Init::Random { seed: 9, scale: 0.05 });
        let rep = continuation(&[0.4, 0.3, 0.2], &base).unwrap();
        let f = Functional::for_grid(build_grid::<f64>(16, 32).unwrap());
        for w in rep.runs.windows(2) {
            let carried = f.shifted_perturbed(&w[0].u_star, w[1].eps).unwrap();
            assert!((carried - w[1].initial_value_eps).abs() < 1e-12);
        }
        assert_eq!(rep.summary.branch, Branch::Compact);
    }
}
