//! Gauss-Legendre × uniform-longitude quadrature grids on the unit sphere,
//! and scalar fields sampled on them.
//!
//! Nodes are stored ring by ring: colatitude outer (θ ascending, so `cos θ`
//! descending), longitude inner. Node `(j, k)` has flat index `j * n_phi + k`.
//! No node sits on a pole.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::GaussRule;
use crate::scalar::Real;

pub const MIN_N_THETA: usize = 2;
pub const MIN_N_PHI: usize = 4;

/// Quadrature grid on S².
#[derive(Debug, Clone)]
pub struct SphericalGrid<T> {
    n_theta: usize,
    n_phi: usize,
    theta: Vec<T>,
    cos_theta: Vec<T>,
    sin_theta: Vec<T>,
    phi: Vec<T>,
    cos_phi: Vec<T>,
    sin_phi: Vec<T>,
    /// Gauss-Legendre weight per ring; sums to 2.
    weight: Vec<T>,
    /// `weight[j] * 2π / n_phi`; summed over every node this gives 4π.
    node_weight: Vec<T>,
    xyz: Vec<[T; 3]>,
}

/// Builds a grid with `n_theta` Gauss-Legendre rings and `n_phi` longitudes.
///
/// Exact for spherical polynomials of degree `≤ min(2 n_theta - 1, n_phi - 1)`.
pub fn build_grid<T: Real>(n_theta: usize, n_phi: usize) -> Result<Arc<SphericalGrid<T>>> {
    SphericalGrid::new(n_theta, n_phi).map(Arc::new)
}

impl<T: Real> SphericalGrid<T> {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < MIN_N_THETA || n_phi < MIN_N_PHI {
            return Err(Error::Sizing { n_theta, n_phi });
        }
        let rule = GaussRule::<T>::new(n_theta);
        // ascending θ means descending cos θ
        let cos_theta: Vec<T> = rule.nodes.iter().rev().copied().collect();
        let weight: Vec<T> = rule.weights.iter().rev().copied().collect();
        let sin_theta: Vec<T> = cos_theta
            .iter()
            .map(|&c| (T::one() - c * c).max(T::zero()).sqrt())
            .collect();
        let theta: Vec<T> = cos_theta.iter().map(|&c| c.acos()).collect();

        let dphi = T::lit(2.0) * T::PI() / T::from_count(n_phi);
        let phi: Vec<T> = (0..n_phi).map(|k| dphi * T::from_count(k)).collect();
        let mut cos_phi: Vec<T> = phi.iter().map(|p| p.cos()).collect();
        let mut sin_phi: Vec<T> = phi.iter().map(|p| p.sin()).collect();
        if n_phi.is_multiple_of(2) {
            // exact antipodal pairing: φ + π ↦ (-cos φ, -sin φ)
            let h = n_phi / 2;
            for k in 0..h {
                cos_phi[k + h] = -cos_phi[k];
                sin_phi[k + h] = -sin_phi[k];
            }
        }

        let node_weight = weight.iter().map(|&w| w * dphi).collect();
        let mut xyz = Vec::with_capacity(n_theta * n_phi);
        for j in 0..n_theta {
            for k in 0..n_phi {
                xyz.push([
                    sin_theta[j] * cos_phi[k],
                    sin_theta[j] * sin_phi[k],
                    cos_theta[j],
                ]);
            }
        }
        Ok(Self {
            n_theta,
            n_phi,
            theta,
            cos_theta,
            sin_theta,
            phi,
            cos_phi,
            sin_phi,
            weight,
            node_weight,
            xyz,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn cos_theta(&self) -> &[T] {
        &self.cos_theta
    }

    pub fn sin_theta(&self) -> &[T] {
        &self.sin_theta
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn cos_phi(&self) -> &[T] {
        &self.cos_phi
    }

    pub fn sin_phi(&self) -> &[T] {
        &self.sin_phi
    }

    /// Per-ring Gauss-Legendre weights (sum 2).
    pub fn weight(&self) -> &[T] {
        &self.weight
    }

    /// Per-ring node weights (`weight * 2π / n_phi`).
    pub fn node_weight(&self) -> &[T] {
        &self.node_weight
    }

    pub fn xyz(&self) -> &[[T; 3]] {
        &self.xyz
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n_phi + k
    }

    /// `(θ, φ)` of a flat node index.
    pub fn angles(&self, index: usize) -> (T, T) {
        (self.theta[index / self.n_phi], self.phi[index % self.n_phi])
    }

    /// Highest total degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        (2 * self.n_theta - 1).min(self.n_phi - 1)
    }

    /// Largest spectral degree admitted by analysis/synthesis on this grid.
    ///
    /// `L ≤ exactness_degree / 2 - 1`; zero when the grid is too coarse for
    /// anything beyond constants.
    pub fn max_degree(&self) -> usize {
        (self.exactness_degree() / 2).saturating_sub(1)
    }

    /// Flat index of the node antipodal to `index`, when the grid admits exact
    /// node remapping (even `n_phi`).
    pub fn antipode(&self, index: usize) -> Option<usize> {
        if !self.n_phi.is_multiple_of(2) {
            return None;
        }
        let j = index / self.n_phi;
        let k = index % self.n_phi;
        Some(self.index(self.n_theta - 1 - j, (k + self.n_phi / 2) % self.n_phi))
    }

    /// Quadrature sum of raw node values, rejecting non-finite samples.
    pub fn integrate_values(&self, values: &[T]) -> Result<T> {
        if values.len() != self.len() {
            return Err(Error::Length {
                expected: self.len(),
                got: values.len(),
            });
        }
        if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: v.as_f64(),
            });
        }
        Ok(self.quadrature(values))
    }

    pub(crate) fn quadrature(&self, values: &[T]) -> T {
        values
            .chunks_exact(self.n_phi)
            .zip(&self.node_weight)
            .map(|(ring, &w)| w * ring.iter().copied().sum::<T>())
            .sum()
    }
}

/// Real values of a function on the nodes of a [`SphericalGrid`].
///
/// Construction rejects NaN and infinities, so every operation downstream
/// sees finite samples only.
#[derive(Debug, Clone)]
pub struct ScalarField<T> {
    grid: Arc<SphericalGrid<T>>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn from_values(grid: Arc<SphericalGrid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Length {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: v.as_f64(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<SphericalGrid<T>>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Arc<SphericalGrid<T>>, c: T) -> Self {
        assert!(c.is_finite(), "constant field must be finite");
        let n = grid.len();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    /// Samples `f(x)` at every node's unit vector.
    pub fn from_fn<F: FnMut(&[T; 3]) -> T>(grid: Arc<SphericalGrid<T>>, mut f: F) -> Result<Self> {
        let values = grid.xyz().iter().map(&mut f).collect();
        Self::from_values(grid, values)
    }

    /// Samples `f(θ, φ)` at every node.
    pub fn from_polar_fn<F: FnMut(T, T) -> T>(
        grid: Arc<SphericalGrid<T>>,
        mut f: F,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for &th in grid.theta() {
            for &ph in grid.phi() {
                values.push(f(th, ph));
            }
        }
        Self::from_values(grid, values)
    }

    /// Coordinate function `x_i` (`i ∈ {0, 1, 2}`).
    pub fn coordinate(grid: Arc<SphericalGrid<T>>, i: usize) -> Self {
        assert!(i < 3, "coordinate index out of range");
        let values = grid.xyz().iter().map(|x| x[i]).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<SphericalGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// `Σ_nodes f · weight`.
    pub fn integrate(&self) -> T {
        self.grid.quadrature(&self.values)
    }

    /// `integrate / 4π`.
    pub fn average(&self) -> T {
        self.integrate() / T::four_pi()
    }

    /// Largest sample and its flat index.
    pub fn max_with_index(&self) -> (T, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((T::neg_infinity(), 0), |acc, (i, &v)| {
                if v > acc.0 {
                    (v, i)
                } else {
                    acc
                }
            })
    }

    pub fn max(&self) -> T {
        self.max_with_index().0
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// Node-wise application of `map`.
    ///
    /// A non-finite result is reported as a range error naming this field's
    /// maximum sample and where it sits.
    pub fn map<F: Fn(T) -> T>(&self, map: F) -> Result<Self> {
        let values: Vec<T> = self.values.iter().map(|&v| map(v)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(self.range_error());
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values,
        })
    }

    /// `e^{2u}` node-wise.
    pub fn exp2(&self) -> Result<Self> {
        let two = T::lit(2.0);
        self.map(|v| (two * v).exp())
    }

    pub(crate) fn range_error(&self) -> Error {
        let (max_value, index) = self.max_with_index();
        let (theta, phi) = self.grid.angles(index);
        Error::Range {
            max_value: max_value.as_f64(),
            index,
            theta: theta.as_f64(),
            phi: phi.as_f64(),
        }
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid)
            || (self.grid.n_theta == other.grid.n_theta && self.grid.n_phi == other.grid.n_phi)
        {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Node-wise `f(self, other)`.
    pub fn zip_map<F: Fn(T, T) -> T>(&self, other: &Self, f: F) -> Result<Self> {
        self.check_same_grid(other)?;
        let values: Vec<T> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_values(Arc::clone(&self.grid), values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| a * v).collect(),
        }
    }

    pub fn shifted(&self, c: T) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| v + c).collect(),
        }
    }

    /// `sqrt(∫ f²)`.
    pub fn l2_norm(&self) -> T {
        let sq: Vec<T> = self.values.iter().map(|&v| v * v).collect();
        self.grid.quadrature(&sq).max(T::zero()).sqrt()
    }

    /// `∫ self · other`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        let prod: Vec<T> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(self.grid.quadrature(&prod))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(nt: usize, np: usize) -> Arc<SphericalGrid<f64>> {
        build_grid(nt, np).unwrap()
    }

    #[test]
    fn rejects_small_sizes() {
        assert_eq!(
            build_grid::<f64>(1, 8).unwrap_err(),
            Error::Sizing { n_theta: 1, n_phi: 8 }
        );
        assert!(build_grid::<f64>(4, 3).is_err());
        assert!(build_grid::<f64>(2, 4).is_ok());
    }

    #[test]
    fn total_weight_is_four_pi() {
        for (nt, np) in [(2, 4), (24, 48), (64, 128), (7, 9)] {
            let g = grid(nt, np);
            let one = ScalarField::constant(g, 1.0);
            let total = one.integrate();
            assert!((total - 4.0 * PI).abs() / (4.0 * PI) < 1e-12, "{nt}x{np}: {total}");
        }
    }

    #[test]
    fn unit_vectors_and_no_pole_nodes() {
        let g = grid(24, 48);
        for x in g.xyz() {
            let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-14);
        }
        assert!(g.theta().iter().all(|&t| t > 0.0 && t < PI));
    }

    #[test]
    fn low_order_moments() {
        let g = grid(24, 48);
        let x3 = ScalarField::coordinate(g.clone(), 2);
        let x3sq = x3.mul(&x3).unwrap();
        assert!((x3sq.integrate() - 4.0 * PI / 3.0).abs() < 1e-12);
        for i in 0..3 {
            let xi = ScalarField::coordinate(g.clone(), i);
            assert!(xi.integrate().abs() < 1e-13);
        }
        let cos_t = ScalarField::from_polar_fn(g, |t, _| t.cos()).unwrap();
        assert!(cos_t.integrate().abs() < 1e-13);
    }

    #[test]
    fn ln_sin_theta_converges_to_one_dimensional_oracle() {
        // ∫₀^π ln(sin θ) sin θ dθ = 2 ln 2 - 2 (evaluated independently)
        let exact = 4.0 * PI * (2.0f64.ln() - 1.0);
        let mut prev_err = f64::INFINITY;
        for nt in [16, 32, 64, 128] {
            let g = grid(nt, 4);
            let f = ScalarField::from_polar_fn(g, |t, _| t.sin().ln()).unwrap();
            let err = (f.integrate() - exact).abs();
            assert!(err < prev_err / 3.5, "n = {nt}: {err} vs {prev_err}");
            prev_err = err;
        }
        assert!(prev_err < 1e-3);
    }

    #[test]
    fn exp_overflow_is_a_range_error() {
        let g = grid(8, 16);
        let mut vals = vec![0.0; g.len()];
        vals[37] = 400.0;
        let f = ScalarField::from_values(g.clone(), vals).unwrap();
        match f.exp2() {
            Err(Error::Range { max_value, index, .. }) => {
                assert_eq!(max_value, 400.0);
                assert_eq!(index, 37);
            }
            other => panic!("expected range error, got {other:?}"),
        }
        let z = ScalarField::zeros(g);
        assert!(z.exp2().unwrap().values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = grid(4, 8);
        let mut vals = vec![0.0; g.len()];
        vals[3] = f64::NAN;
        assert!(matches!(
            ScalarField::from_values(g.clone(), vals.clone()),
            Err(Error::NonFinite { index: 3, .. })
        ));
        assert!(g.integrate_values(&vals).is_err());
        assert!(ScalarField::from_values(g, vec![0.0; 5]).is_err());
    }

    #[test]
    fn antipode_is_exact_reflection() {
        let g = grid(10, 12);
        for i in 0..g.len() {
            let a = g.antipode(i).unwrap();
            let (x, y) = (g.xyz()[i], g.xyz()[a]);
            for c in 0..3 {
                assert_eq!(x[c], -y[c]);
            }
        }
        assert!(grid(10, 9).antipode(0).is_none());
    }

    #[test]
    fn max_degree_bound() {
        assert_eq!(grid(64, 128).max_degree(), 62);
        assert_eq!(grid(24, 48).max_degree(), 22);
        assert_eq!(grid(2, 4).max_degree(), 0);
    }
}
