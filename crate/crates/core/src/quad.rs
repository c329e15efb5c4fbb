//! One-dimensional Gauss-Legendre rules and composite integration on panels.

use crate::scalar::Real;

/// Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussRule<T> {
    /// Builds the `n`-point rule. Nodes and weights are exactly mirror-symmetric.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::from_count(n);
        let half = T::lit(0.5);
        let tol = T::epsilon() * T::lit(4.0);
        for i in 0..n.div_ceil(2) {
            // i-th largest root
            let mut x = (T::PI() * (T::from_count(i) + T::lit(0.75)) / (nf + half)).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= tol {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            if n % 2 == 1 && i == n / 2 {
                x = T::zero();
                dp = legendre_with_derivative(n, x).1;
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = T::lit(0.5) * (b - a);
        let mid = T::lit(0.5) * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<T>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::from_count(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_count(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Composite rule over consecutive panels `[b_i, b_{i+1}]`.
pub fn integrate_panels<T: Real, F: FnMut(T) -> T>(
    rule: &GaussRule<T>,
    breakpoints: &[T],
    mut f: F,
) -> T {
    breakpoints
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Breakpoints on `[a, b]` refined geometrically toward both ends.
///
/// Panel widths shrink by `ratio` per level until they reach `min_width`;
/// used for integrands with endpoint layers of width `~min_width`.
pub fn graded_breakpoints<T: Real>(a: T, b: T, min_width: T, ratio: T) -> Vec<T> {
    assert!(ratio > T::zero() && ratio < T::lit(0.5), "grading ratio must lie in (0, 1/2)");
    let len = b - a;
    let mut widths = Vec::new();
    let mut w = len * T::lit(0.25);
    while w > min_width {
        widths.push(w);
        w *= ratio;
    }
    widths.push(w);
    // partial sums stay below len / 2 because ratio < 1/2
    let mut out = vec![a];
    let mut pos = a;
    for &w in widths.iter().rev() {
        pos += w;
        out.push(pos);
    }
    let mut right = vec![b];
    let mut pos = b;
    for &w in widths.iter().rev() {
        pos -= w;
        right.push(pos);
    }
    right.reverse();
    out.extend(right);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_mirror() {
        for n in [1, 2, 3, 8, 33, 64] {
            let r = GaussRule::<f64>::new(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: {s}");
            for i in 0..n {
                assert_eq!(r.nodes[i], -r.nodes[n - 1 - i]);
                assert_eq!(r.weights[i], r.weights[n - 1 - i]);
            }
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_2n_minus_1() {
        let r = GaussRule::<f64>::new(6);
        for k in 0..12 {
            let q = r.integrate(-1.0, 1.0, |x| x.powi(k));
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "x^{k}: {q} vs {exact}");
        }
    }

    #[test]
    fn graded_panels_are_increasing_and_cover_interval() {
        let b = graded_breakpoints(0.0f64, 1.0, 1e-4, 0.3);
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 1.0);
        assert!(b.windows(2).all(|w| w[0] < w[1]), "{b:?}");
        assert!(b[1] - b[0] < 1e-3);
    }
}
