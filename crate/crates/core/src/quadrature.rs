//! Gauss–Legendre quadrature.

use crate::scalar::Real;

/// Largest node count handed out; requests above this are clamped and the
/// caller is expected to split the interval into panels instead.
pub const MAX_NODES: usize = 64;

/// Gauss–Legendre rule on the reference interval `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule (exact for polynomials of degree `2n - 1`).
    pub fn new(n: usize) -> Self {
        let n = n.clamp(1, MAX_NODES);
        let (x, w) = legendre_f64(n);
        Self {
            nodes: x.into_iter().map(T::lit).collect(),
            weights: w.into_iter().map(T::lit).collect(),
        }
    }

    /// Smallest rule that integrates degree `deg` exactly.
    pub fn for_degree(deg: usize) -> Self {
        Self::new(deg / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: T, b: T, f: impl Fn(T) -> T) -> T {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite(&self, a: T, b: T, panels: usize, f: impl Fn(T) -> T) -> T {
        let panels = panels.max(1);
        let step = (b - a) / T::from_usize_lossy(panels);
        (0..panels)
            .map(|k| {
                let lo = a + step * T::from_usize_lossy(k);
                let hi = if k + 1 == panels { b } else { lo + step };
                self.integrate(lo, hi, &f)
            })
            .sum()
    }
}

/// Nodes/weights by Newton iteration on the three-term recurrence.
fn legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_eval(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_eval(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=20 {
            let g = GaussLegendre::<f64>::new(n);
            let s: f64 = g.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_on_maximal_degree() {
        for n in 1..=12 {
            let g = GaussLegendre::<f64>::new(n);
            let d = 2 * n - 1;
            let v = g.integrate(0.0, 1.0, |x| x.powi(d as i32));
            assert_relative_eq!(v, 1.0 / (d as f64 + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn five_point_nodes() {
        let g = GaussLegendre::<f64>::new(5);
        let xs: Vec<f64> = g.mapped(-1.0, 1.0).map(|(x, _)| x).collect();
        assert_relative_eq!(xs[4], 0.906_179_845_938_664, epsilon = 1e-14);
        assert_relative_eq!(xs[3], 0.538_469_310_105_683, epsilon = 1e-14);
        assert_eq!(xs[2], 0.0);
    }

    #[test]
    fn composite_smooth() {
        let g = GaussLegendre::<f64>::new(5);
        let v = g.integrate_composite(0.0, std::f64::consts::PI, 8, f64::sin);
        assert_relative_eq!(v, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn single_precision_rule() {
        let g = GaussLegendre::<f32>::new(4);
        assert!((g.integrate(0.0, 2.0, |x| x * x * x) - 4.0).abs() < 1e-5);
    }
}
