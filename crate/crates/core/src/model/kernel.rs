use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::poly::MatPoly;
use crate::rs_calculus::{merge_points, rs_integral, BVFunction, Quad, TimeFunction};
use crate::scalar::{near, Real};

/// The NBV kernel `η` on `[-r, 0]` representing `Lψ = ∫_{-r}^0 dη(θ) ψ(θ)`.
///
/// `η` is constant left of `-r`; a discrete delay at `θ = -r` is an atom at
/// the left end of the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    r: T,
    eta: BVFunction<T>,
}

impl<T: Real> Kernel<T> {
    pub fn new(eta: BVFunction<T>) -> Result<Self> {
        let (a, b) = eta.domain();
        if !near(b, T::zero()) || a >= b {
            return Err(Error::InvalidInput("kernel must live on [-r, 0] with r > 0".into()));
        }
        let (n, m) = eta.shape();
        if n != m || n == 0 {
            return Err(Error::ShapeMismatch("kernel values must be square matrices".into()));
        }
        Ok(Self { r: -a, eta })
    }

    /// Kernel with zero base, the given atoms (at `θ`) and density pieces
    /// (global-variable polynomials in `θ`); gaps between pieces get a zero
    /// density.
    pub fn from_parts(
        n: usize,
        r: T,
        atoms: Vec<(T, Mat<T>)>,
        density: Vec<((T, T), MatPoly<T>)>,
    ) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidInput("delay horizon r must be positive".into()));
        }
        let density = if density.is_empty() {
            density
        } else {
            pad_density(n, r, density)
        };
        Self::new(BVFunction::new(-r, T::zero(), Mat::zeros(n, n), atoms, density)?)
    }

    /// Single discrete delay: `Lψ = A ψ(θ)`.
    pub fn single_delay(r: T, theta: T, a: Mat<T>) -> Result<Self> {
        Self::from_parts(a.rows(), r, vec![(theta, a)], Vec::new())
    }

    /// `L = 0`.
    pub fn zero(n: usize, r: T) -> Result<Self> {
        Self::from_parts(n, r, Vec::new(), Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.eta.shape().0
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn eta(&self) -> &BVFunction<T> {
        &self.eta
    }

    /// `η̌(u) = -η(-u)` on `[0, r]`.
    pub fn reflect(&self) -> BVFunction<T> {
        self.eta.reflect()
    }

    /// `Var(η)` over `[-r, 0]`.
    pub fn variation(&self) -> T {
        self.eta.total_variation()
    }

    /// `Lψ` for `ψ` on `[-r, 0]`.
    pub fn apply_l(&self, psi: &(impl TimeFunction<T> + ?Sized), quad: Quad) -> Result<Mat<T>> {
        rs_integral(&self.eta, psi, -self.r, T::zero(), quad)
    }

    /// Positive lags `τ` at which the kernel creates derivative
    /// discontinuities: atom delays and density-edge delays.
    pub fn delays(&self) -> Vec<T> {
        let mut d: Vec<T> = self.eta.atoms().iter().map(|a| -a.at).collect();
        if self.eta.has_density() {
            d.extend(self.eta.density_edges().iter().map(|&e| -e));
        }
        d.retain(|&x| x > T::zero() && !near(x, T::zero()));
        merge_points(d)
    }
}

fn pad_density<T: Real>(n: usize, r: T, mut pieces: Vec<((T, T), MatPoly<T>)>) -> Vec<((T, T), MatPoly<T>)> {
    pieces.sort_by(|a, b| a.0 .0.partial_cmp(&b.0 .0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = Vec::with_capacity(pieces.len() + 2);
    let mut cursor = -r;
    for ((lo, hi), p) in pieces {
        if lo > cursor && !near(lo, cursor) {
            out.push(((cursor, lo), MatPoly::zero(n, n)));
        }
        cursor = hi;
        out.push(((lo, hi), p));
    }
    if cursor < T::zero() && !near(cursor, T::zero()) {
        out.push(((cursor, T::zero()), MatPoly::zero(n, n)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::rs_calculus::PiecewiseFunction;
    use approx::assert_relative_eq;

    fn sp(c: &[f64]) -> MatPoly<f64> {
        MatPoly::from_scalar(&Poly::new(c.to_vec()))
    }

    #[test]
    fn single_discrete_delay() {
        let k = Kernel::single_delay(1.0, -0.3, Mat::scalar(2.0)).unwrap();
        let psi = PiecewiseFunction::from_poly(-1.0, 0.0, sp(&[1.0, 1.0])).unwrap();
        assert_relative_eq!(k.apply_l(&psi, Quad::default()).unwrap().get(0, 0), 1.4, epsilon = 1e-14);
        assert_eq!(k.delays(), vec![0.3]);
    }

    #[test]
    fn delay_at_the_horizon_is_seen() {
        let k = Kernel::single_delay(1.0, -1.0, Mat::scalar(-0.5)).unwrap();
        let psi = PiecewiseFunction::from_poly(-1.0, 0.0, sp(&[0.0, 1.0])).unwrap();
        assert_relative_eq!(k.apply_l(&psi, Quad::default()).unwrap().get(0, 0), 0.5, epsilon = 1e-15);
        assert_eq!(k.variation(), 0.5);
    }

    #[test]
    fn distributed_delay() {
        let k = Kernel::from_parts(1, 1.0, vec![], vec![((-1.0, 0.0), sp(&[1.0]))]).unwrap();
        let psi = PiecewiseFunction::from_poly(-1.0, 0.0, sp(&[0.0, 0.0, 3.0])).unwrap();
        assert_relative_eq!(k.apply_l(&psi, Quad::default()).unwrap().get(0, 0), 1.0, epsilon = 1e-14);
        assert_relative_eq!(k.variation(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mixed_kernel_on_constant() {
        let k = Kernel::from_parts(
            1,
            1.0,
            vec![(-1.0, Mat::scalar(0.7))],
            vec![((-1.0, 0.0), sp(&[-0.2]))],
        )
        .unwrap();
        let one = PiecewiseFunction::constant(-1.0, 0.0, Mat::scalar(1.0)).unwrap();
        assert_relative_eq!(k.apply_l(&one, Quad::default()).unwrap().get(0, 0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(k.variation(), 0.9, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_square() {
        let eta = BVFunction::constant(-1.0, 0.0, Mat::zeros(2, 1)).unwrap();
        assert!(Kernel::new(eta).is_err());
    }
}
