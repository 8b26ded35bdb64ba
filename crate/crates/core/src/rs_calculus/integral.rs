use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::{Interp, Trajectory};
use crate::quadrature::GaussLegendre;
use crate::rs_calculus::{key_lt, merge_points, Atom, BVFunction, Density, Endpoint, TimeFunction};
use crate::scalar::{coincide_tol, near, Real};

/// Quadrature settings for integrands that are not known to be polynomial.
///
/// Polynomial density times polynomial integrand is always integrated with
/// enough Gauss nodes to be exact; `order` is then only a lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Quad {
    pub order: usize,
    pub panels: usize,
}

impl Default for Quad {
    fn default() -> Self {
        Self { order: 5, panels: 1 }
    }
}

impl Quad {
    pub fn new(order: usize, panels: usize) -> Self {
        Self {
            order: order.max(1),
            panels: panels.max(1),
        }
    }

    /// Rule and panel count for a density piece of degree `dr` against an
    /// integrand of degree `df`.
    pub(crate) fn rule_for<T: Real>(&self, dr: Option<usize>, df: Option<usize>) -> (GaussLegendre<T>, usize) {
        match (dr, df) {
            (Some(a), Some(b)) => (GaussLegendre::new(self.order.max((a + b) / 2 + 1)), 1),
            (None, _) => (GaussLegendre::new(self.order.max(10)), self.panels.max(16)),
            _ => (GaussLegendre::new(self.order), self.panels),
        }
    }
}

/// Integrand description for [`stieltjes`].
pub(crate) struct Integrand<'a, T> {
    pub shape: (usize, usize),
    /// Abscissae where the integrand is not smooth.
    pub breaks: Vec<T>,
    /// Polynomial degree between breaks, if known.
    pub degree: Option<usize>,
    /// Value at quadrature nodes (never at a break).
    pub density: &'a dyn Fn(T) -> Result<Mat<T>>,
    /// Value paired with an atom.
    pub atom: &'a dyn Fn(&Atom<T>) -> Result<Mat<T>>,
}

/// `∫_{lo}^{hi} dα(θ) f(θ)` with the endpoint-key atom convention.
pub(crate) fn stieltjes<T: Real>(
    alpha: &BVFunction<T>,
    lo: Endpoint<T>,
    hi: Endpoint<T>,
    f: &Integrand<'_, T>,
    quad: Quad,
) -> Result<Mat<T>> {
    let (r, c) = alpha.base().stieltjes_shape(f.shape)?;
    let mut out = Mat::zeros(r, c);
    if !key_lt(lo.key(), hi.key()) {
        return Ok(out);
    }
    for a in alpha.atoms_between(lo, hi) {
        out += &a.jump.stieltjes_mul(&(f.atom)(a)?)?;
    }
    if !alpha.has_density() {
        return Ok(out);
    }
    let (start, end) = alpha.domain();
    let x0 = lo.at.max(start);
    let x1 = hi.at.min(end);
    if x1 <= x0 || near(x0, x1) {
        return Ok(out);
    }
    let inner = alpha
        .density_edges()
        .iter()
        .chain(f.breaks.iter())
        .copied()
        .filter(|&b| b > x0 && b < x1);
    let mut cuts = merge_points(std::iter::once(x0).chain(inner).chain(std::iter::once(x1)));
    cuts[0] = x0;
    *cuts.last_mut().expect("non-empty") = x1;
    for w in cuts.windows(2) {
        let (c0, c1) = (w[0], w[1]);
        if c1 - c0 <= coincide_tol(c1) {
            continue;
        }
        let k = alpha.piece_index((c0 + c1) * T::lit(0.5));
        let (e0, _, d) = alpha.piece(k);
        if let Density::Poly(p) = d {
            if p.is_zero() {
                continue;
            }
        }
        let (rule, panels) = quad.rule_for(d.degree(), f.degree);
        let step = (c1 - c0) / T::from_usize_lossy(panels);
        for j in 0..panels {
            let p0 = c0 + step * T::from_usize_lossy(j);
            let p1 = if j + 1 == panels { c1 } else { p0 + step };
            for (x, wt) in rule.mapped(p0, p1) {
                let dv = d.eval(x - e0);
                let fv = (f.density)(x)?;
                out.axpy(wt, &dv.stieltjes_mul(&fv)?);
            }
        }
    }
    Ok(out)
}

fn shared_jump<T: Real>(f: &(impl TimeFunction<T> + ?Sized), at: T) -> Result<()> {
    if f.jumps().iter().any(|&j| near(j, at)) {
        return Err(Error::SharedDiscontinuity { at: at.to_f64_lossy() });
    }
    Ok(())
}

/// `∫_a^b dα(θ) f(θ)`: atoms in `(a, b]` contribute `J f(c)`, the density
/// is integrated piecewise.
pub fn rs_integral<T: Real>(
    alpha: &BVFunction<T>,
    f: &(impl TimeFunction<T> + ?Sized),
    a: T,
    b: T,
    quad: Quad,
) -> Result<Mat<T>> {
    rs_integral_between(alpha, f, Endpoint::exact(a), Endpoint::exact(b), quad)
}

/// [`rs_integral`] with one-sided endpoints.
pub fn rs_integral_between<T: Real>(
    alpha: &BVFunction<T>,
    f: &(impl TimeFunction<T> + ?Sized),
    lo: Endpoint<T>,
    hi: Endpoint<T>,
    quad: Quad,
) -> Result<Mat<T>> {
    let (s, e) = alpha.domain();
    for t in [lo.at, hi.at] {
        if t < s - coincide_tol(s) || t > e + coincide_tol(e) {
            return Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                start: s.to_f64_lossy(),
                end: e.to_f64_lossy(),
            });
        }
    }
    let density = |x: T| f.eval(x);
    let atom = |a: &Atom<T>| {
        shared_jump(f, a.at)?;
        f.eval(a.at)
    };
    let integrand = Integrand {
        shape: f.shape(),
        breaks: f.breakpoints(),
        degree: f.piece_degree(),
        density: &density,
        atom: &atom,
    };
    stieltjes(alpha, lo, hi, &integrand, quad)
}

/// Riemann–Stieltjes convolution `(dα ∗ f)(t) = ∫_0^t dα(u) f(t - u)`
/// for `α` on `[0, r]`; atoms beyond `t` do not contribute.
pub fn rs_convolution<T: Real>(
    alpha: &BVFunction<T>,
    f: &(impl TimeFunction<T> + ?Sized),
    t: T,
    quad: Quad,
) -> Result<Mat<T>> {
    let (f0, f1) = f.domain();
    if t.is_nan() || t < f0 - coincide_tol(f0) || t > f1 + coincide_tol(f1) {
        return Err(Error::OutOfDomain {
            t: t.to_f64_lossy(),
            start: f0.to_f64_lossy(),
            end: f1.to_f64_lossy(),
        });
    }
    let (start, end) = alpha.domain();
    let shape = alpha.base().stieltjes_shape(f.shape())?;
    if t < start {
        return Ok(Mat::zeros(shape.0, shape.1));
    }
    let arg = |u: T| (t - u).clamp(f0, f1);
    let density = |u: T| f.eval(arg(u));
    let atom = |a: &Atom<T>| {
        shared_jump(f, t - a.at)?;
        f.eval(arg(a.at))
    };
    let integrand = Integrand {
        shape: f.shape(),
        breaks: f.breakpoints().into_iter().map(|b| t - b).collect(),
        degree: f.piece_degree(),
        density: &density,
        atom: &atom,
    };
    stieltjes(
        alpha,
        Endpoint::exact(start),
        Endpoint::exact(t.min(end)),
        &integrand,
        quad,
    )
}

/// Volterra operator `(𝒱h)(t) = ∫_0^t h(s) ds` sampled on `grid`
/// (which must start at the left end of `h`'s domain).
pub fn volterra<T: Real>(
    h: &(impl TimeFunction<T> + ?Sized),
    grid: &[T],
    quad: Quad,
) -> Result<Trajectory<T>> {
    let (rows, cols) = h.shape();
    let breaks = h.breakpoints();
    let (rule, panels) = quad.rule_for::<T>(Some(0), h.piece_degree());
    let mut acc = Mat::zeros(rows, cols);
    let mut values = Vec::with_capacity(grid.len());
    values.push(acc.clone());
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let lo = breaks.partition_point(|&x| x <= a);
        let hi = breaks.partition_point(|&x| x < b);
        let mut cuts = vec![a];
        cuts.extend(breaks[lo..hi].iter().copied().filter(|&x| !near(x, a) && !near(x, b)));
        cuts.push(b);
        for c in cuts.windows(2) {
            let step = (c[1] - c[0]) / T::from_usize_lossy(panels);
            for j in 0..panels {
                let p0 = c[0] + step * T::from_usize_lossy(j);
                let p1 = if j + 1 == panels { c[1] } else { p0 + step };
                for (x, wt) in rule.mapped(p0, p1) {
                    acc.axpy(wt, &h.eval(x)?);
                }
            }
        }
        values.push(acc.clone());
    }
    Trajectory::new(grid.to_vec(), values, Vec::new(), Interp::Linear)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{MatPoly, Poly};
    use crate::rs_calculus::PiecewiseFunction;
    use approx::assert_relative_eq;

    fn sp(c: &[f64]) -> MatPoly<f64> {
        MatPoly::from_scalar(&Poly::new(c.to_vec()))
    }

    fn pw(a: f64, b: f64, c: &[f64]) -> PiecewiseFunction<f64> {
        PiecewiseFunction::from_poly(a, b, sp(c)).unwrap()
    }

    #[test]
    fn reduces_to_riemann_integral() {
        let alpha = BVFunction::from_density(0.0, 1.0, sp(&[1.0])).unwrap();
        let v = rs_integral(&alpha, &pw(0.0, 1.0, &[0.0, 1.0]), 0.0, 1.0, Quad::default()).unwrap();
        assert_relative_eq!(v.get(0, 0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn atom_evaluation() {
        let alpha = BVFunction::atoms_only(0.0, 1.0, vec![(0.5, Mat::scalar(1.0))]).unwrap();
        let v = rs_integral(&alpha, &pw(0.0, 1.0, &[0.0, 0.0, 1.0]), 0.0, 1.0, Quad::default()).unwrap();
        assert_relative_eq!(v.get(0, 0), 0.25, epsilon = 1e-15);
        // atom exactly at the lower limit is excluded, at the upper included
        let lo = rs_integral(&alpha, &pw(0.0, 1.0, &[1.0]), 0.5, 1.0, Quad::default()).unwrap();
        let up = rs_integral(&alpha, &pw(0.0, 1.0, &[1.0]), 0.0, 0.5, Quad::default()).unwrap();
        assert_eq!((lo.get(0, 0), up.get(0, 0)), (0.0, 1.0));
    }

    #[test]
    fn total_increment() {
        let alpha = BVFunction::from_density(0.0, 1.0, sp(&[0.0, 2.0])).unwrap();
        let v = rs_integral(&alpha, &pw(0.0, 1.0, &[1.0]), 0.0, 1.0, Quad::default()).unwrap();
        assert_relative_eq!(v.get(0, 0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn shared_discontinuity_is_rejected() {
        let alpha = BVFunction::atoms_only(0.0, 1.0, vec![(0.5, Mat::scalar(1.0))]).unwrap();
        let f = PiecewiseFunction::new(vec![((0.0, 0.5), sp(&[1.0])), ((0.5, 1.0), sp(&[0.0]))]).unwrap();
        assert!(matches!(
            rs_integral(&alpha, &f, 0.0, 1.0, Quad::default()),
            Err(Error::SharedDiscontinuity { .. })
        ));
    }

    #[test]
    fn convolution_examples() {
        let id = BVFunction::atoms_only(0.0, 1.0, vec![(0.0, Mat::scalar(1.0))]).unwrap();
        let f = pw(0.0, 3.0, &[0.0, 0.0, 1.0]);
        assert_relative_eq!(rs_convolution(&id, &f, 2.0, Quad::default()).unwrap().get(0, 0), 4.0, epsilon = 1e-14);

        let lin = BVFunction::from_density(0.0, 1.0, sp(&[1.0])).unwrap();
        let one = pw(0.0, 3.0, &[1.0]);
        assert_relative_eq!(rs_convolution(&lin, &one, 0.6, Quad::default()).unwrap().get(0, 0), 0.6, epsilon = 1e-14);

        let a = BVFunction::atoms_only(0.0, 1.0, vec![(0.5, Mat::scalar(-2.0))]).unwrap();
        assert_eq!(rs_convolution(&a, &f, 0.4, Quad::default()).unwrap().get(0, 0), 0.0);
        assert_relative_eq!(rs_convolution(&a, &f, 1.5, Quad::default()).unwrap().get(0, 0), -2.0, epsilon = 1e-14);
        assert!(rs_convolution(&a, &f, 3.5, Quad::default()).is_err());
    }

    #[test]
    fn volterra_examples() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.2).collect();
        let v = volterra(&pw(0.0, 2.0, &[1.0]), &grid, Quad::default()).unwrap();
        let w = volterra(&pw(0.0, 2.0, &[0.0, 2.0]), &grid, Quad::default()).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            assert_relative_eq!(v.value(k)[0], t, epsilon = 1e-14);
            assert_relative_eq!(w.value(k)[0], t * t, epsilon = 1e-14);
        }
    }
}
