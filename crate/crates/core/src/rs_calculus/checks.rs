//! Numerical checkers for Riemann–Stieltjes identities and inequalities.
//!
//! Each checker returns a [`Check`] triple and leaves the verdict to the caller.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rs_calculus::integral::{stieltjes, Integrand};
use crate::rs_calculus::{merge_points, Atom, BVFunction, Endpoint, PiecewiseFunction, Quad, TimeFunction};
use crate::scalar::Real;

/// Both sides of a checked relation plus the numerical tolerance the
/// computation itself warrants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Check<T> {
    pub lhs: T,
    pub rhs: T,
    pub tol: T,
}

impl<T: Real> Check<T> {
    pub(crate) fn new(lhs: T, rhs: T, exact: bool) -> Self {
        let scale = T::one() + lhs.abs() + rhs.abs();
        let tol = if exact {
            T::epsilon() * T::lit(1024.0) * scale
        } else {
            T::epsilon().sqrt() * scale
        };
        Self { lhs, rhs, tol }
    }

    /// `lhs <= rhs + tol`.
    pub fn leq(&self) -> bool {
        self.lhs <= self.rhs + self.tol
    }

    /// `|lhs - rhs| <= tol`.
    pub fn eq(&self) -> bool {
        (self.lhs - self.rhs).abs() <= self.tol
    }

    /// `lhs <= rhs + tol` for a caller-supplied tolerance.
    pub fn leq_within(&self, tol: T) -> bool {
        self.lhs <= self.rhs + tol
    }

    pub fn eq_within(&self, tol: T) -> bool {
        (self.lhs - self.rhs).abs() <= tol
    }
}

/// Continuous scalar function on a rectangle.
pub trait Bivariate<T: Real>: Sync {
    fn eval(&self, x: T, y: T) -> T;
    fn degree_x(&self) -> Option<usize>;
    fn degree_y(&self) -> Option<usize>;
}

/// `f(x, y) = Σ c[i][j] x^i y^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePoly<T> {
    coeffs: Vec<Vec<T>>,
}

impl<T: Real> BivariatePoly<T> {
    pub fn new(coeffs: Vec<Vec<T>>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInput("bivariate polynomial needs coefficients".into()));
        }
        Ok(Self { coeffs })
    }

    /// `u(x) v(y)`.
    pub fn separable(u: &[T], v: &[T]) -> Result<Self> {
        Self::new(u.iter().map(|&a| v.iter().map(|&b| a * b).collect()).collect())
    }
}

impl<T: Real> Bivariate<T> for BivariatePoly<T> {
    fn eval(&self, x: T, y: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, row| {
            acc * x + row.iter().rev().fold(T::zero(), |a, &c| a * y + c)
        })
    }

    fn degree_x(&self) -> Option<usize> {
        Some(self.coeffs.len() - 1)
    }

    fn degree_y(&self) -> Option<usize> {
        self.coeffs.iter().map(|r| r.len() - 1).max()
    }
}

fn require_scalar<T: Real>(a: &BVFunction<T>, what: &str) -> Result<()> {
    if a.shape() != (1, 1) {
        return Err(Error::ShapeMismatch(format!("{what} must be scalar-valued")));
    }
    Ok(())
}

/// Whole-domain integral of a scalar closure against a BV function.
fn integrate_scalar<T: Real>(
    alpha: &BVFunction<T>,
    breaks: Vec<T>,
    degree: Option<usize>,
    quad: Quad,
    f: &dyn Fn(T) -> Result<T>,
) -> Result<T> {
    let (a, b) = alpha.domain();
    let density = |x: T| f(x).map(Mat::scalar);
    let atom = |at: &Atom<T>| f(at.at).map(Mat::scalar);
    let integrand = Integrand {
        shape: (1, 1),
        breaks,
        degree,
        density: &density,
        atom: &atom,
    };
    let v = stieltjes(alpha, Endpoint::exact(a), Endpoint::exact(b), &integrand, quad)?;
    Ok(v.get(0, 0))
}

/// Sharp estimate `|∫ dα f| <= ∫ |f| dV_α` over the domain of `α`.
pub fn check_sharp_estimate<T: Real>(
    alpha: &BVFunction<T>,
    f: &PiecewiseFunction<T>,
    quad: Quad,
) -> Result<Check<T>> {
    if !f.is_continuous() {
        let at = f.jumps()[0];
        return Err(Error::NotContinuous { at: at.to_f64_lossy() });
    }
    let (a, b) = alpha.domain();
    let lhs = crate::rs_calculus::rs_integral(alpha, f, a, b, quad)?.norm();
    let v = alpha.variation_function();
    let scalar_f = f.shape() == (1, 1);
    let mut breaks = TimeFunction::breakpoints(f);
    if scalar_f {
        for (lo, hi, p) in f.pieces() {
            breaks.extend(p.entry(0, 0).sign_changes_in(T::zero(), hi - lo).into_iter().map(|s| lo + s));
        }
    }
    let degree = if scalar_f { Some(f.max_degree()) } else { None };
    let norm_f = |x: T| f.eval(x).map(|m| m.norm());
    let rhs = integrate_scalar(&v, merge_points(breaks), degree, quad, &norm_f)?;
    let exact = scalar_f && alpha.variation_is_exact();
    Ok(Check::new(lhs, rhs, exact))
}

/// Iterated integrals in both orders:
/// `lhs = ∫ dβ(y) ∫ dα(x) f(x, y)`, `rhs = ∫ dα(x) ∫ dβ(y) f(x, y)`.
pub fn check_fubini<T: Real>(
    f: &(impl Bivariate<T> + ?Sized),
    alpha: &BVFunction<T>,
    beta: &BVFunction<T>,
    quad: Quad,
) -> Result<Check<T>> {
    require_scalar(alpha, "alpha")?;
    require_scalar(beta, "beta")?;
    let (dx, dy) = (f.degree_x(), f.degree_y());
    let inner_x = |y: T| integrate_scalar(alpha, Vec::new(), dx, quad, &|x| Ok(f.eval(x, y)));
    let lhs = integrate_scalar(beta, Vec::new(), dy, quad, &inner_x)?;
    let inner_y = |x: T| integrate_scalar(beta, Vec::new(), dy, quad, &|y| Ok(f.eval(x, y)));
    let rhs = integrate_scalar(alpha, Vec::new(), dx, quad, &inner_y)?;
    let exact = dx.is_some() && dy.is_some();
    Ok(Check::new(lhs, rhs, exact))
}

/// Minkowski-type inequality for monotone `α`, `β` and `p >= 1`:
/// `lhs = (∫ |∫ f dα|^p dβ)^{1/p}`, `rhs = ∫ (∫ |f|^p dβ)^{1/p} dα`.
pub fn check_minkowski<T: Real>(
    f: &(impl Bivariate<T> + ?Sized),
    alpha: &BVFunction<T>,
    beta: &BVFunction<T>,
    p: T,
    quad: Quad,
) -> Result<Check<T>> {
    if !alpha.is_monotone() || !beta.is_monotone() {
        return Err(Error::NonMonotone);
    }
    if !(p >= T::one()) || p.is_infinite() {
        return Err(Error::InvalidInput("exponent must lie in [1, inf)".into()));
    }
    let dx = f.degree_x();
    // |·|^p and (·)^{1/p} are not polynomial: composite rule on the outer layers
    let q = Quad::new(quad.order.max(10), quad.panels.max(16));
    let inner_x = |y: T| integrate_scalar(alpha, Vec::new(), dx, quad, &|x| Ok(f.eval(x, y)));
    let lhs = integrate_scalar(beta, Vec::new(), None, q, &|y| Ok(inner_x(y)?.abs().powf(p)))?
        .powf(T::one() / p);
    let inner_y =
        |x: T| integrate_scalar(beta, Vec::new(), None, q, &|y| Ok(f.eval(x, y).abs().powf(p)));
    let rhs = integrate_scalar(alpha, Vec::new(), None, q, &|x| Ok(inner_y(x)?.powf(T::one() / p)))?;
    Ok(Check::new(lhs, rhs, false))
}

/// Shifted iterated integrals for scalar `f` on `[-r, 0]`, `α` on `[-r, 0]`
/// and `g` on `[0, r]`:
/// `lhs = ∫_0^r (∫_{-r}^{-t} f(t+θ) dα(θ)) g(t) dt`,
/// `rhs = ∫_{-r}^0 (∫_0^{-θ} f(t+θ) g(t) dt) dα(θ)`.
pub fn check_shifted_fubini<T: Real>(
    f: &PiecewiseFunction<T>,
    alpha: &BVFunction<T>,
    g: &PiecewiseFunction<T>,
    quad: Quad,
) -> Result<Check<T>> {
    require_scalar(alpha, "alpha")?;
    if f.shape() != (1, 1) || g.shape() != (1, 1) {
        return Err(Error::ShapeMismatch("f and g must be scalar-valued".into()));
    }
    if !f.is_continuous() {
        return Err(Error::NotContinuous { at: f.jumps()[0].to_f64_lossy() });
    }
    let (ra, rb) = alpha.domain();
    let r = rb - ra;
    let (fa, fb) = f.domain();
    let (ga, gb) = g.domain();
    if !crate::scalar::near(rb, T::zero())
        || !crate::scalar::near(fa, ra)
        || !crate::scalar::near(fb, rb)
        || !crate::scalar::near(ga, T::zero())
        || !crate::scalar::near(gb, r)
    {
        return Err(Error::InvalidInput(
            "expected f, alpha on [-r, 0] and g on [0, r]".into(),
        ));
    }
    let df = f.max_degree();
    let dg = g.max_degree();
    let dr = alpha.density_degree();
    let f_edges = f.edges().to_vec();
    let g_edges = g.edges().to_vec();
    let exact = Quad::new(quad.order, 1);

    // Left side: outer integral in t of I(t) g(t).
    let inner_lhs = |t: T| -> Result<T> {
        let fv = |th: T| f.eval((t + th).clamp(fa, fb)).map(|m| m.get(0, 0));
        let density = |th: T| fv(th).map(Mat::scalar);
        let atom = |a: &Atom<T>| fv(a.at).map(Mat::scalar);
        let integrand = Integrand {
            shape: (1, 1),
            breaks: f_edges.iter().map(|&b| b - t).collect(),
            degree: Some(df),
            density: &density,
            atom: &atom,
        };
        Ok(stieltjes(alpha, Endpoint::exact(ra), Endpoint::exact(-t), &integrand, exact)?.get(0, 0))
    };
    let mut t_breaks: Vec<T> = g_edges.clone();
    for a in alpha.atoms() {
        t_breaks.push(-a.at);
        t_breaks.extend(f_edges.iter().map(|&b| b - a.at));
    }
    for &e in alpha.density_edges() {
        t_breaks.push(-e);
        t_breaks.extend(f_edges.iter().map(|&b| b - e));
    }
    t_breaks.retain(|&t| t > T::zero() && t < r);
    let t_cuts = merge_points(std::iter::once(T::zero()).chain(t_breaks).chain(std::iter::once(r)));
    let deg_t = df + dr.map_or(0, |d| d + 1) + dg;
    let rule = crate::quadrature::GaussLegendre::<T>::for_degree(deg_t.max(2 * quad.order - 1));
    let mut lhs = T::zero();
    for w in t_cuts.windows(2) {
        for (t, wt) in rule.mapped(w[0], w[1]) {
            lhs = lhs + wt * inner_lhs(t)? * g.eval(t)?.get(0, 0);
        }
    }

    // Right side: K(θ) = ∫_0^{-θ} f(t+θ) g(t) dt, integrated against dα.
    let k_rule = crate::quadrature::GaussLegendre::<T>::for_degree(df + dg);
    let kernel = |th: T| -> Result<T> {
        let upper = -th;
        if upper <= T::zero() {
            return Ok(T::zero());
        }
        let mut cuts: Vec<T> = g_edges.iter().copied().collect();
        cuts.extend(f_edges.iter().map(|&b| b - th));
        cuts.retain(|&t| t > T::zero() && t < upper);
        let cuts = merge_points(std::iter::once(T::zero()).chain(cuts).chain(std::iter::once(upper)));
        let mut acc = T::zero();
        for w in cuts.windows(2) {
            for (t, wt) in k_rule.mapped(w[0], w[1]) {
                let fv = f.eval((t + th).clamp(fa, fb))?.get(0, 0);
                acc = acc + wt * fv * g.eval(t)?.get(0, 0);
            }
        }
        Ok(acc)
    };
    let mut th_breaks = Vec::new();
    for &bg in &g_edges {
        th_breaks.push(-bg);
        th_breaks.extend(f_edges.iter().map(|&bf| bf - bg));
    }
    let deg_th = dr.map(|_| df + dg + 1);
    let rhs = integrate_scalar(alpha, th_breaks, deg_th, quad, &kernel)?;
    Ok(Check::new(lhs, rhs, dr.is_some()))
}
