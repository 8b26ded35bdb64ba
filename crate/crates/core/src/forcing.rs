//! Forcing terms generated by an initial history:
//!
//! * `g(t; φ) = ∫_{-r}^{-t} dη(θ) φ̄(t + θ)` for continuous `φ`,
//! * `G(t; φ) = ∫_0^t ∫_{-r}^{-s} dη(θ) φ̄(s + θ) ds` for any `φ ∈ M^p`,
//! * `f(t; φ)`, the a.e.-defined version of `g`; `f' = G` a.e.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::{History, Kernel};
use crate::poly::MatPoly;
use crate::rs_calculus::integral::{stieltjes, Integrand};
use crate::rs_calculus::{merge_points, Atom, Check, Endpoint, PiecewiseFunction, Quad, Side};
use crate::scalar::{coincide_tol, near, Real};

/// Right-hand side `f(t)` of a forced equation `x' = Lx_t + f`.
pub trait Forcing<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// One-sided limit at `t`; equal to the value away from
    /// [`breakpoints`](Forcing::breakpoints).
    fn limit(&self, t: T, side: Side) -> Result<Mat<T>>;

    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

/// `f ≡ 0`.
#[derive(Clone, Copy, Debug)]
pub struct ZeroForcing {
    pub n: usize,
}

impl<T: Real> Forcing<T> for ZeroForcing {
    fn dim(&self) -> usize {
        self.n
    }

    fn limit(&self, _t: T, _side: Side) -> Result<Mat<T>> {
        Ok(Mat::zeros(self.n, 1))
    }
}

/// Forcing from a closure `t ↦ f(t)` that is smooth between `breaks`.
pub struct FnForcing<T, F> {
    n: usize,
    f: F,
    breaks: Vec<T>,
}

impl<T: Real, F: Fn(T) -> Mat<T> + Sync> FnForcing<T, F> {
    pub fn new(n: usize, breaks: Vec<T>, f: F) -> Self {
        Self {
            n,
            f,
            breaks: merge_points(breaks),
        }
    }
}

impl<T: Real, F: Fn(T) -> Mat<T> + Sync> Forcing<T> for FnForcing<T, F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn limit(&self, t: T, side: Side) -> Result<Mat<T>> {
        if self.breaks.iter().any(|&b| near(b, t)) {
            let d = T::epsilon().sqrt() * (T::one() + t.abs());
            let s = match side {
                Side::Left => t - d,
                Side::Right => t + d,
            };
            return Ok((self.f)(s));
        }
        Ok((self.f)(t))
    }

    fn breakpoints(&self) -> Vec<T> {
        self.breaks.clone()
    }
}

impl<T: Real> Forcing<T> for PiecewiseFunction<T> {
    fn dim(&self) -> usize {
        self.shape().0
    }

    fn limit(&self, t: T, side: Side) -> Result<Mat<T>> {
        let (a, b) = self.domain();
        if t > b && !near(t, b) {
            return Ok(Mat::zeros(self.shape().0, 1));
        }
        PiecewiseFunction::limit(self, t.clamp(a, b), side)
    }

    fn breakpoints(&self) -> Vec<T> {
        PiecewiseFunction::breakpoints(self)
    }
}

/// Which history-generated term to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Term {
    G,
    F(Side),
    BigG,
}

/// The forcing terms of a fixed kernel and history, with `Ψ(s) = ∫_s^0 φ`
/// and `∫ dη Ψ` precomputed.
#[derive(Clone, Debug)]
pub struct MildForcing<T> {
    kernel: Kernel<T>,
    history: History<T>,
    psi: PiecewiseFunction<T>,
    psi_total: Mat<T>,
    breaks: Vec<T>,
    quad: Quad,
}

impl<T: Real> MildForcing<T> {
    pub fn new(kernel: &Kernel<T>, history: &History<T>, quad: Quad) -> Result<Self> {
        if kernel.dim() != history.dim() {
            return Err(Error::ShapeMismatch(format!(
                "kernel is {0}x{0} but history has length {1}",
                kernel.dim(),
                history.dim()
            )));
        }
        if !near(kernel.r(), history.r()) {
            return Err(Error::InvalidInput("kernel and history delay horizons differ".into()));
        }
        let psi = history.pieces().antiderivative_from(T::zero())?.scale(-T::one());
        let mut me = Self {
            kernel: kernel.clone(),
            history: history.clone(),
            psi,
            psi_total: Mat::zeros(kernel.dim(), 1),
            breaks: Vec::new(),
            quad,
        };
        me.breaks = me.compute_breaks();
        me.psi_total = me.shifted(T::zero(), Term::BigG, Endpoint::exact(T::zero()))?;
        Ok(me)
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn history(&self) -> &History<T> {
        &self.history
    }

    pub fn r(&self) -> T {
        self.kernel.r()
    }

    /// Points in `(0, r]` where `g`, `f` or `G'` may fail to be smooth.
    pub fn breakpoints(&self) -> &[T] {
        &self.breaks
    }

    fn compute_breaks(&self) -> Vec<T> {
        let eta = self.kernel.eta();
        let mut shifts: Vec<T> = eta.atoms().iter().map(|a| a.at).collect();
        if eta.has_density() {
            shifts.extend(eta.density_edges().iter().copied());
        }
        let r = self.r();
        let mut edges = self.history.edges();
        edges.push(T::zero());
        let mut out = Vec::new();
        for &c in &shifts {
            for &b in &edges {
                let t = b - c;
                if t > T::zero() && !near(t, T::zero()) && (t < r || near(t, r)) {
                    out.push(t.min(r));
                }
            }
        }
        merge_points(out)
    }

    fn is_break(&self, t: T) -> bool {
        self.breaks.iter().any(|&b| near(b, t))
    }

    /// Polynomial degree of each term between breakpoints.
    fn degree(&self, term: Term) -> usize {
        let dphi = self.history.pieces().max_degree() + usize::from(term == Term::BigG);
        match self.kernel.eta().density_degree() {
            Some(dr) if self.kernel.eta().has_density() => dphi.max(dr + dphi + 1),
            _ => dphi,
        }
    }

    /// `∫_{-r}^{hi} dη(θ) v(t + θ)` where `v` is `φ̄`, a one-sided limit of
    /// `φ`, or `Ψ` according to `term`.
    fn shifted(&self, t: T, term: Term, hi: Endpoint<T>) -> Result<Mat<T>> {
        let r = self.r();
        let n = self.kernel.dim();
        let pieces = self.history.pieces();
        let arg = |theta: T| (t + theta).clamp(-r, T::zero());
        let density = |theta: T| match term {
            Term::BigG => self.psi.limit(arg(theta), Side::Right),
            _ => pieces.limit(arg(theta), Side::Right),
        };
        let atom = |a: &Atom<T>| {
            let s = arg(a.at);
            match term {
                Term::G => self.history.static_prolongation(s),
                Term::F(side) => {
                    if near(s, T::zero()) {
                        pieces.limit(T::zero(), Side::Left)
                    } else {
                        pieces.limit(s, side)
                    }
                }
                Term::BigG => self.psi.limit(s, Side::Right),
            }
        };
        let mut breaks: Vec<T> = match term {
            Term::BigG => self.psi.edges().to_vec(),
            _ => self.history.edges(),
        };
        for b in breaks.iter_mut() {
            *b = *b - t;
        }
        let integrand = Integrand {
            shape: (n, 1),
            breaks,
            degree: Some(match term {
                Term::BigG => self.psi.max_degree(),
                _ => pieces.max_degree(),
            }),
            density: &density,
            atom: &atom,
        };
        stieltjes(self.kernel.eta(), Endpoint::exact(-r), hi, &integrand, self.quad)
    }

    fn check_t(&self, t: T) -> Result<()> {
        if t.is_nan() || t < -coincide_tol(T::zero()) {
            return Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                start: 0.0,
                end: f64::INFINITY,
            });
        }
        Ok(())
    }

    /// `g(t; φ)`; requires `φ ∈ C`.
    pub fn g(&self, t: T) -> Result<Mat<T>> {
        self.check_t(t)?;
        if let Some(&at) = self.history.jumps().first() {
            return Err(Error::NotContinuous { at: at.to_f64_lossy() });
        }
        self.shifted(t.max(T::zero()), Term::G, Endpoint::exact(-t))
    }

    /// `G(t; φ)`.
    pub fn big_g(&self, t: T) -> Result<Mat<T>> {
        self.check_t(t)?;
        let t = t.max(T::zero());
        let tail = self.shifted(t, Term::BigG, Endpoint::exact(-t))?;
        Ok(&self.psi_total - &tail)
    }

    /// One-sided limit `f(t±; φ)`; `f(0-)` is taken as `f(0+)`.
    pub fn f_limit(&self, t: T, side: Side) -> Result<Mat<T>> {
        self.check_t(t)?;
        let t = t.max(T::zero());
        let side = if near(t, T::zero()) { Side::Right } else { side };
        let hi = match side {
            Side::Right => Endpoint::left(-t),
            Side::Left => Endpoint::right(-t),
        };
        self.shifted(t, Term::F(side), hi)
    }

    /// `f(t; φ)`, undefined at the forcing breakpoints.
    pub fn f(&self, t: T) -> Result<Mat<T>> {
        self.check_t(t)?;
        if self.is_break(t) {
            return Err(Error::AeUndefined { t: t.to_f64_lossy() });
        }
        self.f_limit(t, Side::Right)
    }

    fn fitted(&self, term: Term) -> Result<PiecewiseFunction<T>> {
        let r = self.r();
        let mut cuts = vec![T::zero()];
        cuts.extend(self.breaks.iter().copied().filter(|&b| !near(b, r)));
        cuts.push(r);
        let deg = self.degree(term);
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let poly = MatPoly::fit(b - a, deg, |s| match term {
                Term::G => self.g(a + s),
                Term::F(_) => self.f_limit(a + s, Side::Right),
                Term::BigG => self.big_g(a + s),
            })?;
            pieces.push(((a, b), poly));
        }
        PiecewiseFunction::from_local(pieces)
    }

    /// `g` on `[0, r]` as an exact piecewise polynomial.
    pub fn g_function(&self) -> Result<PiecewiseFunction<T>> {
        if let Some(&at) = self.history.jumps().first() {
            return Err(Error::NotContinuous { at: at.to_f64_lossy() });
        }
        self.fitted(Term::G)
    }

    /// A representative of `f` on `[0, r]`.
    pub fn f_function(&self) -> Result<PiecewiseFunction<T>> {
        self.fitted(Term::F(Side::Right))
    }

    /// `G` on `[0, r]`; constant afterwards.
    pub fn big_g_function(&self) -> Result<PiecewiseFunction<T>> {
        self.fitted(Term::BigG)
    }
}

impl<T: Real> Forcing<T> for MildForcing<T> {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn limit(&self, t: T, side: Side) -> Result<Mat<T>> {
        self.f_limit(t, side)
    }

    fn breakpoints(&self) -> Vec<T> {
        self.breaks.clone()
    }
}

/// `g(t; φ)` for continuous `φ`.
pub fn g_forcing<T: Real>(kernel: &Kernel<T>, phi: &History<T>, t: T, quad: Quad) -> Result<Mat<T>> {
    MildForcing::new(kernel, phi, quad)?.g(t)
}

/// `G(t; φ)`.
pub fn big_g_forcing<T: Real>(kernel: &Kernel<T>, phi: &History<T>, t: T, quad: Quad) -> Result<Mat<T>> {
    MildForcing::new(kernel, phi, quad)?.big_g(t)
}

/// `f(t; φ)`; [`Error::AeUndefined`] at a forcing breakpoint.
pub fn f_forcing<T: Real>(kernel: &Kernel<T>, phi: &History<T>, t: T, quad: Quad) -> Result<Mat<T>> {
    MildForcing::new(kernel, phi, quad)?.f(t)
}

/// Continuous approximation `φ_ε` of `φ`: every jump at an interior piece
/// edge `b` is replaced by the chord over `[b - ε, b + ε]`, and a mismatch
/// between `φ(0-)` and `φ(0)` by the chord over `[-ε, 0]`.
pub fn mollify_history<T: Real>(phi: &History<T>, eps: T) -> Result<History<T>> {
    let r = phi.r();
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::EpsilonTooLarge { eps: eps.to_f64_lossy() });
    }
    let pieces = phi.pieces();
    let tol = T::epsilon() * T::lit(1024.0);
    let mut ramps: Vec<(T, T, Mat<T>, Mat<T>)> = Vec::new();
    let edges = pieces.edges();
    for &b in &edges[1..edges.len() - 1] {
        let l = pieces.limit(b, Side::Left)?;
        let rr = pieces.limit(b, Side::Right)?;
        if (&l - &rr).max_abs() > tol * (T::one() + l.max_abs()) {
            let (lo, hi) = (b - eps, b + eps);
            if lo < -r || hi > T::zero() {
                return Err(Error::EpsilonTooLarge { eps: eps.to_f64_lossy() });
            }
            ramps.push((lo, hi, pieces.limit(lo, Side::Right)?, pieces.limit(hi, Side::Left)?));
        }
    }
    let left0 = pieces.limit(T::zero(), Side::Left)?;
    let v0 = phi.value_at_zero();
    if (&left0 - v0).max_abs() > tol * (T::one() + left0.max_abs()) {
        if -eps < -r {
            return Err(Error::EpsilonTooLarge { eps: eps.to_f64_lossy() });
        }
        ramps.push((-eps, T::zero(), pieces.limit(-eps, Side::Right)?, v0.clone()));
    }
    if ramps.is_empty() {
        let p = PiecewiseFunction::from_local(
            pieces.pieces().map(|(a, b, q)| ((a, b), q.clone())).collect(),
        )?;
        return History::new(p, v0.clone(), phi.p());
    }
    for w in ramps.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::EpsilonTooLarge { eps: eps.to_f64_lossy() });
        }
    }
    let mut out = Vec::new();
    let mut cursor = -r;
    for (lo, hi, vl, vr) in &ramps {
        if *lo > cursor && !near(*lo, cursor) {
            let part = pieces.restrict(cursor, *lo)?;
            out.extend(part.pieces().map(|(a, b, q)| ((a, b), q.clone())));
        }
        let w = *hi - *lo;
        out.push(((*lo, *hi), MatPoly::line_through(T::zero(), vl, w, vr)));
        cursor = *hi;
    }
    if cursor < T::zero() && !near(cursor, T::zero()) {
        let part = pieces.restrict(cursor, T::zero())?;
        out.extend(part.pieces().map(|(a, b, q)| ((a, b), q.clone())));
    }
    let smooth = PiecewiseFunction::from_local(out)?;
    let at_zero = smooth.limit(T::zero(), Side::Left)?;
    History::new(smooth, at_zero, phi.p())
}

/// `‖g(·; φ)‖_{L^p[0, r]}` against `Var(η) ‖φ‖_{L^p[-r, 0]}`.
pub fn check_lp_bound<T: Real>(kernel: &Kernel<T>, phi: &History<T>, p: T, quad: Quad) -> Result<Check<T>> {
    let g = MildForcing::new(kernel, phi, quad)?.g_function()?;
    let lhs = g.lp_norm(p);
    let rhs = kernel.variation() * phi.lp_norm(p);
    let p_int = p.round();
    let exact = kernel.eta().variation_is_exact()
        && (p.is_infinite() || ((p - p_int).abs() <= T::epsilon() && (kernel.dim() == 1 || p_int.to_usize().is_some_and(|k| k % 2 == 0))));
    let mut check = Check::new(lhs, rhs, exact);
    if !exact {
        // fitted pieces carry rounding of order sqrt(eps) at worst
        check.tol = check.tol.max(T::epsilon().sqrt() * (T::one() + rhs));
    }
    Ok(check)
}

/// Samples of the forcing terms plus their behaviour beyond `r`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ForcingReport<T> {
    pub grid: Vec<T>,
    /// `g` samples; absent when `φ` is discontinuous.
    pub g_values: Option<Vec<Vec<T>>>,
    pub big_g_values: Vec<Vec<T>>,
    /// Right limits of `f`.
    pub f_values: Vec<Vec<T>>,
    /// `max |g|, |f|` over grid points `t >= r`.
    pub tail_max: T,
    /// `max |G(t) - G(r)|` over grid points `t >= r`.
    pub constancy_defect: T,
}

pub fn forcing_report<T: Real>(
    kernel: &Kernel<T>,
    phi: &History<T>,
    grid: &[T],
    quad: Quad,
) -> Result<ForcingReport<T>> {
    let m = MildForcing::new(kernel, phi, quad)?;
    let r = m.r();
    let continuous = phi.is_continuous();
    let g_r = m.big_g(r)?;
    let mut g_values = continuous.then(Vec::new);
    let mut big_g_values = Vec::with_capacity(grid.len());
    let mut f_values = Vec::with_capacity(grid.len());
    let mut tail_max = T::zero();
    let mut constancy_defect = T::zero();
    for &t in grid {
        let f = m.f_limit(t, Side::Right)?;
        let big = m.big_g(t)?;
        let tail = t > r || near(t, r);
        if let Some(gv) = g_values.as_mut() {
            let g = m.g(t)?;
            if tail {
                tail_max = tail_max.max(g.max_abs());
            }
            gv.push(g.into_vec());
        }
        if tail {
            tail_max = tail_max.max(f.max_abs());
            constancy_defect = constancy_defect.max((&big - &g_r).max_abs());
        }
        f_values.push(f.into_vec());
        big_g_values.push(big.into_vec());
    }
    Ok(ForcingReport {
        grid: grid.to_vec(),
        g_values,
        big_g_values,
        f_values,
        tail_max,
        constancy_defect,
    })
}
