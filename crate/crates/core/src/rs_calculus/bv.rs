use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::poly::MatPoly;
use crate::quadrature::GaussLegendre;
use crate::rs_calculus::{key_lt, Endpoint, Side};
use crate::scalar::{coincide_tol, near, Real};

/// Jump `jump` of a BV function at `at`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom<T> {
    pub at: T,
    pub jump: Mat<T>,
}

/// Absolutely continuous part of a BV function on one piece, in the local
/// variable of the piece.
#[derive(Clone, Debug, PartialEq)]
pub enum Density<T> {
    /// Polynomial density.
    Poly(MatPoly<T>),
    /// Scalar density `s ↦ |q(s)|`, the variation density of a matrix or
    /// vector polynomial `q`. Not polynomial in general.
    OpNorm(MatPoly<T>),
}

impl<T: Real> Density<T> {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Density::Poly(p) => p.shape(),
            Density::OpNorm(_) => (1, 1),
        }
    }

    pub fn eval(&self, s: T) -> Mat<T> {
        match self {
            Density::Poly(p) => p.eval(s),
            Density::OpNorm(q) => Mat::scalar(q.eval(s).norm()),
        }
    }

    pub fn degree(&self) -> Option<usize> {
        match self {
            Density::Poly(p) => Some(p.degree()),
            Density::OpNorm(_) => None,
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        match self {
            Density::Poly(p) | Density::OpNorm(p) => p.is_zero(),
        }
    }

    /// `∫_{s0}^{s1} density`.
    fn integral(&self, s0: T, s1: T) -> Mat<T> {
        match self {
            Density::Poly(p) => p.antiderivative_from(s0).eval(s1),
            Density::OpNorm(q) => {
                let g = GaussLegendre::new(10);
                Mat::scalar(g.integrate_composite(s0, s1, 16, |s| q.eval(s).norm()))
            }
        }
    }
}

/// Matrix-, vector- or scalar-valued function of bounded variation on `[start, end]`:
/// `α(t) = base + Σ_{atoms counted at t} J + ∫_start^t density`.
///
/// Interior atoms are right-continuous. An atom placed exactly at `start`
/// is a jump at `start+`: `α(start) = base`, and it is counted by every
/// integral whose range starts at `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct BVFunction<T> {
    start: T,
    end: T,
    base: Mat<T>,
    atoms: Vec<Atom<T>>,
    edges: Vec<T>,
    density: Vec<Density<T>>,
}

impl<T: Real> BVFunction<T> {
    /// `density` pieces use the global variable and must tile `[start, end]`;
    /// an empty list means no absolutely continuous part.
    pub fn new(
        start: T,
        end: T,
        base: Mat<T>,
        atoms: Vec<(T, Mat<T>)>,
        density: Vec<((T, T), MatPoly<T>)>,
    ) -> Result<Self> {
        let local = density
            .into_iter()
            .map(|((lo, hi), p)| ((lo, hi), Density::Poly(p.shifted(lo))))
            .collect();
        Self::from_local(start, end, base, atoms, local)
    }

    pub(crate) fn from_local(
        start: T,
        end: T,
        base: Mat<T>,
        atoms: Vec<(T, Mat<T>)>,
        density: Vec<((T, T), Density<T>)>,
    ) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end <= start {
            return Err(Error::InvalidInput("BV domain must be a non-empty finite interval".into()));
        }
        let shape = base.shape();
        let mut atoms: Vec<Atom<T>> = atoms
            .into_iter()
            .map(|(at, jump)| Atom { at, jump })
            .collect();
        atoms.sort_by(|a, b| a.at.partial_cmp(&b.at).unwrap_or(std::cmp::Ordering::Equal));
        for a in &atoms {
            if !a.at.is_finite()
                || a.at < start - coincide_tol(start)
                || a.at > end + coincide_tol(end)
            {
                return Err(Error::OutOfDomain {
                    t: a.at.to_f64_lossy(),
                    start: start.to_f64_lossy(),
                    end: end.to_f64_lossy(),
                });
            }
            if a.jump.shape() != shape {
                return Err(Error::ShapeMismatch("atom jump shape differs from base".into()));
            }
        }
        if atoms.windows(2).any(|w| near(w[0].at, w[1].at)) {
            return Err(Error::InvalidInput("atom locations must be strictly increasing".into()));
        }
        let (edges, density) = if density.is_empty() {
            (
                vec![start, end],
                vec![Density::Poly(MatPoly::zero(shape.0, shape.1))],
            )
        } else {
            let mut edges = vec![density[0].0 .0];
            let mut pieces = Vec::with_capacity(density.len());
            for ((lo, hi), d) in density {
                let last = *edges.last().expect("non-empty");
                if hi <= lo || !near(lo, last) {
                    return Err(Error::InvalidInput(format!(
                        "density pieces must tile the domain (problem at {})",
                        lo.to_f64_lossy()
                    )));
                }
                if d.shape() != shape {
                    return Err(Error::ShapeMismatch("density shape differs from base".into()));
                }
                edges.push(hi);
                pieces.push(d);
            }
            if !near(edges[0], start) || !near(*edges.last().expect("non-empty"), end) {
                return Err(Error::InvalidInput(
                    "density pieces must cover exactly the BV domain".into(),
                ));
            }
            edges[0] = start;
            *edges.last_mut().expect("non-empty") = end;
            (edges, pieces)
        };
        Ok(Self {
            start,
            end,
            base,
            atoms,
            edges,
            density,
        })
    }

    /// Pure jump function with zero base.
    pub fn atoms_only(start: T, end: T, atoms: Vec<(T, Mat<T>)>) -> Result<Self> {
        let shape = atoms
            .first()
            .map(|(_, j)| j.shape())
            .ok_or_else(|| Error::InvalidInput("need at least one atom to infer the shape".into()))?;
        Self::new(start, end, Mat::zeros(shape.0, shape.1), atoms, Vec::new())
    }

    /// Absolutely continuous function `∫_start^t p` with zero base.
    pub fn from_density(start: T, end: T, p: MatPoly<T>) -> Result<Self> {
        let (r, c) = p.shape();
        Self::new(start, end, Mat::zeros(r, c), Vec::new(), vec![((start, end), p)])
    }

    /// Constant function.
    pub fn constant(start: T, end: T, value: Mat<T>) -> Result<Self> {
        Self::new(start, end, value, Vec::new(), Vec::new())
    }

    pub fn domain(&self) -> (T, T) {
        (self.start, self.end)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.base.shape()
    }

    pub fn base(&self) -> &Mat<T> {
        &self.base
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    /// Density pieces as `(lo, hi, density in the local variable)`.
    pub fn density_pieces(&self) -> impl Iterator<Item = (T, T, &Density<T>)> + '_ {
        self.density
            .iter()
            .enumerate()
            .map(move |(k, d)| (self.edges[k], self.edges[k + 1], d))
    }

    /// Density piece edges including both domain ends.
    pub fn density_edges(&self) -> &[T] {
        &self.edges
    }

    pub fn has_density(&self) -> bool {
        self.density.iter().any(|d| !d.is_zero())
    }

    /// Largest polynomial degree of the density, `None` if non-polynomial.
    pub fn density_degree(&self) -> Option<usize> {
        self.density
            .iter()
            .map(Density::degree)
            .try_fold(0, |m, d| d.map(|d| m.max(d)))
    }

    pub(crate) fn atom_key(&self, a: &Atom<T>) -> (T, i8) {
        (a.at, if near(a.at, self.start) { 1 } else { 0 })
    }

    /// Atoms counted by an integral over `lo..hi` (keys in `(lo, hi]`).
    pub fn atoms_between(&self, lo: Endpoint<T>, hi: Endpoint<T>) -> impl Iterator<Item = &Atom<T>> + '_ {
        let (lk, hk) = (lo.key(), hi.key());
        self.atoms.iter().filter(move |a| {
            let k = self.atom_key(a);
            key_lt(lk, k) && !key_lt(hk, k)
        })
    }

    pub(crate) fn piece_index(&self, t: T) -> usize {
        let n = self.density.len();
        self.edges[1..n].partition_point(|&e| e <= t).min(n - 1)
    }

    pub(crate) fn piece(&self, k: usize) -> (T, T, &Density<T>) {
        (self.edges[k], self.edges[k + 1], &self.density[k])
    }

    /// Density value at `t`.
    pub fn density_at(&self, t: T) -> Mat<T> {
        let k = self.piece_index(t);
        self.density[k].eval(t - self.edges[k])
    }

    /// `∫_a^b density` for `start <= a <= b <= end`.
    pub fn density_integral(&self, a: T, b: T) -> Mat<T> {
        let mut acc = Mat::zeros(self.shape().0, self.shape().1);
        for (k, d) in self.density.iter().enumerate() {
            let (e0, e1) = (self.edges[k], self.edges[k + 1]);
            let x0 = a.max(e0);
            let x1 = b.min(e1);
            if x1 > x0 {
                acc += &d.integral(x0 - e0, x1 - e0);
            }
        }
        acc
    }

    fn check_domain(&self, t: T) -> Result<()> {
        if t.is_nan() || t < self.start - coincide_tol(self.start) || t > self.end + coincide_tol(self.end) {
            return Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                start: self.start.to_f64_lossy(),
                end: self.end.to_f64_lossy(),
            });
        }
        Ok(())
    }

    fn value_at_key(&self, at: Endpoint<T>) -> Mat<T> {
        let mut v = self.base.clone();
        for a in self.atoms_between(Endpoint::left(self.start), at) {
            v += &a.jump;
        }
        let t = at.at.clamp(self.start, self.end);
        v += &self.density_integral(self.start, t);
        v
    }

    pub fn eval(&self, t: T) -> Result<Mat<T>> {
        self.check_domain(t)?;
        Ok(self.value_at_key(Endpoint::exact(t)))
    }

    pub fn limit(&self, t: T, side: Side) -> Result<Mat<T>> {
        self.check_domain(t)?;
        Ok(self.value_at_key(Endpoint { at: t, side: Some(side) }))
    }

    /// `α(d) - α(c)`.
    pub fn increment(&self, c: T, d: T) -> Result<Mat<T>> {
        Ok(&self.eval(d)? - &self.eval(c)?)
    }

    /// `Var(α)` over the whole domain.
    pub fn total_variation(&self) -> T {
        let (_, end) = self.domain();
        self.variation_function()
            .eval(end)
            .expect("end lies in the domain")
            .get(0, 0)
    }

    /// Whether every density piece is polynomial (the variation is then exact).
    pub fn variation_is_exact(&self) -> bool {
        let (r, c) = self.shape();
        r * c == 1 && self.density_degree().is_some()
    }

    /// Total variation function `V_α(t) = Var(α on [start, t])`.
    pub fn variation_function(&self) -> BVFunction<T> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| (a.at, Mat::scalar(a.jump.norm())))
            .collect();
        let mut density = Vec::new();
        for (lo, hi, d) in self.density_pieces() {
            let w = hi - lo;
            match d {
                Density::Poly(p) if p.shape() == (1, 1) => {
                    let e = p.entry(0, 0);
                    let mut cuts = vec![T::zero()];
                    let tol = coincide_tol(hi.abs().max(lo.abs()));
                    cuts.extend(e.sign_changes_in(T::zero(), w).into_iter().filter(|&c| c > tol && c < w - tol));
                    cuts.push(w);
                    for c in cuts.windows(2) {
                        let mid = (c[0] + c[1]) * T::lit(0.5);
                        let s = if e.eval(mid) < T::zero() { -T::one() } else { T::one() };
                        density.push((
                            (lo + c[0], lo + c[1]),
                            Density::Poly(p.shifted(c[0]).scale(s)),
                        ));
                    }
                }
                Density::Poly(p) => {
                    if p.is_zero() {
                        density.push(((lo, hi), Density::Poly(MatPoly::zero(1, 1))));
                    } else {
                        density.push(((lo, hi), Density::OpNorm(p.clone())));
                    }
                }
                Density::OpNorm(q) => density.push(((lo, hi), Density::OpNorm(q.clone()))),
            }
        }
        BVFunction::from_local(self.start, self.end, Mat::scalar(T::zero()), atoms, density)
            .expect("variation function of a well-formed BV function is well-formed")
    }

    /// Scalar and nondecreasing.
    pub fn is_monotone(&self) -> bool {
        if self.shape() != (1, 1) {
            return false;
        }
        let tol = coincide_tol(T::one());
        if self.atoms.iter().any(|a| a.jump.get(0, 0) < -tol) {
            return false;
        }
        self.density_pieces().all(|(lo, hi, d)| match d {
            Density::OpNorm(_) => true,
            Density::Poly(p) => {
                let e = p.entry(0, 0);
                let w = hi - lo;
                let mut pts = vec![T::zero(), w];
                pts.extend(e.derivative().sign_changes_in(T::zero(), w));
                pts.into_iter().all(|s| e.eval(s) >= -tol)
            }
        })
    }

    /// `u ↦ -α(-u)` on `[-end, -start]`. Every jump keeps its increment.
    pub fn reflect(&self) -> BVFunction<T> {
        let base = -&self.value_at_key(Endpoint::exact(self.end));
        let atoms = self
            .atoms
            .iter()
            .map(|a| (-a.at, a.jump.clone()))
            .collect();
        let n = self.density.len();
        let density = (0..n)
            .rev()
            .map(|k| {
                let (lo, hi) = (self.edges[k], self.edges[k + 1]);
                let w = hi - lo;
                let d = match &self.density[k] {
                    Density::Poly(p) => Density::Poly(p.reflected().shifted(-w)),
                    Density::OpNorm(q) => Density::OpNorm(q.reflected().shifted(-w)),
                };
                ((-hi, -lo), d)
            })
            .collect();
        BVFunction::from_local(-self.end, -self.start, base, atoms, density)
            .expect("reflection of a well-formed BV function is well-formed")
    }

    pub fn scale(&self, s: T) -> BVFunction<T> {
        let mut out = self.clone();
        out.base = out.base.scale(s);
        for a in &mut out.atoms {
            a.jump = a.jump.scale(s);
        }
        for d in &mut out.density {
            *d = match d {
                Density::Poly(p) => Density::Poly(p.scale(s)),
                Density::OpNorm(q) => Density::OpNorm(q.scale(s.abs())),
            };
        }
        out
    }
}
