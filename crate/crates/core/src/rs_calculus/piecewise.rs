use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::poly::MatPoly;
use crate::quadrature::GaussLegendre;
use crate::rs_calculus::{Side, TimeFunction};
use crate::scalar::{coincide_tol, near, Real};

/// Piecewise-polynomial function on a closed interval.
///
/// Piece `k` covers `[edges[k], edges[k+1]]` and is stored in the local
/// variable `s = t - edges[k]`. At an interior edge the function takes its
/// left limit unless a point value overrides it. A point value of `None`
/// marks a point where the function is deliberately left undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseFunction<T> {
    edges: Vec<T>,
    pieces: Vec<MatPoly<T>>,
    points: Vec<(T, Option<Mat<T>>)>,
}

impl<T: Real> PiecewiseFunction<T> {
    /// Builds from `((lo, hi), p)` triples with `p` in the global variable.
    pub fn new(pieces: Vec<((T, T), MatPoly<T>)>) -> Result<Self> {
        let local = pieces
            .into_iter()
            .map(|((lo, hi), p)| ((lo, hi), p.shifted(lo)))
            .collect();
        Self::from_local(local)
    }

    /// Builds from `((lo, hi), p)` triples with `p` in the local variable `t - lo`.
    pub fn from_local(pieces: Vec<((T, T), MatPoly<T>)>) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::InvalidInput("piecewise function needs at least one piece".into()))?;
        let shape = first.1.shape();
        let mut edges = vec![first.0 .0];
        let mut polys = Vec::with_capacity(pieces.len());
        for ((lo, hi), p) in pieces {
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(Error::InvalidInput(format!(
                    "piece [{}, {}] is empty or not finite",
                    lo.to_f64_lossy(),
                    hi.to_f64_lossy()
                )));
            }
            let last = *edges.last().expect("edges is non-empty");
            if !near(lo, last) {
                return Err(Error::InvalidInput(format!(
                    "pieces do not tile the domain: gap or overlap at {}",
                    last.to_f64_lossy()
                )));
            }
            if p.shape() != shape {
                return Err(Error::ShapeMismatch("pieces of differing shapes".into()));
            }
            edges.push(hi);
            polys.push(p);
        }
        Ok(Self {
            edges,
            pieces: polys,
            points: Vec::new(),
        })
    }

    /// Single polynomial (global variable) on `[a, b]`.
    pub fn from_poly(a: T, b: T, p: MatPoly<T>) -> Result<Self> {
        Self::new(vec![((a, b), p)])
    }

    pub fn constant(a: T, b: T, value: Mat<T>) -> Result<Self> {
        Self::from_local(vec![((a, b), MatPoly::constant(value))])
    }

    pub fn zero(a: T, b: T, rows: usize, cols: usize) -> Result<Self> {
        Self::constant(a, b, Mat::zeros(rows, cols))
    }

    /// Attaches point values. Later entries at the same location win.
    pub fn with_points(mut self, points: Vec<(T, Option<Mat<T>>)>) -> Result<Self> {
        let (a, b) = self.domain();
        for (at, v) in points {
            if at < a - coincide_tol(a) || at > b + coincide_tol(b) {
                return Err(Error::OutOfDomain {
                    t: at.to_f64_lossy(),
                    start: a.to_f64_lossy(),
                    end: b.to_f64_lossy(),
                });
            }
            if let Some(m) = &v {
                if m.shape() != self.shape() {
                    return Err(Error::ShapeMismatch("point value of wrong shape".into()));
                }
            }
            self.points.retain(|(c, _)| !near(*c, at));
            self.points.push((at, v));
        }
        self.points
            .sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite point locations"));
        Ok(self)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.pieces[0].shape()
    }

    pub fn domain(&self) -> (T, T) {
        (self.edges[0], *self.edges.last().expect("non-empty"))
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    /// Pieces as `(lo, hi, local polynomial)`.
    pub fn pieces(&self) -> impl Iterator<Item = (T, T, &MatPoly<T>)> + '_ {
        self.pieces
            .iter()
            .enumerate()
            .map(move |(k, p)| (self.edges[k], self.edges[k + 1], p))
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    pub fn point_values(&self) -> &[(T, Option<Mat<T>>)] {
        &self.points
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(MatPoly::degree).max().unwrap_or(0)
    }

    fn check_domain(&self, t: T) -> Result<()> {
        let (a, b) = self.domain();
        if t < a - coincide_tol(a) || t > b + coincide_tol(b) || t.is_nan() {
            return Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                start: a.to_f64_lossy(),
                end: b.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Index of the piece supplying the `side` limit at `t`.
    fn locate(&self, t: T, side: Side) -> usize {
        let n = self.pieces.len();
        // first interior edge that is >= t (up to coincidence)
        let mut k = self.edges[1..n].partition_point(|&e| e < t && !near(e, t));
        if k < n - 1 && near(self.edges[k + 1], t) && side == Side::Right {
            k += 1;
        }
        k
    }

    pub(crate) fn piece_value_into(&self, k: usize, t: T, out: &mut [T]) {
        self.pieces[k].eval_into(t - self.edges[k], out);
    }

    /// One-sided limit at `t`; at the domain ends the missing side is the
    /// value of the adjacent piece.
    pub fn limit(&self, t: T, side: Side) -> Result<Mat<T>> {
        self.check_domain(t)?;
        let k = self.locate(t, side);
        let mut out = Mat::zeros(self.shape().0, self.shape().1);
        self.piece_value_into(k, t, out.as_mut_slice());
        Ok(out)
    }

    fn point_at(&self, t: T) -> Option<&Option<Mat<T>>> {
        self.points.iter().find(|(c, _)| near(*c, t)).map(|(_, v)| v)
    }

    /// Value of the representative: point value if present, else the left limit.
    pub fn eval(&self, t: T) -> Result<Mat<T>> {
        self.check_domain(t)?;
        match self.point_at(t) {
            Some(Some(v)) => Ok(v.clone()),
            Some(None) => Err(Error::UndefinedPoint { at: t.to_f64_lossy() }),
            None => self.limit(t, Side::Left),
        }
    }

    fn jump_tol(&self, a: &Mat<T>, b: &Mat<T>) -> T {
        T::epsilon() * T::lit(1024.0) * (T::one() + a.max_abs().max(b.max_abs()))
    }

    /// Locations where the representative is discontinuous.
    pub fn jumps(&self) -> Vec<T> {
        let mut out = Vec::new();
        for k in 1..self.pieces.len() {
            let e = self.edges[k];
            let mut l = Mat::zeros(self.shape().0, self.shape().1);
            let mut r = l.clone();
            self.piece_value_into(k - 1, e, l.as_mut_slice());
            self.piece_value_into(k, e, r.as_mut_slice());
            if (&l - &r).max_abs() > self.jump_tol(&l, &r) {
                out.push(e);
            }
        }
        for (c, v) in &self.points {
            let differs = match v {
                None => true,
                Some(v) => {
                    let l = self.limit(*c, Side::Left).expect("point inside domain");
                    let r = self.limit(*c, Side::Right).expect("point inside domain");
                    (&l - v).max_abs() > self.jump_tol(&l, v) || (&r - v).max_abs() > self.jump_tol(&r, v)
                }
            };
            if differs && !out.iter().any(|e| near(*e, *c)) {
                out.push(*c);
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        out
    }

    pub fn is_continuous(&self) -> bool {
        self.jumps().is_empty()
    }

    /// Interior piece edges.
    pub fn breakpoints(&self) -> Vec<T> {
        self.edges[1..self.edges.len() - 1].to_vec()
    }

    /// `s ↦ f(s + c)` on `[a - c, b - c]`.
    pub fn shifted(&self, c: T) -> Self {
        Self {
            edges: self.edges.iter().map(|&e| e - c).collect(),
            pieces: self.pieces.clone(),
            points: self
                .points
                .iter()
                .map(|(p, v)| (*p - c, v.clone()))
                .collect(),
        }
    }

    /// `s ↦ f(-s)` on `[-b, -a]`.
    pub fn reflected(&self) -> Self {
        let n = self.pieces.len();
        let mut edges: Vec<T> = self.edges.iter().rev().map(|&e| -e).collect();
        edges[0] = -self.edges[n];
        let pieces = (0..n)
            .rev()
            .map(|k| {
                let w = self.edges[k + 1] - self.edges[k];
                self.pieces[k].reflected().shifted(-w)
            })
            .collect();
        let mut points: Vec<_> = self.points.iter().map(|(p, v)| (-*p, v.clone())).collect();
        points.reverse();
        Self {
            edges,
            pieces,
            points,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            edges: self.edges.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(s)).collect(),
            points: self
                .points
                .iter()
                .map(|(c, v)| (*c, v.as_ref().map(|m| m.scale(s))))
                .collect(),
        }
    }

    /// `m · f` with the Stieltjes shape rule.
    pub fn left_mul(&self, m: &Mat<T>) -> Result<Self> {
        let mp = MatPoly::constant(m.clone());
        let pieces = self
            .pieces
            .iter()
            .map(|p| mp.mul(p))
            .collect::<Result<Vec<_>>>()?;
        let points = self
            .points
            .iter()
            .map(|(c, v)| Ok((*c, v.as_ref().map(|x| m.stieltjes_mul(x)).transpose()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            edges: self.edges.clone(),
            pieces,
            points,
        })
    }

    /// Common refinement of two functions on the same domain.
    fn refine_with(&self, other: &Self) -> Result<Vec<T>> {
        let (a, b) = self.domain();
        let (c, d) = other.domain();
        if !near(a, c) || !near(b, d) {
            return Err(Error::InvalidInput("functions live on different domains".into()));
        }
        Ok(merge_points(self.edges.iter().chain(other.edges.iter()).copied()))
    }

    /// Restriction of the polynomial structure to the given sorted edges.
    fn resample(&self, edges: &[T]) -> Vec<((T, T), MatPoly<T>)> {
        edges
            .windows(2)
            .map(|w| {
                let mid = (w[0] + w[1]) * T::lit(0.5);
                let k = self.locate(mid, Side::Left);
                ((w[0], w[1]), self.pieces[k].shifted(w[0] - self.edges[k]))
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch("adding functions of different shapes".into()));
        }
        let edges = self.refine_with(other)?;
        let pieces = self
            .resample(&edges)
            .into_iter()
            .zip(other.resample(&edges))
            .map(|((iv, p), (_, q))| Ok((iv, p.add(&q)?)))
            .collect::<Result<Vec<_>>>()?;
        let out = Self::from_local(pieces)?;
        let mut points = Vec::new();
        for (c, _) in self.points.iter().chain(other.points.iter()) {
            let v = match (self.eval(*c), other.eval(*c)) {
                (Ok(x), Ok(y)) => Some(&x + &y),
                _ => None,
            };
            points.push((*c, v));
        }
        out.with_points(points)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    /// Restriction to `[a, b]` (inside the domain).
    pub fn restrict(&self, a: T, b: T) -> Result<Self> {
        self.check_domain(a)?;
        self.check_domain(b)?;
        if b <= a {
            return Err(Error::InvalidInput("empty restriction interval".into()));
        }
        let mut edges = vec![a];
        edges.extend(self.edges.iter().copied().filter(|&e| e > a && e < b && !near(e, a) && !near(e, b)));
        edges.push(b);
        let points = self
            .points
            .iter()
            .filter(|(c, _)| *c >= a - coincide_tol(a) && *c <= b + coincide_tol(b))
            .cloned()
            .collect();
        Self::from_local(self.resample(&edges))?.with_points(points)
    }

    /// Continuous antiderivative `F(t) = ∫_{t0}^t f`.
    pub fn antiderivative_from(&self, t0: T) -> Result<Self> {
        let mut acc = Mat::zeros(self.shape().0, self.shape().1);
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (k, p) in self.pieces.iter().enumerate() {
            let mut a = p.antiderivative_from(T::zero());
            let c0 = &a.coeffs()[0] + &acc;
            a = a.add(&MatPoly::constant(c0))?;
            let w = self.edges[k + 1] - self.edges[k];
            acc = a.eval(w);
            pieces.push(((self.edges[k], self.edges[k + 1]), a));
        }
        let f = Self::from_local(pieces)?;
        let shift = f.eval(t0)?;
        Ok(f.add_constant(&-&shift))
    }

    fn add_constant(&self, c: &Mat<T>) -> Self {
        Self {
            edges: self.edges.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.add(&MatPoly::constant(c.clone())).expect("same shape"))
                .collect(),
            points: Vec::new(),
        }
    }

    /// `∫_a^b f(t) dt` (point values are irrelevant).
    pub fn integral(&self, a: T, b: T) -> Result<Mat<T>> {
        let (lo, hi, sign) = if a <= b { (a, b, T::one()) } else { (b, a, -T::one()) };
        self.check_domain(lo)?;
        self.check_domain(hi)?;
        let mut acc = Mat::zeros(self.shape().0, self.shape().1);
        if near(lo, hi) {
            return Ok(acc);
        }
        for (k, p) in self.pieces.iter().enumerate() {
            let (e0, e1) = (self.edges[k], self.edges[k + 1]);
            let x0 = lo.max(e0);
            let x1 = hi.min(e1);
            if x1 <= x0 {
                continue;
            }
            let anti = p.antiderivative_from(x0 - e0);
            acc += &anti.eval(x1 - e0);
        }
        Ok(acc.scale(sign))
    }

    /// `L^p` norm over the domain; `p = ∞` gives the essential supremum.
    /// Point values are ignored in both cases.
    pub fn lp_norm(&self, p: T) -> T {
        if p.is_infinite() {
            return self
                .pieces()
                .map(|(lo, hi, q)| sup_norm(q, hi - lo))
                .fold(T::zero(), T::max);
        }
        self.pieces()
            .map(|(lo, hi, q)| norm_pow_integral(q, T::zero(), hi - lo, p))
            .sum::<T>()
            .powf(T::one() / p)
    }

    /// Values at `ts` (representative semantics).
    pub fn sample(&self, ts: &[T]) -> Result<Vec<Mat<T>>> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }
}

impl<T: Real> TimeFunction<T> for PiecewiseFunction<T> {
    fn shape(&self) -> (usize, usize) {
        PiecewiseFunction::shape(self)
    }

    fn domain(&self) -> (T, T) {
        PiecewiseFunction::domain(self)
    }

    fn eval(&self, t: T) -> Result<Mat<T>> {
        PiecewiseFunction::eval(self, t)
    }

    fn limit(&self, t: T, side: Side) -> Result<Mat<T>> {
        PiecewiseFunction::limit(self, t, side)
    }

    fn breakpoints(&self) -> Vec<T> {
        let mut b = PiecewiseFunction::breakpoints(self);
        b.extend(self.points.iter().map(|(c, _)| *c));
        merge_points(b)
    }

    fn jumps(&self) -> Vec<T> {
        PiecewiseFunction::jumps(self)
    }

    fn piece_degree(&self) -> Option<usize> {
        Some(self.max_degree())
    }
}

/// Sorted union with near-duplicates removed.
pub(crate) fn merge_points<T: Real>(pts: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = pts.into_iter().filter(|x| x.is_finite()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v.dedup_by(|a, b| near(*a, *b));
    v
}

/// Sum of squares of the entries of a polynomial matrix, as a scalar polynomial.
fn squared_norm_poly<T: Real>(q: &MatPoly<T>) -> crate::poly::Poly<T> {
    let (r, c) = q.shape();
    let mut acc = vec![T::zero(); 2 * q.degree() + 1];
    for i in 0..r {
        for j in 0..c {
            let e = q.entry(i, j);
            for (a, &x) in e.coeffs().iter().enumerate() {
                for (b, &y) in e.coeffs().iter().enumerate() {
                    acc[a + b] = acc[a + b] + x * y;
                }
            }
        }
    }
    crate::poly::Poly::new(acc)
}

/// `max_{s ∈ [0, w]} |q(s)|` (Euclidean / Frobenius entrywise norm).
pub(crate) fn sup_norm<T: Real>(q: &MatPoly<T>, w: T) -> T {
    let sq = squared_norm_poly(q);
    let mut cand = vec![T::zero(), w];
    cand.extend(sq.derivative().sign_changes_in(T::zero(), w));
    cand.into_iter()
        .map(|s| sq.eval(s).max(T::zero()).sqrt())
        .fold(T::zero(), T::max)
}

/// `∫_a^b |q(s)|^p ds` for a polynomial `q`; exact whenever the integrand is
/// polynomial on the sign-definite sub-intervals, composite Gauss otherwise.
pub(crate) fn norm_pow_integral<T: Real>(q: &MatPoly<T>, a: T, b: T, p: T) -> T {
    let (r, c) = q.shape();
    let d = q.degree();
    let p_int = p.round();
    let integer = (p - p_int).abs() <= T::epsilon() && p_int >= T::one();
    if r * c == 1 && integer {
        let e = q.entry(0, 0);
        let k = p_int.to_usize().unwrap_or(1);
        let mut cuts = vec![a];
        cuts.extend(e.sign_changes_in(a, b));
        cuts.push(b);
        let g = GaussLegendre::for_degree(k * d);
        return cuts
            .windows(2)
            .map(|w| g.integrate(w[0], w[1], |s| e.eval(s).abs().powi(k as i32)))
            .sum();
    }
    let sq = squared_norm_poly(q);
    if integer && p_int.to_usize().is_some_and(|k| k % 2 == 0) {
        let k = p_int.to_usize().unwrap_or(2);
        let g = GaussLegendre::for_degree(k * d);
        return g.integrate(a, b, |s| sq.eval(s).max(T::zero()).powi((k / 2) as i32));
    }
    let g = GaussLegendre::new(10);
    let half = p * T::lit(0.5);
    g.integrate_composite(a, b, 16, |s| sq.eval(s).max(T::zero()).powf(half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use approx::assert_relative_eq;

    fn sp(c: &[f64]) -> MatPoly<f64> {
        MatPoly::from_scalar(&Poly::new(c.to_vec()))
    }

    fn indicator() -> PiecewiseFunction<f64> {
        PiecewiseFunction::new(vec![
            ((-1.0, -0.5), sp(&[1.0])),
            ((-0.5, 0.0), sp(&[0.0])),
        ])
        .unwrap()
    }

    #[test]
    fn left_limit_convention_and_points() {
        let f = indicator();
        assert_eq!(f.eval(-0.5).unwrap().get(0, 0), 1.0);
        assert_eq!(f.limit(-0.5, Side::Right).unwrap().get(0, 0), 0.0);
        assert_eq!(f.eval(-1.0).unwrap().get(0, 0), 1.0);
        let g = f.clone().with_points(vec![(-0.5, Some(Mat::scalar(0.5)))]).unwrap();
        assert_eq!(g.eval(-0.5).unwrap().get(0, 0), 0.5);
        let u = f.with_points(vec![(-0.25, None)]).unwrap();
        assert!(matches!(u.eval(-0.25), Err(Error::UndefinedPoint { .. })));
        assert_eq!(u.jumps(), vec![-0.5, -0.25]);
    }

    #[test]
    fn tiling_is_enforced() {
        let r = PiecewiseFunction::new(vec![((0.0, 0.5), sp(&[1.0])), ((0.6, 1.0), sp(&[1.0]))]);
        assert!(r.is_err());
    }

    #[test]
    fn global_coefficients_round_trip() {
        let f = PiecewiseFunction::new(vec![((1.0, 2.0), sp(&[0.0, 0.0, 1.0]))]).unwrap();
        assert_relative_eq!(f.eval(1.5).unwrap().get(0, 0), 2.25, epsilon = 1e-14);
        let r = f.reflected();
        assert_eq!(r.domain(), (-2.0, -1.0));
        assert_relative_eq!(r.eval(-1.5).unwrap().get(0, 0), 2.25, epsilon = 1e-14);
        let s = f.shifted(1.0);
        assert_relative_eq!(s.eval(0.5).unwrap().get(0, 0), 2.25, epsilon = 1e-14);
    }

    #[test]
    fn norms_of_indicator() {
        let f = indicator();
        assert_relative_eq!(f.lp_norm(1.0), 0.5, epsilon = 1e-14);
        assert_relative_eq!(f.lp_norm(2.0), 0.5f64.sqrt(), epsilon = 1e-14);
        assert_eq!(f.lp_norm(f64::INFINITY), 1.0);
        let c = PiecewiseFunction::constant(-1.0, 0.0, Mat::scalar(-3.0)).unwrap();
        assert_relative_eq!(c.lp_norm(2.0), 3.0, epsilon = 1e-14);
        assert_relative_eq!(c.lp_norm(1.5), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn antiderivative_is_continuous() {
        let f = indicator();
        let a = f.antiderivative_from(0.0).unwrap();
        assert!(a.is_continuous());
        assert_relative_eq!(a.eval(-1.0).unwrap().get(0, 0), -0.5, epsilon = 1e-14);
        assert_relative_eq!(f.integral(-1.0, 0.0).unwrap().get(0, 0), 0.5, epsilon = 1e-14);
        assert_relative_eq!(f.integral(-0.75, -0.6).unwrap().get(0, 0), 0.15, epsilon = 1e-14);
    }

    #[test]
    fn sum_on_common_refinement() {
        let f = indicator();
        let g = PiecewiseFunction::new(vec![
            ((-1.0, -0.2), sp(&[0.0, 1.0])),
            ((-0.2, 0.0), sp(&[2.0])),
        ])
        .unwrap();
        let h = f.add(&g).unwrap();
        assert_eq!(h.num_pieces(), 3);
        assert_relative_eq!(h.eval(-0.7).unwrap().get(0, 0), 0.3, epsilon = 1e-14);
        assert_relative_eq!(h.eval(-0.1).unwrap().get(0, 0), 2.0, epsilon = 1e-14);
    }
}
