use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::Trajectory;
use crate::poly::MatPoly;
use crate::rs_calculus::{merge_points, PiecewiseFunction, Side};
use crate::scalar::{coincide_tol, near, Real};

/// Initial history in `M^p`: an a.e. class on `[-r, 0]` plus the value at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct History<T> {
    r: T,
    pieces: PiecewiseFunction<T>,
    value_at_zero: Mat<T>,
    p: T,
}

impl<T: Real> History<T> {
    pub fn new(pieces: PiecewiseFunction<T>, value_at_zero: Mat<T>, p: T) -> Result<Self> {
        let (a, b) = pieces.domain();
        if !near(b, T::zero()) || a >= b {
            return Err(Error::InvalidInput("history pieces must live on [-r, 0]".into()));
        }
        if pieces.shape().1 != 1 || value_at_zero.shape() != pieces.shape() {
            return Err(Error::ShapeMismatch(
                "history pieces and value at 0 must be column vectors of one length".into(),
            ));
        }
        if !(p >= T::one()) {
            return Err(Error::InvalidInput("exponent p must lie in [1, inf]".into()));
        }
        Ok(Self {
            r: -a,
            pieces,
            value_at_zero,
            p,
        })
    }

    /// `ξ̂`: zero a.e., `ξ` at 0.
    pub fn instantaneous(r: T, xi: Mat<T>) -> Result<Self> {
        let n = xi.rows();
        Self::new(PiecewiseFunction::zero(-r, T::zero(), n, 1)?, xi, T::one())
    }

    /// `φ ≡ c`.
    pub fn constant(r: T, c: Mat<T>) -> Result<Self> {
        Self::new(PiecewiseFunction::constant(-r, T::zero(), c.clone())?, c, T::infinity())
    }

    /// Continuous history from one polynomial (global variable) on `[-r, 0]`.
    pub fn from_poly(r: T, p: MatPoly<T>) -> Result<Self> {
        let pieces = PiecewiseFunction::from_poly(-r, T::zero(), p)?;
        let v0 = pieces.limit(T::zero(), Side::Left)?;
        Self::new(pieces, v0, T::infinity())
    }

    pub fn with_p(mut self, p: T) -> Result<Self> {
        if !(p >= T::one()) {
            return Err(Error::InvalidInput("exponent p must lie in [1, inf]".into()));
        }
        self.p = p;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.value_at_zero.rows()
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn pieces(&self) -> &PiecewiseFunction<T> {
        &self.pieces
    }

    pub fn value_at_zero(&self) -> &Mat<T> {
        &self.value_at_zero
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// `‖φ‖_{L^p[-r, 0]}`; the value at 0 and point values carry no mass.
    pub fn lp_norm(&self, p: T) -> T {
        self.pieces.lp_norm(p)
    }

    /// Static prolongation `φ̄(t)`: `φ(t)` for `t < 0`, `φ(0)` for `t >= 0`.
    pub fn static_prolongation(&self, t: T) -> Result<Mat<T>> {
        if t >= T::zero() || near(t, T::zero()) {
            return Ok(self.value_at_zero.clone());
        }
        if t < -self.r - coincide_tol(self.r) {
            return Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                start: (-self.r).to_f64_lossy(),
                end: f64::INFINITY,
            });
        }
        self.pieces.eval(t)
    }

    /// One-sided limit of `φ̄` at `t`.
    pub fn limit(&self, t: T, side: Side) -> Result<Mat<T>> {
        let at_zero = near(t, T::zero());
        if t > T::zero() || (at_zero && side == Side::Right) {
            return Ok(self.value_at_zero.clone());
        }
        if at_zero {
            return self.pieces.limit(T::zero(), Side::Left);
        }
        self.pieces.limit(t, side)
    }

    /// Jumps of `φ̄` on `[-r, 0]`, including a mismatch between `φ(0-)` and `φ(0)`.
    pub fn jumps(&self) -> Vec<T> {
        let mut j = self.pieces.jumps();
        let left = self
            .pieces
            .limit(T::zero(), Side::Left)
            .expect("0 is in the domain");
        let d = (&left - &self.value_at_zero).max_abs();
        if d > T::epsilon() * T::lit(1024.0) * (T::one() + left.max_abs()) {
            j.push(T::zero());
        }
        merge_points(j)
    }

    /// Piece edges and point locations in `[-r, 0]`, plus 0 itself.
    pub fn edges(&self) -> Vec<T> {
        let mut e = self.pieces.edges().to_vec();
        e.extend(self.pieces.point_values().iter().map(|(c, _)| *c));
        merge_points(e)
    }

    /// `φ ∈ C`: no jumps anywhere and `φ(0-) = φ(0)`.
    pub fn is_continuous(&self) -> bool {
        self.jumps().is_empty()
    }
}

/// History segment `θ ↦ x(t + θ)` on `[-r, 0]`: `φ` left of `-t`, the
/// trajectory interpolant right of it.
pub fn segment<T: Real>(x: &Trajectory<T>, phi: &History<T>, t: T) -> Result<PiecewiseFunction<T>> {
    let r = phi.r();
    let end = x.horizon();
    if t < T::zero() || t > end + coincide_tol(end) {
        return Err(Error::OutOfDomain {
            t: t.to_f64_lossy(),
            start: 0.0,
            end: end.to_f64_lossy(),
        });
    }
    let t = t.min(end);
    let mut pieces = Vec::new();
    let mut points = Vec::new();
    let split = -t;
    if split > -r && !near(split, -r) {
        let head = phi.pieces().restrict(t - r, T::zero())?.shifted(t);
        for (lo, hi, p) in head.pieces() {
            pieces.push(((lo, hi), p.clone()));
        }
        points.extend(
            head.point_values()
                .iter()
                .filter(|(c, _)| *c < split && !near(*c, split))
                .cloned(),
        );
    }
    if near(t, T::zero()) {
        points.push((T::zero(), Some(phi.value_at_zero().clone())));
        return PiecewiseFunction::from_local(pieces)?.with_points(points);
    }
    let s0 = (t - r).max(T::zero());
    let grid = x.grid();
    let k0 = x.cell_of(s0, Side::Right);
    let k1 = x.cell_of(t, Side::Left);
    for k in k0..=k1 {
        let (g0, g1) = (grid[k], grid[k + 1]);
        let lo = g0.max(s0);
        let hi = g1.min(t);
        if hi <= lo || near(hi, lo) {
            continue;
        }
        let poly = x.cell_poly(k).shifted(lo - g0);
        pieces.push(((lo - t, hi - t), poly));
    }
    if let Some(first) = pieces.first_mut() {
        first.0 .0 = first.0 .0.max(-r);
    }
    PiecewiseFunction::from_local(pieces)?.with_points(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Interp;
    use crate::poly::Poly;
    use approx::assert_relative_eq;

    fn sp(c: &[f64]) -> MatPoly<f64> {
        MatPoly::from_scalar(&Poly::new(c.to_vec()))
    }

    fn indicator() -> History<f64> {
        let pieces = PiecewiseFunction::new(vec![
            ((-1.0, -0.5), sp(&[1.0])),
            ((-0.5, 0.0), sp(&[0.0])),
        ])
        .unwrap();
        History::new(pieces, Mat::scalar(0.0), 1.0).unwrap()
    }

    #[test]
    fn norms() {
        let c = History::constant(1.0, Mat::scalar(-2.0)).unwrap();
        assert_relative_eq!(c.lp_norm(2.0), 2.0, epsilon = 1e-14);
        assert_relative_eq!(indicator().lp_norm(1.0), 0.5, epsilon = 1e-15);
        let xi = History::instantaneous(1.0, Mat::column(vec![1.0, 0.0])).unwrap();
        assert_eq!(xi.lp_norm(1.0), 0.0);
        assert_eq!(xi.value_at_zero().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn static_prolongation() {
        let c = History::constant(1.0, Mat::scalar(1.0)).unwrap();
        assert_eq!(c.static_prolongation(3.0).unwrap().get(0, 0), 1.0);
        let ind = indicator();
        assert_eq!(ind.static_prolongation(-0.75).unwrap().get(0, 0), 1.0);
        assert_eq!(ind.static_prolongation(0.2).unwrap().get(0, 0), 0.0);
        let xi = History::instantaneous(1.0, Mat::scalar(4.0)).unwrap();
        assert_eq!(xi.static_prolongation(5.0).unwrap().get(0, 0), 4.0);
        let holed = History::new(
            PiecewiseFunction::constant(-1.0, 0.0, Mat::scalar(1.0))
                .unwrap()
                .with_points(vec![(-0.5, None)])
                .unwrap(),
            Mat::scalar(1.0),
            2.0,
        )
        .unwrap();
        assert!(matches!(holed.static_prolongation(-0.5), Err(Error::UndefinedPoint { .. })));
    }

    #[test]
    fn continuity() {
        assert!(History::constant(1.0, Mat::scalar(1.0)).unwrap().is_continuous());
        assert!(!indicator().is_continuous());
        let xi = History::instantaneous(1.0, Mat::scalar(1.0)).unwrap();
        assert_eq!(xi.jumps(), vec![0.0]);
    }

    #[test]
    fn segments() {
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
        let values = grid.iter().map(|&t| Mat::scalar(t)).collect();
        let x = Trajectory::new(grid, values, vec![], Interp::Linear).unwrap();
        let zero = History::constant(1.0, Mat::scalar(0.0)).unwrap();
        let s = segment(&x, &zero, 1.5).unwrap();
        assert_eq!(s.domain(), (-1.0, 0.0));
        for &th in &[-1.0, -0.55, -0.2, 0.0] {
            assert_relative_eq!(s.eval(th).unwrap().get(0, 0), 1.5 + th, epsilon = 1e-14);
        }
        let s0 = segment(&x, &indicator(), 0.0).unwrap();
        assert_eq!(s0.eval(-0.75).unwrap().get(0, 0), 1.0);
        assert_eq!(s0.eval(0.0).unwrap().get(0, 0), 0.0);
        let s = segment(&x, &zero, 0.35).unwrap();
        assert_eq!(s.eval(-0.6).unwrap().get(0, 0), 0.0);
        assert_relative_eq!(s.eval(-0.1).unwrap().get(0, 0), 0.25, epsilon = 1e-14);
        assert!(s.is_continuous());
        let s = segment(&x, &indicator(), 0.3).unwrap();
        assert_eq!(s.eval(-0.9).unwrap().get(0, 0), 1.0);
        assert_eq!(s.eval(-0.5).unwrap().get(0, 0), 0.0);
        assert_relative_eq!(s.eval(-0.1).unwrap().get(0, 0), 0.2, epsilon = 1e-14);
    }
}
