//! Riemann–Stieltjes calculus for matrix- and vector-valued functions.

mod bv;
mod checks;
pub(crate) mod integral;
mod piecewise;

pub use bv::{Atom, BVFunction, Density};
pub use checks::{
    check_fubini, check_minkowski, check_sharp_estimate, check_shifted_fubini, Bivariate,
    BivariatePoly, Check,
};
pub use integral::{rs_convolution, rs_integral, rs_integral_between, volterra, Quad};
pub use piecewise::PiecewiseFunction;

pub(crate) use piecewise::merge_points;

use crate::error::Result;
use crate::linalg::Mat;
use crate::scalar::{near, Real};

/// Which one-sided limit to take at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A function of time that can be integrated against a BV integrator.
pub trait TimeFunction<T: Real>: Sync {
    fn shape(&self) -> (usize, usize);
    fn domain(&self) -> (T, T);
    fn eval(&self, t: T) -> Result<Mat<T>>;

    fn limit(&self, t: T, _side: Side) -> Result<Mat<T>> {
        self.eval(t)
    }

    /// Points where the function is not smooth (pieces, grid nodes).
    fn breakpoints(&self) -> Vec<T>;

    /// Points where the function jumps.
    fn jumps(&self) -> Vec<T> {
        Vec::new()
    }

    /// Polynomial degree between breakpoints, when known.
    fn piece_degree(&self) -> Option<usize> {
        None
    }
}

/// Integration endpoint: an abscissa, possibly approached from one side.
///
/// Endpoints and atoms are compared lexicographically on `(at, offset)`:
/// a left limit sits just before every atom at `at`, a right limit just
/// after it. An atom sitting on the left end of its integrator's domain is
/// a jump at `start+` and sorts after the exact endpoint `start`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Endpoint<T> {
    pub at: T,
    pub side: Option<Side>,
}

impl<T: Real> Endpoint<T> {
    pub fn exact(at: T) -> Self {
        Self { at, side: None }
    }

    pub fn left(at: T) -> Self {
        Self {
            at,
            side: Some(Side::Left),
        }
    }

    pub fn right(at: T) -> Self {
        Self {
            at,
            side: Some(Side::Right),
        }
    }

    pub(crate) fn key(&self) -> (T, i8) {
        let off = match self.side {
            None => 0,
            Some(Side::Left) => -2,
            Some(Side::Right) => 2,
        };
        (self.at, off)
    }
}

/// Strict lexicographic comparison with coincidence tolerance on the abscissa.
pub(crate) fn key_lt<T: Real>(a: (T, i8), b: (T, i8)) -> bool {
    if near(a.0, b.0) {
        a.1 < b.1
    } else {
        a.0 < b.0
    }
}
