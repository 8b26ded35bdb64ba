use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::poly::MatPoly;
use crate::rs_calculus::{Side, TimeFunction};
use crate::scalar::{coincide_tol, Real};

/// Interpolation between grid nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Interp {
    /// Piecewise linear.
    Linear,
    /// Piecewise cubic Hermite with second-order finite-difference slopes,
    /// one-sided at flagged breakpoints.
    Cubic,
}

impl Interp {
    pub fn order(self) -> usize {
        match self {
            Interp::Linear => 1,
            Interp::Cubic => 3,
        }
    }
}

/// Grid-sampled function on `[0, T]` with flagged breakpoint nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    grid: Vec<T>,
    values: Vec<T>,
    rows: usize,
    cols: usize,
    breakpoints: Vec<usize>,
    interp: Interp,
}

impl<T: Real> Trajectory<T> {
    pub fn new(grid: Vec<T>, values: Vec<Mat<T>>, mut breakpoints: Vec<usize>, interp: Interp) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::InvalidInput("trajectory needs one value per grid node".into()));
        }
        if grid[0] != T::zero() {
            return Err(Error::InvalidInput("trajectory grid must start at 0".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("trajectory grid must be strictly increasing".into()));
        }
        let (rows, cols) = values[0].shape();
        if values.iter().any(|v| v.shape() != (rows, cols)) {
            return Err(Error::ShapeMismatch("trajectory values of differing shapes".into()));
        }
        breakpoints.sort_unstable();
        breakpoints.dedup();
        if breakpoints.last().is_some_and(|&b| b >= grid.len()) {
            return Err(Error::InvalidInput("breakpoint index outside the grid".into()));
        }
        let values = values.into_iter().flat_map(Mat::into_vec).collect();
        Ok(Self {
            grid,
            values,
            rows,
            cols,
            breakpoints,
            interp,
        })
    }

    pub(crate) fn from_flat(
        grid: Vec<T>,
        values: Vec<T>,
        shape: (usize, usize),
        breakpoints: Vec<usize>,
        interp: Interp,
    ) -> Self {
        debug_assert_eq!(values.len(), grid.len() * shape.0 * shape.1);
        Self {
            grid,
            values,
            rows: shape.0,
            cols: shape.1,
            breakpoints,
            interp,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn horizon(&self) -> T {
        *self.grid.last().expect("non-empty grid")
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn stride(&self) -> usize {
        self.rows * self.cols
    }

    /// Flat (row-major) value at node `k`.
    pub fn value(&self, k: usize) -> &[T] {
        let s = self.stride();
        &self.values[k * s..(k + 1) * s]
    }

    pub fn value_mat(&self, k: usize) -> Mat<T> {
        Mat::from_vec(self.rows, self.cols, self.value(k).to_vec()).expect("consistent stride")
    }

    /// Indices of flagged breakpoint nodes.
    pub fn breakpoints(&self) -> &[usize] {
        &self.breakpoints
    }

    pub fn breakpoint_times(&self) -> Vec<T> {
        self.breakpoints.iter().map(|&k| self.grid[k]).collect()
    }

    pub fn is_breakpoint(&self, k: usize) -> bool {
        self.breakpoints.binary_search(&k).is_ok()
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    /// Column `j` of a matrix-valued trajectory.
    pub fn column(&self, j: usize) -> Result<Self> {
        if j >= self.cols {
            return Err(Error::InvalidInput(format!("column {j} out of range")));
        }
        let mut values = Vec::with_capacity(self.len() * self.rows);
        for k in 0..self.len() {
            let v = self.value(k);
            values.extend((0..self.rows).map(|i| v[i * self.cols + j]));
        }
        Ok(Self::from_flat(
            self.grid.clone(),
            values,
            (self.rows, 1),
            self.breakpoints.clone(),
            self.interp,
        ))
    }

    /// Cell index `k` with `grid[k] <= t <= grid[k+1]`, preferring the cell
    /// on `side` when `t` is a node.
    pub fn cell_of(&self, t: T, side: Side) -> usize {
        let n = self.grid.len();
        if n == 1 {
            return 0;
        }
        let k = self.grid.partition_point(|&g| g <= t);
        let k = k.saturating_sub(1).min(n - 2);
        if side == Side::Left && k > 0 && self.grid[k] == t {
            k - 1
        } else {
            k
        }
    }

    fn slope(&self, k: usize, i: usize) -> T {
        let s = self.stride();
        (self.values[(k + 1) * s + i] - self.values[k * s + i]) / (self.grid[k + 1] - self.grid[k])
    }

    fn smooth_through(&self, j: usize) -> bool {
        j > 0 && j + 1 < self.len() && !self.is_breakpoint(j)
    }

    /// Slope estimate at node `j` seen from cell `k` (`j ∈ {k, k+1}`).
    fn node_slope(&self, j: usize, k: usize, i: usize) -> T {
        let h = |c: usize| self.grid[c + 1] - self.grid[c];
        if self.smooth_through(j) {
            let (a, b) = (j - 1, j);
            return (h(b) * self.slope(a, i) + h(a) * self.slope(b, i)) / (h(a) + h(b));
        }
        if j == k {
            if self.smooth_through(k + 1) {
                let (d0, d1) = (self.slope(k, i), self.slope(k + 1, i));
                return d0 - (d1 - d0) * h(k) / (h(k) + h(k + 1));
            }
        } else if k > 0 && self.smooth_through(k) {
            let (d0, d1) = (self.slope(k - 1, i), self.slope(k, i));
            return d1 + (d1 - d0) * h(k) / (h(k - 1) + h(k));
        }
        self.slope(k, i)
    }

    /// Interpolant on cell `k` in the local variable `s = t - grid[k]`.
    pub fn cell_poly(&self, k: usize) -> MatPoly<T> {
        let (x0, x1) = (self.value_mat(k), self.value_mat(k + 1));
        let h = self.grid[k + 1] - self.grid[k];
        match self.interp {
            Interp::Linear => MatPoly::line_through(T::zero(), &x0, h, &x1),
            Interp::Cubic => {
                let n = self.stride();
                let mut c1 = vec![T::zero(); n];
                let mut c2 = vec![T::zero(); n];
                let mut c3 = vec![T::zero(); n];
                for i in 0..n {
                    let d = self.slope(k, i);
                    let m0 = self.node_slope(k, k, i);
                    let m1 = self.node_slope(k + 1, k, i);
                    c1[i] = m0;
                    c2[i] = (T::lit(3.0) * d - T::lit(2.0) * m0 - m1) / h;
                    c3[i] = (m0 + m1 - T::lit(2.0) * d) / (h * h);
                }
                let m = |v: Vec<T>| Mat::from_vec(self.rows, self.cols, v).expect("stride");
                MatPoly::new(vec![x0, m(c1), m(c2), m(c3)]).expect("same shapes")
            }
        }
    }

    /// Interpolated value written into `out`.
    pub fn eval_into(&self, t: T, out: &mut [T]) -> Result<()> {
        let end = self.horizon();
        if t.is_nan() || t < -coincide_tol(end) || t > end + coincide_tol(end) {
            return Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                start: 0.0,
                end: end.to_f64_lossy(),
            });
        }
        if self.len() == 1 {
            out.copy_from_slice(self.value(0));
            return Ok(());
        }
        let k = self.cell_of(t, Side::Right);
        match self.interp {
            Interp::Linear => {
                let (t0, t1) = (self.grid[k], self.grid[k + 1]);
                let w = ((t - t0) / (t1 - t0)).clamp(T::zero(), T::one());
                let (a, b) = (self.value(k), self.value(k + 1));
                for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                    *o = x + w * (y - x);
                }
            }
            Interp::Cubic => self.cell_poly(k).eval_into(t - self.grid[k], out),
        }
        Ok(())
    }

    pub fn eval(&self, t: T) -> Result<Mat<T>> {
        let mut out = Mat::zeros(self.rows, self.cols);
        self.eval_into(t, out.as_mut_slice())?;
        Ok(out)
    }

    /// Largest nodal distance `max_k |x_k - y(t_k)|` with `y` interpolated.
    pub fn max_abs_diff(&self, other: &Trajectory<T>) -> Result<T> {
        let mut buf = vec![T::zero(); other.stride()];
        let mut worst = T::zero();
        for (k, &t) in self.grid.iter().enumerate() {
            other.eval_into(t, &mut buf)?;
            worst = worst.max(crate::linalg::vec_dist(self.value(k), &buf));
        }
        Ok(worst)
    }

    /// Applies `f` to every nodal value.
    pub fn map_values(&self, f: impl Fn(T, &[T]) -> Vec<T>) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        let mut shape = None;
        for (k, &t) in self.grid.iter().enumerate() {
            let v = f(t, self.value(k));
            if *shape.get_or_insert(v.len()) != v.len() {
                return Err(Error::ShapeMismatch("map changed the value length".into()));
            }
            values.extend(v);
        }
        let len = shape.unwrap_or(0);
        Ok(Self::from_flat(self.grid.clone(), values, (len, 1), self.breakpoints.clone(), self.interp))
    }
}

impl<T: Real> TimeFunction<T> for Trajectory<T> {
    fn shape(&self) -> (usize, usize) {
        Trajectory::shape(self)
    }

    fn domain(&self) -> (T, T) {
        (T::zero(), self.horizon())
    }

    fn eval(&self, t: T) -> Result<Mat<T>> {
        Trajectory::eval(self, t)
    }

    fn breakpoints(&self) -> Vec<T> {
        self.grid[1..self.grid.len().saturating_sub(1)].to_vec()
    }

    fn piece_degree(&self) -> Option<usize> {
        Some(self.interp.order())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square(interp: Interp) -> Trajectory<f64> {
        let grid: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25).collect();
        let values = grid.iter().map(|&t| Mat::scalar(t * t)).collect();
        Trajectory::new(grid, values, vec![], interp).unwrap()
    }

    #[test]
    fn linear_interpolation() {
        let x = square(Interp::Linear);
        assert_relative_eq!(x.eval(0.125).unwrap().get(0, 0), 0.03125, epsilon = 1e-15);
        assert_eq!(x.eval(2.0).unwrap().get(0, 0), 4.0);
        assert!(x.eval(2.1).is_err());
    }

    #[test]
    fn cubic_reproduces_quadratics() {
        let x = square(Interp::Cubic);
        for &t in &[0.1, 0.3, 0.99, 1.6, 1.97] {
            assert_relative_eq!(x.eval(t).unwrap().get(0, 0), t * t, epsilon = 1e-13);
        }
    }

    #[test]
    fn cubic_respects_breakpoints() {
        // |t - 1| with a flagged kink at t = 1
        let grid: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25).collect();
        let values = grid.iter().map(|&t| Mat::scalar((t - 1.0).abs())).collect();
        let x = Trajectory::new(grid, values, vec![4], Interp::Cubic).unwrap();
        for &t in &[0.6, 0.9, 1.1, 1.4] {
            assert_relative_eq!(x.eval(t).unwrap().get(0, 0), (t - 1.0f64).abs(), epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let v = vec![Mat::scalar(0.0), Mat::scalar(1.0)];
        assert!(Trajectory::new(vec![0.0, 0.0], v.clone(), vec![], Interp::Linear).is_err());
        assert!(Trajectory::new(vec![0.1, 0.2], v, vec![], Interp::Linear).is_err());
    }
}
