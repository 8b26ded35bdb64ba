//! Grid-scale certificates of regularity: absolute-continuity modulus,
//! Lipschitz estimates, derivative norms and residuals of the a.e.
//! differential equation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::linalg::{vec_dist, vec_norm, Mat};
use crate::model::{History, Interp, Kernel, Trajectory};
use crate::rs_calculus::{rs_integral, PiecewiseFunction, Quad, Side, TimeFunction};
use crate::scalar::{near, Real};

/// Which memory window the residual uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ResidualMode {
    /// `ẋ(t) - ∫_{-t}^0 dη(θ) x(t + θ) - f(t)` on `(0, T)`.
    Truncated,
    /// `ẋ(t) - L x_t` on `[r, T]`.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResidualStats<T> {
    pub max: T,
    pub l1: T,
    pub samples: usize,
    /// Where the largest residual occurred.
    pub argmax: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RegularityReport<T> {
    pub ac_table: Vec<(T, T)>,
    pub lip_estimate: T,
    pub deriv_lp_norms: Vec<T>,
    pub residual_stats: ResidualStats<T>,
}

fn increment<T: Real>(x: &Trajectory<T>, k: usize) -> T {
    vec_dist(x.value(k + 1), x.value(k))
}

/// For each `δ` (sorted decreasingly, duplicates dropped): the largest
/// `Σ |Δx|` found by greedily taking the steepest grid cells until their
/// total length is `δ`, the last one fractionally.
pub fn ac_modulus<T: Real>(x: &Trajectory<T>, deltas: &[T]) -> Vec<(T, T)> {
    let grid = x.grid();
    let mut cells: Vec<(T, T)> = (0..grid.len().saturating_sub(1))
        .map(|k| (grid[k + 1] - grid[k], increment(x, k)))
        .collect();
    cells.sort_by(|a, b| (b.1 / b.0).partial_cmp(&(a.1 / a.0)).expect("finite slopes"));
    let mut ds: Vec<T> = deltas.iter().copied().filter(|d| *d > T::zero()).collect();
    ds.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    ds.dedup();
    ds.into_iter()
        .map(|delta| {
            let mut left = delta;
            let mut total = T::zero();
            for &(len, dx) in &cells {
                if left <= T::zero() {
                    break;
                }
                let take = len.min(left);
                total = total + dx * take / len;
                left = left - take;
            }
            (delta, total)
        })
        .collect()
}

/// `max_k |x_{k+1} - x_k| / (t_{k+1} - t_k)`.
pub fn lipschitz_estimate<T: Real>(x: &Trajectory<T>) -> T {
    let grid = x.grid();
    (0..grid.len().saturating_sub(1))
        .map(|k| increment(x, k) / (grid[k + 1] - grid[k]))
        .fold(T::zero(), T::max)
}

/// `L^p` norm of the difference-quotient derivative on `levels` grids,
/// coarsest first; level `ℓ` keeps every `2^{levels-1-ℓ}`-th node plus the
/// flagged breakpoints and the last node.
pub fn derivative_lp<T: Real>(x: &Trajectory<T>, p: T, levels: usize) -> Vec<T> {
    let grid = x.grid();
    let last = grid.len() - 1;
    (0..levels)
        .map(|l| {
            let stride = 1usize << (levels - 1 - l);
            let keep: Vec<usize> = (0..=last)
                .filter(|&k| k % stride == 0 || k == last || x.is_breakpoint(k))
                .collect();
            let mut acc = T::zero();
            for w in keep.windows(2) {
                let dt = grid[w[1]] - grid[w[0]];
                let q = vec_dist(x.value(w[1]), x.value(w[0])) / dt;
                if p.is_infinite() {
                    acc = acc.max(q);
                } else {
                    acc = acc + q.powf(p) * dt;
                }
            }
            if p.is_infinite() {
                acc
            } else {
                acc.powf(T::one() / p)
            }
        })
        .collect()
}

/// `θ ↦ x(t + θ)` read from a trajectory on the window where `t + θ >= 0`.
struct Window<'a, T> {
    x: &'a Trajectory<T>,
    t: T,
    r: T,
    breaks: bool,
}

impl<T: Real> TimeFunction<T> for Window<'_, T> {
    fn shape(&self) -> (usize, usize) {
        self.x.shape()
    }

    fn domain(&self) -> (T, T) {
        (-self.r, T::zero())
    }

    fn eval(&self, theta: T) -> Result<Mat<T>> {
        self.x.eval((self.t + theta).max(T::zero()))
    }

    fn breakpoints(&self) -> Vec<T> {
        if !self.breaks {
            return Vec::new();
        }
        self.x
            .grid()
            .iter()
            .map(|&g| g - self.t)
            .filter(|&th| th > -self.r && th < T::zero())
            .collect()
    }

    fn piece_degree(&self) -> Option<usize> {
        Some(self.x.interp().order())
    }
}

/// Residual of the a.e. differential equation at grid nodes, by central
/// differences, skipping nodes within two cell widths of a breakpoint of
/// `x` or `f`.
pub fn de_residual<T: Real>(
    kernel: &Kernel<T>,
    x: &Trajectory<T>,
    f: &dyn Forcing<T>,
    mode: ResidualMode,
    quad: Quad,
) -> Result<ResidualStats<T>> {
    let (rows, cols) = x.shape();
    if rows != kernel.dim() {
        return Err(Error::ShapeMismatch("trajectory and kernel sizes differ".into()));
    }
    let grid = x.grid();
    let r = kernel.r();
    let h = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(T::zero(), T::max);
    let guard = h * T::lit(2.0);
    let mut flagged = x.breakpoint_times();
    flagged.extend(f.breakpoints());
    flagged.push(r);
    flagged.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let dense = kernel.eta().has_density();
    let mut stats = ResidualStats {
        max: T::zero(),
        l1: T::zero(),
        samples: 0,
        argmax: T::zero(),
    };
    for k in 1..grid.len().saturating_sub(1) {
        let t = grid[k];
        let i = flagged.partition_point(|&b| b < t - guard);
        if i < flagged.len() && flagged[i] <= t + guard {
            continue;
        }
        if mode == ResidualMode::Full && t < r + guard {
            continue;
        }
        let dt = grid[k + 1] - grid[k - 1];
        let window = Window { x, t, r, breaks: dense };
        let lo = (-t).max(-r);
        let mem = rs_integral(kernel.eta(), &window, lo, T::zero(), quad)?;
        let mut res = vec![T::zero(); rows * cols];
        let (a, b) = (x.value(k - 1), x.value(k + 1));
        for (j, v) in res.iter_mut().enumerate() {
            *v = (b[j] - a[j]) / dt - mem.as_slice()[j];
        }
        if mode == ResidualMode::Truncated {
            let fv = f.limit(t, Side::Right)?;
            if cols == 1 {
                for (v, &q) in res.iter_mut().zip(fv.as_slice()) {
                    *v = *v - q;
                }
            }
        }
        let e = vec_norm(&res);
        if e > stats.max {
            stats.max = e;
            stats.argmax = t;
        }
        stats.l1 = stats.l1 + e * dt * T::lit(0.5);
        stats.samples += 1;
    }
    Ok(stats)
}

/// `M(t) = L ∫_0^t x_s ds` at `times` (which must start at 0), where `x_s`
/// is built from `φ` and the interpolant of `x`.
///
/// For a mild solution `x(t) = φ(0) + M(t)`.
pub fn memory_functional<T: Real>(
    kernel: &Kernel<T>,
    phi: &History<T>,
    x: &Trajectory<T>,
    times: &[T],
    quad: Quad,
) -> Result<Trajectory<T>> {
    let r = kernel.r();
    let end = x.horizon();
    let mut pieces: Vec<((T, T), _)> = phi
        .pieces()
        .pieces()
        .map(|(a, b, q)| ((a, b), q.clone()))
        .collect();
    let grid = x.grid();
    for k in 0..grid.len().saturating_sub(1) {
        pieces.push(((grid[k], grid[k + 1]), x.cell_poly(k)));
    }
    let z = PiecewiseFunction::from_local(pieces)?;
    let big = z.antiderivative_from(T::zero())?;
    let base = big.restrict(-r, T::zero())?;
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        if t < T::zero() || (t > end && !near(t, end)) {
            return Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                start: 0.0,
                end: end.to_f64_lossy(),
            });
        }
        let t = t.min(end);
        if near(t, T::zero()) {
            values.push(Mat::zeros(kernel.dim(), 1));
            continue;
        }
        let moved = big.restrict(t - r, t)?.shifted(t);
        let w = moved.sub(&base)?;
        values.push(kernel.apply_l(&w, quad)?);
    }
    Trajectory::new(times.to_vec(), values, Vec::new(), Interp::Linear)
}

/// All grid-scale certificates for one trajectory.
#[allow(clippy::too_many_arguments)]
pub fn regularity_report<T: Real>(
    kernel: &Kernel<T>,
    x: &Trajectory<T>,
    f: &dyn Forcing<T>,
    p: T,
    deltas: &[T],
    levels: usize,
    quad: Quad,
) -> Result<RegularityReport<T>> {
    Ok(RegularityReport {
        ac_table: ac_modulus(x, deltas),
        lip_estimate: lipschitz_estimate(x),
        deriv_lp_norms: derivative_lp(x, p, levels),
        residual_stats: de_residual(kernel, x, f, ResidualMode::Truncated, quad)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::ZeroForcing;
    use approx::assert_relative_eq;

    fn traj(n: usize, f: impl Fn(f64) -> f64) -> Trajectory<f64> {
        let grid: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let values = grid.iter().map(|&t| Mat::scalar(f(t))).collect();
        Trajectory::new(grid, values, vec![], Interp::Linear).unwrap()
    }

    #[test]
    fn ac_of_identity_and_step() {
        let x = traj(100, |t| t);
        for (d, v) in ac_modulus(&x, &[0.1, 0.05, 0.2]) {
            assert_relative_eq!(v, d, epsilon = 1e-12);
        }
        let table = ac_modulus(&x, &[0.1, 0.05, 0.2]);
        assert!(table.windows(2).all(|w| w[0].0 > w[1].0));
        let step = traj(101, |t| if t < 0.5 { 0.0 } else { 1.0 });
        // a grid-scale jump occupies one cell of width 1/101
        assert!(ac_modulus(&step, &[1.0 / 101.0])[0].1 >= 1.0 - 1e-12);
    }

    #[test]
    fn lipschitz() {
        assert_relative_eq!(lipschitz_estimate(&traj(10, |t| 3.0 * t)), 3.0, epsilon = 1e-12);
        assert_eq!(lipschitz_estimate(&traj(10, |_| 2.0)), 0.0);
    }

    #[test]
    fn derivative_norm_of_square() {
        let x = traj(1024, |t| t * t);
        let norms = derivative_lp(&x, 2.0, 4);
        assert_eq!(norms.len(), 4);
        assert_relative_eq!(norms[3], 2.0 / 3f64.sqrt(), epsilon = 1e-5);
        let step = traj(1024, |t| if t < 0.5 { 0.0 } else { 1.0 });
        let s = derivative_lp(&step, 2.0, 4);
        assert!(s.windows(2).all(|w| w[1] > w[0] * 1.3));
    }

    #[test]
    fn residual_detects_spike() {
        let k = Kernel::zero(1, 1.0).unwrap();
        let x = traj(100, |_| 1.0);
        let z = ZeroForcing { n: 1 };
        let ok = de_residual(&k, &x, &z, ResidualMode::Truncated, Quad::default()).unwrap();
        assert_eq!(ok.max, 0.0);
        let bumped = x.map_values(|t, v| vec![v[0] + if (t - 0.5).abs() < 1e-12 { 1.0 } else { 0.0 }]).unwrap();
        let bad = de_residual(&k, &bumped, &z, ResidualMode::Truncated, Quad::default()).unwrap();
        assert!(bad.max > 10.0);
    }
}
