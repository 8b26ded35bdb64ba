use crate::model::Kernel;
use crate::rs_calculus::merge_points;
use crate::scalar::{near, Real};

/// Upper bound on the number of propagated breakpoints.
const MAX_BREAKS: usize = 100_000;

/// Breakpoints in `(0, horizon)`: the seeds, their translates by sums of
/// kernel lags up to depth `⌈T/r⌉ + 1`, and the multiples of `r`.
pub fn propagate_breakpoints<T: Real>(kernel: &Kernel<T>, seeds: &[T], horizon: T) -> Vec<T> {
    let r = kernel.r();
    let inside = |t: T| t > T::zero() && t < horizon && !near(t, T::zero()) && !near(t, horizon);
    let mut set: Vec<T> = seeds.iter().copied().filter(|&t| inside(t)).collect();
    let mut m = 1;
    while r * T::from_usize_lossy(m) < horizon {
        set.push(r * T::from_usize_lossy(m));
        m += 1;
    }
    let delays = kernel.delays();
    let depth = (horizon / r).ceil().to_usize().unwrap_or(1) + 1;
    let mut frontier = merge_points(std::iter::once(T::zero()).chain(set.iter().copied()));
    for _ in 0..depth {
        let mut next = Vec::new();
        for &b in &frontier {
            for &d in &delays {
                let t = b + d;
                if inside(t) {
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        set.extend(next.iter().copied());
        set = merge_points(set);
        if set.len() > MAX_BREAKS {
            break;
        }
        frontier = merge_points(next);
    }
    merge_points(set.into_iter().filter(|&t| inside(t)))
}

/// Time grid on `[0, horizon]` with cells of length at most `h`; returns the
/// nodes and the indices of interior nodes that sit on a breakpoint.
///
/// Without alignment the grid is uniform and each breakpoint is flagged at
/// its nearest node.
pub fn build_grid<T: Real>(h: T, horizon: T, breaks: &[T], align: bool) -> (Vec<T>, Vec<usize>) {
    let cells = |len: T| -> usize {
        let c = (len / h - T::lit(1e-9)).ceil();
        c.to_usize().unwrap_or(1).max(1)
    };
    if !align {
        let n = cells(horizon);
        let step = horizon / T::from_usize_lossy(n);
        let mut grid: Vec<T> = (0..n).map(|k| step * T::from_usize_lossy(k)).collect();
        grid.push(horizon);
        let mut idx: Vec<usize> = breaks
            .iter()
            .map(|&b| (b / step).round().to_usize().unwrap_or(0).min(n))
            .filter(|&k| k > 0 && k < n)
            .collect();
        idx.dedup();
        return (grid, idx);
    }
    let mut cuts = vec![T::zero()];
    cuts.extend(breaks.iter().copied().filter(|&b| b > T::zero() && b < horizon));
    cuts.push(horizon);
    let cuts = merge_points(cuts);
    let mut grid = vec![T::zero()];
    let mut idx = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = cells(b - a);
        let step = (b - a) / T::from_usize_lossy(n);
        for k in 1..n {
            grid.push(a + step * T::from_usize_lossy(k));
        }
        grid.push(b);
        idx.push(grid.len() - 1);
    }
    idx.pop();
    (grid, idx)
}

/// Nodal values of an `n`-vector function on a growing grid, linearly
/// interpolated, together with the running integral `y = 𝒱x`.
pub(crate) struct Nodes<'a, T> {
    pub grid: &'a [T],
    pub n: usize,
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<'a, T: Real> Nodes<'a, T> {
    pub fn new(grid: &'a [T], n: usize) -> Self {
        Self {
            grid,
            n,
            x: vec![T::zero(); grid.len() * n],
            y: vec![T::zero(); grid.len() * n],
        }
    }

    pub fn x(&self, k: usize) -> &[T] {
        &self.x[k * self.n..(k + 1) * self.n]
    }

    pub fn set_x(&mut self, k: usize, v: &[T]) {
        self.x[k * self.n..(k + 1) * self.n].copy_from_slice(v);
        if k > 0 {
            let h = (self.grid[k] - self.grid[k - 1]) * T::lit(0.5);
            for i in 0..self.n {
                let yi = self.y[(k - 1) * self.n + i] + h * (self.x[(k - 1) * self.n + i] + v[i]);
                self.y[k * self.n + i] = yi;
            }
        }
    }

    /// Cell `j` with `grid[j] <= s <= grid[j+1]`, `j < upto`.
    pub fn cell(&self, s: T, upto: usize) -> usize {
        let j = self.grid[..=upto].partition_point(|&g| g <= s);
        j.saturating_sub(1).min(upto.saturating_sub(1))
    }

    /// `out = x(s)` for `s ∈ [0, grid[upto]]`.
    pub fn x_at(&self, s: T, upto: usize, out: &mut [T]) {
        if upto == 0 {
            out.copy_from_slice(self.x(0));
            return;
        }
        let j = self.cell(s, upto);
        let (t0, t1) = (self.grid[j], self.grid[j + 1]);
        let w = ((s - t0) / (t1 - t0)).clamp(T::zero(), T::one());
        let (a, b) = (self.x(j), self.x(j + 1));
        for i in 0..self.n {
            out[i] = a[i] + w * (b[i] - a[i]);
        }
    }

    /// `out = y(s)`, exact for the piecewise linear `x`.
    pub fn y_at(&self, s: T, upto: usize, out: &mut [T]) {
        if upto == 0 || s <= T::zero() {
            out.iter_mut().for_each(|o| *o = T::zero());
            return;
        }
        let j = self.cell(s, upto);
        let t0 = self.grid[j];
        let hj = self.grid[j + 1] - t0;
        let tau = (s - t0).clamp(T::zero(), hj);
        let n = self.n;
        for i in 0..n {
            let x0 = self.x[j * n + i];
            let x1 = self.x[(j + 1) * n + i];
            out[i] = self.y[j * n + i] + tau * x0 + tau * tau / (T::lit(2.0) * hj) * (x1 - x0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use approx::assert_relative_eq;

    #[test]
    fn single_delay_breakpoints() {
        let k = Kernel::single_delay(1.0, -1.0, Mat::scalar(-0.5)).unwrap();
        assert_eq!(propagate_breakpoints(&k, &[], 3.0), vec![1.0, 2.0]);
        let b = propagate_breakpoints(&k, &[0.5], 3.0);
        assert_eq!(b, vec![0.5, 1.0, 1.5, 2.0, 2.5]);
    }

    #[test]
    fn two_delays_combine() {
        let k = Kernel::from_parts(
            1,
            1.0,
            vec![(-1.0, Mat::scalar(1.0)), (-0.3, Mat::scalar(1.0))],
            vec![],
        )
        .unwrap();
        let b = propagate_breakpoints(&k, &[], 1.5);
        for t in [0.3f64, 0.6, 0.9, 1.0, 1.3] {
            assert!(b.iter().any(|&x| (x - t).abs() < 1e-12), "missing {t}");
        }
    }

    #[test]
    fn aligned_grid_hits_breakpoints() {
        let (g, idx) = build_grid(0.1, 1.0, &[0.35], true);
        assert!(g.iter().any(|&t| t == 0.35));
        assert_eq!(g[idx[0]], 0.35);
        assert!(g.windows(2).all(|w| w[1] - w[0] <= 0.1 + 1e-15));
        assert_eq!(*g.last().unwrap(), 1.0);
        let (u, idx) = build_grid(0.1, 1.0, &[0.35], false);
        assert_eq!(u.len(), 11);
        assert_eq!(idx.len(), 1);
    }

    #[test]
    fn running_integral_is_exact_for_linear_pieces() {
        let grid = [0.0, 0.5, 1.0];
        let mut nodes = Nodes::new(&grid, 1);
        for (k, &t) in grid.iter().enumerate() {
            nodes.set_x(k, &[2.0 * t]);
        }
        let mut out = [0.0];
        nodes.y_at(0.7, 2, &mut out);
        assert_relative_eq!(out[0], 0.49, epsilon = 1e-15);
        nodes.x_at(0.7, 2, &mut out);
        assert_relative_eq!(out[0], 1.4, epsilon = 1e-15);
    }
}
