use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::linalg::Mat;
use crate::model::{Interp, Kernel, Trajectory};
use crate::rs_calculus::Side;
use crate::scalar::{near, Real};
use crate::solver::config::check_horizon;
use crate::solver::grid::{build_grid, propagate_breakpoints, Nodes};
use crate::solver::{matvec_acc, rel_change, LagKernel, SolverConfig};

/// Truncated-memory right-hand side `∫_{-t}^0 dη(θ) x(t + θ)` as a one-sided
/// value at node `t`, using nodes `0..=upto`, plus `f(t±)`.
struct Rhs<'a, T> {
    lag: &'a LagKernel<T>,
    forcing: &'a dyn Forcing<T>,
}

impl<T: Real> Rhs<'_, T> {
    fn atoms(&self, nodes: &Nodes<'_, T>, t: T, side: Side, upto: usize, acc: &mut [T]) {
        let mut v = vec![T::zero(); nodes.n];
        for (u, jump) in &self.lag.atoms {
            let s = t - *u;
            let on_edge = near(s, T::zero());
            let inside = if on_edge { side == Side::Right } else { s > T::zero() };
            if inside {
                nodes.x_at(s.max(T::zero()), upto, &mut v);
                matvec_acc(jump, &v, acc);
            }
        }
    }

    fn forcing(&self, t: T, side: Side, acc: &mut [T]) -> Result<()> {
        let f = self.forcing.limit(t, side)?;
        if f.shape() != (acc.len(), 1) {
            return Err(Error::ShapeMismatch("forcing must be a column of the system size".into()));
        }
        for (a, &v) in acc.iter_mut().zip(f.as_slice()) {
            *a = *a + v;
        }
        Ok(())
    }
}

/// Solves `ẋ(t) = ∫_{-t}^0 dη(θ) x(t + θ) + f(t)`, `x(0) = x0`, with the
/// implicit trapezoidal rule. Memory before time 0 is not seen: the integral
/// is truncated at `θ = -t`.
///
/// The rule uses `F(t_{k-1}+)` and `F(t_k-)`, so jumps of `f` and atoms
/// entering the memory window at a node are taken from the correct side.
pub fn solve_forced_dde<T: Real>(
    kernel: &Kernel<T>,
    f: &dyn Forcing<T>,
    x0: &Mat<T>,
    horizon: T,
    cfg: &SolverConfig,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    check_horizon(horizon)?;
    let n = kernel.dim();
    if x0.shape() != (n, 1) || f.dim() != n {
        return Err(Error::ShapeMismatch("initial value and forcing must match the kernel size".into()));
    }
    let breaks = propagate_breakpoints(kernel, &f.breakpoints(), horizon);
    let (grid, flagged) = build_grid(cfg.h_as(), horizon, &breaks, cfg.align_breakpoints);
    let lag = LagKernel::new(kernel, 1)?;
    if !cfg.allow_boundary_atoms {
        for &t in &grid[1..] {
            if let Some((u, _)) = lag.atoms.iter().find(|(u, _)| *u > T::zero() && near(*u, t)) {
                return Err(Error::AtomAtTruncationBoundary {
                    t: t.to_f64_lossy(),
                    theta: (-*u).to_f64_lossy(),
                });
            }
        }
    }
    let rhs = Rhs { lag: &lag, forcing: f };
    let r = kernel.r();
    let mut nodes = Nodes::new(&grid, n);
    nodes.set_x(0, x0.as_slice());
    let tol = cfg.tol_as::<T>();
    let mut left = vec![T::zero(); n];
    let mut fixed = vec![T::zero(); n];
    let mut trial = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    for k in 1..grid.len() {
        let (t0, t) = (grid[k - 1], grid[k]);
        let half = (t - t0) * T::lit(0.5);
        // F(t_{k-1}+)
        left.iter_mut().for_each(|v| *v = T::zero());
        rhs.atoms(&nodes, t0, Side::Right, k - 1, &mut left);
        {
            let nd = &nodes;
            let lo = (t0 - r).max(T::zero());
            let j_lo = nd.cell(lo, k - 1);
            lag.density_over(t0, lo, t0, &grid, j_lo..k - 1, &mut |s, out| nd.x_at(s, k - 1, out), &mut left);
        }
        rhs.forcing(t0, Side::Right, &mut left)?;
        // parts of F(t_k-) that do not involve x_k
        fixed.iter_mut().for_each(|v| *v = T::zero());
        rhs.forcing(t, Side::Left, &mut fixed)?;
        let s_lo = (t - r).max(T::zero());
        let j_lo = nodes.cell(s_lo, k);
        {
            let nd = &nodes;
            lag.density_over(t, s_lo, t0, &grid, j_lo..k - 1, &mut |s, out| nd.x_at(s, k - 1, out), &mut fixed);
        }
        for i in 0..n {
            trial[i] = nodes.x[(k - 1) * n + i] + (half + half) * left[i];
        }
        let mut converged = false;
        let mut change = T::infinity();
        for _ in 0..cfg.picard_max {
            nodes.set_x(k, &trial);
            let mut fk = fixed.clone();
            rhs.atoms(&nodes, t, Side::Left, k, &mut fk);
            {
                let nd = &nodes;
                lag.density_over(t, s_lo, t, &grid, k - 1..k, &mut |s, out| nd.x_at(s, k, out), &mut fk);
            }
            for i in 0..n {
                next[i] = nodes.x[(k - 1) * n + i] + half * (left[i] + fk[i]);
            }
            change = rel_change(&next, &trial);
            trial.copy_from_slice(&next);
            if change <= tol {
                converged = true;
                break;
            }
        }
        nodes.set_x(k, &trial);
        if !converged {
            return Err(Error::PicardDivergence {
                step: k,
                t: t.to_f64_lossy(),
                residual: change.to_f64_lossy(),
                iterations: cfg.picard_max,
            });
        }
    }
    let values = nodes.x;
    Ok(Trajectory::from_flat(grid.clone(), values, (n, 1), flagged, Interp::Linear))
}
