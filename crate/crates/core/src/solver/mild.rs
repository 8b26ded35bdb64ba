use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forcing::MildForcing;
use crate::linalg::Mat;
use crate::model::{History, Interp, Kernel, Trajectory};
use crate::rs_calculus::Quad;
use crate::scalar::{near, Real};
use crate::solver::config::check_horizon;
use crate::solver::grid::{build_grid, propagate_breakpoints, Nodes};
use crate::solver::{rel_change, LagKernel, SolverConfig};

/// Grid for a history-driven problem: forcing breakpoints propagated along
/// the kernel lags.
pub(crate) fn plan_grid<T: Real>(
    forcing: &MildForcing<T>,
    horizon: T,
    cfg: &SolverConfig,
) -> (Vec<T>, Vec<usize>) {
    let breaks = propagate_breakpoints(forcing.kernel(), forcing.breakpoints(), horizon);
    build_grid(cfg.h_as(), horizon, &breaks, cfg.align_breakpoints)
}

/// Mild solution from `x(t) = φ(0) + (dη̌ ∗ 𝒱x)(t) + G(t; φ)`.
///
/// `𝒱x` is integrated exactly for the piecewise linear interpolant of the
/// nodal values (the trapezoidal rule at the nodes); each node is resolved
/// by fixed-point iteration.
pub fn solve_mild<T: Real>(kernel: &Kernel<T>, phi: &History<T>, horizon: T, cfg: &SolverConfig) -> Result<Trajectory<T>> {
    cfg.validate()?;
    check_horizon(horizon)?;
    let forcing = MildForcing::new(kernel, phi, Quad::new(cfg.quad_order, 1))?;
    let (grid, breaks) = plan_grid(&forcing, horizon, cfg);
    let lag = LagKernel::new(kernel, 2)?;
    let n = kernel.dim();
    let x0 = phi.value_at_zero().as_slice().to_vec();
    let mut nodes = Nodes::new(&grid, n);
    nodes.set_x(0, &x0);
    let tol = cfg.tol_as::<T>();
    let r = kernel.r();
    let mut y = vec![T::zero(); n];
    let mut fixed = vec![T::zero(); n];
    let mut trial = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    for k in 1..grid.len() {
        let t = grid[k];
        // everything not depending on x_k: φ(0), G, density over finished cells
        fixed.copy_from_slice(&x0);
        let g = forcing.big_g(t)?;
        for (f, &v) in fixed.iter_mut().zip(g.as_slice()) {
            *f = *f + v;
        }
        let s_lo = (t - r).max(T::zero());
        let j_lo = nodes.cell(s_lo, k);
        {
            let nd = &nodes;
            lag.density_over(t, s_lo, grid[k - 1], &grid, j_lo..k - 1, &mut |s, out| nd.y_at(s, k - 1, out), &mut fixed);
        }
        trial.copy_from_slice(nodes.x(k - 1));
        if k >= 2 {
            let w = (t - grid[k - 1]) / (grid[k - 1] - grid[k - 2]);
            for i in 0..n {
                let a = nodes.x[(k - 1) * n + i];
                let b = nodes.x[(k - 2) * n + i];
                trial[i] = a + w * (a - b);
            }
        }
        let mut converged = false;
        let mut change = T::infinity();
        for _ in 0..cfg.picard_max {
            nodes.set_x(k, &trial);
            next.copy_from_slice(&fixed);
            for (u, jump) in &lag.atoms {
                let s = t - *u;
                if s > T::zero() && !near(s, T::zero()) {
                    nodes.y_at(s, k, &mut y);
                    super::matvec_acc(jump, &y, &mut next);
                }
            }
            {
                let nd = &nodes;
                lag.density_over(t, s_lo, t, &grid, k - 1..k, &mut |s, out| nd.y_at(s, k, out), &mut next);
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
    Ok(Trajectory::from_flat(grid.clone(), values, (n, 1), breaks, Interp::Linear))
}

/// `X(t)`, whose column `i` is the mild solution for `φ = ê_i`.
pub fn fundamental_matrix<T: Real>(kernel: &Kernel<T>, horizon: T, cfg: &SolverConfig) -> Result<Trajectory<T>> {
    let n = kernel.dim();
    let r = kernel.r();
    let columns: Vec<Trajectory<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut e = Mat::zeros(n, 1);
            e.set(i, 0, T::one());
            solve_mild(kernel, &History::instantaneous(r, e)?, horizon, cfg)
        })
        .collect::<Result<_>>()?;
    let first = &columns[0];
    let len = first.len();
    let mut values = vec![T::zero(); len * n * n];
    for (j, col) in columns.iter().enumerate() {
        for k in 0..len {
            let v = col.value(k);
            for i in 0..n {
                values[k * n * n + i * n + j] = v[i];
            }
        }
    }
    Ok(Trajectory::from_flat(
        first.grid().to_vec(),
        values,
        (n, n),
        first.breakpoints().to_vec(),
        Interp::Linear,
    ))
}
