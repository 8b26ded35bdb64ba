use crate::error::{Error, Result};
use crate::forcing::MildForcing;
use crate::linalg::Mat;
use crate::model::{History, Interp, Kernel, Trajectory};
use crate::rs_calculus::{Quad, TimeFunction};
use crate::scalar::{near, Real};
use crate::solver::config::check_horizon;
use crate::solver::grid::Nodes;
use crate::solver::mild::plan_grid;
use crate::solver::{rel_change, SolverConfig};

/// The segment `x_t` on `[-r, 0]`: `φ` before time 0, the piecewise linear
/// interpolant of nodes `0..=upto` after.
struct SegmentView<'a, T> {
    phi: &'a History<T>,
    nodes: &'a Nodes<'a, T>,
    upto: usize,
    t: T,
    with_breaks: bool,
}

impl<T: Real> TimeFunction<T> for SegmentView<'_, T> {
    fn shape(&self) -> (usize, usize) {
        (self.nodes.n, 1)
    }

    fn domain(&self) -> (T, T) {
        (-self.phi.r(), T::zero())
    }

    fn eval(&self, theta: T) -> Result<Mat<T>> {
        let s = self.t + theta;
        if s < T::zero() && !near(s, T::zero()) {
            return self.phi.pieces().eval(s.max(-self.phi.r()));
        }
        let mut out = Mat::zeros(self.nodes.n, 1);
        self.nodes.x_at(s.max(T::zero()), self.upto, out.as_mut_slice());
        Ok(out)
    }

    fn breakpoints(&self) -> Vec<T> {
        if !self.with_breaks {
            return Vec::new();
        }
        let r = self.phi.r();
        let mut b: Vec<T> = self
            .phi
            .edges()
            .into_iter()
            .map(|e| e - self.t)
            .filter(|&th| th > -r && th < T::zero())
            .collect();
        b.extend(
            self.nodes.grid[..=self.upto]
                .iter()
                .map(|&g| g - self.t)
                .filter(|&th| th > -r && th < T::zero()),
        );
        b
    }

    fn piece_degree(&self) -> Option<usize> {
        Some(self.phi.pieces().max_degree().max(1))
    }
}

/// Classical solution of `ẋ(t) = L x_t` for continuous `φ`, advancing
/// `x(t) = φ(0) + ∫_0^t L x_s ds` along the grid with the trapezoidal rule.
///
/// Each `L x_s` is a full Riemann–Stieltjes integral over the segment built
/// from `φ` and the already computed values. Across one delay interval the
/// segment is known data, and a lag shorter than the current step is handled
/// by iterating on the new node.
pub fn solve_classical<T: Real>(kernel: &Kernel<T>, phi: &History<T>, horizon: T, cfg: &SolverConfig) -> Result<Trajectory<T>> {
    cfg.validate()?;
    check_horizon(horizon)?;
    if let Some(&at) = phi.jumps().first() {
        return Err(Error::NotContinuous { at: at.to_f64_lossy() });
    }
    let quad = Quad::new(cfg.quad_order, 1);
    let forcing = MildForcing::new(kernel, phi, quad)?;
    let (grid, breaks) = plan_grid(&forcing, horizon, cfg);
    let n = kernel.dim();
    let dense = kernel.eta().has_density();
    let mut nodes = Nodes::new(&grid, n);
    nodes.set_x(0, phi.value_at_zero().as_slice());
    let tol = cfg.tol_as::<T>();
    let apply = |nodes: &Nodes<'_, T>, upto: usize, t: T| -> Result<Mat<T>> {
        let view = SegmentView {
            phi,
            nodes,
            upto,
            t,
            with_breaks: dense,
        };
        kernel.apply_l(&view, quad)
    };
    let mut l_prev = apply(&nodes, 0, T::zero())?;
    let mut trial = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    for k in 1..grid.len() {
        let t = grid[k];
        let half = (t - grid[k - 1]) * T::lit(0.5);
        for i in 0..n {
            trial[i] = nodes.x[(k - 1) * n + i] + (half + half) * l_prev.as_slice()[i];
        }
        let mut converged = false;
        let mut change = T::infinity();
        for _ in 0..cfg.picard_max {
            nodes.set_x(k, &trial);
            let l_new = apply(&nodes, k, t)?;
            for i in 0..n {
                next[i] = nodes.x[(k - 1) * n + i] + half * (l_prev.as_slice()[i] + l_new.as_slice()[i]);
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
        l_prev = apply(&nodes, k, t)?;
    }
    let values = nodes.x;
    Ok(Trajectory::from_flat(grid.clone(), values, (n, 1), breaks, Interp::Linear))
}
