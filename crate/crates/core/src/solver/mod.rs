//! Mild solutions by two independent routes, a classical method-of-steps
//! solver for continuous histories, and the fundamental matrix.

mod classical;
mod config;
mod forced;
mod grid;
mod mild;

pub use classical::solve_classical;
pub use config::SolverConfig;
pub use forced::solve_forced_dde;
pub use grid::{build_grid, propagate_breakpoints};
pub use mild::{fundamental_matrix, solve_mild};

use crate::error::{Error, Result};
use crate::model::Kernel;
use crate::poly::MatPoly;
use crate::quadrature::GaussLegendre;
use crate::rs_calculus::Density;
use crate::scalar::{near, Real};

/// The kernel in lag form `u = -θ ∈ [0, r]` (the reflected kernel `η̌`):
/// atoms `(u, J)` and density pieces `(u0, u1, p)` with `p` in `u - u0`.
pub(crate) struct LagKernel<T> {
    n: usize,
    atoms: Vec<(T, Vec<T>)>,
    pieces: Vec<(T, T, MatPoly<T>)>,
    edges: Vec<T>,
    rule: GaussLegendre<T>,
}

impl<T: Real> LagKernel<T> {
    /// `extra` is the polynomial degree of the integrand on a cell.
    pub fn new(kernel: &Kernel<T>, extra: usize) -> Result<Self> {
        let check = kernel.reflect();
        let atoms = check
            .atoms()
            .iter()
            .map(|a| (a.at, a.jump.as_slice().to_vec()))
            .collect();
        let mut pieces = Vec::new();
        let mut deg = 0;
        for (lo, hi, d) in check.density_pieces() {
            match d {
                Density::Poly(p) if p.is_zero() => {}
                Density::Poly(p) => {
                    deg = deg.max(p.degree());
                    pieces.push((lo, hi, p.clone()));
                }
                Density::OpNorm(_) => {
                    return Err(Error::InvalidInput("kernel density must be polynomial".into()));
                }
            }
        }
        let edges = pieces.iter().flat_map(|(a, b, _)| [*a, *b]).collect();
        Ok(Self {
            n: kernel.dim(),
            atoms,
            pieces,
            edges,
            rule: GaussLegendre::for_degree(deg + extra),
        })
    }

    /// `acc += ∫ ρ̌(t - s) v(s) ds` over `s ∈ [s_lo, s_hi]` intersected with
    /// grid cells `j_lo..j_hi`; `v` must be polynomial on each cell.
    #[allow(clippy::too_many_arguments)]
    pub fn density_over(
        &self,
        t: T,
        s_lo: T,
        s_hi: T,
        grid: &[T],
        cells: std::ops::Range<usize>,
        v: &mut dyn FnMut(T, &mut [T]),
        acc: &mut [T],
    ) {
        if self.pieces.is_empty() {
            return;
        }
        let n = self.n;
        let mut m = vec![T::zero(); n * n];
        let mut val = vec![T::zero(); n];
        let mut cuts = Vec::with_capacity(self.edges.len() + 2);
        for j in cells {
            let a = grid[j].max(s_lo);
            let b = grid[j + 1].min(s_hi);
            if b <= a {
                continue;
            }
            cuts.clear();
            cuts.push(a);
            for &e in &self.edges {
                let s = t - e;
                if s > a && s < b && !near(s, a) && !near(s, b) {
                    cuts.push(s);
                }
            }
            cuts.push(b);
            cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
            for w in cuts.windows(2) {
                let (c0, c1) = (w[0], w[1]);
                let um = t - (c0 + c1) * T::lit(0.5);
                let Some((u0, _, p)) = self.pieces.iter().find(|(lo, hi, _)| um >= *lo && um <= *hi) else {
                    continue;
                };
                for (x, wt) in self.rule.mapped(c0, c1) {
                    p.eval_into(t - x - *u0, &mut m);
                    v(x, &mut val);
                    for i in 0..n {
                        let mut s = T::zero();
                        for k in 0..n {
                            s = s + m[i * n + k] * val[k];
                        }
                        acc[i] = acc[i] + wt * s;
                    }
                }
            }
        }
    }
}

#[inline]
pub(crate) fn matvec_acc<T: Real>(m: &[T], v: &[T], acc: &mut [T]) {
    let n = v.len();
    for (i, a) in acc.iter_mut().enumerate() {
        let mut s = T::zero();
        for k in 0..n {
            s = s + m[i * n + k] * v[k];
        }
        *a = *a + s;
    }
}

/// Largest relative change between fixed-point iterates.
pub(crate) fn rel_change<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs() / (T::one() + x.abs()))
        .fold(T::zero(), T::max)
}
