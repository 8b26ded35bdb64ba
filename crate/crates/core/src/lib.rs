//! Mild solutions of autonomous linear retarded functional differential
//! equations `ẋ(t) = L x_t` whose functional is a Riemann–Stieltjes
//! integral against a bounded-variation kernel, with possibly
//! discontinuous initial histories.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the `*F64` aliases cover the common case.

pub mod diagnostics;
pub mod error;
pub mod forcing;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod quadrature;
pub mod rs_calculus;
pub mod scalar;
pub mod solver;
pub mod suites;

pub use diagnostics::{
    ac_modulus, de_residual, derivative_lp, lipschitz_estimate, memory_functional,
    regularity_report, RegularityReport, ResidualMode, ResidualStats,
};
pub use error::{Error, Result};
pub use forcing::{
    big_g_forcing, check_lp_bound, f_forcing, forcing_report, g_forcing, mollify_history,
    FnForcing, Forcing, ForcingReport, MildForcing, ZeroForcing,
};
pub use linalg::Mat;
pub use model::{segment, History, Interp, Kernel, Trajectory};
pub use poly::{MatPoly, Poly};
pub use rs_calculus::{
    check_fubini, check_minkowski, check_sharp_estimate, check_shifted_fubini, rs_convolution,
    rs_integral, volterra, BVFunction, Bivariate, BivariatePoly, Check, PiecewiseFunction, Quad,
    Side, TimeFunction,
};
pub use scalar::Real;
pub use solver::{
    fundamental_matrix, solve_classical, solve_forced_dde, solve_mild, SolverConfig,
};

pub type MatF64 = Mat<f64>;
pub type MatPolyF64 = MatPoly<f64>;
pub type BVFunctionF64 = BVFunction<f64>;
pub type PiecewiseFunctionF64 = PiecewiseFunction<f64>;
pub type KernelF64 = Kernel<f64>;
pub type HistoryF64 = History<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type MatF32 = Mat<f32>;
pub type KernelF32 = Kernel<f32>;
pub type HistoryF32 = History<f32>;
pub type TrajectoryF32 = Trajectory<f32>;
