use rfde_core::{History, Kernel, Mat, MatPoly, PiecewiseFunction, Poly};

use super::oracle::{method_of_steps, PwPoly};

pub fn sp(c: &[f64]) -> MatPoly<f64> {
    MatPoly::from_scalar(&Poly::new(c.to_vec()))
}

/// `a = -0.5` at `θ = -1`.
pub const A: f64 = -0.5;

pub fn acceptance_kernel() -> Kernel<f64> {
    Kernel::single_delay(1.0, -1.0, Mat::scalar(A)).unwrap()
}

/// Indicator of `[-1, -0.5]` with `φ(0) = 0`.
pub fn indicator_history(p: f64) -> History<f64> {
    let pieces = PiecewiseFunction::new(vec![((-1.0, -0.5), sp(&[1.0])), ((-0.5, 0.0), sp(&[0.0]))]).unwrap();
    History::new(pieces, Mat::scalar(0.0), p).unwrap()
}

pub fn mixed_kernel() -> Kernel<f64> {
    Kernel::from_parts(
        1,
        1.0,
        vec![(-0.6, Mat::scalar(0.4))],
        vec![((-1.0, -0.3), sp(&[-0.5, 0.2]))],
    )
    .unwrap()
}

/// `1 + sinh t` on `[0, 1]` and its continuation on `[1, 2]` for
/// `ẋ(t) = ∫_{t-1}^t x̄`, `φ ≡ 1`.
pub fn distributed_closed_form(t: f64) -> f64 {
    if t <= 1.0 {
        return 1.0 + t.sinh();
    }
    let e = std::f64::consts::E;
    -t * (t - 1.0).cosh() / 2.0 + t.exp() / 2.0 - e.powf(1.0 - t) / 4.0 + 3.0 * (t - 1.0).exp() / 4.0
        - (t - 1.0).sinh() / 2.0
        + 1.0
        - (-t).exp() / 2.0
}

pub enum Exact {
    Oracle(PwPoly),
    Closed(fn(f64) -> f64),
    None,
}

impl Exact {
    pub fn eval(&self, t: f64) -> Option<f64> {
        match self {
            Exact::Oracle(p) => Some(p.eval(t)),
            Exact::Closed(f) => Some(f(t)),
            Exact::None => None,
        }
    }
}

pub struct Fixture {
    pub name: &'static str,
    pub kernel: Kernel<f64>,
    pub phi: History<f64>,
    pub horizon: f64,
    pub exact: Exact,
}

pub fn fixtures() -> Vec<Fixture> {
    let single = Fixture {
        name: "single delay, constant history",
        kernel: acceptance_kernel(),
        phi: History::constant(1.0, Mat::scalar(1.0)).unwrap(),
        horizon: 3.0,
        exact: Exact::Oracle(method_of_steps(&[(1.0, A)], &[(-1.0, 0.0, vec![1.0])], 1.0, 3.0)),
    };
    let two = Fixture {
        name: "two delays, linear history",
        kernel: Kernel::from_parts(1, 1.0, vec![(-1.0, Mat::scalar(-0.5)), (-0.4, Mat::scalar(0.3))], vec![]).unwrap(),
        phi: History::from_poly(1.0, sp(&[1.0, 1.0])).unwrap(),
        horizon: 2.0,
        exact: Exact::Oracle(method_of_steps(
            &[(1.0, -0.5), (0.4, 0.3)],
            &[(-1.0, 0.0, vec![1.0, 1.0])],
            1.0,
            2.0,
        )),
    };
    let indicator = Fixture {
        name: "single delay, indicator history",
        kernel: acceptance_kernel(),
        phi: indicator_history(1.0),
        horizon: 2.0,
        exact: Exact::Oracle(method_of_steps(
            &[(1.0, A)],
            &[(-1.0, -0.5, vec![1.0]), (-0.5, 0.0, vec![0.0])],
            0.0,
            2.0,
        )),
    };
    let distributed = Fixture {
        name: "distributed delay, constant history",
        kernel: Kernel::from_parts(1, 1.0, vec![], vec![((-1.0, 0.0), sp(&[1.0]))]).unwrap(),
        phi: History::constant(1.0, Mat::scalar(1.0)).unwrap(),
        horizon: 2.0,
        exact: Exact::Closed(distributed_closed_form),
    };
    let impulse = Fixture {
        name: "single delay, instantaneous input",
        kernel: acceptance_kernel(),
        phi: History::instantaneous(1.0, Mat::scalar(1.0)).unwrap(),
        horizon: 2.0,
        exact: Exact::Oracle(method_of_steps(&[(1.0, A)], &[(-1.0, 0.0, vec![0.0])], 1.0, 2.0)),
    };
    let mixed = Fixture {
        name: "mixed kernel, quadratic history",
        kernel: mixed_kernel(),
        phi: History::from_poly(1.0, sp(&[0.5, -1.0, 1.0])).unwrap(),
        horizon: 2.0,
        exact: Exact::None,
    };
    vec![single, two, indicator, distributed, impulse, mixed]
}
