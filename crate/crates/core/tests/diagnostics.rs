mod common;

use approx::assert_relative_eq;
use common::fixtures::{acceptance_kernel, fixtures, indicator_history, A};
use common::oracle::method_of_steps;
use proptest::prelude::*;
use rfde_core::{
    ac_modulus, de_residual, derivative_lp, lipschitz_estimate, memory_functional, regularity_report,
    solve_mild, History, Interp, Mat, MildForcing, Quad, ResidualMode, SolverConfig, Trajectory,
    ZeroForcing,
};

fn sample(grid: Vec<f64>, breaks: Vec<usize>, f: impl Fn(f64) -> f64) -> Trajectory<f64> {
    let values = grid.iter().map(|&t| Mat::scalar(f(t))).collect();
    Trajectory::new(grid, values, breaks, Interp::Linear).unwrap()
}

fn uniform(n: usize, end: f64) -> Vec<f64> {
    (0..=n).map(|k| k as f64 * end / n as f64).collect()
}

#[test]
fn modulus_examples() {
    let id = sample(uniform(100, 1.0), vec![], |t| t);
    for (d, e) in ac_modulus(&id, &[0.5, 0.1, 0.02]) {
        assert_relative_eq!(e, d, epsilon = 1e-12);
    }
    let step = sample(uniform(100, 1.0), vec![], |t| if t < 0.5 { 0.0 } else { 1.0 });
    assert!(ac_modulus(&step, &[0.1, 0.05, 0.01]).iter().all(|&(_, e)| e >= 1.0 - 1e-9));

    // closed form on [0, 2]: slope |a| on [0, 0.5], at most a² below it
    let phi = indicator_history(1.0);
    let x = solve_mild(&acceptance_kernel(), &phi, 2.0, &SolverConfig::default().with_h(1e-3)).unwrap();
    for (d, e) in ac_modulus(&x, &[0.4, 0.2, 0.1, 0.05]) {
        assert!(e <= A.abs() * d * (1.0 + 1e-9), "{d}: {e}");
        assert!(e >= 0.9 * A.abs() * d);
    }
}

#[test]
fn lipschitz_examples() {
    assert_relative_eq!(lipschitz_estimate(&sample(uniform(50, 2.0), vec![], |t| 3.0 * t)), 3.0, epsilon = 1e-12);
    assert_eq!(lipschitz_estimate(&sample(uniform(50, 2.0), vec![], |_| 4.0)), 0.0);
}

#[test]
fn derivative_norms() {
    let sq = sample(uniform(1024, 1.0), vec![], |t| t * t);
    let n = derivative_lp(&sq, 2.0, 4);
    assert_eq!(n.len(), 4);
    assert_relative_eq!(n[3], 2.0 / 3f64.sqrt(), epsilon = 1e-5);
    assert!(n.windows(2).all(|w| (w[1] - 2.0 / 3f64.sqrt()).abs() <= (w[0] - 2.0 / 3f64.sqrt()).abs()));

    // a jump makes the norms blow up like h^{1/p - 1}
    let step = sample(uniform(1024, 1.0), vec![], |t| if t < 0.5 { 0.0 } else { 1.0 });
    let n = derivative_lp(&step, 2.0, 4);
    for w in n.windows(2) {
        assert_relative_eq!(w[1] / w[0], 2f64.sqrt(), epsilon = 1e-9);
    }
}

#[test]
fn residual_of_an_exact_trajectory_is_second_order() {
    let exact = method_of_steps(&[(1.0, A)], &[(-1.0, 0.0, vec![1.0])], 1.0, 3.0);
    let k = acceptance_kernel();
    let phi = History::constant(1.0, Mat::scalar(1.0)).unwrap();
    let f = MildForcing::new(&k, &phi, Quad::default()).unwrap();
    let mut res = Vec::new();
    for n in [300, 600] {
        let grid = uniform(n, 3.0);
        let breaks = vec![n / 3, 2 * n / 3];
        let x = sample(grid, breaks, |t| exact.eval(t));
        res.push(de_residual(&k, &x, &f, ResidualMode::Truncated, Quad::default()).unwrap().max);
    }
    assert!(res[1] <= 1e-3, "{res:?}");
    assert!(res[0] / res[1] >= 3.5, "{res:?}");
}

#[test]
fn residual_flags_a_corrupted_node() {
    let k = acceptance_kernel();
    let x = solve_mild(&k, &History::instantaneous(1.0, Mat::scalar(1.0)).unwrap(), 2.0, &SolverConfig::default().with_h(1e-2))
        .unwrap();
    let bad = x.map_values(|t, v| if (t - 1.5).abs() < 1e-9 { vec![v[0] + 1.0] } else { v.to_vec() }).unwrap();
    let s = de_residual(&k, &bad, &ZeroForcing { n: 1 }, ResidualMode::Truncated, Quad::default()).unwrap();
    assert!(s.max > 10.0);
    assert!((s.argmax - 1.5).abs() <= 0.011);
}

#[test]
fn mild_solutions_satisfy_the_memory_identity() {
    for fx in fixtures() {
        let x = solve_mild(&fx.kernel, &fx.phi, fx.horizon, &SolverConfig::default().with_h(2e-3)).unwrap();
        let times: Vec<f64> = x.grid().iter().copied().step_by(25).collect();
        let m = memory_functional(&fx.kernel, &fx.phi, &x, &times, Quad::default()).unwrap();
        let x0 = fx.phi.value_at_zero().get(0, 0);
        let mut worst = 0.0f64;
        let mut slope = 0.0f64;
        for (j, &t) in times.iter().enumerate() {
            worst = worst.max((x.eval(t).unwrap().get(0, 0) - x0 - m.value(j)[0]).abs());
        }
        // t ↦ L∫_0^t x_s ds is Lipschitz with constant Var(η) · sup|x̄|
        let sup_phi = [-1.0, -0.75, -0.5, -0.25, 0.0]
            .iter()
            .filter_map(|&s| fx.phi.pieces().eval(s).ok())
            .map(|v| v.max_abs())
            .fold(fx.phi.value_at_zero().max_abs(), f64::max);
        let sup_x = (0..x.len()).map(|k| x.value(k)[0].abs()).fold(sup_phi, f64::max);
        for (d, e) in ac_modulus(&m, &[0.5, 0.25, 0.1]) {
            slope = slope.max(e / d);
        }
        assert!(worst <= 1e-9, "{}: {worst:e}", fx.name);
        assert!(slope <= fx.kernel.variation() * sup_x * (1.0 + 1e-6), "{}", fx.name);
    }
}

#[test]
fn report_bundles_all_certificates() {
    let phi = indicator_history(2.0);
    let k = acceptance_kernel();
    let x = solve_mild(&k, &phi, 2.0, &SolverConfig::default().with_h(1e-2)).unwrap();
    let f = MildForcing::new(&k, &phi, Quad::default()).unwrap();
    let rep = regularity_report(&k, &x, &f, 2.0, &[0.05, 0.2, 0.1], 3, Quad::default()).unwrap();
    assert_eq!(rep.ac_table.iter().map(|e| e.0).collect::<Vec<_>>(), vec![0.2, 0.1, 0.05]);
    assert_eq!(rep.deriv_lp_norms.len(), 3);
    assert_relative_eq!(rep.lip_estimate, 0.5, epsilon = 1e-9);
    assert!(rep.residual_stats.max <= 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modulus_table_is_well_formed(
        vals in prop::collection::vec(-5.0..5.0f64, 3..60),
        deltas in prop::collection::vec(1e-3..2.0f64, 1..6),
    ) {
        let n = vals.len() - 1;
        let grid = uniform(n, 1.0);
        let x = Trajectory::new(grid, vals.iter().map(|&v| Mat::scalar(v)).collect(), vec![], Interp::Linear).unwrap();
        let table = ac_modulus(&x, &deltas);
        prop_assert!(table.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 <= w[0].1 + 1e-12));
        prop_assert!(table.iter().all(|&(d, e)| d > 0.0 && e >= 0.0));
        let lip = lipschitz_estimate(&x);
        prop_assert!(table.iter().all(|&(d, e)| e <= lip * d * (1.0 + 1e-12) + 1e-12));
    }
}
