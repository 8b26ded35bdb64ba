mod common;

use approx::assert_relative_eq;
use common::sums::rs_sum;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfde_core::suites::random_kernel;
use rfde_core::{
    check_lp_bound, f_forcing, g_forcing, mollify_history, Error, History, Kernel, Mat, MatPoly,
    MildForcing, PiecewiseFunction, Poly, Quad, Side,
};

fn sp(c: &[f64]) -> MatPoly<f64> {
    MatPoly::from_scalar(&Poly::new(c.to_vec()))
}

/// Piecewise polynomial history on `[-r, 0]` with up to three pieces.
fn random_history(rng: &mut ChaCha8Rng, n: usize, r: f64, continuous: bool) -> History<f64> {
    let k = rng.gen_range(1..=3usize);
    // well separated interior edges, so small mollifier ramps never overlap
    let slot = rng.gen_range(0..2usize);
    let mut edges: Vec<f64> = (1..k)
        .map(|i| -r * (0.75 - 0.4 * (i - 1 + slot) as f64 / 2.0) + rng.gen_range(-0.05..0.05) * r)
        .collect();
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.insert(0, -r);
    edges.push(0.0);
    let coeffs = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..3).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
    };
    if continuous {
        let p = MatPoly::from_vectors(coeffs(rng)).unwrap();
        return History::from_poly(r, p).unwrap();
    }
    let pieces = edges
        .windows(2)
        .map(|w| ((w[0], w[1]), MatPoly::from_vectors(coeffs(rng)).unwrap()))
        .collect();
    let at0 = Mat::column((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    History::new(PiecewiseFunction::new(pieces).unwrap(), at0, 1.0).unwrap()
}

#[test]
fn single_atom_closed_forms() {
    let (a, tau, c): (f64, f64, f64) = (-1.5, 0.6, 2.0);
    let k = Kernel::single_delay(1.0, -tau, Mat::scalar(a)).unwrap();
    let phi = History::constant(1.0, Mat::scalar(c)).unwrap();
    let quad = Quad::default();
    for &t in &[0.0, 0.3, 0.59] {
        assert_relative_eq!(g_forcing(&k, &phi, t, quad).unwrap().get(0, 0), a * c, epsilon = 1e-15);
    }
    for &t in &[0.61, 0.9, 1.5] {
        assert_eq!(g_forcing(&k, &phi, t, quad).unwrap().get(0, 0), 0.0);
    }
    for p in [1.0, 2.0, 3.0] {
        let chk = check_lp_bound(&k, &phi, p, quad).unwrap();
        assert_relative_eq!(chk.lhs, (a * c).abs() * tau.powf(1.0 / p), epsilon = 1e-12);
        assert_relative_eq!(chk.rhs, a.abs() * c.abs(), epsilon = 1e-12);
        assert!(chk.lhs < chk.rhs);
    }
    let flat = Kernel::zero(1, 1.0).unwrap();
    let chk = check_lp_bound(&flat, &phi, 2.0, quad).unwrap();
    assert_eq!((chk.lhs, chk.rhs), (0.0, 0.0));
}

#[test]
fn g_matches_stieltjes_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..8 {
        let k = random_kernel(&mut rng, 2, 1.0).unwrap();
        let phi = random_history(&mut rng, 2, 1.0, true);
        let m = MildForcing::new(&k, &phi, Quad::default()).unwrap();
        for &t in &[0.05, 0.37, 0.81] {
            let g = m.g(t).unwrap();
            let brute = rs_sum(k.eta(), |th| phi.static_prolongation(t + th).unwrap(), -1.0, -t, 20_000);
            assert!((&g - &brute).max_abs() <= 2e-3 * (1.0 + g.max_abs()), "t = {t}");
        }
    }
}

#[test]
fn f_is_the_derivative_of_big_g() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..8 {
        let k = random_kernel(&mut rng, 1, 1.0).unwrap();
        let phi = random_history(&mut rng, 1, 1.0, false);
        let m = MildForcing::new(&k, &phi, Quad::default()).unwrap();
        let breaks = m.breakpoints().to_vec();
        let d = 1e-5;
        for j in 1..40 {
            let t = j as f64 / 40.0;
            if breaks.iter().any(|b| (b - t).abs() < 2.0 * d) {
                continue;
            }
            let fd = (&m.big_g(t + d).unwrap() - &m.big_g(t - d).unwrap()).scale(0.5 / d);
            let f = m.f(t).unwrap();
            assert!((&fd - &f).max_abs() <= 1e-6 * (1.0 + f.max_abs()), "t = {t}");
        }
    }
}

#[test]
fn forcing_of_a_discontinuous_history() {
    let k = Kernel::single_delay(1.0, -1.0, Mat::scalar(-0.5)).unwrap();
    let pieces = PiecewiseFunction::new(vec![((-1.0, -0.5), sp(&[1.0])), ((-0.5, 0.0), sp(&[0.0]))]).unwrap();
    let phi = History::new(pieces, Mat::scalar(0.0), 1.0).unwrap();
    let quad = Quad::default();
    // f(t) = -0.5 φ(t - 1)
    assert_relative_eq!(f_forcing(&k, &phi, 0.25, quad).unwrap().get(0, 0), -0.5, epsilon = 1e-15);
    assert_eq!(f_forcing(&k, &phi, 0.75, quad).unwrap().get(0, 0), 0.0);
    assert!(matches!(f_forcing(&k, &phi, 0.5, quad), Err(Error::AeUndefined { .. })));
    let m = MildForcing::new(&k, &phi, quad).unwrap();
    assert_relative_eq!(m.f_limit(0.5, Side::Left).unwrap().get(0, 0), -0.5, epsilon = 1e-15);
    assert_eq!(m.f_limit(0.5, Side::Right).unwrap().get(0, 0), 0.0);
    assert!(g_forcing(&k, &phi, 0.25, quad).is_err());
    assert!(matches!(mollify_history(&phi, 0.6), Err(Error::EpsilonTooLarge { .. })));
}

fn arb_problem(continuous: bool) -> impl Strategy<Value = (Kernel<f64>, History<f64>)> {
    (any::<u64>(), 1usize..3).prop_map(move |(s, n)| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let k = random_kernel(&mut rng, n, 1.0).unwrap();
        let phi = random_history(&mut rng, n, 1.0, continuous);
        (k, phi)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn big_g_is_bounded_by_twice_the_variation((k, phi) in arb_problem(false), t in 0.0..2.0f64) {
        let m = MildForcing::new(&k, &phi, Quad::default()).unwrap();
        let bound = 2.0 * k.variation() * phi.lp_norm(1.0);
        prop_assert!(m.big_g(t).unwrap().norm() <= bound * (1.0 + 1e-7) + 1e-12);
    }

    #[test]
    fn forcing_vanishes_after_the_horizon((k, phi) in arb_problem(false), t in 1.0..3.0f64) {
        let m = MildForcing::new(&k, &phi, Quad::default()).unwrap();
        prop_assert_eq!(m.f_limit(t, Side::Right).unwrap().max_abs(), 0.0);
        let gr = m.big_g(1.0).unwrap();
        prop_assert!((&m.big_g(t).unwrap() - &gr).max_abs() <= 1e-12 * (1.0 + gr.max_abs()));
    }

    #[test]
    fn g_vanishes_after_the_horizon((k, phi) in arb_problem(true), t in 1.0..3.0f64) {
        let m = MildForcing::new(&k, &phi, Quad::default()).unwrap();
        prop_assert_eq!(m.g(t).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn lp_bound_holds((k, phi) in arb_problem(true), p in 1.0..4.0f64) {
        let chk = check_lp_bound(&k, &phi, p, Quad::default()).unwrap();
        prop_assert!(chk.leq(), "{:?}", chk);
    }

    #[test]
    fn mollified_histories_stay_close((k, phi) in arb_problem(false)) {
        let gaps: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&e| {
                let s = mollify_history(&phi, e).unwrap();
                (phi.pieces().sub(s.pieces()).unwrap()).lp_norm(1.0)
            })
            .collect();
        prop_assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", gaps);
        let _ = k;
    }
}
