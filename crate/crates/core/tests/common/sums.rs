//! Riemann–Stieltjes sums on uniform partitions, evaluated from the
//! integrator's point values only.

use rfde_core::{BVFunction, Mat};

/// `Σ α-increment · f(midpoint)` over `m` equal cells of `[a, b]`.
pub fn rs_sum(alpha: &BVFunction<f64>, f: impl Fn(f64) -> Mat<f64>, a: f64, b: f64, m: usize) -> Mat<f64> {
    let h = (b - a) / m as f64;
    let mut prev = alpha.eval(a).unwrap();
    let mut acc: Option<Mat<f64>> = None;
    for i in 1..=m {
        let t = if i == m { b } else { a + i as f64 * h };
        let cur = alpha.eval(t).unwrap();
        let term = &(&cur - &prev) * &f(a + (i as f64 - 0.5) * h);
        acc = Some(match acc {
            None => term,
            Some(s) => &s + &term,
        });
        prev = cur;
    }
    acc.unwrap()
}

/// `Σ |f(midpoint)| · |α-increment|`, which tends to `∫ |f| dV_α`.
pub fn variation_sum(alpha: &BVFunction<f64>, f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut prev = alpha.eval(a).unwrap();
    let mut acc = 0.0;
    for i in 1..=m {
        let t = if i == m { b } else { a + i as f64 * h };
        let cur = alpha.eval(t).unwrap();
        acc += f(a + (i as f64 - 0.5) * h).abs() * (&cur - &prev).norm();
        prev = cur;
    }
    acc
}

/// Double sum for `∫∫ f(x, y) dα(x) dβ(y)` with scalar integrators.
pub fn rs_double_sum(
    alpha: &BVFunction<f64>,
    beta: &BVFunction<f64>,
    f: impl Fn(f64, f64) -> f64,
    m: usize,
) -> f64 {
    let incr = |g: &BVFunction<f64>| {
        let (a, b) = g.domain();
        let h = (b - a) / m as f64;
        (1..=m)
            .map(|i| {
                let hi = if i == m { b } else { a + i as f64 * h };
                let lo = a + (i - 1) as f64 * h;
                (a + (i as f64 - 0.5) * h, g.eval(hi).unwrap().get(0, 0) - g.eval(lo).unwrap().get(0, 0))
            })
            .collect::<Vec<_>>()
    };
    let (da, db) = (incr(alpha), incr(beta));
    da.iter()
        .map(|&(x, wa)| db.iter().map(|&(y, wb)| f(x, y) * wa * wb).sum::<f64>())
        .sum()
}
