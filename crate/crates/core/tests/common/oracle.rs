//! Symbolic method of steps for scalar equations with discrete delays,
//! `x(t) = φ(0) + ∫_0^t Σ a_j x̄(s - τ_j) ds`, with piecewise polynomial `φ`.
//!
//! Polynomials are coefficient vectors in the global variable; the code is
//! deliberately independent of the library under test.

#[derive(Clone, Debug)]
pub struct PwPoly {
    /// `(lo, hi, coeffs)` with `coeffs[k]` multiplying `t^k`.
    pub pieces: Vec<(f64, f64, Vec<f64>)>,
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * t + v)
}

/// Coefficients of `p(t - tau)`.
fn shift(c: &[f64], tau: f64) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    for (k, &ck) in c.iter().enumerate() {
        // (t - tau)^k = Σ_j C(k, j) t^j (-tau)^{k-j}
        let mut binom = 1.0;
        for j in 0..=k {
            if j > 0 {
                binom = binom * (k - j + 1) as f64 / j as f64;
            }
            out[j] += ck * binom * (-tau).powi((k - j) as i32);
        }
    }
    out
}

fn add_scaled(acc: &mut Vec<f64>, c: &[f64], s: f64) {
    if acc.len() < c.len() {
        acc.resize(c.len(), 0.0);
    }
    for (a, &v) in acc.iter_mut().zip(c) {
        *a += s * v;
    }
}

/// Antiderivative vanishing at `t0`.
fn integrate_from(c: &[f64], t0: f64) -> Vec<f64> {
    let mut out = vec![0.0; c.len() + 1];
    for (k, &v) in c.iter().enumerate() {
        out[k + 1] = v / (k + 1) as f64;
    }
    out[0] = -horner(&out, t0);
    out
}

impl PwPoly {
    /// Value at `t`, taken from the right-hand piece at an interior edge.
    pub fn eval(&self, t: f64) -> f64 {
        for (lo, hi, c) in &self.pieces {
            if t >= *lo && t < *hi {
                return horner(c, t);
            }
        }
        let (_, _, c) = self.pieces.last().expect("non-empty");
        horner(c, t)
    }

    /// Value at `t`, taken from the left-hand piece at an interior edge.
    pub fn eval_left(&self, t: f64) -> f64 {
        for (lo, hi, c) in &self.pieces {
            if t > *lo && t <= *hi {
                return horner(c, t);
            }
        }
        horner(&self.pieces[0].2, t)
    }

    fn piece_at(&self, t: f64) -> &Vec<f64> {
        for (lo, hi, c) in &self.pieces {
            if t >= *lo && t <= *hi {
                return c;
            }
        }
        &self.pieces.last().expect("non-empty").2
    }

    fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.pieces.iter().map(|p| p.0).collect();
        e.push(self.pieces.last().expect("non-empty").1);
        e
    }
}

/// Solution on `[0, horizon]`; `atoms` are `(τ_j > 0, a_j)`, `phi` covers
/// `[-r, 0]` and `phi0` is the value at 0.
pub fn method_of_steps(atoms: &[(f64, f64)], phi: &[(f64, f64, Vec<f64>)], phi0: f64, horizon: f64) -> PwPoly {
    let tau_min = atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
    let mut known = PwPoly { pieces: phi.to_vec() };
    let mut sol: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    let mut t0 = 0.0;
    let mut x0 = phi0;
    while t0 < horizon - 1e-14 {
        let t1 = (t0 + tau_min).min(horizon);
        let mut cuts = vec![t0, t1];
        for &(tau, _) in atoms {
            for e in known.edges() {
                let s = e + tau;
                if s > t0 + 1e-14 && s < t1 - 1e-14 {
                    cuts.push(s);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        for w in cuts.windows(2) {
            let (c0, c1) = (w[0], w[1]);
            let mid = 0.5 * (c0 + c1);
            let mut rhs = vec![0.0];
            for &(tau, a) in atoms {
                let src = mid - tau;
                let poly = known.piece_at(src).clone();
                add_scaled(&mut rhs, &shift(&poly, tau), a);
            }
            let mut x = integrate_from(&rhs, c0);
            x[0] += x0;
            x0 = horner(&x, c1);
            sol.push((c0, c1, x));
        }
        // the new stretch becomes usable history for later steps
        known.pieces.extend(sol.iter().filter(|p| p.0 >= t0 - 1e-14).cloned());
        t0 = t1;
    }
    PwPoly { pieces: sol }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_polynomial() {
        let c = vec![1.0, 2.0, 3.0];
        let s = shift(&c, 0.5);
        assert!((horner(&s, 1.2) - horner(&c, 0.7)).abs() < 1e-14);
    }

    #[test]
    fn single_delay_matches_closed_form() {
        let a = -0.5;
        let x = method_of_steps(&[(1.0, a)], &[(-1.0, 0.0, vec![1.0])], 1.0, 3.0);
        for &t in &[0.3, 1.0, 1.7, 2.5, 3.0] {
            let mut e = 1.0 + a * t;
            if t > 1.0 {
                e += a * a * (t - 1.0f64).powi(2) / 2.0;
            }
            if t > 2.0 {
                e += a * a * a * (t - 2.0f64).powi(3) / 6.0;
            }
            assert!((x.eval(t) - e).abs() < 1e-13, "t = {t}");
        }
    }
}
