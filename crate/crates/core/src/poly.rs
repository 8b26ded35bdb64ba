//! Polynomials in the monomial basis.
//!
//! Piecewise objects store each piece in the *local* variable `s = t - lo`
//! measured from the left edge of the piece, which keeps short pieces well
//! conditioned. Shifts and reflections are coefficient transforms.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Scalar polynomial `Σ c_k t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Self { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(T::zero());
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from_usize_lossy(k))
                .collect(),
        )
    }

    /// Real roots in the open interval `(a, b)` where the polynomial changes
    /// sign. Touching roots (even multiplicity) are not reported.
    pub fn sign_changes_in(&self, a: T, b: T) -> Vec<T> {
        if self.coeffs.iter().all(|c| *c == T::zero()) || b <= a {
            return Vec::new();
        }
        let samples = 32 * (self.degree() + 1);
        let step = (b - a) / T::from_usize_lossy(samples);
        let mut roots = Vec::new();
        let mut x0 = a;
        let mut f0 = self.eval(a);
        let mut last = if f0 == T::zero() { None } else { Some(f0.signum()) };
        for k in 1..=samples {
            let x1 = if k == samples {
                b
            } else {
                a + step * T::from_usize_lossy(k)
            };
            let f1 = self.eval(x1);
            if f1 != T::zero() {
                let s1 = f1.signum();
                if let Some(s) = last {
                    if s != s1 {
                        if f0 == T::zero() {
                            roots.push(x0);
                        } else {
                            roots.push(bisect(|x| self.eval(x), x0, x1, f0));
                        }
                    }
                }
                last = Some(s1);
            }
            x0 = x1;
            f0 = f1;
        }
        roots.dedup_by(|p, q| (*p - *q).abs() <= T::epsilon() * T::lit(16.0));
        roots
    }
}

fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, f_lo: T) -> T {
    let mut s_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if fm.signum() == s_lo {
            lo = mid;
            s_lo = fm.signum();
        } else {
            hi = mid;
        }
    }
    (lo + hi) * T::lit(0.5)
}

fn binomial<T: Real>(n: usize, k: usize) -> T {
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_usize_lossy(n - i) / T::from_usize_lossy(i + 1);
    }
    acc
}

/// Matrix-valued polynomial `Σ C_k t^k` with all `C_k` of one shape.
#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly<T> {
    rows: usize,
    cols: usize,
    coeffs: Vec<Mat<T>>,
}

impl<T: Real> MatPoly<T> {
    pub fn new(coeffs: Vec<Mat<T>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("polynomial needs at least one coefficient".into()))?;
        let (rows, cols) = first.shape();
        if coeffs.iter().any(|c| c.shape() != (rows, cols)) {
            return Err(Error::ShapeMismatch(
                "polynomial coefficients of differing shapes".into(),
            ));
        }
        Ok(Self { rows, cols, coeffs })
    }

    pub fn constant(c: Mat<T>) -> Self {
        Self {
            rows: c.rows(),
            cols: c.cols(),
            coeffs: vec![c],
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::constant(Mat::zeros(rows, cols))
    }

    pub fn from_scalar(p: &Poly<T>) -> Self {
        Self {
            rows: 1,
            cols: 1,
            coeffs: p.coeffs().iter().map(|&c| Mat::scalar(c)).collect(),
        }
    }

    /// Column-vector polynomial from per-degree coefficient vectors.
    pub fn from_vectors(coeffs: Vec<Vec<T>>) -> Result<Self> {
        Self::new(coeffs.into_iter().map(Mat::column).collect())
    }

    /// Straight line through `(t0, v0)` and `(t1, v1)`.
    pub fn line_through(t0: T, v0: &Mat<T>, t1: T, v1: &Mat<T>) -> Self {
        let slope = (v1 - v0).scale(T::one() / (t1 - t0));
        let mut c0 = v0.clone();
        c0.axpy(-t0, &slope);
        Self {
            rows: v0.rows(),
            cols: v0.cols(),
            coeffs: vec![c0, slope],
        }
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Mat<T>] {
        &self.coeffs
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| c.get(i, j)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.max_abs() == T::zero())
    }

    pub fn eval(&self, t: T) -> Mat<T> {
        let mut out = Mat::zeros(self.rows, self.cols);
        self.eval_into(t, out.as_mut_slice());
        out
    }

    /// Horner evaluation into a flat row-major buffer.
    #[inline]
    pub fn eval_into(&self, t: T, out: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
        for c in self.coeffs.iter().rev() {
            for (o, &v) in out.iter_mut().zip(c.as_slice()) {
                *o = *o * t + v;
            }
        }
    }

    /// `q(t) = p(t + c)`.
    pub fn shifted(&self, c: T) -> Self {
        let d = self.degree();
        let mut out = vec![Mat::zeros(self.rows, self.cols); d + 1];
        for (j, cj) in self.coeffs.iter().enumerate() {
            let mut cpow = T::one();
            // term c_j (t + c)^j = Σ_k C(j,k) c^{j-k} t^k
            for k in (0..=j).rev() {
                out[k].axpy(binomial::<T>(j, k) * cpow, cj);
                cpow = cpow * c;
            }
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            coeffs: out,
        }
    }

    /// `q(t) = p(-t)`.
    pub fn reflected(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch("adding polynomials of different shapes".into()));
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Mat::zeros(self.rows, self.cols);
        let coeffs = (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).unwrap_or(&zero);
                let b = other.coeffs.get(k).unwrap_or(&zero);
                a + b
            })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            coeffs,
        })
    }

    /// Polynomial product with the Stieltjes shape rule (scalar left factor broadcasts).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let zero_prod = self.coeffs[0].stieltjes_mul(&other.coeffs[0])?;
        let (rows, cols) = zero_prod.shape();
        let mut coeffs = vec![Mat::zeros(rows, cols); self.degree() + other.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += &a.stieltjes_mul(b)?;
            }
        }
        Ok(Self { rows, cols, coeffs })
    }

    /// `P(t) = ∫_{t0}^{t} p(s) ds`.
    pub fn antiderivative_from(&self, t0: T) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Mat::zeros(self.rows, self.cols));
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.scale(T::one() / T::from_usize_lossy(k + 1)));
        }
        let mut p = Self {
            rows: self.rows,
            cols: self.cols,
            coeffs,
        };
        let v0 = p.eval(t0);
        p.coeffs[0] = -&v0;
        p
    }

    /// Interpolating polynomial through `(nodes[k], values[k])`, expressed in
    /// the same variable as `nodes`. Newton divided differences per entry.
    pub fn interpolate(nodes: &[T], values: &[Mat<T>]) -> Result<Self> {
        let m = nodes.len();
        if m == 0 || values.len() != m {
            return Err(Error::InvalidInput("interpolation needs matching nodes and values".into()));
        }
        let (rows, cols) = values[0].shape();
        let mut dd: Vec<Mat<T>> = values.to_vec();
        for level in 1..m {
            for k in (level..m).rev() {
                let h = nodes[k] - nodes[k - level];
                dd[k] = (&dd[k] - &dd[k - 1]).scale(T::one() / h);
            }
        }
        // Horner on the Newton form: p = dd[m-1]; p = p*(x - x_k) + dd[k]
        let mut coeffs = vec![dd[m - 1].clone()];
        for k in (0..m - 1).rev() {
            let mut next = vec![Mat::zeros(rows, cols); coeffs.len() + 1];
            for (j, c) in coeffs.iter().enumerate() {
                next[j + 1] += c;
                next[j].axpy(-nodes[k], c);
            }
            next[0] += &dd[k];
            coeffs = next;
        }
        Ok(Self { rows, cols, coeffs })
    }

    /// Degree-`deg` interpolant of `f` on `[0, w]` at Chebyshev points,
    /// in the variable `s ∈ [0, w]`.
    pub fn fit(w: T, deg: usize, f: impl Fn(T) -> Result<Mat<T>>) -> Result<Self> {
        let half = w * T::lit(0.5);
        let m = deg + 1;
        let mut nodes = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        for j in 0..m {
            let u = half
                * (T::PI() * (T::from_usize_lossy(j) + T::lit(0.5)) / T::from_usize_lossy(m)).cos();
            nodes.push(u);
            values.push(f(half + u)?);
        }
        Ok(Self::interpolate(&nodes, &values)?.shifted(-half))
    }

    /// Real points in `(a, b)` where some entry changes sign.
    pub fn entry_sign_changes(&self, a: T, b: T) -> Vec<T> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.extend(self.entry(i, j).sign_changes_in(a, b));
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).expect("finite roots"));
        out
    }
}
