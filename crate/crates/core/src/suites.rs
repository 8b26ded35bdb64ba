//! Seeded randomized suites for the Stieltjes inequalities and identities.
//!
//! Trial `i` of a suite draws from a ChaCha8 stream selected by `(seed, i)`,
//! so results do not depend on scheduling; trials run in parallel and are
//! merged by index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::forcing::check_lp_bound;
use crate::linalg::Mat;
use crate::model::{History, Kernel};
use crate::poly::MatPoly;
use crate::rs_calculus::{
    check_fubini, check_minkowski, check_sharp_estimate, check_shifted_fubini, BVFunction,
    BivariatePoly, Check, Density, PiecewiseFunction, Quad,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SuiteKind {
    SharpEstimate,
    ShiftedFubini,
    LpBound,
    Fubini,
    Minkowski,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Relation {
    /// `lhs <= rhs + slack`
    Leq,
    /// `|lhs - rhs| <= slack`
    Eq,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 5] = [
        SuiteKind::SharpEstimate,
        SuiteKind::ShiftedFubini,
        SuiteKind::LpBound,
        SuiteKind::Fubini,
        SuiteKind::Minkowski,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::SharpEstimate => "check_sharp_estimate",
            SuiteKind::ShiftedFubini => "check_shifted_fubini",
            SuiteKind::LpBound => "check_lp_bound",
            SuiteKind::Fubini => "check_fubini",
            SuiteKind::Minkowski => "check_minkowski",
        }
    }

    /// The result being certified.
    pub fn anchor(self) -> &'static str {
        match self {
            SuiteKind::SharpEstimate => "sharp Stieltjes estimate |∫dα f| <= ∫|f| dV_α",
            SuiteKind::ShiftedFubini => "shifted Fubini identity for history convolutions",
            SuiteKind::LpBound => "L^p bound ‖g(·;φ)‖_p <= Var(η)‖φ‖_p",
            SuiteKind::Fubini => "Fubini theorem for iterated Stieltjes integrals",
            SuiteKind::Minkowski => "Minkowski integral inequality for Stieltjes measures",
        }
    }

    pub fn relation(self) -> Relation {
        match self {
            SuiteKind::ShiftedFubini | SuiteKind::Fubini => Relation::Eq,
            _ => Relation::Leq,
        }
    }

    /// Domain tag mixed into the stream number so suites draw independently.
    fn tag(self) -> u64 {
        match self {
            SuiteKind::SharpEstimate => 1,
            SuiteKind::ShiftedFubini => 2,
            SuiteKind::LpBound => 3,
            SuiteKind::Fubini => 4,
            SuiteKind::Minkowski => 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialRecord {
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteResult {
    pub check: String,
    pub anchor: String,
    pub relation: Relation,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub slack: f64,
    /// Trial with the largest `lhs - rhs` (or `|lhs - rhs|` for identities).
    pub worst: TrialRecord,
    pub failures: Vec<TrialRecord>,
}

impl SuiteResult {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

/// Generator for trial `trial` of `kind` under `seed`.
pub fn trial_rng(kind: SuiteKind, seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind.tag() << 48) ^ trial as u64);
    rng
}

fn coeffs(rng: &mut ChaCha8Rng, deg: usize, nonneg: bool) -> Vec<f64> {
    (0..=deg)
        .map(|_| if nonneg { rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) })
        .collect()
}

fn mat(rng: &mut ChaCha8Rng, n: usize, m: usize, nonneg: bool) -> Mat<f64> {
    let v = (0..n * m)
        .map(|_| if nonneg { rng.gen_range(0.05..1.0) } else { rng.gen_range(-1.0..1.0) })
        .collect();
    Mat::from_vec(n, m, v).expect("sized")
}

fn mat_poly(rng: &mut ChaCha8Rng, n: usize, m: usize, deg: usize, nonneg: bool) -> MatPoly<f64> {
    MatPoly::new((0..=deg).map(|_| mat(rng, n, m, nonneg)).collect()).expect("same shapes")
}

/// Sorted distinct cut points strictly inside `(a, b)`.
fn cuts(rng: &mut ChaCha8Rng, a: f64, b: f64, k: usize) -> Vec<f64> {
    let w = b - a;
    let mut c: Vec<f64> = (0..k).map(|_| a + w * rng.gen_range(0.1..0.9)).collect();
    c.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    c.dedup_by(|x, y| (*x - *y).abs() < 1e-3 * w);
    c
}

/// Random BV function on `[a, b]` with `n x m` values: up to three atoms
/// (sometimes one at `a`) and, usually, a piecewise polynomial density.
/// With `monotone` all jumps and densities are nonnegative.
pub fn random_bv(rng: &mut ChaCha8Rng, a: f64, b: f64, n: usize, m: usize, monotone: bool) -> Result<BVFunction<f64>> {
    let w = b - a;
    let k = rng.gen_range(0..=3usize);
    let mut at: Vec<f64> = cuts(rng, a, b, k);
    if rng.gen_bool(0.15) {
        at.insert(0, a);
    }
    if rng.gen_bool(0.1) {
        at.push(b);
    }
    let atoms: Vec<(f64, Mat<f64>)> = at.into_iter().map(|c| (c, mat(rng, n, m, monotone))).collect();
    let with_density = atoms.is_empty() || rng.gen_bool(0.7);
    let mut density = Vec::new();
    if with_density {
        let pieces = rng.gen_range(1..=3usize);
        let mut edges = vec![a];
        edges.extend(cuts(rng, a, b, pieces - 1));
        edges.push(b);
        for e in edges.windows(2) {
            let deg = rng.gen_range(0..=2usize);
            let p = mat_poly(rng, n, m, deg, monotone).scale(1.0 / w.max(1.0));
            density.push(((e[0], e[1]), Density::Poly(p)));
        }
    }
    BVFunction::from_local(a, b, mat(rng, n, m, false), atoms, density)
}

fn random_poly_fn(rng: &mut ChaCha8Rng, a: f64, b: f64, n: usize, deg: usize) -> Result<PiecewiseFunction<f64>> {
    let p = MatPoly::new((0..=deg).map(|_| mat(rng, n, 1, false)).collect())?;
    PiecewiseFunction::from_local(vec![((a, b), p)])
}

fn random_step_fn(rng: &mut ChaCha8Rng, a: f64, b: f64) -> Result<PiecewiseFunction<f64>> {
    let k = rng.gen_range(0..=2usize);
    let mut edges = vec![a];
    edges.extend(cuts(rng, a, b, k));
    edges.push(b);
    let pieces = edges
        .windows(2)
        .map(|e| {
            let deg = rng.gen_range(0..=2usize);
            Ok(((e[0], e[1]), MatPoly::new((0..=deg).map(|_| mat(rng, 1, 1, false)).collect())?))
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseFunction::from_local(pieces)
}

fn random_bivariate(rng: &mut ChaCha8Rng) -> Result<BivariatePoly<f64>> {
    let dx = rng.gen_range(0..=3usize);
    let dy = rng.gen_range(0..=3usize);
    BivariatePoly::new((0..=dx).map(|_| coeffs(rng, dy, false)).collect())
}

/// Random kernel on `[-r, 0]` with `n x n` atoms and density.
pub fn random_kernel(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Result<Kernel<f64>> {
    let eta = random_bv(rng, -r, 0.0, n, n, false)?;
    let local = BVFunction::from_local(
        -r,
        0.0,
        Mat::zeros(n, n),
        eta.atoms().iter().map(|a| (a.at, a.jump.clone())).collect(),
        eta.density_pieces().map(|(lo, hi, d)| ((lo, hi), d.clone())).collect(),
    )?;
    Kernel::new(local)
}

fn one_trial(kind: SuiteKind, seed: u64, trial: usize) -> Result<Check<f64>> {
    let mut rng = trial_rng(kind, seed, trial);
    let quad = Quad::default();
    match kind {
        SuiteKind::SharpEstimate => {
            let n = if rng.gen_bool(0.25) { 2 } else { 1 };
            let alpha = random_bv(&mut rng, 0.0, 1.0, n, n, false)?;
            let deg = rng.gen_range(0..=3);
            let f = random_poly_fn(&mut rng, 0.0, 1.0, n, deg)?;
            check_sharp_estimate(&alpha, &f, quad)
        }
        SuiteKind::ShiftedFubini => {
            let r = rng.gen_range(0.5..2.0);
            let alpha = random_bv(&mut rng, -r, 0.0, 1, 1, false)?;
            let deg = rng.gen_range(0..=3);
            let f = random_poly_fn(&mut rng, -r, 0.0, 1, deg)?;
            let g = random_step_fn(&mut rng, 0.0, r)?;
            check_shifted_fubini(&f, &alpha, &g, quad)
        }
        SuiteKind::LpBound => {
            let n = if rng.gen_bool(0.3) { 2 } else { 1 };
            let r = rng.gen_range(0.5..2.0);
            let kernel = random_kernel(&mut rng, n, r)?;
            let deg = rng.gen_range(0..=3);
            let p = MatPoly::new((0..=deg).map(|_| mat(&mut rng, n, 1, false)).collect())?.shifted(r);
            let phi = History::from_poly(r, p)?;
            let exponent = [1.0, 2.0, 3.0][rng.gen_range(0..3usize)];
            check_lp_bound(&kernel, &phi, exponent, quad)
        }
        SuiteKind::Fubini => {
            let alpha = random_bv(&mut rng, 0.0, 1.0, 1, 1, false)?;
            let beta = random_bv(&mut rng, 0.0, 2.0, 1, 1, false)?;
            let f = random_bivariate(&mut rng)?;
            check_fubini(&f, &alpha, &beta, quad)
        }
        SuiteKind::Minkowski => {
            let alpha = random_bv(&mut rng, 0.0, 1.0, 1, 1, true)?;
            let beta = random_bv(&mut rng, 0.0, 2.0, 1, 1, true)?;
            let f = random_bivariate(&mut rng)?;
            let p = [1.0, 1.5, 2.0, 3.0][rng.gen_range(0..4usize)];
            check_minkowski(&f, &alpha, &beta, p, quad)
        }
    }
}

fn verdict(relation: Relation, c: &Check<f64>, slack: f64) -> bool {
    match relation {
        Relation::Leq => c.leq_within(slack),
        Relation::Eq => c.eq_within(slack),
    }
}

fn excess(relation: Relation, r: &TrialRecord) -> f64 {
    match relation {
        Relation::Leq => r.lhs - r.rhs,
        Relation::Eq => (r.lhs - r.rhs).abs(),
    }
}

/// Runs `trials` independent trials of `kind`; `slack` is the absolute
/// tolerance of the verdict.
pub fn run_suite(kind: SuiteKind, seed: u64, trials: usize, slack: f64) -> Result<SuiteResult> {
    let relation = kind.relation();
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let c = one_trial(kind, seed, i)?;
            Ok(TrialRecord {
                trial: i,
                lhs: c.lhs,
                rhs: c.rhs,
                tol: c.tol,
                pass: verdict(relation, &c, slack),
            })
        })
        .collect::<Result<_>>()?;
    let worst = records
        .iter()
        .copied()
        .max_by(|a, b| excess(relation, a).total_cmp(&excess(relation, b)))
        .unwrap_or(TrialRecord {
            trial: 0,
            lhs: 0.0,
            rhs: 0.0,
            tol: 0.0,
            pass: true,
        });
    let failures: Vec<TrialRecord> = records.iter().filter(|r| !r.pass).copied().collect();
    Ok(SuiteResult {
        check: kind.name().into(),
        anchor: kind.anchor().into(),
        relation,
        seed,
        trials,
        passed: trials - failures.len(),
        slack,
        worst,
        failures,
    })
}

pub fn run_all(seed: u64, trials: usize, slack: f64) -> Result<Vec<SuiteResult>> {
    SuiteKind::ALL.iter().map(|&k| run_suite(k, seed, trials, slack)).collect()
}
