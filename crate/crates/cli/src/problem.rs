//! Problem files: JSON description of a kernel, a history and solver settings.

use std::fmt;
use std::path::Path;

use rfde_core::{History, Kernel, Mat, MatPoly, PiecewiseFunction, SolverConfig};
use serde::Deserialize;

/// A numeric field given either as a bare number (`1×1` or length-one
/// vector), a flat list (vector) or a list of rows (matrix).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum NumArray {
    Scalar(f64),
    Vector(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Named(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAtom {
    pub theta: f64,
    pub matrix: NumArray,
}

/// Polynomial on `interval`; `polynomial[k]` multiplies `θ^k`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPiece {
    pub interval: [f64; 2],
    pub polynomial: Vec<NumArray>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawKernel {
    #[serde(default)]
    pub atoms: Vec<RawAtom>,
    #[serde(default)]
    pub density: Vec<RawPiece>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPoint {
    pub at: f64,
    /// `null` marks a point where the history is left undefined.
    pub value: Option<NumArray>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RawHistory {
    pub pieces: Vec<RawPiece>,
    pub value_at_zero: Option<NumArray>,
    pub p: Option<Exponent>,
    #[serde(default)]
    pub points: Vec<RawPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CheckName {
    Regularity,
    RouteEquivalence,
    Classical,
    Forcing,
    LpBound,
    FullResidual,
    MemoryIdentity,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::Regularity,
        CheckName::RouteEquivalence,
        CheckName::Classical,
        CheckName::Forcing,
        CheckName::LpBound,
        CheckName::FullResidual,
        CheckName::MemoryIdentity,
    ];
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RawSpec {
    pub n: usize,
    pub r: f64,
    #[serde(default)]
    pub kernel: RawKernel,
    pub history: RawHistory,
    pub horizon: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    pub checks: Option<Vec<CheckName>>,
}

/// Validated problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub n: usize,
    pub r: f64,
    pub kernel: Kernel<f64>,
    pub history: History<f64>,
    pub horizon: f64,
    pub solver: SolverConfig,
    pub checks: Vec<CheckName>,
}

/// One schema violation: where and why.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("cannot read problem file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid problem file:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Schema(Vec<Violation>),
}

impl ParseError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ParseError::Schema(v) => v,
            ParseError::Io { .. } => &[],
        }
    }
}

pub fn parse_problem(path: &Path) -> Result<ProblemSpec, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem_str(&text)
}

pub fn parse_problem_str(text: &str) -> Result<ProblemSpec, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ParseError::Schema(vec![Violation {
            path: if path == "." { "(root)".into() } else { path },
            reason: e.into_inner().to_string(),
        }])
    })?;
    validate(raw)
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, path: impl Into<String>, reason: impl Into<String>) {
        self.0.push(Violation {
            path: path.into(),
            reason: reason.into(),
        });
    }
}

fn matrix(a: &NumArray, rows: usize, cols: usize, path: &str, errs: &mut Collector) -> Option<Mat<f64>> {
    let bad = |errs: &mut Collector| {
        errs.push(path, format!("expected a {rows}x{cols} array"));
        None
    };
    let m = match a {
        NumArray::Scalar(v) if rows * cols == 1 => Mat::scalar(*v),
        NumArray::Vector(v) if cols == 1 && v.len() == rows => Mat::column(v.clone()),
        NumArray::Vector(v) if rows == 1 && v.len() == cols => Mat::from_vec(1, cols, v.clone()).ok()?,
        NumArray::Rows(r) if r.len() == rows && r.iter().all(|x| x.len() == cols) => Mat::from_rows(r).ok()?,
        _ => return bad(errs),
    };
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        errs.push(path, "entries must be finite");
        return None;
    }
    Some(m)
}

fn poly(
    piece: &RawPiece,
    rows: usize,
    cols: usize,
    path: &str,
    errs: &mut Collector,
) -> Option<((f64, f64), MatPoly<f64>)> {
    let [lo, hi] = piece.interval;
    let mut ok = true;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        errs.push(format!("{path}.interval"), "needs finite endpoints with lo < hi");
        ok = false;
    }
    if piece.polynomial.is_empty() {
        errs.push(format!("{path}.polynomial"), "needs at least one coefficient");
        return None;
    }
    let coeffs: Vec<Option<Mat<f64>>> = piece
        .polynomial
        .iter()
        .enumerate()
        .map(|(k, c)| matrix(c, rows, cols, &format!("{path}.polynomial[{k}]"), errs))
        .collect();
    if !ok || coeffs.iter().any(Option::is_none) {
        return None;
    }
    let p = MatPoly::new(coeffs.into_iter().flatten().collect()).ok()?;
    Some(((lo, hi), p))
}

fn exponent(p: &Option<Exponent>, errs: &mut Collector) -> f64 {
    match p {
        None => 2.0,
        Some(Exponent::Number(v)) if *v >= 1.0 => *v,
        Some(Exponent::Named(s)) if matches!(s.as_str(), "inf" | "infinity") => f64::INFINITY,
        Some(_) => {
            errs.push("history.p", "must be a number >= 1 or \"inf\"");
            2.0
        }
    }
}

fn validate(raw: RawSpec) -> Result<ProblemSpec, ParseError> {
    let mut errs = Collector(Vec::new());
    let n = raw.n;
    let r = raw.r;
    if n == 0 {
        errs.push("n", "must be at least 1");
    }
    if !(r > 0.0) || !r.is_finite() {
        errs.push("r", "must be positive and finite");
    }
    if !(raw.horizon > 0.0) || !raw.horizon.is_finite() {
        errs.push("horizon", "must be positive and finite");
    }
    if let Err(e) = raw.solver.validate() {
        errs.push("solver", e.to_string());
    }
    if n == 0 || !(r > 0.0) || !r.is_finite() {
        return Err(ParseError::Schema(errs.0));
    }

    let mut atoms = Vec::new();
    for (i, a) in raw.kernel.atoms.iter().enumerate() {
        let path = format!("kernel.atoms[{i}]");
        if !(a.theta >= -r && a.theta <= 0.0) {
            errs.push(format!("{path}.theta"), format!("atom at theta = {} lies outside [-r, 0] = [{}, 0]", a.theta, -r));
        }
        if let Some(m) = matrix(&a.matrix, n, n, &format!("{path}.matrix"), &mut errs) {
            atoms.push((a.theta, m));
        }
    }
    let mut density = Vec::new();
    for (i, p) in raw.kernel.density.iter().enumerate() {
        let path = format!("kernel.density[{i}]");
        if let Some(piece) = poly(p, n, n, &path, &mut errs) {
            let (lo, hi) = piece.0;
            if lo < -r || hi > 0.0 {
                errs.push(format!("{path}.interval"), format!("must lie inside [-r, 0] = [{}, 0]", -r));
            }
            density.push(piece);
        }
    }

    let h = &raw.history;
    let pieces: Vec<_> = h
        .pieces
        .iter()
        .enumerate()
        .filter_map(|(i, p)| poly(p, n, 1, &format!("history.pieces[{i}]"), &mut errs))
        .collect();
    if h.pieces.is_empty() {
        errs.push("history.pieces", "at least one piece is required");
    }
    let at_zero = match &h.value_at_zero {
        None => {
            errs.push("history.valueAtZero", "history.valueAtZero required");
            None
        }
        Some(v) => matrix(v, n, 1, "history.valueAtZero", &mut errs),
    };
    let points: Vec<(f64, Option<Mat<f64>>)> = h
        .points
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            let v = pt.value.as_ref().and_then(|v| matrix(v, n, 1, &format!("history.points[{i}].value"), &mut errs));
            (pt.at, v)
        })
        .collect();
    let p = exponent(&h.p, &mut errs);

    if !errs.0.is_empty() {
        return Err(ParseError::Schema(errs.0));
    }

    let kernel = Kernel::from_parts(n, r, atoms, density).map_err(|e| {
        ParseError::Schema(vec![Violation {
            path: "kernel".into(),
            reason: e.to_string(),
        }])
    })?;
    let history = PiecewiseFunction::new(pieces)
        .and_then(|f| f.with_points(points))
        .map_err(|e| {
            ParseError::Schema(vec![Violation {
                path: "history.pieces".into(),
                reason: e.to_string(),
            }])
        })?;
    let (a, b) = history.domain();
    if (a + r).abs() > 1e-12 * (1.0 + r) || b.abs() > 1e-12 {
        return Err(ParseError::Schema(vec![Violation {
            path: "history.pieces".into(),
            reason: format!("pieces must tile [-r, 0] = [{}, 0], got [{a}, {b}]", -r),
        }]));
    }
    let history = History::new(history, at_zero.expect("checked above"), p).map_err(|e| {
        ParseError::Schema(vec![Violation {
            path: "history".into(),
            reason: e.to_string(),
        }])
    })?;
    Ok(ProblemSpec {
        n,
        r,
        kernel,
        history,
        horizon: raw.horizon,
        solver: raw.solver,
        checks: raw.checks.unwrap_or_else(|| CheckName::ALL.to_vec()),
    })
}
