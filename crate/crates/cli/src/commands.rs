//! The `solve`, `verify` and `props` commands.

use std::path::{Path, PathBuf};

use rfde_core::suites::run_all;
use rfde_core::{
    ac_modulus, check_lp_bound, de_residual, derivative_lp, forcing_report, lipschitz_estimate,
    memory_functional, regularity_report, solve_classical, solve_forced_dde, solve_mild,
    MildForcing, Quad, ResidualMode, Side, Trajectory,
};

use crate::output::{ensure_dir, write_csv, write_report, write_trajectory, Report, ReportLine};
use crate::problem::{CheckName, ProblemSpec};
use crate::CliError;

/// Environment variable scaling every tolerance of `verify` and `props`.
pub const TOL_SCALE_VAR: &str = "RFDE_TOL_SCALE";

pub fn tol_scale_from_env() -> Result<f64, CliError> {
    match std::env::var(TOL_SCALE_VAR) {
        Err(_) => Ok(1.0),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
            _ => Err(CliError::Env(format!("{TOL_SCALE_VAR} must be a positive number, got {s:?}"))),
        },
    }
}

/// Files written and the report (when the command produces one).
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub report: Option<Report>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match &self.report {
            Some(r) if !r.all_pass => 1,
            _ => 0,
        }
    }
}

fn quad(spec: &ProblemSpec) -> Quad {
    Quad::new(spec.solver.quad_order, 1)
}

pub fn solve(spec: &ProblemSpec, out: &Path) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let x = solve_mild(&spec.kernel, &spec.history, spec.horizon, &spec.solver)?;
    let traj = out.join("trajectory.csv");
    write_trajectory(&traj, &x)?;
    let m = MildForcing::new(&spec.kernel, &spec.history, quad(spec))?;
    let mut rows = Vec::with_capacity(x.len());
    for &t in x.grid() {
        let mut v = m.f_limit(t, Side::Right)?.into_vec();
        v.extend(m.big_g(t)?.into_vec());
        rows.push((t, v));
    }
    let forcing = out.join("forcing.csv");
    write_csv(&forcing, &[("f", spec.n), ("G", spec.n)], rows.into_iter())?;
    Ok(Outcome {
        files: vec![traj, forcing],
        report: None,
    })
}

/// Deltas `T/10, T/20, T/40, T/80`, kept above four cells.
fn delta_ladder(horizon: f64, h: f64) -> Vec<f64> {
    (0..4)
        .map(|k| horizon / (10.0 * f64::from(1u32 << k)))
        .filter(|&d| d >= 4.0 * h)
        .collect()
}

fn sup_abs(x: &Trajectory<f64>) -> f64 {
    (0..x.len())
        .flat_map(|k| x.value(k).iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
}

fn corrupt(x: &Trajectory<f64>) -> Result<Trajectory<f64>, CliError> {
    let t_mid = x.grid()[x.len() / 2];
    Ok(x.map_values(|t, v| {
        if t == t_mid {
            v.iter().map(|a| a + 1.0).collect()
        } else {
            v.to_vec()
        }
    })?)
}

/// Runs the requested certificates. `inject_corruption` perturbs one node
/// of the computed trajectory before checking (detector sanity runs).
pub fn verify(spec: &ProblemSpec, out: &Path, tol_scale: f64, inject_corruption: bool) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let s = tol_scale;
    let q = quad(spec);
    let (k, phi, t_end, cfg) = (&spec.kernel, &spec.history, spec.horizon, &spec.solver);
    let h = cfg.h;
    let mut x = solve_mild(k, phi, t_end, cfg)?;
    if inject_corruption {
        x = corrupt(&x)?;
    }
    let m = MildForcing::new(k, phi, q)?;
    let mut rep = Report::new("verify", s);
    let wants = |c: CheckName| spec.checks.contains(&c);
    let phi_sup = phi.pieces().lp_norm(f64::INFINITY).max(phi.value_at_zero().max_abs());

    if wants(CheckName::Regularity) {
        let p = if phi.p().is_finite() { phi.p() } else { f64::INFINITY };
        let deltas = delta_ladder(t_end, h);
        let reg = regularity_report(k, &x, &m, p, &deltas, 4, q)?;
        let table = ac_modulus(&x, &deltas);
        let dev = table
            .windows(2)
            .filter(|w| w[1].1 > 0.0)
            .map(|w| ((w[0].1 / w[1].1).log2() - 1.0).abs())
            .fold(0.0, f64::max);
        rep.push(ReportLine::leq(
            "ac_modulus",
            "mild solutions are locally absolutely continuous",
            dev,
            1.5f64.log2(),
            0.0,
        ));
        let lip = lipschitz_estimate(&x);
        rep.push(ReportLine::leq(
            "lipschitz_estimate",
            "Lipschitz bound |ẋ| <= Var(η)(sup|x| + sup|φ|)",
            lip,
            k.variation() * (sup_abs(&x) + phi_sup),
            1e-6 * s * (1.0 + lip),
        ));
        let norms = derivative_lp(&x, p, 4);
        let hi = norms.iter().copied().fold(0.0, f64::max);
        let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
        rep.push(ReportLine::leq(
            "derivative_lp",
            "derivative of the mild solution lies in L^p_loc",
            spread,
            0.1 * s,
            0.0,
        ));
        rep.push(ReportLine::leq(
            "de_residual",
            "a.e. equation ẋ = ∫_{-t}^0 dη x(t+θ) + f(t)",
            reg.residual_stats.max,
            100.0 * h * h * s,
            0.0,
        ));
        rep.regularity = Some(reg);
    }

    if wants(CheckName::RouteEquivalence) {
        let forced = solve_forced_dde(k, &m, phi.value_at_zero(), t_end, cfg)?;
        let d = x.max_abs_diff(&forced)?;
        rep.push(ReportLine::leq(
            "route_equivalence",
            "Volterra form and forced equation give the same solution",
            d,
            5.0 * h * h * s,
            0.0,
        ));
    }

    if wants(CheckName::Classical) {
        if phi.is_continuous() {
            let c = solve_classical(k, phi, t_end, cfg)?;
            rep.push(ReportLine::leq(
                "classical_equivalence",
                "mild solution coincides with the classical one for continuous histories",
                x.max_abs_diff(&c)?,
                h * h * s,
                0.0,
            ));
        } else {
            rep.skipped.push("classical_equivalence: history is discontinuous".into());
        }
    }

    if wants(CheckName::Forcing) {
        let r = k.r();
        let end = t_end.max(2.0 * r);
        let n = ((end / h).ceil() as usize).clamp(200, 20_000);
        let grid: Vec<f64> = (0..=n).map(|j| end * j as f64 / n as f64).collect();
        let fr = forcing_report(k, phi, &grid, q)?;
        rep.push(ReportLine::leq("forcing_tail", "forcing vanishes on [r, ∞)", fr.tail_max, 0.0, 1e-10 * s));
        rep.push(ReportLine::leq(
            "forcing_constancy",
            "G(·;φ) is constant on [r, ∞)",
            fr.constancy_defect,
            0.0,
            1e-10 * s,
        ));
    }

    if wants(CheckName::LpBound) {
        if phi.is_continuous() && phi.p().is_finite() {
            let c = check_lp_bound(k, phi, phi.p(), q)?;
            rep.push(ReportLine::leq(
                "check_lp_bound",
                "L^p bound ‖g(·;φ)‖_p <= Var(η)‖φ‖_p",
                c.lhs,
                c.rhs,
                c.tol * s,
            ));
        } else {
            rep.skipped.push("check_lp_bound: needs a continuous history and finite p".into());
        }
    }

    if wants(CheckName::FullResidual) {
        if t_end > k.r() + 8.0 * h {
            let st = de_residual(k, &x, &m, ResidualMode::Full, q)?;
            rep.push(ReportLine::leq(
                "de_residual_full",
                "ẋ = L x_t for t >= r",
                st.max,
                100.0 * h * h * s,
                0.0,
            ));
        } else {
            rep.skipped.push("de_residual_full: horizon does not extend past r".into());
        }
    }

    if wants(CheckName::MemoryIdentity) {
        let stride = (x.len() / 200).max(1);
        let times: Vec<f64> = x.grid().iter().copied().step_by(stride).collect();
        let mem = memory_functional(k, phi, &x, &times, q)?;
        let x0 = phi.value_at_zero();
        let mut worst = 0.0f64;
        for (j, &t) in times.iter().enumerate() {
            let xt = x.eval(t)?;
            for i in 0..spec.n {
                worst = worst.max((xt.get(i, 0) - x0.get(i, 0) - mem.value(j)[i]).abs());
            }
        }
        rep.push(ReportLine::eq(
            "memory_identity",
            "mild solution x(t) = φ(0) + L∫_0^t x_s ds",
            worst,
            0.0,
            1e-9 * s * (1.0 + sup_abs(&x)),
        ));
    }

    let path = write_report(out, &rep)?;
    Ok(Outcome {
        files: vec![path],
        report: Some(rep),
    })
}

pub fn props(seed: u64, trials: usize, out: &Path, tol_scale: f64) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let slack = 1e-9 * tol_scale;
    let suites = run_all(seed, trials, slack)?;
    let mut rep = Report::new("props", tol_scale);
    rep.seed = Some(seed);
    rep.trials = Some(trials);
    for s in &suites {
        rep.push(ReportLine {
            check: s.check.clone(),
            anchor: s.anchor.clone(),
            lhs: s.worst.lhs,
            rhs: s.worst.rhs,
            tol: slack.max(s.worst.tol),
            pass: s.all_passed(),
        });
    }
    rep.suites = Some(suites);
    let path = write_report(out, &rep)?;
    Ok(Outcome {
        files: vec![path],
        report: Some(rep),
    })
}
