//! The `distance`, `dual`, `divergence` and `gap-demo` subcommands.

use std::time::Instant;

use qwass::closedform::{d_symm_general, d_z_commuting, d_z_xy, divergence_symm_commuting, divergence_z_xy};
use qwass::transport::{divergence_quadratic, gap_demo, wasserstein_distance, TransportError};
use qwass::{BlochVector, Mode, SolverOptions, TransportInstance, TransportSolution};

use crate::instance::{bloch_of, CostKind, InstanceFile, ModeKind};
use crate::report::{
    CertificateEcho, ClosedFormEcho, DivergenceEcho, GapRow, MatrixEcho, PotentialsEcho, ReportRecord,
};
use crate::{CliError, Result};

/// Components below this count as zero when matching a closed form.
const PLANE_TOL: f64 = 1e-12;

fn solve_error(e: TransportError) -> CliError {
    CliError::failure(e)
}

fn print_trace(sol: &TransportSolution) {
    for rec in &sol.raw.trace {
        eprintln!("{rec}");
    }
}

fn qubit_pair(inst: &TransportInstance) -> Option<(BlochVector, BlochVector)> {
    let r1 = BlochVector::new(bloch_of(&inst.rho)?).ok()?;
    let r2 = BlochVector::new(bloch_of(&inst.omega)?).ok()?;
    Some((r1, r2))
}

fn in_xy_plane(r: &BlochVector) -> bool {
    r.components()[2].abs() <= PLANE_TOL
}

fn on_z_axis(r: &BlochVector) -> bool {
    let [x, y, _] = r.components();
    x.abs() <= PLANE_TOL && y.abs() <= PLANE_TOL
}

fn radius_xy(r: &BlochVector) -> f64 {
    let [x, y, _] = r.components();
    x.hypot(y)
}

/// Closed-form `D^p` when the instance falls into a solved family.
fn closed_form_distance(file: &InstanceFile, inst: &TransportInstance) -> Option<(String, f64)> {
    if inst.mode != Mode::Joint {
        return None;
    }
    let (r1, r2) = qubit_pair(inst)?;
    let p = inst.p;
    match file.cost {
        CostKind::Symm if r1.is_collinear(&r2) => Some(("d_symm collinear".into(), d_symm_general(&r1, &r2, p).ok()?)),
        CostKind::Z if on_z_axis(&r1) && on_z_axis(&r2) => {
            Some(("d_z commuting".into(), d_z_commuting(r1.components()[2], r2.components()[2], p)))
        }
        CostKind::Z if in_xy_plane(&r1) && in_xy_plane(&r2) => {
            Some(("d_z xy-plane".into(), d_z_xy(radius_xy(&r1), radius_xy(&r2), p)))
        }
        _ => None,
    }
}

fn closed_form_divergence(file: &InstanceFile, inst: &TransportInstance) -> Option<(String, f64)> {
    if inst.mode != Mode::Joint {
        return None;
    }
    let (r1, r2) = qubit_pair(inst)?;
    match file.cost {
        CostKind::Symm if r1.is_collinear(&r2) => {
            Some(("d2_symm collinear".into(), divergence_symm_commuting(&r1, &r2).ok()?))
        }
        CostKind::Z if in_xy_plane(&r1) && in_xy_plane(&r2) => {
            Some(("d2_z xy-plane".into(), divergence_z_xy(radius_xy(&r1), radius_xy(&r2))))
        }
        _ => None,
    }
}

fn record(command: &str, file: &InstanceFile, sol: &TransportSolution, start: Instant) -> ReportRecord {
    let c = &sol.certificate;
    ReportRecord {
        command: command.into(),
        instance: file.clone(),
        status: sol.status.to_string(),
        iterations: sol.iterations,
        primal: sol.primal,
        dual: sol.dual,
        gap: sol.gap,
        value: sol.value,
        distance: sol.distance,
        degenerate: sol.degenerate,
        certificate: CertificateEcho {
            primal_residual: c.max_primal_residual(),
            dual_residual: c.dual_residual,
            min_eig_x: c.min_eig_x,
            min_eig_s: c.min_eig_s,
            passed: c.passed,
        },
        potentials: None,
        divergence: None,
        closed_form: None,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Solves the transport problem of `file`; with `dual` the report carries
/// the optimal potentials.
pub fn distance(file: &InstanceFile, opts: &SolverOptions, dual: bool) -> Result<ReportRecord> {
    let start = Instant::now();
    let inst = file.instance()?;
    let sol = wasserstein_distance(&inst, opts).map_err(solve_error)?;
    if opts.verbose {
        print_trace(&sol);
    }
    let mut rec = record(if dual { "dual" } else { "distance" }, file, &sol, start);
    rec.closed_form = closed_form_distance(file, &inst)
        .map(|(formula, value)| ClosedFormEcho { formula, value, deviation: (sol.value - value).abs() });
    if dual {
        rec.potentials = Some(PotentialsEcho {
            x: sol.potentials.x.iter().map(MatrixEcho::from).collect(),
            y: sol.potentials.y.iter().map(MatrixEcho::from).collect(),
            objective: sol.potential_objective,
            min_slack: sol.min_slack,
            attained: sol.dual_attained,
        });
    }
    rec.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(rec)
}

/// Quadratic divergence of the states of `file`; the exponent must be 2.
pub fn divergence(file: &InstanceFile, opts: &SolverOptions) -> Result<ReportRecord> {
    let start = Instant::now();
    if file.p != 2.0 {
        return Err(CliError::Usage(format!("the divergence is defined for p = 2, got {}", file.p)));
    }
    if file.mode == ModeKind::Linearized {
        return Err(CliError::Usage("the divergence uses a single coupling; choose joint or nonlinear mode".into()));
    }
    let inst = file.instance()?;
    let sol = wasserstein_distance(&inst, opts).map_err(solve_error)?;
    if opts.verbose {
        print_trace(&sol);
    }
    let d = divergence_quadratic(&inst.rho, &inst.omega, &inst.cost, inst.mode, opts).map_err(solve_error)?;
    let mut rec = record("divergence", file, &sol, start);
    rec.closed_form = closed_form_divergence(file, &inst)
        .map(|(formula, value)| ClosedFormEcho { formula, value, deviation: (d.squared - value).abs() });
    rec.divergence = Some(DivergenceEcho {
        cross: d.cross,
        self_rho: d.self_rho,
        self_omega: d.self_omega,
        squared: d.squared,
        value: d.value,
    });
    rec.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(rec)
}

/// Nonlinear and linearized optima of the strict-gap example.
pub fn gap_rows(ps: &[f64], opts: &SolverOptions) -> Result<Vec<GapRow>> {
    ps.iter()
        .map(|&p| {
            if !(p.is_finite() && p >= 1.0) {
                return Err(CliError::Usage(format!("p = {p} must be at least 1")));
            }
            let demo = gap_demo(p, opts).map_err(solve_error)?;
            Ok(GapRow { p, nonlinear: demo.nonlinear, linearized: demo.linearized, difference: demo.difference() })
        })
        .collect()
}
