//! Result, report, and log serialization.
//!
//! All floating-point values are written with 17 significant decimal digits
//! (`{:.16e}`), which is enough for a bit-exact round trip through text:
//! re-reading a result file reproduces the identical `f64` values.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use rdh2_core::control::{ImpulseResponse, VerificationReport};
use rdh2_core::solver::{ConvergenceRecord, SynthesisResult};

use crate::problem::{CliError, MatrixFile};

/// 17-significant-digit decimal rendering of a finite value; JSON `null`
/// otherwise (JSON has no NaN/Inf literals).
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn json_matrix(out: &mut String, indent: &str, matrix: &DMatrix<f64>) {
    let _ = write!(out, "{{\"rows\": {}, \"cols\": {}, \"data\": [", matrix.nrows(), matrix.ncols());
    let mut first = true;
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            if !first {
                out.push_str(", ");
            }
            first = false;
            out.push_str(&fmt_f64(matrix[(r, c)]));
        }
    }
    let _ = write!(out, "]}}");
    let _ = indent;
}

/// The solve subcommand's output document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    /// Recovered decentralized gain; absent if recovery failed.
    pub k: Option<MatrixFile>,
    /// Converged design-variable certificate (the (n+m)×(n+m) multiplier).
    pub w: MatrixFile,
    /// Objective value ⟨R, W⟩, the guaranteed cost bound.
    pub bound: Option<f64>,
    /// "converged", "max_iterations", or "diverged".
    pub status: String,
    pub iterations: usize,
    pub wall_time_s: f64,
}

/// Serialize a synthesis result. The layout matches [`ResultFile`].
pub fn render_result(result: &SynthesisResult<f64>) -> String {
    let mut out = String::new();
    out.push_str("{\n  \"k\": ");
    match &result.gain {
        Some(gain) => json_matrix(&mut out, "  ", gain.matrix()),
        None => out.push_str("null"),
    }
    out.push_str(",\n  \"w\": ");
    json_matrix(&mut out, "  ", &result.w_opt);
    let _ = write!(
        out,
        ",\n  \"bound\": {},\n  \"status\": \"{}\",\n  \"iterations\": {},\n  \"wall_time_s\": {}\n}}\n",
        fmt_f64(result.bound),
        result.status,
        result.iterations,
        fmt_f64(result.wall_time.as_secs_f64()),
    );
    out
}

pub fn read_result(path: &Path) -> Result<ResultFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Read a bare gain matrix file (`{"rows": m, "cols": n, "data": [...]}`).
pub fn read_gain_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: MatrixFile = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    file.to_matrix("k")
}

/// One row per logged iteration, 17-significant-digit columns.
pub fn render_convergence_csv(history: &[ConvergenceRecord<f64>]) -> String {
    let mut out =
        String::from("iteration,err_x0,err_xi_max,err_xeq_max,err_eq,err_max,dual_objective\n");
    for rec in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            rec.iteration,
            fmt_f64(rec.err_x0),
            fmt_f64(rec.err_xi_max),
            fmt_f64(rec.err_xeq_max),
            fmt_f64(rec.err_eq),
            fmt_f64(rec.err_max),
            fmt_f64(rec.dual_objective),
        );
    }
    out
}

/// Serialize a verification report, one entry per vertex (Gramians omitted).
pub fn render_report(report: &VerificationReport<f64>) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\n  \"structure_ok\": {},\n  \"all_stable\": {},\n  \"bound_ok\": {},\n  \"bound\": {},\n  \"worst_h2_squared\": {},\n  \"worst_abscissa\": {},\n  \"vertices\": [\n",
        report.structure_ok,
        report.all_stable,
        report.bound_ok,
        fmt_f64(report.bound),
        report.worst_h2_squared.map_or("null".to_string(), fmt_f64),
        fmt_f64(report.worst_abscissa),
    );
    for (i, check) in report.vertex_checks.iter().enumerate() {
        let _ = writeln!(
            out,
            "    {{\"index\": {}, \"hurwitz\": {}, \"max_real_eig\": {}, \"h2_squared\": {}}}{}",
            i,
            check.hurwitz,
            fmt_f64(check.max_real_eig),
            check.h2_squared.map_or("null".to_string(), fmt_f64),
            if i + 1 < report.vertex_checks.len() { "," } else { "" },
        );
    }
    out.push_str("  ]\n}\n");
    out
}

/// Verification report as re-read from disk.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub structure_ok: bool,
    pub all_stable: bool,
    pub bound_ok: bool,
    pub bound: Option<f64>,
    pub worst_h2_squared: Option<f64>,
    pub worst_abscissa: Option<f64>,
    pub vertices: Vec<ReportVertex>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportVertex {
    pub index: usize,
    pub hurwitz: bool,
    pub max_real_eig: Option<f64>,
    pub h2_squared: Option<f64>,
}

/// Trajectory table: time column, then one column per
/// (disturbance channel, state) pair, labeled `w{c}_x{j}`.
pub fn render_trajectory_csv(response: &ImpulseResponse<f64>) -> String {
    let channels = response.channels();
    let states = if channels > 0 { response.states[0].ncols() } else { 0 };
    let mut out = String::from("time");
    for c in 0..channels {
        for j in 0..states {
            let _ = write!(out, ",w{c}_x{j}");
        }
    }
    out.push('\n');
    for (s, t) in response.times.iter().enumerate() {
        out.push_str(&fmt_f64(*t));
        for traj in &response.states {
            for j in 0..states {
                out.push(',');
                out.push_str(&fmt_f64(traj[(s, j)]));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::io(path, e))
}
