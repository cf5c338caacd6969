use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{io_context, CurvePoint, GridValue, SummaryRow, TrialSummary};
use crate::error::Result;

pub const MAIN_HEADER: &str =
    "experiment,n0,d,epsilon,n_labeled,n_unlabeled,relevant_fraction,trial,std_err,rob_err,gamma,seed";
pub const SUMMARY_HEADER: &str = "experiment,grid_key,grid_value,metric,mean,ci95_half_width,trials";
pub const CURVE_HEADER: &str = "trial,radius_l2,radius_linf,certified_accuracy,analytic_accuracy,mc_std_error";

/// 17 significant digits, which round-trips every `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn grid(v: GridValue) -> String {
    match v {
        GridValue::Int(i) => i.to_string(),
        GridValue::Float(f) => format_float(f),
    }
}

pub fn main_csv(rows: &[TrialSummary]) -> String {
    let mut s = String::new();
    s.push_str(MAIN_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            opt(r.n0),
            r.d,
            format_float(r.epsilon),
            opt(r.n_labeled),
            opt(r.n_unlabeled),
            opt_float(r.relevant_fraction),
            r.trial,
            format_float(r.std_err),
            format_float(r.rob_err),
            opt_float(r.gamma),
            r.seed
        );
    }
    s
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    s.push_str(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.experiment,
            r.grid_key,
            grid(r.grid_value),
            r.metric,
            format_float(r.mean),
            opt_float(r.ci95_half_width),
            r.trials
        );
    }
    s
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut s = String::new();
    s.push_str(CURVE_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            p.trial,
            format_float(p.radius_l2),
            format_float(p.radius_linf),
            format_float(p.certified_accuracy),
            format_float(p.analytic_accuracy),
            format_float(p.mc_std_error)
        );
    }
    s
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| io_context(path, e))
}

pub fn write_main_csv(path: &Path, rows: &[TrialSummary]) -> Result<()> {
    write(path, &main_csv(rows))
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write(path, &summary_csv(rows))
}

pub fn write_curve_csv(path: &Path, points: &[CurvePoint]) -> Result<()> {
    write(path, &curve_csv(points))
}

/// `a.csv` -> `a.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    sibling(out, "summary")
}

/// `a.csv` -> `a.curve.csv`.
pub fn curve_path(out: &Path) -> PathBuf {
    sibling(out, "curve")
}

fn sibling(out: &Path, tag: &str) -> PathBuf {
    match out.extension() {
        Some(ext) if ext == "csv" => out.with_extension(format!("{tag}.csv")),
        _ => {
            let mut s = out.as_os_str().to_owned();
            s.push(format!(".{tag}.csv"));
            PathBuf::from(s)
        }
    }
}
