//! Experiment drivers: trial orchestration, aggregation and CSV output for
//! the Gaussian-model simulations.

mod check;
mod config;
mod output;
mod runners;

use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::estimators::SamplerPath;
use crate::gaussian_model::{canonical_model, GaussianModel};
use crate::rst::{RstConfig, StandardConfig};
use crate::smoothing::SmoothingConfig;
use crate::statkit::{split_stream, RngStream};

pub use check::{check, CheckOutcome, Threshold, THRESHOLDS};
pub use config::ConfigFile;
pub use output::{
    curve_csv, curve_path, format_float, main_csv, summary_csv, summary_path, write_curve_csv, write_main_csv, write_summary_csv, CURVE_HEADER,
    MAIN_HEADER, SUMMARY_HEADER,
};
pub use runners::{
    run_certify_demo, run_gap, run_irrelevant_sweep, run_label_sweep, run_rst_demo, run_unlabeled_sweep,
    run_verify_closed_form,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    VerifyClosedForm,
    Gap,
    UnlabeledSweep,
    IrrelevantSweep,
    LabelSweep,
    RstDemo,
    CertifyDemo,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::VerifyClosedForm,
        ExperimentKind::Gap,
        ExperimentKind::UnlabeledSweep,
        ExperimentKind::IrrelevantSweep,
        ExperimentKind::LabelSweep,
        ExperimentKind::RstDemo,
        ExperimentKind::CertifyDemo,
    ];

    /// Name used for config-file sections.
    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::VerifyClosedForm => "verify_closed_form",
            ExperimentKind::Gap => "gap",
            ExperimentKind::UnlabeledSweep => "unlabeled_sweep",
            ExperimentKind::IrrelevantSweep => "irrelevant_sweep",
            ExperimentKind::LabelSweep => "label_sweep",
            ExperimentKind::RstDemo => "rst_demo",
            ExperimentKind::CertifyDemo => "certify_demo",
        }
    }

    /// CLI subcommand name.
    pub fn command(self) -> &'static str {
        match self {
            ExperimentKind::VerifyClosedForm => "verify",
            ExperimentKind::Gap => "gap",
            ExperimentKind::UnlabeledSweep => "sweep-unlabeled",
            ExperimentKind::IrrelevantSweep => "sweep-irrelevant",
            ExperimentKind::LabelSweep => "sweep-labels",
            ExperimentKind::RstDemo => "rst-demo",
            ExperimentKind::CertifyDemo => "certify-demo",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s || k.command() == s)
    }
}

/// Everything one experiment run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n0: u64,
    pub d: usize,
    pub epsilon: f64,
    pub allow_large_eps: bool,
    pub trials: usize,
    /// Labels per trial; `None` means `n0`.
    pub n_labeled: Option<usize>,
    /// Fixed unlabeled count; `None` means the self-training threshold
    /// `⌈288·n0·ε²·√(d/n0)⌉`.
    pub n_unlabeled: Option<usize>,
    /// `None` derives a doubling ladder around the threshold.
    pub unlabeled_grid: Option<Vec<usize>>,
    pub relevant_grid: Vec<f64>,
    pub label_grid: Vec<usize>,
    /// Dimensions cycled through by the closed-form check.
    pub dims: Vec<usize>,
    pub mc_samples: usize,
    pub sampler: SamplerPath,
    pub stage1: StandardConfig,
    /// `epsilon` here is ignored; the model's epsilon is used.
    pub rst: RstConfig,
    pub smoothing: SmoothingConfig,
    pub test_points: usize,
    pub radii: Vec<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub workers: usize,
}

impl ExperimentSpec {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut spec = Self {
            kind,
            n0: 4,
            d: 755_000,
            epsilon: 0.5,
            allow_large_eps: true,
            trials: 50,
            n_labeled: None,
            n_unlabeled: None,
            unlabeled_grid: None,
            relevant_grid: vec![1.0, 0.5, 0.25, 0.0],
            label_grid: vec![1, 2, 4, 8, 16],
            dims: vec![2, 16, 1024],
            mc_samples: 100_000,
            sampler: SamplerPath::Auto,
            stage1: StandardConfig::default(),
            rst: RstConfig {
                beta: 3.0,
                ..RstConfig::default()
            },
            smoothing: SmoothingConfig::default(),
            test_points: 200,
            radii: (0..8).map(|i| i as f64 / 10.0).collect(),
            seed: 0,
            out: None,
            workers: 1,
        };
        match kind {
            ExperimentKind::VerifyClosedForm => {
                spec.trials = 20;
                spec.epsilon = 0.0;
                spec.allow_large_eps = false;
            }
            ExperimentKind::RstDemo => {
                spec.n0 = 5;
                spec.d = 100;
                spec.epsilon = 0.4;
                spec.allow_large_eps = false;
                spec.trials = 10;
                spec.n_labeled = Some(30);
                spec.n_unlabeled = Some(3000);
            }
            ExperimentKind::CertifyDemo => {
                spec.n0 = 4;
                spec.d = 16;
                spec.epsilon = 0.1;
                spec.allow_large_eps = false;
                spec.trials = 1;
                spec.n_labeled = Some(20);
            }
            _ => {}
        }
        spec
    }

    pub fn model(&self) -> Result<GaussianModel> {
        canonical_model(self.n0, self.d, self.epsilon, self.allow_large_eps)
    }

    pub fn labels(&self) -> usize {
        self.n_labeled.unwrap_or(self.n0 as usize)
    }

    pub fn unlabeled(&self) -> usize {
        self.n_unlabeled
            .unwrap_or_else(|| selftrain_unlabeled_count(self.n0, self.d, self.epsilon))
    }

    /// The unlabeled grid actually swept: the configured one, or
    /// `0, n0` followed by the threshold times `2^-6 .. 2^1`.
    pub fn unlabeled_ladder(&self) -> Vec<usize> {
        if let Some(g) = &self.unlabeled_grid {
            return g.clone();
        }
        let t = selftrain_unlabeled_count(self.n0, self.d, self.epsilon);
        let mut g = vec![0, self.n0 as usize];
        for k in -6..=1 {
            let v = ((t as f64) * 2f64.powi(k)).ceil() as usize;
            if v > *g.last().unwrap() {
                g.push(v);
            }
        }
        g
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        if self.kind == ExperimentKind::VerifyClosedForm {
            if self.dims.is_empty() || self.dims.contains(&0) {
                return Err(invalid("dims must be a nonempty list of positive dimensions"));
            }
            if self.mc_samples == 0 {
                return Err(invalid("mc_samples must be at least 1"));
            }
            return Ok(());
        }
        self.model()?;
        if self.labels() == 0 {
            return Err(invalid("n_labeled must be at least 1"));
        }
        match self.kind {
            ExperimentKind::UnlabeledSweep => {
                let g = self.unlabeled_ladder();
                if g.is_empty() {
                    return Err(invalid("unlabeled_grid must be nonempty"));
                }
                if g.windows(2).any(|w| w[1] < w[0]) {
                    return Err(invalid("unlabeled_grid must be ascending"));
                }
            }
            ExperimentKind::IrrelevantSweep => {
                if self.relevant_grid.is_empty() {
                    return Err(invalid("relevant_grid must be nonempty"));
                }
                if let Some(a) = self.relevant_grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                    return Err(invalid(format!("relevant fraction {a} is outside [0, 1]")));
                }
                if self.unlabeled() == 0 {
                    return Err(invalid("n_unlabeled must be at least 1"));
                }
            }
            ExperimentKind::LabelSweep => {
                if self.label_grid.is_empty() || self.label_grid.contains(&0) {
                    return Err(invalid("label_grid must be nonempty with entries >= 1"));
                }
                if self.label_grid.windows(2).any(|w| w[1] < w[0]) {
                    return Err(invalid("label_grid must be ascending"));
                }
                if self.unlabeled() == 0 {
                    return Err(invalid("n_unlabeled must be at least 1"));
                }
            }
            ExperimentKind::RstDemo => {
                if self.unlabeled() == 0 {
                    return Err(invalid("n_unlabeled must be at least 1"));
                }
                let mut rst = self.rst.clone();
                rst.epsilon = self.epsilon;
                rst.validate()?;
            }
            ExperimentKind::CertifyDemo => {
                self.smoothing.validate()?;
                if self.test_points == 0 {
                    return Err(invalid("test_points must be at least 1"));
                }
                if self.radii.is_empty() || self.radii.windows(2).any(|w| w[1] < w[0]) {
                    return Err(invalid("radii must be a nonempty ascending list"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn stream(&self, global_index: usize) -> RngStream {
        split_stream(self.seed, global_index as u64)
    }
}

/// `⌈n0·4ε²·√(d/n0)⌉`: labels after which the supervised estimator is
/// robust.
pub fn robust_label_count(n0: u64, d: usize, epsilon: f64) -> usize {
    let n0f = n0 as f64;
    (n0f * 4.0 * epsilon * epsilon * (d as f64 / n0f).sqrt()).ceil() as usize
}

/// `⌈288·n0·ε²·√(d/n0)⌉`: unlabeled points after which self-training from
/// `n0` labels is robust.
pub fn selftrain_unlabeled_count(n0: u64, d: usize, epsilon: f64) -> usize {
    let n0f = n0 as f64;
    (288.0 * n0f * epsilon * epsilon * (d as f64 / n0f).sqrt()).ceil() as usize
}

/// Grid coordinate a row is aggregated under.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridValue {
    Int(u64),
    Float(f64),
}

impl std::fmt::Display for GridValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridValue::Int(i) => f.pad(&i.to_string()),
            GridValue::Float(v) => f.pad(&v.to_string()),
        }
    }
}

/// One Monte Carlo trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSummary {
    pub experiment: &'static str,
    pub n0: Option<u64>,
    pub d: usize,
    pub epsilon: f64,
    pub n_labeled: Option<usize>,
    pub n_unlabeled: Option<usize>,
    pub relevant_fraction: Option<f64>,
    pub trial: usize,
    pub std_err: f64,
    pub rob_err: f64,
    pub gamma: Option<f64>,
    pub seed: u64,
    /// Position of the grid point in emission order.
    pub grid_index: usize,
    pub grid_key: &'static str,
    pub grid_value: GridValue,
    /// Not written to CSV, so output stays byte-stable.
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub experiment: &'static str,
    pub grid_key: &'static str,
    pub grid_value: GridValue,
    pub metric: &'static str,
    pub mean: f64,
    /// `None` when there is a single trial.
    pub ci95_half_width: Option<f64>,
    pub trials: usize,
}

/// One point of a certified-accuracy curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub trial: usize,
    pub radius_l2: f64,
    pub radius_linf: f64,
    pub certified_accuracy: f64,
    pub analytic_accuracy: f64,
    /// Binomial standard error of an accuracy over the test points, at the
    /// analytic accuracy.
    pub mc_std_error: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<TrialSummary>,
    pub summary: Vec<SummaryRow>,
    pub curve: Vec<CurvePoint>,
}

/// Mean and normal-approximation 95% half width.
pub fn mean_ci(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, Some(1.96 * var.sqrt() / (n as f64).sqrt()))
}

/// Groups rows by grid point and reports the mean and CI of each error
/// column, plus `gamma` where every row has it.
pub fn summarize(rows: &[TrialSummary]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let head = &rows[start];
        let end = start
            + rows[start..]
                .iter()
                .take_while(|r| r.grid_index == head.grid_index && r.experiment == head.experiment)
                .count();
        let group = &rows[start..end];
        let mut push = |metric, values: Vec<f64>| {
            let (mean, ci) = mean_ci(&values);
            out.push(SummaryRow {
                experiment: head.experiment,
                grid_key: head.grid_key,
                grid_value: head.grid_value,
                metric,
                mean,
                ci95_half_width: ci,
                trials: values.len(),
            });
        };
        push("std_err", group.iter().map(|r| r.std_err).collect());
        push("rob_err", group.iter().map(|r| r.rob_err).collect());
        if let Some(g) = group.iter().map(|r| r.gamma).collect::<Option<Vec<f64>>>() {
            push("gamma", g);
        }
        start = end;
    }
    out
}

/// Runs `task` for every index on a pool of `workers` threads and returns the
/// results in index order.
pub(crate) fn run_tasks<T, F>(workers: usize, count: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&task).collect())
}

/// Dispatches on `spec.kind`.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::VerifyClosedForm => run_verify_closed_form(spec),
        ExperimentKind::Gap => run_gap(spec),
        ExperimentKind::UnlabeledSweep => run_unlabeled_sweep(spec),
        ExperimentKind::IrrelevantSweep => run_irrelevant_sweep(spec),
        ExperimentKind::LabelSweep => run_label_sweep(spec),
        ExperimentKind::RstDemo => run_rst_demo(spec),
        ExperimentKind::CertifyDemo => run_certify_demo(spec),
    }
}

/// Writes the main CSV to `path` and the summary (and curve, when present)
/// beside it.
pub fn write_outputs(path: &Path, output: &ExperimentOutput) -> Result<()> {
    write_main_csv(path, &output.rows)?;
    write_summary_csv(&summary_path(path), &output.summary)?;
    if !output.curve.is_empty() {
        write_curve_csv(&curve_path(path), &output.curve)?;
    }
    Ok(())
}

pub(crate) fn io_context(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}
