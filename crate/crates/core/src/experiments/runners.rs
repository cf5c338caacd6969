use std::time::Instant;

use super::{
    robust_label_count, run_tasks, summarize, CurvePoint, ExperimentOutput, ExperimentSpec, GridValue, SummaryRow,
    TrialSummary,
};
use crate::error::Result;
use crate::estimators::{sample_mixture, sample_selftrain, sample_supervised, SelfTrainResult};
use crate::gaussian_model::{
    canonical_model, errors, mc_error_estimate, sample_labeled, GaussianModel, LabeledSet, LinearClassifier,
};
use crate::linalg::norm2;
use crate::rst::{robust_self_train, rst_train};
use crate::smoothing::{accuracy_curve, analytic_accuracy_curve, certify_points, linf_radius_from_l2};
use crate::estimators::UnlabeledSet;

/// Fields shared by every row of a model-based experiment.
fn base_row(spec: &ExperimentSpec, experiment: &'static str, trial: usize) -> TrialSummary {
    TrialSummary {
        experiment,
        n0: Some(spec.n0),
        d: spec.d,
        epsilon: spec.epsilon,
        n_labeled: None,
        n_unlabeled: None,
        relevant_fraction: None,
        trial,
        std_err: f64::NAN,
        rob_err: f64::NAN,
        gamma: None,
        seed: spec.seed,
        grid_index: 0,
        grid_key: "",
        grid_value: GridValue::Int(0),
        wall_time: Default::default(),
    }
}

/// One cell of a self-training grid: `ñ = 0` falls back to the supervised
/// estimator.
#[derive(Clone, Copy)]
struct Cell {
    experiment: &'static str,
    n_labeled: usize,
    n_unlabeled: usize,
    relevant_fraction: f64,
    grid_key: &'static str,
    grid_value: GridValue,
}

fn run_cells(spec: &ExperimentSpec, model: &GaussianModel, cells: &[Cell]) -> Result<Vec<TrialSummary>> {
    let trials = spec.trials;
    run_tasks(spec.workers, cells.len() * trials, |task| {
        let (g, t) = (task / trials, task % trials);
        let cell = cells[g];
        let start = Instant::now();
        let mut rng = spec.stream(task);
        let mut row = base_row(spec, cell.experiment, t);
        let clf = if cell.n_unlabeled == 0 {
            sample_supervised(model, cell.n_labeled, spec.sampler, &mut rng)?
        } else {
            let SelfTrainResult {
                final_classifier,
                pseudo_label_agreement,
                ..
            } = sample_selftrain(
                model,
                cell.n_labeled,
                cell.n_unlabeled,
                cell.relevant_fraction,
                spec.sampler,
                &mut rng,
            )?;
            row.gamma = pseudo_label_agreement;
            row.relevant_fraction = Some(cell.relevant_fraction);
            final_classifier
        };
        (row.std_err, row.rob_err) = errors(model, &clf)?;
        row.n_labeled = Some(cell.n_labeled);
        row.n_unlabeled = Some(cell.n_unlabeled);
        row.grid_index = g;
        row.grid_key = cell.grid_key;
        row.grid_value = cell.grid_value;
        row.wall_time = start.elapsed();
        Ok(row)
    })
}

fn finish(rows: Vec<TrialSummary>) -> ExperimentOutput {
    let summary = summarize(&rows);
    ExperimentOutput {
        rows,
        summary,
        curve: Vec::new(),
    }
}

/// Supervised at `n0`, supervised at the robust label count, and
/// self-training from `n0` labels at the unlabeled threshold.
pub fn run_gap(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let model = spec.model()?;
    let n0 = spec.labels();
    let n_robust = robust_label_count(spec.n0, spec.d, spec.epsilon).max(1);
    let n_tilde = spec.unlabeled();
    let cells = [
        Cell {
            experiment: "gap_supervised",
            n_labeled: n0,
            n_unlabeled: 0,
            relevant_fraction: 1.0,
            grid_key: "n_labeled",
            grid_value: GridValue::Int(n0 as u64),
        },
        Cell {
            experiment: "gap_supervised_robust",
            n_labeled: n_robust,
            n_unlabeled: 0,
            relevant_fraction: 1.0,
            grid_key: "n_labeled",
            grid_value: GridValue::Int(n_robust as u64),
        },
        Cell {
            experiment: "gap_self_training",
            n_labeled: n0,
            n_unlabeled: n_tilde,
            relevant_fraction: 1.0,
            grid_key: "n_unlabeled",
            grid_value: GridValue::Int(n_tilde as u64),
        },
    ];
    Ok(finish(run_cells(spec, &model, &cells)?))
}

/// Self-training errors along an ascending unlabeled ladder at fixed labels.
pub fn run_unlabeled_sweep(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let model = spec.model()?;
    let cells: Vec<Cell> = spec
        .unlabeled_ladder()
        .into_iter()
        .map(|n_tilde| Cell {
            experiment: "unlabeled_sweep",
            n_labeled: spec.labels(),
            n_unlabeled: n_tilde,
            relevant_fraction: 1.0,
            grid_key: "n_unlabeled",
            grid_value: GridValue::Int(n_tilde as u64),
        })
        .collect();
    Ok(finish(run_cells(spec, &model, &cells)?))
}

/// Two curves over the relevant fraction α: the unlabeled count held fixed,
/// and scaled by `1/α²` (skipped at `α = 0`).
pub fn run_irrelevant_sweep(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let model = spec.model()?;
    let base = spec.unlabeled();
    let mut cells = Vec::new();
    for &alpha in &spec.relevant_grid {
        cells.push(Cell {
            experiment: "irrelevant_fixed",
            n_labeled: spec.labels(),
            n_unlabeled: base,
            relevant_fraction: alpha,
            grid_key: "relevant_fraction",
            grid_value: GridValue::Float(alpha),
        });
    }
    for &alpha in spec.relevant_grid.iter().filter(|&&a| a > 0.0) {
        cells.push(Cell {
            experiment: "irrelevant_scaled",
            n_labeled: spec.labels(),
            n_unlabeled: (base as f64 / (alpha * alpha)).ceil() as usize,
            relevant_fraction: alpha,
            grid_key: "relevant_fraction",
            grid_value: GridValue::Float(alpha),
        });
    }
    Ok(finish(run_cells(spec, &model, &cells)?))
}

/// Self-training errors along an ascending label grid at fixed unlabeled
/// count.
pub fn run_label_sweep(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let model = spec.model()?;
    let n_tilde = spec.unlabeled();
    let cells: Vec<Cell> = spec
        .label_grid
        .iter()
        .map(|&n| Cell {
            experiment: "label_sweep",
            n_labeled: n,
            n_unlabeled: n_tilde,
            relevant_fraction: 1.0,
            grid_key: "n_labeled",
            grid_value: GridValue::Int(n as u64),
        })
        .collect();
    Ok(finish(run_cells(spec, &model, &cells)?))
}

/// Robust training of a logistic model on labels only versus robust
/// self-training on labels plus pseudo-labeled data, scored by closed-form
/// errors.
pub fn run_rst_demo(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let model = spec.model()?;
    let mut cfg = spec.rst.clone();
    cfg.epsilon = spec.epsilon;
    let (n, n_tilde) = (spec.labels(), spec.unlabeled());
    let pairs = run_tasks(spec.workers, spec.trials, |t| {
        let start = Instant::now();
        let rng = spec.stream(t);
        let labeled = sample_labeled(&model, n, &mut rng.substream(0));
        let (pool, hidden) = sample_mixture(&model, n_tilde, 1.0, &mut rng.substream(1))?;
        let rst = robust_self_train(&labeled, &pool, &spec.stage1, &cfg, &mut rng.substream(2))?;
        let empty = UnlabeledSet::default();
        let baseline = rst_train(&labeled, (&empty, &[]), &cfg, &mut rng.substream(3))?;
        let gamma = rst
            .pseudo_labels
            .iter()
            .zip(&hidden)
            .map(|(p, h)| p.value() * h.value())
            .sum::<f64>()
            / n_tilde as f64;
        let elapsed = start.elapsed();

        let mut only = base_row(spec, "rst_labeled_only", t);
        (only.std_err, only.rob_err) = errors(&model, &baseline.model.to_linear())?;
        only.n_labeled = Some(n);
        only.n_unlabeled = Some(0);
        only.grid_index = 0;
        only.grid_key = "n_unlabeled";
        only.grid_value = GridValue::Int(0);
        only.wall_time = elapsed;

        let mut st = base_row(spec, "rst_self_training", t);
        (st.std_err, st.rob_err) = errors(&model, &rst.fit.model.to_linear())?;
        st.n_labeled = Some(n);
        st.n_unlabeled = Some(n_tilde);
        st.relevant_fraction = Some(1.0);
        st.gamma = Some(gamma);
        st.grid_index = 1;
        st.grid_key = "n_unlabeled";
        st.grid_value = GridValue::Int(n_tilde as u64);
        st.wall_time = elapsed;
        Ok((only, st))
    })?;
    let (mut rows, st): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    rows.extend(st);
    Ok(finish(rows))
}

/// Certified accuracy of a smoothed supervised linear classifier on fresh
/// test points, next to the curve exact vote probabilities give.
pub fn run_certify_demo(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let model = spec.model()?;
    let n = spec.labels();
    let results = run_tasks(spec.workers, spec.trials, |t| {
        let start = Instant::now();
        let rng = spec.stream(t);
        let train = sample_labeled(&model, n, &mut rng.substream(0));
        let clf = crate::estimators::supervised_estimator(&train)?;
        let test = sample_labeled(&model, spec.test_points, &mut rng.substream(1));
        let points = test_pairs(&test);
        let certs = certify_points(&clf, &points, &spec.smoothing, &rng.substream(2))?;
        let empirical = accuracy_curve(&certs, &test.ys, &spec.radii)?;
        let analytic = analytic_accuracy_curve(&clf.theta, &points, &spec.radii, spec.smoothing.noise_sigma)?;
        let m = spec.test_points as f64;
        let curve: Vec<CurvePoint> = empirical
            .iter()
            .zip(&analytic)
            .map(|(&(r, acc), &(_, exact))| CurvePoint {
                trial: t,
                radius_l2: r,
                radius_linf: linf_radius_from_l2(r, spec.d),
                certified_accuracy: acc,
                analytic_accuracy: exact,
                mc_std_error: (exact * (1.0 - exact) / m).sqrt(),
            })
            .collect();
        let mut row = base_row(spec, "certify_demo", t);
        (row.std_err, row.rob_err) = errors(&model, &clf)?;
        row.n_labeled = Some(n);
        row.grid_key = "n_labeled";
        row.grid_value = GridValue::Int(n as u64);
        row.wall_time = start.elapsed();
        Ok((row, curve))
    })?;
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    for (row, c) in results {
        rows.push(row);
        curve.extend(c);
    }
    let mut summary = summarize(&rows);
    for (i, &r) in spec.radii.iter().enumerate() {
        let at: Vec<&CurvePoint> = curve.iter().skip(i).step_by(spec.radii.len()).collect();
        for (metric, values) in [
            ("certified_accuracy", at.iter().map(|p| p.certified_accuracy).collect::<Vec<_>>()),
            ("analytic_accuracy", at.iter().map(|p| p.analytic_accuracy).collect()),
        ] {
            let (mean, ci) = super::mean_ci(&values);
            summary.push(SummaryRow {
                experiment: "certify_demo",
                grid_key: "l2_radius",
                grid_value: GridValue::Float(r),
                metric,
                mean,
                ci95_half_width: ci,
                trials: values.len(),
            });
        }
    }
    Ok(ExperimentOutput { rows, summary, curve })
}

fn test_pairs(set: &LabeledSet) -> Vec<(Vec<f64>, crate::gaussian_model::Label)> {
    set.xs.iter().cloned().zip(set.ys.iter().copied()).collect()
}

/// Draws a random instance and classifier for trial `i`. The first
/// `dims.len()` trials use the canonical model with `θ = μ` and `ε = 0`.
fn verify_instance(spec: &ExperimentSpec, i: usize, rng: &mut crate::statkit::RngStream) -> Result<(GaussianModel, LinearClassifier, bool)> {
    let d = spec.dims[i % spec.dims.len()];
    if i < spec.dims.len() {
        let model = canonical_model(spec.n0, d, 0.0, false)?;
        let clf = LinearClassifier::new(model.mu.clone());
        return Ok((model, clf, true));
    }
    let mut mu = vec![0.0; d];
    rng.fill_standard_normal(&mut mu);
    let norm = norm2(&mu);
    let sigma = norm * (0.5 + 1.5 * rng.uniform());
    let tau = 2.0 * rng.uniform();
    let mut theta = vec![0.0; d];
    rng.fill_standard_normal(&mut theta);
    for (t, m) in theta.iter_mut().zip(&mu) {
        *t = m + tau * *t;
    }
    let epsilon = rng.uniform() * sigma / (d as f64).sqrt();
    let model = GaussianModel::new(mu, sigma, epsilon)?;
    Ok((model, LinearClassifier::new(theta), false))
}

/// Closed-form errors next to Monte Carlo estimates for a grid of random
/// instances. Emits a `verify_mc` and a `verify_closed_form` row per trial.
pub fn run_verify_closed_form(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let results = run_tasks(spec.workers, spec.trials, |i| {
        let start = Instant::now();
        let mut rng = spec.stream(i);
        let (model, clf, canonical) = verify_instance(spec, i, &mut rng)?;
        let (mc_std, mc_rob) = mc_error_estimate(&model, &clf, spec.mc_samples, &mut rng)?;
        let (cf_std, cf_rob) = errors(&model, &clf)?;
        let d = model.dim();
        let make = |experiment, std_err, rob_err, grid_index| TrialSummary {
            n0: canonical.then_some(spec.n0),
            d,
            epsilon: model.epsilon,
            std_err,
            rob_err,
            grid_index,
            grid_key: "d",
            grid_value: GridValue::Int(d as u64),
            wall_time: start.elapsed(),
            ..base_row(spec, experiment, i)
        };
        Ok((make("verify_mc", mc_std, mc_rob, 0), make("verify_closed_form", cf_std, cf_rob, 1)))
    })?;
    let (mc, cf): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut summary = Vec::new();
    for &d in &spec.dims {
        let pick = |rows: &[TrialSummary], f: fn(&TrialSummary) -> f64| -> Vec<f64> {
            rows.iter().filter(|r| r.d == d).map(f).collect()
        };
        let (ms, mr) = (pick(&mc, |r| r.std_err), pick(&mc, |r| r.rob_err));
        let (cs, cr) = (pick(&cf, |r| r.std_err), pick(&cf, |r| r.rob_err));
        if ms.is_empty() {
            continue;
        }
        let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        for (metric, value) in [("max_abs_diff_std", max_diff(&ms, &cs)), ("max_abs_diff_rob", max_diff(&mr, &cr))] {
            summary.push(SummaryRow {
                experiment: "verify",
                grid_key: "d",
                grid_value: GridValue::Int(d as u64),
                metric,
                mean: value,
                ci95_half_width: None,
                trials: ms.len(),
            });
        }
    }
    let mut rows = Vec::with_capacity(2 * mc.len());
    for (a, b) in mc.into_iter().zip(cf) {
        rows.push(a);
        rows.push(b);
    }
    Ok(ExperimentOutput {
        rows,
        summary,
        curve: Vec::new(),
    })
}
