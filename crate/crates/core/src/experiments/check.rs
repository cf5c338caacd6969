//! Pass/fail thresholds for `--check`. They are calibrated for each
//! experiment's default parameters.

use super::{ExperimentKind, ExperimentOutput, ExperimentSpec, GridValue, SummaryRow};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Threshold {
    pub id: &'static str,
    pub kind: ExperimentKind,
    pub bound: f64,
    pub description: &'static str,
}

pub const THRESHOLDS: &[Threshold] = &[
    Threshold {
        id: "verify.sigmas",
        kind: ExperimentKind::VerifyClosedForm,
        bound: 4.0,
        description: "|MC - closed form| <= bound*sqrt(p(1-p)/n) + slack",
    },
    Threshold {
        id: "verify.slack",
        kind: ExperimentKind::VerifyClosedForm,
        bound: 1e-6,
        description: "absolute slack added to the binomial tolerance",
    },
    Threshold {
        id: "gap.supervised_robust_min",
        kind: ExperimentKind::Gap,
        bound: 0.45,
        description: "supervised at n0: mean robust error >= bound",
    },
    Threshold {
        id: "gap.supervised_standard_max",
        kind: ExperimentKind::Gap,
        bound: 0.1,
        description: "supervised at n0: mean standard error <= bound",
    },
    Threshold {
        id: "gap.self_training_robust_max",
        kind: ExperimentKind::Gap,
        bound: 0.01,
        description: "self-training at the unlabeled threshold: mean robust error <= bound",
    },
    Threshold {
        id: "flat.abs_floor",
        kind: ExperimentKind::UnlabeledSweep,
        bound: 1e-3,
        description: "differences below bound count as flat in every CI-width comparison",
    },
    Threshold {
        id: "unlabeled.ci_widths",
        kind: ExperimentKind::UnlabeledSweep,
        bound: 2.0,
        description: "robust error means nonincreasing in the unlabeled count within bound CI half widths",
    },
    Threshold {
        id: "irrelevant.scaled_robust_max",
        kind: ExperimentKind::IrrelevantSweep,
        bound: 0.01,
        description: "scaled unlabeled count at relevant fraction 0.5: mean robust error <= bound",
    },
    Threshold {
        id: "irrelevant.no_signal_robust_min",
        kind: ExperimentKind::IrrelevantSweep,
        bound: 0.45,
        description: "relevant fraction 0: mean robust error >= bound",
    },
    Threshold {
        id: "irrelevant.ci_widths",
        kind: ExperimentKind::IrrelevantSweep,
        bound: 2.0,
        description: "scaled curve flat within bound CI half widths for fractions in {1, 0.5, 0.25}",
    },
    Threshold {
        id: "labels.ci_widths",
        kind: ExperimentKind::LabelSweep,
        bound: 2.0,
        description: "robust error means for n >= n0 agree within bound CI half widths",
    },
    Threshold {
        id: "rst.margin_min",
        kind: ExperimentKind::RstDemo,
        bound: 0.05,
        description: "labeled-only minus self-training mean robust error >= bound",
    },
    Threshold {
        id: "certify.std_errors",
        kind: ExperimentKind::CertifyDemo,
        bound: 3.0,
        description: "|certified - analytic accuracy| <= bound standard errors at every radius",
    },
];

fn bound(id: &str) -> f64 {
    THRESHOLDS
        .iter()
        .find(|t| t.id == id)
        .map(|t| t.bound)
        .unwrap_or_else(|| panic!("no threshold {id}"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(id: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { id, passed, detail }
}

fn find<'a>(summary: &'a [SummaryRow], experiment: &str, metric: &str) -> Vec<&'a SummaryRow> {
    summary
        .iter()
        .filter(|r| r.experiment == experiment && r.metric == metric)
        .collect()
}

fn half(r: &SummaryRow) -> f64 {
    r.ci95_half_width.unwrap_or(0.0)
}

fn tolerance(k: f64, a: &SummaryRow, b: &SummaryRow) -> f64 {
    (k * half(a).max(half(b))).max(bound("flat.abs_floor"))
}

fn at_fraction<'a>(rows: &[&'a SummaryRow], alpha: f64) -> Option<&'a SummaryRow> {
    rows.iter().copied().find(|r| r.grid_value == GridValue::Float(alpha))
}

/// Evaluates every threshold that applies to `spec.kind` against `output`.
pub fn check(spec: &ExperimentSpec, output: &ExperimentOutput) -> Vec<CheckOutcome> {
    let s = &output.summary;
    let n0 = spec.n0;
    let mut out = Vec::new();
    match spec.kind {
        ExperimentKind::VerifyClosedForm => {
            let (k, slack) = (bound("verify.sigmas"), bound("verify.slack"));
            let mut worst: f64 = 0.0;
            for pair in output.rows.chunks(2) {
                let [mc, cf] = pair else { continue };
                for (p, q) in [(mc.std_err, cf.std_err), (mc.rob_err, cf.rob_err)] {
                    let tol = k * (p * (1.0 - p) / spec.mc_samples as f64).sqrt() + slack;
                    worst = worst.max((p - q).abs() / tol);
                }
            }
            out.push(outcome(
                "verify.sigmas",
                worst <= 1.0,
                format!("largest |diff|/tolerance = {worst:.4}"),
            ));
        }
        ExperimentKind::Gap => {
            let sup_rob = find(s, "gap_supervised", "rob_err");
            let sup_std = find(s, "gap_supervised", "std_err");
            let st_rob = find(s, "gap_self_training", "rob_err");
            if let (Some(r), Some(st), Some(c)) = (sup_rob.first(), sup_std.first(), st_rob.first()) {
                let b = bound("gap.supervised_robust_min");
                out.push(outcome("gap.supervised_robust_min", r.mean >= b, format!("{:.4} >= {b}", r.mean)));
                let b = bound("gap.supervised_standard_max");
                out.push(outcome("gap.supervised_standard_max", st.mean <= b, format!("{:.4} <= {b}", st.mean)));
                let b = bound("gap.self_training_robust_max");
                out.push(outcome("gap.self_training_robust_max", c.mean <= b, format!("{:.4} <= {b}", c.mean)));
            }
        }
        ExperimentKind::UnlabeledSweep => {
            let k = bound("unlabeled.ci_widths");
            let rows = find(s, "unlabeled_sweep", "rob_err");
            let bad: Vec<String> = rows
                .windows(2)
                .filter(|w| w[1].mean > w[0].mean + tolerance(k, w[0], w[1]))
                .map(|w| format!("{:?}->{:?}", w[0].grid_value, w[1].grid_value))
                .collect();
            out.push(outcome("unlabeled.ci_widths", bad.is_empty(), format!("increases: {bad:?}")));
        }
        ExperimentKind::IrrelevantSweep => {
            let scaled = find(s, "irrelevant_scaled", "rob_err");
            let fixed = find(s, "irrelevant_fixed", "rob_err");
            if let Some(r) = at_fraction(&scaled, 0.5) {
                let b = bound("irrelevant.scaled_robust_max");
                out.push(outcome("irrelevant.scaled_robust_max", r.mean <= b, format!("{:.4} <= {b}", r.mean)));
                if let Some(f) = at_fraction(&fixed, 0.5) {
                    out.push(outcome(
                        "irrelevant.unscaled_worse",
                        f.mean > r.mean,
                        format!("unscaled {:.3e} > scaled {:.3e}", f.mean, r.mean),
                    ));
                }
            }
            if let Some(r) = at_fraction(&fixed, 0.0) {
                let b = bound("irrelevant.no_signal_robust_min");
                out.push(outcome("irrelevant.no_signal_robust_min", r.mean >= b, format!("{:.4} >= {b}", r.mean)));
            }
            let k = bound("irrelevant.ci_widths");
            let flat: Vec<&SummaryRow> = [1.0, 0.5, 0.25]
                .iter()
                .filter_map(|&a| at_fraction(&scaled, a))
                .collect();
            out.push(pairwise("irrelevant.ci_widths", &flat, k));
        }
        ExperimentKind::LabelSweep => {
            let rows: Vec<&SummaryRow> = find(s, "label_sweep", "rob_err")
                .into_iter()
                .filter(|r| matches!(r.grid_value, GridValue::Int(n) if n >= n0))
                .collect();
            out.push(pairwise("labels.ci_widths", &rows, bound("labels.ci_widths")));
        }
        ExperimentKind::RstDemo => {
            let only = find(s, "rst_labeled_only", "rob_err");
            let st = find(s, "rst_self_training", "rob_err");
            if let (Some(a), Some(b)) = (only.first(), st.first()) {
                let m = bound("rst.margin_min");
                let margin = a.mean - b.mean;
                out.push(outcome("rst.margin_min", margin >= m, format!("margin {margin:.4} >= {m}")));
            }
        }
        ExperimentKind::CertifyDemo => {
            let k = bound("certify.std_errors");
            let worst = output
                .curve
                .iter()
                .map(|p| (p.certified_accuracy - p.analytic_accuracy).abs() - k * p.mc_std_error)
                .fold(f64::NEG_INFINITY, f64::max);
            out.push(outcome(
                "certify.std_errors",
                worst <= 0.0,
                format!("largest excess over tolerance = {worst:.4}"),
            ));
        }
    }
    out
}

fn pairwise(id: &'static str, rows: &[&SummaryRow], k: f64) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            let tol = tolerance(k, a, b);
            worst = worst.max((a.mean - b.mean).abs() - tol);
        }
    }
    outcome(id, worst <= 0.0, format!("largest excess over tolerance = {worst:.3e}"))
}
