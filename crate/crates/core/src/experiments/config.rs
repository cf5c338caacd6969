//! `key = value` config files with `#` comments and `[experiment]` sections.
//! Keys before the first section apply to every experiment.

use std::path::Path;

use super::{io_context, ExperimentKind, ExperimentSpec};
use crate::error::{Error, Result};
use crate::estimators::SamplerPath;
use crate::rst::RegKind;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    /// `(section, key, value, line)`; section `None` is global.
    pub entries: Vec<(Option<ExperimentKind>, String, String, usize)>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut section = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, "unterminated section header"))?
                    .trim();
                section = Some(
                    ExperimentKind::from_id(name).ok_or_else(|| err(line, format!("unknown section [{name}]")))?,
                );
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected key = value, got {content:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(err(line, "empty key"));
            }
            entries.push((section, k.to_string(), v.to_string(), line));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_context(path, e))?;
        Self::parse(&text)
    }

    /// Applies global entries, then the section for `spec.kind`, in file
    /// order. Returns whether `epsilon` or `allow_large_eps` was set.
    pub fn apply(&self, spec: &mut ExperimentSpec) -> Result<(bool, bool)> {
        let mut touched = (false, false);
        let kind = spec.kind;
        let relevant = self
            .entries
            .iter()
            .filter(|e| e.0.is_none())
            .chain(self.entries.iter().filter(|e| e.0 == Some(kind)));
        for (_, key, value, line) in relevant {
            match key.as_str() {
                "epsilon" | "eps" => touched.0 = true,
                "allow_large_eps" => touched.1 = true,
                _ => {}
            }
            set(spec, key, value).map_err(|msg| err(*line, msg))?;
        }
        Ok(touched)
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("{key}: cannot parse {v:?}"))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn boolean(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("{key}: expected true or false, got {v:?}")),
    }
}

fn set(spec: &mut ExperimentSpec, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "n0" => spec.n0 = num(key, v)?,
        "d" => spec.d = num(key, v)?,
        "epsilon" | "eps" => spec.epsilon = num(key, v)?,
        "allow_large_eps" => spec.allow_large_eps = boolean(key, v)?,
        "trials" => spec.trials = num(key, v)?,
        "seed" => spec.seed = num(key, v)?,
        "workers" => spec.workers = num(key, v)?,
        "out" => spec.out = Some(v.into()),
        "n_labeled" => spec.n_labeled = Some(num(key, v)?),
        "n_unlabeled" => spec.n_unlabeled = Some(num(key, v)?),
        "unlabeled_grid" => spec.unlabeled_grid = Some(list(key, v)?),
        "relevant_grid" => spec.relevant_grid = list(key, v)?,
        "label_grid" => spec.label_grid = list(key, v)?,
        "dims" => spec.dims = list(key, v)?,
        "mc_samples" => spec.mc_samples = num(key, v)?,
        "sampler" => {
            spec.sampler = match v {
                "auto" => SamplerPath::Auto,
                "naive" => SamplerPath::Naive,
                "fast" => SamplerPath::Fast,
                _ => return Err(format!("sampler: expected auto, naive or fast, got {v:?}")),
            }
        }
        "stage1_learning_rate" => spec.stage1.learning_rate = num(key, v)?,
        "stage1_grad_steps" => spec.stage1.grad_steps = num(key, v)?,
        "stage1_batch_size" => spec.stage1.batch_size = num(key, v)?,
        "beta" => spec.rst.beta = num(key, v)?,
        "w_unlabeled" => spec.rst.w_unlabeled = num(key, v)?,
        "reg_kind" => {
            spec.rst.reg_kind = match v {
                "adversarial_exact" => RegKind::AdversarialExact,
                "adversarial_pg" => RegKind::AdversarialPg,
                "stability" => RegKind::Stability,
                _ => {
                    return Err(format!(
                        "reg_kind: expected adversarial_exact, adversarial_pg or stability, got {v:?}"
                    ))
                }
            }
        }
        "stability_sigma" => spec.rst.noise_sigma = num(key, v)?,
        "noise_samples" => spec.rst.noise_samples = num(key, v)?,
        "pg_steps" => spec.rst.pg_steps = num(key, v)?,
        "pg_step_size" => spec.rst.pg_step_size = num(key, v)?,
        "learning_rate" => spec.rst.learning_rate = num(key, v)?,
        "grad_steps" => spec.rst.grad_steps = num(key, v)?,
        "batch_size" => spec.rst.batch_size = num(key, v)?,
        "balanced_batches" => spec.rst.balanced_batches = boolean(key, v)?,
        "smoothing_sigma" => spec.smoothing.noise_sigma = num(key, v)?,
        "n0_selection" => spec.smoothing.n0_selection = num(key, v)?,
        "n_estimation" => spec.smoothing.n_estimation = num(key, v)?,
        "conf_alpha" => spec.smoothing.conf_alpha = num(key, v)?,
        "test_points" => spec.test_points = num(key, v)?,
        "radii" => spec.radii = list(key, v)?,
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}
