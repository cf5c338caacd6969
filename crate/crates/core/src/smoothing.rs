//! Randomized smoothing: Monte Carlo certification of a black-box base
//! classifier under Gaussian input noise, and certified-accuracy curves.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::gaussian_model::{Label, LinearClassifier};
use crate::rst::LogisticModel;
use crate::statkit::{clopper_pearson_lower, inverse_gaussian_cdf, RngStream};

/// Anything that maps an input to a label.
pub trait BaseClassifier {
    fn classify(&self, x: &[f64]) -> Result<Label>;
}

impl BaseClassifier for LinearClassifier {
    fn classify(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.predict(x))
    }
}

impl BaseClassifier for LogisticModel {
    fn classify(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.predict(x))
    }
}

impl<F> BaseClassifier for F
where
    F: Fn(&[f64]) -> Result<Label>,
{
    fn classify(&self, x: &[f64]) -> Result<Label> {
        self(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingConfig {
    pub noise_sigma: f64,
    pub n0_selection: u64,
    pub n_estimation: u64,
    pub conf_alpha: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            noise_sigma: 0.25,
            n0_selection: 100,
            n_estimation: 10_000,
            conf_alpha: 1e-3,
        }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid("smoothing noise_sigma must be positive"));
        }
        if self.n0_selection == 0 || self.n_estimation == 0 {
            return Err(invalid("selection and estimation counts must be at least 1"));
        }
        if !(self.conf_alpha > 0.0 && self.conf_alpha < 1.0) {
            return Err(invalid("conf_alpha must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CertifyOutcome {
    Certified { label: Label, radius: f64 },
    Abstain,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyResult {
    pub outcome: CertifyOutcome,
    pub p_lower: f64,
    pub votes_top: u64,
}

impl CertifyResult {
    /// Certified radius when the prediction is `label`, else `None`.
    pub fn radius_for(&self, label: Label) -> Option<f64> {
        match self.outcome {
            CertifyOutcome::Certified { label: l, radius } if l == label => Some(radius),
            _ => None,
        }
    }
}

fn noisy_votes<B: BaseClassifier + ?Sized>(
    base: &B,
    x: &[f64],
    sigma: f64,
    count: u64,
    rng: &mut RngStream,
) -> Result<[u64; 2]> {
    let mut noisy = vec![0.0; x.len()];
    let mut votes = [0u64; 2];
    for _ in 0..count {
        rng.fill_standard_normal(&mut noisy);
        for (n, xi) in noisy.iter_mut().zip(x) {
            *n = xi + sigma * *n;
        }
        match base.classify(&noisy)? {
            Label::Neg => votes[0] += 1,
            Label::Pos => votes[1] += 1,
        }
    }
    Ok(votes)
}

/// Certifies the smoothed classifier at `x`.
///
/// Selection and estimation use disjoint substreams of `rng`. The selection
/// plurality breaks ties toward `-1`. The prediction is certified with
/// radius `σ·Φ⁻¹(p_lower)` when the Clopper–Pearson lower bound on the top
/// vote share exceeds 1/2, and abstains otherwise.
pub fn certify<B: BaseClassifier + ?Sized>(
    base: &B,
    x: &[f64],
    config: &SmoothingConfig,
    rng: &RngStream,
) -> Result<CertifyResult> {
    config.validate()?;
    let sel = noisy_votes(base, x, config.noise_sigma, config.n0_selection, &mut rng.substream(0))?;
    let top = if sel[1] > sel[0] { Label::Pos } else { Label::Neg };
    let est = noisy_votes(base, x, config.noise_sigma, config.n_estimation, &mut rng.substream(1))?;
    let k = match top {
        Label::Neg => est[0],
        Label::Pos => est[1],
    };
    let p_lower = clopper_pearson_lower(k, config.n_estimation, config.conf_alpha)?;
    let outcome = if p_lower > 0.5 {
        CertifyOutcome::Certified {
            label: top,
            radius: config.noise_sigma * inverse_gaussian_cdf(p_lower)?,
        }
    } else {
        CertifyOutcome::Abstain
    };
    Ok(CertifyResult {
        outcome,
        p_lower,
        votes_top: k,
    })
}

/// Radius of the largest ℓ∞ ball inside an ℓ₂ ball of radius `r` in `d`
/// dimensions.
pub fn linf_radius_from_l2(r: f64, d: usize) -> f64 {
    r / (d.max(1) as f64).sqrt()
}

/// Certifies every point; point `i` uses `rng.substream(i)`.
pub fn certify_points<B: BaseClassifier + Sync + ?Sized>(
    base: &B,
    points: &[(Vec<f64>, Label)],
    config: &SmoothingConfig,
    rng: &RngStream,
) -> Result<Vec<CertifyResult>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, (x, _))| certify(base, x, config, &rng.substream(i as u64)))
        .collect()
}

/// Fraction of points certified with the true label at radius `>= r`, for
/// each `r` in `radii`.
pub fn accuracy_curve(results: &[CertifyResult], labels: &[Label], radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if results.len() != labels.len() {
        return Err(invalid("result and label counts differ"));
    }
    if radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("radii must be sorted ascending"));
    }
    let n = results.len().max(1) as f64;
    Ok(radii
        .iter()
        .map(|&r| {
            let hits = results
                .iter()
                .zip(labels)
                .filter(|(res, &y)| res.radius_for(y).is_some_and(|rad| rad >= r))
                .count();
            (r, hits as f64 / n)
        })
        .collect())
}

/// Certified accuracy as a function of ℓ₂ radius.
pub fn certified_accuracy_curve<B: BaseClassifier + Sync + ?Sized>(
    base: &B,
    points: &[(Vec<f64>, Label)],
    radii: &[f64],
    config: &SmoothingConfig,
    rng: &RngStream,
) -> Result<Vec<(f64, f64)>> {
    if radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("radii must be sorted ascending"));
    }
    let results = certify_points(base, points, config, rng)?;
    let labels: Vec<Label> = points.iter().map(|(_, y)| *y).collect();
    accuracy_curve(&results, &labels, radii)
}

/// The curve a linear base classifier would reach with exact vote
/// probabilities: a point counts at `r` when the smoothed label is correct
/// and `σ·Φ⁻¹(p_true) >= r`.
pub fn analytic_accuracy_curve(
    theta: &[f64],
    points: &[(Vec<f64>, Label)],
    radii: &[f64],
    noise_sigma: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut exact_radii = Vec::with_capacity(points.len());
    for (x, y) in points {
        let (label, p) = crate::rst::smoothed_vote(theta, x, noise_sigma)?;
        // p >= 1/2 always; p == 1/2 gives radius 0 and p == 1 an unbounded one
        let radius = if p >= 1.0 {
            f64::INFINITY
        } else {
            noise_sigma * inverse_gaussian_cdf(p)?
        };
        exact_radii.push((label == *y && p > 0.5).then_some(radius));
    }
    let n = points.len().max(1) as f64;
    Ok(radii
        .iter()
        .map(|&r| {
            let hits = exact_radii.iter().filter(|rad| rad.is_some_and(|v| v >= r)).count();
            (r, hits as f64 / n)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statkit::split_stream;

    fn small_config() -> SmoothingConfig {
        SmoothingConfig {
            noise_sigma: 0.5,
            n0_selection: 20,
            n_estimation: 500,
            conf_alpha: 0.01,
        }
    }

    #[test]
    fn constant_classifier_radius() {
        let cfg = SmoothingConfig::default();
        let always_pos = |_: &[f64]| -> Result<Label> { Ok(Label::Pos) };
        let r = certify(&always_pos, &[0.0, 0.0], &cfg, &split_stream(1, 0)).unwrap();
        let p = 1e-3f64.powf(1e-4);
        assert!((r.p_lower - p).abs() < 1e-11);
        assert_eq!(r.votes_top, 10_000);
        match r.outcome {
            CertifyOutcome::Certified { label, radius } => {
                assert_eq!(label, Label::Pos);
                assert!((radius / 0.25 - 3.198_577_514_738_331_6).abs() < 1e-7, "{radius}");
            }
            CertifyOutcome::Abstain => panic!("constant classifier must certify"),
        }
    }

    #[test]
    fn selection_tie_goes_to_negative() {
        // alternating oracle ties at even selection counts
        let flip = std::cell::Cell::new(false);
        let alternating = |_: &[f64]| -> Result<Label> {
            flip.set(!flip.get());
            Ok(if flip.get() { Label::Pos } else { Label::Neg })
        };
        let cfg = SmoothingConfig {
            n0_selection: 10,
            n_estimation: 10,
            ..small_config()
        };
        let r = certify(&alternating, &[0.0], &cfg, &split_stream(0, 0)).unwrap();
        assert_eq!(r.votes_top, 5);
        assert_eq!(r.outcome, CertifyOutcome::Abstain);
    }

    #[test]
    fn boundary_point_abstains() {
        let clf = LinearClassifier::new(vec![1.0, 0.0]);
        let cfg = small_config();
        let mut abstain = 0;
        for i in 0..200 {
            let r = certify(&clf, &[0.0, 3.0], &cfg, &split_stream(2, i)).unwrap();
            assert_eq!(matches!(r.outcome, CertifyOutcome::Abstain), r.p_lower <= 0.5);
            if matches!(r.outcome, CertifyOutcome::Abstain) {
                abstain += 1;
            }
        }
        assert!(abstain >= 190, "{abstain}");
    }

    #[test]
    fn oracle_failure_propagates() {
        let broken = |_: &[f64]| -> Result<Label> { Err(Error::Oracle("boom".into())) };
        assert!(matches!(
            certify(&broken, &[0.0], &small_config(), &split_stream(0, 0)),
            Err(Error::Oracle(_))
        ));
    }

    #[test]
    fn deterministic_per_stream() {
        let clf = LinearClassifier::new(vec![1.0, -0.5]);
        let a = certify(&clf, &[0.3, 0.1], &small_config(), &split_stream(9, 3)).unwrap();
        let b = certify(&clf, &[0.3, 0.1], &small_config(), &split_stream(9, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linf_conversion() {
        let r = linf_radius_from_l2(0.435, 3072);
        assert!(((r - 2.0 / 255.0) / (2.0 / 255.0)).abs() < 1e-3);
        assert_eq!(linf_radius_from_l2(0.7, 1), 0.7);
        assert_eq!(linf_radius_from_l2(0.0, 10), 0.0);
    }

    #[test]
    fn curve_conventions() {
        let never = |_: &[f64]| -> Result<Label> { Ok(Label::Pos) };
        let points = vec![(vec![0.0], Label::Neg), (vec![1.0], Label::Neg)];
        let curve = certified_accuracy_curve(&never, &points, &[0.0, 0.5], &small_config(), &split_stream(0, 0)).unwrap();
        assert_eq!(curve, vec![(0.0, 0.0), (0.5, 0.0)]);
        assert!(certified_accuracy_curve(&never, &points, &[0.5, 0.0], &small_config(), &split_stream(0, 0)).is_err());

        let clf = LinearClassifier::new(vec![1.0]);
        let points = vec![(vec![2.0], Label::Pos), (vec![-2.0], Label::Pos), (vec![3.0], Label::Pos)];
        let results = certify_points(&clf, &points, &small_config(), &split_stream(0, 1)).unwrap();
        let labels: Vec<Label> = points.iter().map(|p| p.1).collect();
        let curve = accuracy_curve(&results, &labels, &[0.0]).unwrap();
        let certified_correct = results
            .iter()
            .zip(&labels)
            .filter(|(r, &y)| r.radius_for(y).is_some())
            .count();
        assert_eq!(curve[0].1, certified_correct as f64 / 3.0);
        let mut prev = 1.0;
        for (_, acc) in accuracy_curve(&results, &labels, &[0.0, 0.2, 0.5, 1.0, 2.0]).unwrap() {
            assert!(acc <= prev);
            prev = acc;
        }
    }
}
