//! Exact one-sided Clopper–Pearson bound by bisection on the binomial tail.

use super::special::ln_gamma;
use crate::error::{invalid, Result};

const BISECTION_TOL: f64 = 1e-12;

/// `P(Binomial(n, p) >= k)`, summed in log space starting from term `k`.
pub fn binomial_upper_tail(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (nf, kf) = (n as f64, k as f64);
    let log_odds = p.ln() - (-p).ln_1p();
    let mut log_term = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0)
        + kf * p.ln()
        + (nf - kf) * (-p).ln_1p();

    // running log-sum-exp: total = exp(max) * scaled
    let mut max = log_term;
    let mut scaled = 1.0;
    let mode = (nf + 1.0) * p;
    let mut j = k;
    while j < n {
        log_term += ((n - j) as f64 / (j + 1) as f64).ln() + log_odds;
        j += 1;
        if log_term > max {
            scaled = scaled * (max - log_term).exp() + 1.0;
            max = log_term;
        } else {
            let rel = (log_term - max).exp();
            scaled += rel;
            // past the mode the terms only shrink
            if (j as f64) > mode && rel < 1e-18 * scaled {
                break;
            }
        }
    }
    (max + scaled.ln()).exp().min(1.0)
}

/// One-sided lower confidence bound on a binomial success probability.
///
/// Returns the largest `p` with `P(Binomial(n, p) >= k) <= conf_alpha`, so
/// that `P(bound <= p_true) >= 1 - conf_alpha`.
pub fn clopper_pearson_lower(k: u64, n: u64, conf_alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("clopper_pearson_lower: n must be at least 1"));
    }
    if k > n {
        return Err(invalid(format!("clopper_pearson_lower: k = {k} exceeds n = {n}")));
    }
    if !(conf_alpha > 0.0 && conf_alpha < 1.0) {
        return Err(invalid(format!(
            "clopper_pearson_lower: conf_alpha = {conf_alpha} is outside (0, 1)"
        )));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if binomial_upper_tail(k, n, mid) <= conf_alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
