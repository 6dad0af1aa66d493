//! Tail probabilities of `u_t(x)` against the Chebyshev upper bound and the
//! Paley-Zygmund lower bound obtained from the moment bounds
//! `E|u_t|^k <= A^k u0_bar^k exp(A k^theta nu^{-beta/(alpha-beta)} t)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::moments::{theta_theory, MomentTable};
use super::EstimatorError;
use crate::ensemble::Ensemble;
use crate::stats::wilson_interval;

/// `c_{A,alpha,beta} = alpha/(2 alpha - beta) [ (alpha - beta) / (A (2 alpha - beta)) ]^{(alpha-beta)/alpha}`.
pub fn upper_tail_constant(a: f64, alpha: f64, beta: f64) -> f64 {
    let s = 2.0 * alpha - beta;
    alpha / s * ((alpha - beta) / (a * s)).powf((alpha - beta) / alpha)
}

/// `exp(-c nu^{beta/alpha} t^{-(alpha-beta)/alpha} |log(lambda/(A u0_bar))|^{(2 alpha - beta)/alpha})`,
/// defined for `lambda > A u0_bar`.
pub fn upper_tail_bound(lambda: f64, t: f64, a: f64, u0_bar: f64, alpha: f64, beta: f64, nu: f64) -> Result<f64, EstimatorError> {
    if !(t > 0.0) {
        return Err(EstimatorError::Regime(format!("t = {t} must be positive")));
    }
    let ratio = lambda / (a * u0_bar);
    if !(ratio > 1.0) {
        return Err(EstimatorError::Regime(format!("lambda = {lambda} must exceed A u0_bar = {}", a * u0_bar)));
    }
    let c = upper_tail_constant(a, alpha, beta);
    let e = -c * nu.powf(beta / alpha) * t.powf(-(alpha - beta) / alpha) * ratio.ln().powf((2.0 * alpha - beta) / alpha);
    Ok(e.exp())
}

/// [`upper_tail_bound`] with value 1 below the formula regime.
pub fn upper_tail_bound_clamped(lambda: f64, t: f64, a: f64, u0_bar: f64, alpha: f64, beta: f64, nu: f64) -> f64 {
    if lambda <= a * u0_bar {
        1.0
    } else {
        upper_tail_bound(lambda, t, a, u0_bar, alpha, beta, nu).unwrap_or(1.0).min(1.0)
    }
}

/// Moment order minimizing the Chebyshev bound at `lambda`.
pub fn k_star(lambda: f64, t: f64, a: f64, u0_bar: f64, alpha: f64, beta: f64, nu: f64) -> f64 {
    let l = (lambda / (a * u0_bar)).ln().max(0.0);
    (nu.powf(beta / (alpha - beta)) / (a * t) * (alpha - beta) / (2.0 * alpha - beta) * l).powf((alpha - beta) / alpha)
}

/// `(lambda_k, p)` with `lambda_k = (u0_lower / 2A) exp(t k^{alpha/(alpha-beta)} nu^{-beta/(alpha-beta)} / A)`
/// and `p = 1/4 exp(-c' k^theta nu^{-beta/(alpha-beta)} t + k log(u0_ratio^4 / A^8))`,
/// `c' = 2^theta (A 2^theta - 2/A)`, `u0_ratio = u0_lower / u0_bar`. `p` is
/// clamped to `(0, 1/4]`.
#[allow(clippy::too_many_arguments)]
pub fn lower_tail_bound(
    k: u32,
    t: f64,
    a: f64,
    u0_lower: f64,
    u0_bar: f64,
    alpha: f64,
    beta: f64,
    nu: f64,
    k0: u32,
) -> Result<(f64, f64), EstimatorError> {
    if k < k0 {
        return Err(EstimatorError::Regime(format!("k = {k} is below k0 = {k0}")));
    }
    if !(u0_lower > 0.0 && u0_lower <= u0_bar) {
        return Err(EstimatorError::Regime(format!("need 0 < u0_lower <= u0_bar, got {u0_lower}, {u0_bar}")));
    }
    let kf = k as f64;
    let damp = nu.powf(-beta / (alpha - beta));
    let lambda = u0_lower / (2.0 * a) * (t * kf.powf(alpha / (alpha - beta)) * damp / a).exp();
    let theta = theta_theory(alpha, beta);
    let two_theta = 2f64.powf(theta);
    let c = two_theta * (a * two_theta - 2.0 / a);
    let ratio = u0_lower / u0_bar;
    let e = -c * kf.powf(theta) * damp * t + kf * (ratio.powi(4) / a.powi(8)).ln();
    let p = (0.25 * e.exp()).clamp(f64::MIN_POSITIVE, 0.25);
    Ok((lambda, p))
}

/// Smallest `A` such that every entry of the table obeys the moment bound.
pub fn fit_moment_constant(table: &MomentTable, u0_bar: f64, alpha: f64, beta: f64, nu: f64) -> f64 {
    let theta = theta_theory(alpha, beta);
    let damp = nu.powf(-beta / (alpha - beta));
    let mut best: f64 = 0.0;
    for e in &table.entries {
        if !(e.estimate > 0.0) {
            continue;
        }
        let k = e.k as f64;
        let target = e.estimate.ln();
        let g = |a: f64| k * a.ln() + k * u0_bar.ln() + a * k.powf(theta) * e.time * damp - target;
        let (mut lo, mut hi) = (1e-12, 1.0);
        while g(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = best.max(hi);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub lambda: f64,
    pub exceedances: usize,
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    /// Lower confidence limit above the analytic bound.
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub time: f64,
    pub site: usize,
    pub fitted_a: f64,
    pub u0_bar: f64,
    pub trials: usize,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violation).count()
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "lambda,exceedances,probability,ci_low,ci_high,bound,violation")?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.lambda, r.exceedances, r.probability, r.ci_low, r.ci_high, r.bound, r.violation
            )?;
        }
        Ok(())
    }
}

/// Empirical `P(u_t(x) > lambda)` at one site per path, with 95% Wilson
/// intervals, against the clamped upper bound with constant `a`.
#[allow(clippy::too_many_arguments)]
pub fn tail_audit(
    ensemble: &Ensemble,
    t: f64,
    site: usize,
    lambdas: &[f64],
    a: f64,
    u0_bar: f64,
    alpha: f64,
    beta: f64,
    nu: f64,
) -> Result<TailReport, EstimatorError> {
    let ti = ensemble.time_index(t).ok_or(EstimatorError::UnknownTime(t))?;
    if site >= ensemble.grid.len() {
        return Err(EstimatorError::UnknownSite(site));
    }
    let values: Vec<f64> = ensemble.slices(ti).iter().map(|v| v[site]).collect();
    if values.is_empty() {
        return Err(EstimatorError::AllCensored);
    }
    let n = values.len();
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let exceedances = values.iter().filter(|&&v| v > lambda).count();
            let (ci_low, ci_high) = wilson_interval(exceedances, n, 1.96);
            let bound = upper_tail_bound_clamped(lambda, t, a, u0_bar, alpha, beta, nu);
            TailRow {
                lambda,
                exceedances,
                probability: exceedances as f64 / n as f64,
                ci_low,
                ci_high,
                bound,
                violation: ci_low > bound,
            }
        })
        .collect();
    Ok(TailReport {
        time: t,
        site,
        fitted_a: a,
        u0_bar,
        trials: n,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_reference_value() {
        assert!((upper_tail_constant(1.0, 2.0, 1.0) - 0.3849001795).abs() < 1e-10);
    }

    #[test]
    fn upper_bound_shape() {
        let b = |l: f64, t: f64| upper_tail_bound(l, t, 1.0, 1.0, 2.0, 0.5, 1.0).unwrap();
        assert!(b(2.0, 1.0) >= b(3.0, 1.0));
        assert!(b(3.0, 1.0) < 1.0 && b(3.0, 1.0) > 0.0);
        assert!(b(3.0, 1e-6) < 1e-12);
        assert!(upper_tail_bound(0.5, 1.0, 1.0, 1.0, 2.0, 0.5, 1.0).is_err());
        assert_eq!(upper_tail_bound_clamped(0.5, 1.0, 1.0, 1.0, 2.0, 0.5, 1.0), 1.0);
    }

    #[test]
    fn k_star_minimizes_chebyshev_exponent() {
        let (l, t, a, alpha, beta, nu): (f64, f64, f64, f64, f64, f64) = (50.0, 1.0, 1.0, 2.0, 0.5, 1.0);
        let theta = theta_theory(alpha, beta);
        let f = |k: f64| a * k.powf(theta) * nu.powf(-beta / (alpha - beta)) * t - k * (l / a).ln();
        let ks = k_star(l, t, a, 1.0, alpha, beta, nu);
        assert!(f(ks) <= f(ks * 1.01) && f(ks) <= f(ks * 0.99));
        // the minimum equals the log of the closed-form bound
        let bound = upper_tail_bound(l, t, a, 1.0, alpha, beta, nu).unwrap();
        assert!((f(ks) - bound.ln()).abs() < 1e-9 * f(ks).abs());
    }

    #[test]
    fn lower_bound_shape() {
        let lb = |k: u32, nu: f64| lower_tail_bound(k, 1.0, 1.5, 1.0, 1.0, 2.0, 0.5, nu, 2).unwrap();
        for k in 2..6 {
            let (l1, p) = lb(k, 1.0);
            let (l2, _) = lb(k + 1, 1.0);
            assert!(l2 > l1);
            assert!(p > 0.0 && p <= 0.25);
        }
        let (l, _) = lb(3, 1e40);
        assert!((l - 1.0 / 3.0).abs() < 1e-6, "{l}");
        assert!(lower_tail_bound(1, 1.0, 1.5, 1.0, 1.0, 2.0, 0.5, 1.0, 2).is_err());
    }
}
