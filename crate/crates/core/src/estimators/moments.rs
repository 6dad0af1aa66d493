//! Moments `E|u_t(x)|^k` with block-jackknife errors, and growth rates of
//! their logarithms in `t`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::ensemble::Ensemble;
use crate::stats::{fit_line, jackknife_se, BlockJackknife};

/// Maximum number of jackknife blocks.
pub const MAX_BLOCKS: usize = 100;
/// Entries with a larger relative error are left out of growth fits.
pub const MAX_RELATIVE_SE: f64 = 0.3;

/// Where moments are taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sites {
    List(Vec<usize>),
    /// Average of `|u|^k` over all sites of each path; for stationary data.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub k: u32,
    pub time: f64,
    /// `None` for site-pooled entries.
    pub site: Option<usize>,
    pub estimate: f64,
    pub std_error: f64,
    /// Leave-one-block-out means, shared block layout across entries.
    pub replicates: Vec<f64>,
}

impl MomentEntry {
    pub fn relative_se(&self) -> f64 {
        if self.estimate > 0.0 {
            self.std_error / self.estimate
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub k_values: Vec<u32>,
    pub times: Vec<f64>,
    pub sites: Vec<Option<usize>>,
    /// Ordered by `k`, then time, then site.
    pub entries: Vec<MomentEntry>,
    pub path_count: usize,
    pub censored_count: usize,
}

impl MomentTable {
    pub fn get(&self, k: u32, time_index: usize, site_index: usize) -> Option<&MomentEntry> {
        let ki = self.k_values.iter().position(|&x| x == k)?;
        let nt = self.times.len();
        let ns = self.sites.len();
        if time_index >= nt || site_index >= ns {
            return None;
        }
        self.entries.get((ki * nt + time_index) * ns + site_index)
    }

    /// Time series of one `(k, site)` pair.
    pub fn series(&self, k: u32, site_index: usize) -> Vec<&MomentEntry> {
        (0..self.times.len()).filter_map(|ti| self.get(k, ti, site_index)).collect()
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "k,time,site,estimate,std_error")?;
        for e in &self.entries {
            let site = e.site.map_or_else(|| "pooled".to_string(), |s| s.to_string());
            writeln!(out, "{},{:.16e},{},{:.16e},{:.16e}", e.k, e.time, site, e.estimate, e.std_error)?;
        }
        Ok(())
    }
}

/// Empirical `E|u_t(x)|^k` for every `k` in `ks`, `t` in `ts` and site.
///
/// Orders up to 4 need at least 100 completed paths; orders above 6 are
/// refused.
pub fn estimate_moments(ensemble: &Ensemble, ks: &[u32], ts: &[f64], sites: &Sites) -> Result<MomentTable, EstimatorError> {
    if let Some(&k) = ks.iter().find(|&&k| !(1..=6).contains(&k)) {
        return Err(EstimatorError::MomentOrder(k));
    }
    let completed = ensemble.completed_count();
    if completed == 0 {
        return Err(EstimatorError::AllCensored);
    }
    if completed < 100 {
        return Err(EstimatorError::TooFewPaths { need: 100, got: completed });
    }
    let time_indices = ts
        .iter()
        .map(|&t| ensemble.time_index(t).ok_or(EstimatorError::UnknownTime(t)))
        .collect::<Result<Vec<_>, _>>()?;
    let site_list: Vec<Option<usize>> = match sites {
        Sites::Pooled => vec![None],
        Sites::List(v) => {
            if let Some(&s) = v.iter().find(|&&s| s >= ensemble.grid.len()) {
                return Err(EstimatorError::UnknownSite(s));
            }
            v.iter().map(|&s| Some(s)).collect()
        }
    };
    let rows: Vec<Vec<f64>> = ensemble
        .completed()
        .map(|traj| {
            let mut row = Vec::with_capacity(ks.len() * ts.len() * site_list.len());
            for &k in ks {
                for &ti in &time_indices {
                    let values = &traj.fields[ti].values;
                    for site in &site_list {
                        row.push(match site {
                            Some(s) => values[*s].abs().powi(k as i32),
                            None => values.iter().map(|v| v.abs().powi(k as i32)).sum::<f64>() / values.len() as f64,
                        });
                    }
                }
            }
            row
        })
        .collect();
    let jk = BlockJackknife::new(&rows, MAX_BLOCKS);
    let mut entries = Vec::with_capacity(rows[0].len());
    let mut col = 0;
    for &k in ks {
        for (ti, _) in time_indices.iter().enumerate() {
            for site in &site_list {
                let replicates: Vec<f64> = jk.replicates().iter().map(|r| r[col]).collect();
                entries.push(MomentEntry {
                    k,
                    time: ts[ti],
                    site: *site,
                    estimate: jk.mean()[col],
                    std_error: jackknife_se(&replicates),
                    replicates,
                });
                col += 1;
            }
        }
    }
    Ok(MomentTable {
        k_values: ks.to_vec(),
        times: ts.to_vec(),
        sites: site_list,
        entries,
        path_count: ensemble.paths.len(),
        censored_count: ensemble.censored_count(),
    })
}

/// `(2 alpha - beta) / (alpha - beta)`, the growth exponent of `log E|u|^k` in `k`.
pub fn theta_theory(alpha: f64, beta: f64) -> f64 {
    (2.0 * alpha - beta) / (alpha - beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRate {
    pub k: u32,
    /// Slope of `log E|u_t|^k` against `t` on the fit window.
    pub gamma: f64,
    pub std_error: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Log-moment is non-monotone or visibly curved on the window.
    pub pre_asymptotic: bool,
    pub replicates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovFit {
    pub window: (f64, f64),
    pub rates: Vec<GrowthRate>,
    /// Slope of `log gamma(k)` against `log k`, when every rate is positive.
    pub theta_hat: Option<f64>,
    pub theta_se: Option<f64>,
}

impl LyapunovFit {
    pub fn rate(&self, k: u32) -> Option<&GrowthRate> {
        self.rates.iter().find(|r| r.k == k)
    }

    /// Whether `gamma(k)/k` is nondecreasing across consecutive orders within
    /// `z` jackknife standard errors of each difference.
    pub fn intermittency_ordered(&self, z: f64) -> bool {
        self.rates.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            let diff = b.gamma / b.k as f64 - a.gamma / a.k as f64;
            let reps: Vec<f64> = a
                .replicates
                .iter()
                .zip(&b.replicates)
                .map(|(ra, rb)| rb / b.k as f64 - ra / a.k as f64)
                .collect();
            diff >= -z * jackknife_se(&reps)
        })
    }
}

fn log_slope(times: &[f64], values: &[f64]) -> f64 {
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_line(times, &logs).slope
}

/// Growth rates on the last half of the table's time range at one site
/// column, plus the exponent fit across `k`.
pub fn lyapunov_fit(table: &MomentTable, site_index: usize) -> Result<LyapunovFit, EstimatorError> {
    let t_max = table.times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = t_max / 2.0;
    let mut rates = Vec::new();
    for &k in &table.k_values {
        let series: Vec<&MomentEntry> = table
            .series(k, site_index)
            .into_iter()
            .filter(|e| e.time >= lo - 1e-12 && e.relative_se() < MAX_RELATIVE_SE)
            .collect();
        if series.len() < 4 {
            return Err(EstimatorError::TooFewPoints {
                need: 4,
                got: series.len(),
            });
        }
        let times: Vec<f64> = series.iter().map(|e| e.time).collect();
        let values: Vec<f64> = series.iter().map(|e| e.estimate).collect();
        let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let fit = fit_line(&times, &logs);
        let nrep = series[0].replicates.len();
        let replicates: Vec<f64> = (0..nrep)
            .map(|b| {
                let v: Vec<f64> = series.iter().map(|e| e.replicates[b]).collect();
                log_slope(&times, &v)
            })
            .collect();
        let std_error = jackknife_se(&replicates);
        let increasing = logs.windows(2).all(|w| w[1] >= w[0]);
        let decreasing = logs.windows(2).all(|w| w[1] <= w[0]);
        let half = times.len() / 2;
        let early = fit_line(&times[..=half], &logs[..=half]).slope;
        let late = fit_line(&times[half..], &logs[half..]).slope;
        let curved = (late - early).abs() > 0.25 * fit.slope.abs() + 3.0 * std_error;
        rates.push(GrowthRate {
            k,
            gamma: fit.slope,
            std_error,
            r_squared: fit.r_squared,
            points: series.len(),
            pre_asymptotic: !(increasing || decreasing) || curved,
            replicates,
        });
    }
    let (theta_hat, theta_se) = if rates.len() >= 2 && rates.iter().all(|r| r.gamma > 0.0) {
        let lk: Vec<f64> = rates.iter().map(|r| (r.k as f64).ln()).collect();
        let lg: Vec<f64> = rates.iter().map(|r| r.gamma.ln()).collect();
        let theta = fit_line(&lk, &lg).slope;
        let nrep = rates[0].replicates.len();
        let reps: Vec<f64> = (0..nrep)
            .filter_map(|b| {
                let g: Vec<f64> = rates.iter().map(|r| r.replicates[b]).collect();
                g.iter().all(|&v| v > 0.0).then(|| {
                    let lg: Vec<f64> = g.iter().map(|v| v.ln()).collect();
                    fit_line(&lk, &lg).slope
                })
            })
            .collect();
        (Some(theta), Some(jackknife_se(&reps)))
    } else {
        (None, None)
    };
    Ok(LyapunovFit {
        window: (lo, t_max),
        rates,
        theta_hat,
        theta_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_values() {
        assert!((theta_theory(2.0, 1.0) - 3.0).abs() < 1e-15);
        assert!((theta_theory(2.0, 0.5) - 7.0 / 3.0).abs() < 1e-15);
    }

    fn synthetic_table(rates: &[(u32, f64)]) -> MomentTable {
        let times: Vec<f64> = (1..=8).map(|i| i as f64 * 0.5).collect();
        let mut entries = Vec::new();
        for &(k, g) in rates {
            for &t in &times {
                let v = (g * t).exp();
                entries.push(MomentEntry {
                    k,
                    time: t,
                    site: None,
                    estimate: v,
                    std_error: 0.01 * v,
                    replicates: vec![v * 0.99, v * 1.01, v],
                });
            }
        }
        MomentTable {
            k_values: rates.iter().map(|r| r.0).collect(),
            times,
            sites: vec![None],
            entries,
            path_count: 100,
            censored_count: 0,
        }
    }

    #[test]
    fn recovers_exponential_rates() {
        let t = synthetic_table(&[(2, 0.1), (3, 0.3), (4, 0.64)]);
        let fit = lyapunov_fit(&t, 0).unwrap();
        assert!((fit.rate(2).unwrap().gamma - 0.1).abs() < 1e-12);
        assert!(!fit.rate(3).unwrap().pre_asymptotic);
        assert!(fit.intermittency_ordered(2.0));
        let theta = fit.theta_hat.unwrap();
        assert!(theta > 2.0 && theta < 3.0, "{theta}");
    }

    #[test]
    fn zero_rates_for_constant_moments() {
        let t = synthetic_table(&[(2, 0.0), (3, 0.0)]);
        let fit = lyapunov_fit(&t, 0).unwrap();
        assert!(fit.rates.iter().all(|r| r.gamma.abs() < 1e-15));
        assert!(fit.theta_hat.is_none());
    }
}
