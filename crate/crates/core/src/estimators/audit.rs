//! Ordering audits for coupled ensembles and positivity of single ensembles.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::moments::MomentTable;
use super::EstimatorError;
use crate::ensemble::{CoupledEnsemble, Ensemble};
use crate::stats::jackknife_se;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub path_count: usize,
    pub censored_count: usize,
    pub tolerance: f64,
    /// Per path: `max over sites and snapshots of (u - v)`.
    pub max_violation: Vec<f64>,
    /// Site-time pairs with `u > v + tolerance`, summed over paths.
    pub violations: usize,
    /// Per path: `min over sites of (v - u)` at the last snapshot.
    pub final_gap: Vec<f64>,
    /// Paths whose final gap is strictly positive.
    pub strict_paths: usize,
}

impl ComparisonReport {
    pub fn min_final_gap(&self) -> f64 {
        self.final_gap.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "path,max_violation,final_gap")?;
        for (i, (v, g)) in self.max_violation.iter().zip(&self.final_gap).enumerate() {
            writeln!(out, "{i},{v:.16e},{g:.16e}")?;
        }
        Ok(())
    }
}

/// Check `u <= v + tol` at every site and snapshot of every coupled path.
pub fn comparison_audit(pair: &CoupledEnsemble, tol: f64) -> Result<ComparisonReport, EstimatorError> {
    let (u, v) = (&pair.u, &pair.v);
    if u.master_seed != v.master_seed || u.paths.len() != v.paths.len() || u.times != v.times {
        return Err(EstimatorError::Uncoupled("seed, path count or snapshot times differ".into()));
    }
    let mut max_violation = Vec::new();
    let mut final_gap = Vec::new();
    let mut violations = 0;
    let mut censored_count = 0;
    for (pu, pv) in u.paths.iter().zip(&v.paths) {
        let (Some(tu), Some(tv)) = (pu.trajectory(), pv.trajectory()) else {
            censored_count += 1;
            continue;
        };
        if tu.stream != tv.stream {
            return Err(EstimatorError::Uncoupled(format!("streams {:?} and {:?}", tu.stream, tv.stream)));
        }
        let mut worst = f64::NEG_INFINITY;
        for (fu, fv) in tu.fields.iter().zip(&tv.fields) {
            for (a, b) in fu.values.iter().zip(&fv.values) {
                let d = a - b;
                worst = worst.max(d);
                if d > tol {
                    violations += 1;
                }
            }
        }
        max_violation.push(worst);
        let (lu, lv) = (tu.final_field(), tv.final_field());
        final_gap.push(
            lv.values
                .iter()
                .zip(&lu.values)
                .map(|(b, a)| b - a)
                .fold(f64::INFINITY, f64::min),
        );
    }
    let strict_paths = final_gap.iter().filter(|&&g| g > 0.0).count();
    Ok(ComparisonReport {
        path_count: u.paths.len(),
        censored_count,
        tolerance: tol,
        max_violation,
        violations,
        final_gap,
        strict_paths,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentOrdering {
    pub k: u32,
    pub time: f64,
    pub site: Option<usize>,
    pub upper: f64,
    pub lower: f64,
    /// Jackknife error of `upper - lower`.
    pub std_error: f64,
    /// `upper >= lower - 2 SE`.
    pub holds: bool,
}

/// Entry-wise check `E u^k >= E v^k - 2 SE` for tables built from coupled
/// ensembles with identical layouts.
pub fn moment_comparison(upper: &MomentTable, lower: &MomentTable) -> Result<Vec<MomentOrdering>, EstimatorError> {
    if upper.k_values != lower.k_values || upper.times != lower.times || upper.sites != lower.sites {
        return Err(EstimatorError::Uncoupled("moment tables have different layouts".into()));
    }
    Ok(upper
        .entries
        .iter()
        .zip(&lower.entries)
        .map(|(a, b)| {
            let std_error = if a.replicates.len() == b.replicates.len() {
                let d: Vec<f64> = a.replicates.iter().zip(&b.replicates).map(|(x, y)| x - y).collect();
                jackknife_se(&d)
            } else {
                a.std_error.hypot(b.std_error)
            };
            MomentOrdering {
                k: a.k,
                time: a.time,
                site: a.site,
                upper: a.estimate,
                lower: b.estimate,
                std_error,
                holds: a.estimate >= b.estimate - 2.0 * std_error,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    /// Per path: infimum over the sites and snapshots up to the horizon.
    pub infima: Vec<f64>,
    pub median_infimum: f64,
    /// `(epsilon, fraction of paths with infimum < epsilon)`.
    pub fractions: Vec<(f64, f64)>,
}

/// Infimum of each path over `sites` and all snapshots with time `<= horizon`.
pub fn positivity_audit(ensemble: &Ensemble, sites: &[usize], horizon: f64, epsilons: &[f64]) -> Result<PositivityReport, EstimatorError> {
    if let Some(&s) = sites.iter().find(|&&s| s >= ensemble.grid.len()) {
        return Err(EstimatorError::UnknownSite(s));
    }
    let infima: Vec<f64> = ensemble
        .completed()
        .map(|traj| {
            traj.times
                .iter()
                .zip(&traj.fields)
                .filter(|(t, _)| **t <= horizon + 1e-12)
                .flat_map(|(_, f)| sites.iter().map(move |&s| f.values[s]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    if infima.is_empty() {
        return Err(EstimatorError::AllCensored);
    }
    let mut sorted = infima.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median_infimum = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let fractions = epsilons
        .iter()
        .map(|&e| (e, infima.iter().filter(|&&m| m < e).count() as f64 / n as f64))
        .collect();
    Ok(PositivityReport {
        infima,
        median_infimum,
        fractions,
    })
}
