//! Hölder exponents from variogram regressions in space and time.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::ensemble::Ensemble;
use crate::stats::{fit_line, jackknife_se, BlockJackknife};

/// Half-slopes at or above this are read as a smooth (saturated) variogram.
const SATURATION: f64 = 0.98;
/// Regressions with worse fit are flagged.
const MIN_R_SQUARED: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderSpec {
    /// Spatial lags in sites along the first axis.
    pub space_lags: Vec<usize>,
    /// Snapshot time for the spatial variogram and start of the time increments.
    pub time_base: f64,
    /// Time lags; `time_base + lag` must be snapshots.
    pub time_lags: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub theory: f64,
    /// Half the variogram slope, capped to `(0, 1]`.
    pub estimate: f64,
    pub std_error: f64,
    pub ci: (f64, f64),
    pub r_squared: f64,
    pub lags: Vec<f64>,
    pub variogram: Vec<f64>,
    /// Saturated slope, non-positive slope or poor fit.
    pub out_of_regime: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub spatial: ExponentEstimate,
    pub temporal: ExponentEstimate,
}

impl HolderReport {
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "kind,lag,variogram")?;
        for (kind, e) in [("space", &self.spatial), ("time", &self.temporal)] {
            for (l, v) in e.lags.iter().zip(&e.variogram) {
                writeln!(out, "{kind},{l:.16e},{v:.16e}")?;
            }
        }
        Ok(())
    }
}

fn half_slope(lags: &[f64], variogram: &[f64]) -> (f64, f64) {
    let x: Vec<f64> = lags.iter().map(|l| l.ln()).collect();
    let y: Vec<f64> = variogram.iter().map(|v| v.ln()).collect();
    let f = fit_line(&x, &y);
    (f.slope / 2.0, f.r_squared)
}

fn exponent(theory: f64, lags: Vec<f64>, jk: &BlockJackknife, cols: std::ops::Range<usize>) -> ExponentEstimate {
    let variogram = jk.mean()[cols.clone()].to_vec();
    let (raw, r_squared) = half_slope(&lags, &variogram);
    let reps: Vec<f64> = jk.replicates().iter().map(|r| half_slope(&lags, &r[cols.clone()]).0).collect();
    let std_error = jackknife_se(&reps);
    let out_of_regime = raw >= SATURATION || raw <= 0.0 || !(r_squared >= MIN_R_SQUARED);
    let estimate = raw.clamp(f64::EPSILON, 1.0);
    ExponentEstimate {
        theory,
        estimate,
        std_error,
        ci: (
            (raw - 1.96 * std_error).max(f64::EPSILON),
            (raw + 1.96 * std_error).min(1.0),
        ),
        r_squared,
        lags,
        variogram,
        out_of_regime,
    }
}

/// Variogram estimates of the spatial and temporal exponents, with theory
/// values `(alpha - beta)/2` and `(alpha - beta)/(2 alpha)`.
pub fn holder_exponents(ensemble: &Ensemble, spec: &HolderSpec, alpha: f64, beta: f64) -> Result<HolderReport, EstimatorError> {
    if spec.space_lags.len() < 4 || spec.time_lags.len() < 4 {
        return Err(EstimatorError::TooFewPoints {
            need: 4,
            got: spec.space_lags.len().min(spec.time_lags.len()),
        });
    }
    let base = ensemble
        .time_index(spec.time_base)
        .ok_or(EstimatorError::UnknownTime(spec.time_base))?;
    let later = spec
        .time_lags
        .iter()
        .map(|&l| {
            let t = spec.time_base + l;
            ensemble.time_index(t).ok_or(EstimatorError::UnknownTime(t))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let g = ensemble.grid;
    let shifts: Vec<usize> = spec.space_lags.iter().map(|&h| g.site_at([h as i64, 0])).collect();
    let rows: Vec<Vec<f64>> = ensemble
        .completed()
        .map(|traj| {
            let u = &traj.fields[base].values;
            let n = u.len() as f64;
            let mut row = Vec::with_capacity(shifts.len() + later.len());
            for &s in &shifts {
                let v: f64 = (0..u.len()).map(|x| (u[g.shift(x, s)] - u[x]).powi(2)).sum();
                row.push(v / n);
            }
            for &ti in &later {
                let w = &traj.fields[ti].values;
                let v: f64 = w.iter().zip(u).map(|(a, b)| (a - b).powi(2)).sum();
                row.push(v / n);
            }
            row
        })
        .collect();
    if rows.is_empty() {
        return Err(EstimatorError::AllCensored);
    }
    let jk = BlockJackknife::new(&rows, 100);
    let ns = shifts.len();
    let space: Vec<f64> = spec.space_lags.iter().map(|&h| h as f64 * g.spacing()).collect();
    Ok(HolderReport {
        spatial: exponent((alpha - beta) / 2.0, space, &jk, 0..ns),
        temporal: exponent((alpha - beta) / (2.0 * alpha), spec.time_lags.clone(), &jk, ns..ns + later.len()),
    })
}
