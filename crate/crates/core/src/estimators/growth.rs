//! Growth of `sup_{B(0,R)} u_t` with the radius, regressed against
//! `(log R)^{alpha/(2 alpha - beta)}`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::ensemble::Ensemble;
use crate::stats::{fit_line, LineFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupGrowthReport {
    pub time: f64,
    pub radii: Vec<f64>,
    /// `alpha / (2 alpha - beta)`.
    pub exponent: f64,
    /// `(log R)^exponent` per radius.
    pub abscissa: Vec<f64>,
    /// `sups[p][r]`: supremum of path `p` over the ball of radius `radii[r]`.
    pub sups: Vec<Vec<f64>>,
    pub median_log_sup: Vec<f64>,
    pub fit: LineFit,
}

impl SupGrowthReport {
    /// Every path's supremum is nondecreasing in the radius.
    pub fn nested(&self) -> bool {
        self.sups.iter().all(|s| s.windows(2).all(|w| w[1] >= w[0]))
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "radius,log_radius_power,median_log_sup")?;
        for i in 0..self.radii.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.radii[i], self.abscissa[i], self.median_log_sup[i]
            )?;
        }
        Ok(())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-path suprema over torus balls centered at site 0, and the regression
/// of the median `log sup` on `(log R)^{alpha/(2 alpha - beta)}`.
pub fn sup_growth(ensemble: &Ensemble, t: f64, radii: &[f64], alpha: f64, beta: f64) -> Result<SupGrowthReport, EstimatorError> {
    if radii.len() < 4 {
        return Err(EstimatorError::TooFewPoints {
            need: 4,
            got: radii.len(),
        });
    }
    let half = ensemble.grid.side_length() / 2.0;
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 1.0 || radii[radii.len() - 1] > half {
        return Err(EstimatorError::Regime(format!(
            "radii must increase within (1, {half}], got {radii:?}"
        )));
    }
    let ti = ensemble.time_index(t).ok_or(EstimatorError::UnknownTime(t))?;
    let slices = ensemble.slices(ti);
    if slices.is_empty() {
        return Err(EstimatorError::AllCensored);
    }
    let g = ensemble.grid;
    let dist: Vec<f64> = (0..g.len()).map(|i| g.radius(i)).collect();
    let sups: Vec<Vec<f64>> = slices
        .iter()
        .map(|values| {
            radii
                .iter()
                .map(|&r| {
                    values
                        .iter()
                        .zip(&dist)
                        .filter(|(_, &d)| d <= r)
                        .map(|(&v, _)| v)
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        })
        .collect();
    let exponent = alpha / (2.0 * alpha - beta);
    let abscissa: Vec<f64> = radii.iter().map(|r| r.ln().powf(exponent)).collect();
    let median_log_sup: Vec<f64> = (0..radii.len())
        .map(|ri| median(sups.iter().map(|s| s[ri].ln()).collect()))
        .collect();
    let fit = fit_line(&abscissa, &median_log_sup);
    Ok(SupGrowthReport {
        time: t,
        radii: radii.to_vec(),
        exponent,
        abscissa,
        sups,
        median_log_sup,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
