//! Small statistical helpers: least squares lines, block jackknife, binomial
//! intervals. All reductions run sequentially in input order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Classical standard error of the slope from the residuals.
    pub slope_se: f64,
}

/// Ordinary least squares fit of `y = a + b x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LineFit {
        slope,
        intercept,
        r_squared,
        slope_se,
    }
}

/// Least squares slope only.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    fit_line(x, y).slope
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and standard error of the mean.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = mean(v);
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Sample Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Delete-one-block jackknife over per-path feature rows.
///
/// `rows[p]` is the feature vector contributed by path `p`; the statistic is
/// a function of the across-path mean feature vector. Paths are split into at
/// most `max_blocks` contiguous blocks.
#[derive(Debug, Clone)]
pub struct BlockJackknife {
    full_mean: Vec<f64>,
    leave_out_means: Vec<Vec<f64>>,
}

impl BlockJackknife {
    pub fn new(rows: &[Vec<f64>], max_blocks: usize) -> Self {
        assert!(!rows.is_empty(), "jackknife needs at least one row");
        let width = rows[0].len();
        let p = rows.len();
        let blocks = max_blocks.min(p).max(1);
        let mut total = vec![0.0; width];
        let mut block_sums = vec![vec![0.0; width]; blocks];
        let mut block_counts = vec![0usize; blocks];
        for (i, row) in rows.iter().enumerate() {
            let b = i * blocks / p;
            block_counts[b] += 1;
            for (j, v) in row.iter().enumerate() {
                total[j] += v;
                block_sums[b][j] += v;
            }
        }
        let full_mean = total.iter().map(|t| t / p as f64).collect();
        let leave_out_means = if blocks < 2 {
            Vec::new()
        } else {
            block_sums
                .iter()
                .zip(&block_counts)
                .map(|(s, &c)| {
                    total
                        .iter()
                        .zip(s)
                        .map(|(t, sb)| (t - sb) / (p - c) as f64)
                        .collect()
                })
                .collect()
        };
        Self {
            full_mean,
            leave_out_means,
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.full_mean
    }

    pub fn replicates(&self) -> &[Vec<f64>] {
        &self.leave_out_means
    }

    /// Statistic on the full sample and its jackknife standard error.
    pub fn estimate(&self, stat: impl Fn(&[f64]) -> f64) -> (f64, f64) {
        let full = stat(&self.full_mean);
        let reps: Vec<f64> = self.leave_out_means.iter().map(|m| stat(m)).collect();
        (full, jackknife_se(&reps))
    }
}

/// Standard error from leave-one-out replicates.
pub fn jackknife_se(replicates: &[f64]) -> f64 {
    let b = replicates.len();
    if b < 2 {
        return 0.0;
    }
    let m = mean(replicates);
    let ss: f64 = replicates.iter().map(|r| (r - m) * (r - m)).sum();
    ((b as f64 - 1.0) / b as f64 * ss).sqrt()
}

/// Wilson score interval for a binomial proportion at the given z.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let f = fit_line(&x, &y);
        assert!((f.slope + 2.0).abs() < 1e-14);
        assert!((f.intercept - 3.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jackknife_of_mean_matches_standard_error() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![((i * 37) % 11) as f64]).collect();
        let jk = BlockJackknife::new(&rows, 50);
        let (m, se) = jk.estimate(|v| v[0]);
        let flat: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let (m2, se2) = mean_se(&flat);
        assert!((m - m2).abs() < 1e-12);
        assert!((se - se2).abs() < 1e-12);
    }

    #[test]
    fn wilson_width_shrinks_like_root_n() {
        let (a, b) = wilson_interval(100, 1000, 1.96);
        let (c, d) = wilson_interval(200, 2000, 1.96);
        let ratio = (d - c) / (b - a);
        assert!((ratio - 1.0 / 2f64.sqrt()).abs() < 0.01, "{ratio}");
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }
}
