//! Radial initial data `u0(x) = min(1, exp(-Lambda (log|x|)^{2/(2-beta)}))`
//! separating the three regimes of `sup_x u_t` for the Laplacian.

use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::grid::{Field, GridSpec};

/// Decay rate `Lambda` of the initial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decay {
    /// `Lambda >= 0`; zero uses `1 / (1 + log(1 + |x|))`.
    Finite(f64),
    /// Indicator of the open unit ball.
    Infinite,
}

/// Profile value at radius `r`.
pub fn profile(decay: Decay, beta: f64, r: f64) -> f64 {
    match decay {
        Decay::Infinite => {
            if r < 1.0 {
                1.0
            } else {
                0.0
            }
        }
        Decay::Finite(0.0) => 1.0 / (1.0 + (1.0 + r).ln()),
        Decay::Finite(l) => {
            if r <= 1.0 {
                1.0
            } else {
                (-l * r.ln().powf(2.0 / (2.0 - beta))).exp().min(1.0)
            }
        }
    }
}

/// Initial field on the grid. Only defined for `alpha = 2`.
pub fn trichotomy_profile(decay: Decay, beta: f64, alpha: f64, grid: &GridSpec) -> Result<Field, EstimatorError> {
    if alpha != 2.0 {
        return Err(EstimatorError::Regime(format!("trichotomy profiles need alpha = 2, got {alpha}")));
    }
    if let Decay::Finite(l) = decay {
        if !(l >= 0.0) {
            return Err(EstimatorError::Regime(format!("Lambda must be nonnegative, got {l}")));
        }
    }
    let values = (0..grid.len()).map(|i| profile(decay, beta, grid.radius(i))).collect();
    Ok(Field {
        grid: *grid,
        values,
        time: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let e = std::f64::consts::E;
        assert!((profile(Decay::Finite(1.0), 1.0, e) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(profile(Decay::Infinite, 0.5, 0.5), 1.0);
        assert_eq!(profile(Decay::Infinite, 0.5, 1.5), 0.0);
        assert_eq!(profile(Decay::Finite(2.0), 0.5, 0.7), 1.0);
    }

    #[test]
    fn requires_laplacian() {
        let g = GridSpec::new(1, 20.0, 64).unwrap();
        assert!(trichotomy_profile(Decay::Finite(1.0), 0.5, 1.5, &g).is_err());
        assert!(trichotomy_profile(Decay::Finite(-1.0), 0.5, 2.0, &g).is_err());
    }
}
