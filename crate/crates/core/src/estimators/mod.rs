//! Ensemble statistics: moments and Lyapunov exponents, tail probabilities
//! against the analytic bounds, growth of suprema, path regularity,
//! comparison and positivity audits, and trichotomy initial data.

use thiserror::Error;

pub mod audit;
pub mod growth;
pub mod holder;
pub mod moments;
pub mod tails;
pub mod trichotomy;

pub use audit::{comparison_audit, moment_comparison, positivity_audit, ComparisonReport, MomentOrdering, PositivityReport};
pub use growth::{sup_growth, SupGrowthReport};
pub use holder::{holder_exponents, ExponentEstimate, HolderReport, HolderSpec};
pub use moments::{estimate_moments, lyapunov_fit, theta_theory, GrowthRate, LyapunovFit, MomentEntry, MomentTable, Sites};
pub use tails::{
    fit_moment_constant, k_star, lower_tail_bound, tail_audit, upper_tail_bound, upper_tail_bound_clamped,
    upper_tail_constant, TailReport, TailRow,
};
pub use trichotomy::{profile, trichotomy_profile, Decay};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("every path in the ensemble was censored")]
    AllCensored,
    #[error("need at least {need} completed paths, got {got}")]
    TooFewPaths { need: usize, got: usize },
    #[error("moment order {0} outside 1..=6")]
    MomentOrder(u32),
    #[error("no snapshot at t = {0}")]
    UnknownTime(f64),
    #[error("site {0} is outside the grid")]
    UnknownSite(usize),
    #[error("need at least {need} points for the fit, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("outside the formula regime: {0}")]
    Regime(String),
    #[error("ensembles are not coupled: {0}")]
    Uncoupled(String),
}
