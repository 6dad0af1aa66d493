//! Experiment configuration in TOML with dotted sections.
//!
//! ```toml
//! [model]
//! alpha = 2.0
//! nu = 1.0
//! beta = 0.5
//! dim = 1
//! sigma = { family = "linear", scale = 1.0 }
//!
//! [grid]
//! side_length = 40.0
//! points = 256
//!
//! [run]
//! dt = 0.001
//! horizon = 1.0
//! snapshots = [0.5, 1.0]
//! paths = 1000
//! seed = 7
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{Decay, Sites};
use crate::grid::{Field, GridSpec};
use crate::kernels::KernelParams;
use crate::noise::NoiseSpec;
use crate::solver::{ModelParams, SigmaFamily, SigmaSpec, Symbol};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    /// Dotted key the diagnostic refers to, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Missing(k) | ConfigError::Invalid { key: k, .. } => Some(k),
            _ => None,
        }
    }
}

fn invalid(key: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaConfig {
    pub family: SigmaFamily,
    pub scale: f64,
    pub lipschitz: Option<f64>,
    pub lower: Option<f64>,
}

impl SigmaConfig {
    fn spec(&self) -> SigmaSpec {
        SigmaSpec {
            family: self.family,
            scale: self.scale,
            lipschitz: self.lipschitz.unwrap_or(self.scale.abs()),
            lower: self.lower,
        }
    }
}

impl Default for SigmaConfig {
    fn default() -> Self {
        Self {
            family: SigmaFamily::Linear,
            scale: 1.0,
            lipschitz: None,
            lower: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub alpha: f64,
    pub nu: f64,
    pub beta: f64,
    pub dim: usize,
    #[serde(default)]
    pub sigma: SigmaConfig,
    #[serde(default)]
    pub symbol: Symbol,
    pub smoothing: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub side_length: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub threads: usize,
}

/// Initial datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Constant { value: f64 },
    /// `base + height exp(-|x|^2 / (2 width^2))`
    Bump { base: f64, height: f64, width: f64 },
    Trichotomy { decay: f64 },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Constant { value: 1.0 }
    }
}

impl InitialConfig {
    pub fn field(&self, grid: &GridSpec, model: &ModelConfig) -> Result<Field, ConfigError> {
        match *self {
            InitialConfig::Constant { value } => {
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(invalid("initial.value", "must be finite and nonnegative"));
                }
                Ok(Field::constant(*grid, value))
            }
            InitialConfig::Bump { base, height, width } => {
                if !(base >= 0.0 && height >= 0.0 && width > 0.0) {
                    return Err(invalid("initial", "bump needs base >= 0, height >= 0, width > 0"));
                }
                Ok(Field::from_fn(*grid, |x| {
                    base + height * (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * width * width)).exp()
                }))
            }
            InitialConfig::Trichotomy { decay } => {
                crate::estimators::trichotomy_profile(decay_of(decay), model.beta, model.alpha, grid)
                    .map_err(|e| invalid("initial.decay", e))
            }
        }
    }
}

/// `inf` in the config selects the ball indicator.
pub fn decay_of(x: f64) -> Decay {
    if x.is_infinite() {
        Decay::Infinite
    } else {
        Decay::Finite(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTestConfig {
    #[serde(default = "default_kernel_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_kernel_points")]
    pub points: Vec<f64>,
    #[serde(default = "default_modes")]
    pub mode_count: usize,
    #[serde(default = "default_cutoff")]
    pub frequency_cutoff: f64,
}

fn default_kernel_times() -> Vec<f64> {
    vec![0.1, 1.0]
}
fn default_kernel_points() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0, 3.0, 5.0]
}
fn default_modes() -> usize {
    256
}
fn default_cutoff() -> f64 {
    1e8
}

impl Default for KernelTestConfig {
    fn default() -> Self {
        Self {
            times: default_kernel_times(),
            points: default_kernel_points(),
            mode_count: default_modes(),
            frequency_cutoff: default_cutoff(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseTestConfig {
    pub samples: usize,
    pub dt: f64,
    pub seed: u64,
    /// Lags in sites along the first axis.
    pub lags: Vec<usize>,
    #[serde(default)]
    pub smoothing: Vec<usize>,
    #[serde(default)]
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SitesConfig {
    Keyword(String),
    List(Vec<usize>),
}

impl SitesConfig {
    pub fn sites(&self) -> Result<Sites, ConfigError> {
        match self {
            SitesConfig::Keyword(k) if k == "pooled" => Ok(Sites::Pooled),
            SitesConfig::Keyword(k) => Err(invalid("moments.sites", format!("expected \"pooled\" or a list, got {k:?}"))),
            SitesConfig::List(v) => Ok(Sites::List(v.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub ks: Vec<u32>,
    pub sites: SitesConfig,
    /// Require positive growth and ordered `gamma(k)/k`.
    #[serde(default)]
    pub lyapunov: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsConfig {
    pub time: f64,
    pub lambdas: Vec<f64>,
    #[serde(default = "default_tail_ks")]
    pub ks: Vec<u32>,
    #[serde(default)]
    pub site: usize,
}

fn default_tail_ks() -> Vec<u32> {
    vec![1, 2, 3, 4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Initial datum of the second path; defaults to the first.
    pub initial: Option<InitialConfig>,
    /// Sigma of the second path; defaults to the first.
    pub sigma: Option<SigmaConfig>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Require a strictly positive final gap on every path.
    #[serde(default)]
    pub strict: bool,
    /// Moment orders for the moment ordering check (site-pooled).
    #[serde(default)]
    pub ks: Vec<u32>,
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupGrowthConfig {
    pub time: f64,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderConfig {
    pub space_lags: Vec<usize>,
    pub time_base: f64,
    pub time_lags: Vec<f64>,
    #[serde(default = "default_holder_tolerance")]
    pub tolerance: f64,
}

fn default_holder_tolerance() -> f64 {
    0.15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrichotomyConfig {
    /// `Lambda` values; `inf` selects the ball indicator.
    pub decays: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    pub ns: Vec<usize>,
    pub time: f64,
    /// Smoothing level for the independence check.
    pub independence_n: Option<usize>,
    /// Separation in physical units for the independence check.
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub run: Option<RunConfig>,
    #[serde(default)]
    pub initial: InitialConfig,
    pub kernel_test: Option<KernelTestConfig>,
    pub noise_test: Option<NoiseTestConfig>,
    pub moments: Option<MomentsConfig>,
    pub tails: Option<TailsConfig>,
    pub compare: Option<CompareConfig>,
    pub sup_growth: Option<SupGrowthConfig>,
    pub holder: Option<HolderConfig>,
    pub trichotomy: Option<TrichotomyConfig>,
    pub picard: Option<PicardConfig>,
}

const REQUIRED: [&str; 6] = [
    "model.alpha",
    "model.nu",
    "model.beta",
    "model.dim",
    "grid.side_length",
    "grid.points",
];

const RUN_KEYS: [&str; 4] = ["run.dt", "run.horizon", "run.paths", "run.seed"];

fn lookup<'a>(table: &'a toml::Table, dotted: &str) -> Option<&'a toml::Value> {
    let mut parts = dotted.split('.');
    let mut value = table.get(parts.next()?)?;
    for p in parts {
        value = value.as_table()?.get(p)?;
    }
    Some(value)
}

impl ExperimentConfig {
    /// Parse and validate; `needs_run` requires the `[run]` section.
    pub fn parse(text: &str, needs_run: bool) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        for key in REQUIRED {
            if lookup(&table, key).is_none() {
                return Err(ConfigError::Missing(key.to_string()));
            }
        }
        if needs_run {
            for key in RUN_KEYS {
                if lookup(&table, key).is_none() {
                    return Err(ConfigError::Missing(key.to_string()));
                }
            }
        }
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path, needs_run: bool) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, needs_run)
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        GridSpec::new(self.model.dim, self.grid.side_length, self.grid.points).map_err(|e| invalid("grid", e))
    }

    pub fn kernel_params(&self) -> Result<KernelParams, ConfigError> {
        KernelParams::new(self.model.alpha, self.model.nu, self.model.dim).map_err(|e| invalid("model", e))
    }

    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        self.model_with_sigma(&self.model.sigma)
    }

    pub fn model_with_sigma(&self, sigma: &SigmaConfig) -> Result<ModelParams, ConfigError> {
        let noise = NoiseSpec::new(self.model.beta, self.grid_spec()?, self.model.smoothing).map_err(|e| invalid("model.beta", e))?;
        let p = ModelParams::new(self.kernel_params()?, noise, sigma.spec()).map_err(|e| invalid("model", e))?;
        Ok(p.with_symbol(self.model.symbol))
    }

    pub fn run(&self) -> Result<&RunConfig, ConfigError> {
        self.run.as_ref().ok_or_else(|| ConfigError::Missing("run".into()))
    }

    pub fn initial_field(&self) -> Result<Field, ConfigError> {
        self.initial.field(&self.grid_spec()?, &self.model)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.model_params()?;
        self.initial_field()?;
        if let Some(run) = &self.run {
            if !(run.dt > 0.0) {
                return Err(invalid("run.dt", "must be positive"));
            }
            if !(run.horizon >= 0.0) {
                return Err(invalid("run.horizon", "must be nonnegative"));
            }
            let (limit, reason) = self.model_params()?.max_step();
            if run.dt > limit {
                return Err(invalid("run.dt", format!("{} exceeds the stability limit {limit:e} ({reason})", run.dt)));
            }
            if run.paths == 0 {
                return Err(invalid("run.paths", "must be positive"));
            }
            if run.snapshots.iter().any(|&t| t < 0.0 || t > run.horizon) {
                return Err(invalid("run.snapshots", "must lie in [0, horizon]"));
            }
            if run.snapshots.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("run.snapshots", "must be strictly increasing"));
            }
        }
        if let Some(c) = &self.compare {
            if let Some(s) = &c.sigma {
                self.model_with_sigma(s).map_err(|e| invalid("compare.sigma", e))?;
            }
            if let Some(i) = &c.initial {
                i.field(&self.grid_spec()?, &self.model)?;
            }
        }
        if let Some(m) = &self.moments {
            m.sites.sites()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[model]
alpha = 2.0
nu = 1.0
beta = 0.5
dim = 1

[grid]
side_length = 20.0
points = 64

[run]
dt = 0.001
horizon = 0.1
paths = 10
seed = 3
"#;

    #[test]
    fn parses_reference_config() {
        let cfg = ExperimentConfig::parse(BASE, true).unwrap();
        assert_eq!(cfg.model.sigma.family, SigmaFamily::Linear);
        assert_eq!(cfg.model.symbol, Symbol::Lattice);
        cfg.model_params().unwrap();
    }

    #[test]
    fn missing_key_is_named() {
        let text = BASE.replace("alpha = 2.0\n", "");
        let err = ExperimentConfig::parse(&text, true).unwrap_err();
        assert_eq!(err.key(), Some("model.alpha"));
        let text = BASE.replace("seed = 3\n", "");
        assert_eq!(ExperimentConfig::parse(&text, true).unwrap_err().key(), Some("run.seed"));
        let no_run = BASE.split("[run]").next().unwrap();
        assert!(ExperimentConfig::parse(no_run, false).is_ok());
        assert_eq!(ExperimentConfig::parse(no_run, true).unwrap_err().key(), Some("run.dt"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = BASE.replace("dim = 1", "dim = 1\ncolour = 3");
        assert!(matches!(ExperimentConfig::parse(&text, true), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn invariants_rechecked() {
        let text = BASE.replace("beta = 0.5", "beta = 1.5");
        assert!(matches!(ExperimentConfig::parse(&text, true), Err(ConfigError::Invalid { .. })));
        let text = BASE.replace("points = 64", "points = 30");
        assert!(ExperimentConfig::parse(&text, true).is_err());
    }

    #[test]
    fn infinite_decay_literal() {
        let text = format!("{BASE}\n[trichotomy]\ndecays = [0.0, 1.0, inf]\n");
        let cfg = ExperimentConfig::parse(&text, true).unwrap();
        let d = &cfg.trichotomy.unwrap().decays;
        assert_eq!(decay_of(d[2]), Decay::Infinite);
    }
}
