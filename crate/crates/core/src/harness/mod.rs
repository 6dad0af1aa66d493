//! Experiment front end behind the `fracshe` binary.
//!
//! Every subcommand reads an [`ExperimentConfig`], writes one or more CSV
//! files, `<experiment>_summary.json` and `manifest.json` into the output
//! directory, and returns 0 when every audit passes, 1 on audit failure and
//! 2 on an invalid configuration.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub mod config;
pub mod manifest;

pub use config::{ConfigError, ExperimentConfig};
pub use manifest::{FileEntry, RunManifest, SEED_RULE};

use crate::ensemble::{run_parallel, CoupledEnsemble, Ensemble, EnsembleSpec};
use crate::estimators::{self, HolderSpec, Sites};
use crate::grid::Field;
use crate::kernels::{kernel_closed_form, kernel_spectral, riesz, KernelError, QuadratureSpec};
use crate::noise::{covariance_from_weights, riesz_spectral_weights, smoothed_weights, NoiseSampler};
use crate::picard::LocalizedPicard;
use crate::rng::derive_stream;
use crate::stats::{correlation, mean_se};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    KernelTest,
    NoiseTest,
    Simulate,
    Moments,
    Tails,
    Compare,
    SupGrowth,
    Holder,
    Trichotomy,
    PicardApprox,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::KernelTest,
        Experiment::NoiseTest,
        Experiment::Simulate,
        Experiment::Moments,
        Experiment::Tails,
        Experiment::Compare,
        Experiment::SupGrowth,
        Experiment::Holder,
        Experiment::Trichotomy,
        Experiment::PicardApprox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::KernelTest => "kernel-test",
            Experiment::NoiseTest => "noise-test",
            Experiment::Simulate => "simulate",
            Experiment::Moments => "moments",
            Experiment::Tails => "tails",
            Experiment::Compare => "compare",
            Experiment::SupGrowth => "sup-growth",
            Experiment::Holder => "holder",
            Experiment::Trichotomy => "trichotomy",
            Experiment::PicardApprox => "picard-approx",
        }
    }

    /// Stem of the output files.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }

    fn needs_run(self) -> bool {
        !matches!(self, Experiment::KernelTest | Experiment::NoiseTest)
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the path count.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
    #[error("{0}")]
    Run(String),
}

fn run_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Run(e.to_string())
}

/// One failed audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

/// Result of an experiment before it is written to disk.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: serde_json::Map<String, Value>,
    pub failures: Vec<Failure>,
}

impl Outcome {
    fn file(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) {
        let mut buf = Vec::new();
        write(&mut buf).expect("writing to memory");
        self.files.push((name.to_string(), buf));
    }

    fn put(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(Failure {
                check: name.to_string(),
                detail: detail(),
            });
        }
    }
}

/// Load the configuration and apply command-line overrides.
pub fn load_config(experiment: Experiment, args: &RunArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::load(&args.config, experiment.needs_run())?;
    if let Some(run) = cfg.run.as_mut() {
        if let Some(p) = args.paths {
            run.paths = p;
        }
        if let Some(s) = args.seed {
            run.seed = s;
        }
        if let Some(t) = args.threads {
            run.threads = t;
        }
    }
    if let Some(nt) = cfg.noise_test.as_mut() {
        if let Some(p) = args.paths {
            nt.samples = p;
        }
        if let Some(s) = args.seed {
            nt.seed = s;
        }
        if let Some(t) = args.threads {
            nt.threads = t;
        }
    }
    if args.paths == Some(0) {
        return Err(ConfigError::Invalid {
            key: "run.paths".into(),
            reason: "must be positive".into(),
        });
    }
    Ok(cfg)
}

/// Run an experiment on a loaded configuration without touching the disk.
pub fn execute(experiment: Experiment, cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    let mut out = Outcome::default();
    match experiment {
        Experiment::KernelTest => kernel_test(cfg, &mut out)?,
        Experiment::NoiseTest => noise_test(cfg, &mut out)?,
        Experiment::Simulate => simulate(cfg, &mut out)?,
        Experiment::Moments => moments(cfg, &mut out)?,
        Experiment::Tails => tails(cfg, &mut out)?,
        Experiment::Compare => compare(cfg, &mut out)?,
        Experiment::SupGrowth => sup_growth(cfg, &mut out)?,
        Experiment::Holder => holder(cfg, &mut out)?,
        Experiment::Trichotomy => trichotomy(cfg, &mut out)?,
        Experiment::PicardApprox => picard_approx(cfg, &mut out)?,
    }
    Ok(out)
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), HarnessError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| HarnessError::Output {
        path: path.display().to_string(),
        source,
    })
}

/// Execute and persist. Returns the process exit status.
pub fn run(experiment: Experiment, args: &RunArgs) -> i32 {
    let start = Instant::now();
    let cfg = match load_config(experiment, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            let diag = json!({ "error": "invalid_config", "key": e.key(), "message": e.to_string() });
            eprintln!("{diag}");
            return 2;
        }
    };
    match persist(experiment, &cfg, &args.out, start) {
        Ok(failures) if failures.is_empty() => 0,
        Ok(failures) => {
            println!("{}", json!({ "experiment": experiment.name(), "failures": failures }));
            1
        }
        Err(HarnessError::Config(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!(
                "{}",
                json!({ "experiment": experiment.name(), "failures": [{ "check": "run", "detail": e.to_string() }] })
            );
            1
        }
    }
}

fn persist(experiment: Experiment, cfg: &ExperimentConfig, dir: &Path, start: Instant) -> Result<Vec<Failure>, HarnessError> {
    let outcome = execute(experiment, cfg)?;
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Output {
        path: dir.display().to_string(),
        source,
    })?;
    let mut entries = Vec::new();
    for (name, contents) in &outcome.files {
        write_file(dir, name, contents)?;
        entries.push(FileEntry::new(name, contents));
    }
    let mut summary = outcome.summary.clone();
    summary.insert("experiment".into(), json!(experiment.name()));
    summary.insert("passed".into(), json!(outcome.failures.is_empty()));
    summary.insert("failures".into(), serde_json::to_value(&outcome.failures).unwrap_or(Value::Null));
    let name = format!("{}_summary.json", experiment.stem());
    let text = serde_json::to_vec_pretty(&Value::Object(summary)).map_err(run_err)?;
    write_file(dir, &name, &text)?;
    entries.push(FileEntry::new(&name, &text));
    let manifest = RunManifest {
        experiment: experiment.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: toml::to_string(cfg).map_err(run_err)?,
        master_seed: cfg.run.as_ref().map(|r| r.seed).or(cfg.noise_test.as_ref().map(|n| n.seed)),
        seed_rule: SEED_RULE.to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        files: entries,
    };
    write_file(dir, "manifest.json", &serde_json::to_vec_pretty(&manifest).map_err(run_err)?)?;
    Ok(outcome.failures)
}

fn section<'a, T>(s: &'a Option<T>, key: &str) -> Result<&'a T, HarnessError> {
    s.as_ref().ok_or_else(|| ConfigError::Missing(key.to_string()).into())
}

fn ensemble(cfg: &ExperimentConfig, u0: Field, snapshots: &[f64]) -> Result<Ensemble, HarnessError> {
    let run = cfg.run()?;
    let spec = EnsembleSpec {
        params: cfg.model_params()?,
        u0,
        horizon: run.horizon,
        dt: run.dt,
        snapshot_times: snapshots.to_vec(),
        paths: run.paths,
        master_seed: run.seed,
        threads: run.threads,
    };
    Ensemble::run(&spec).map_err(run_err)
}

/// Snapshots from `[run]` plus any extra times needed by the experiment.
fn snapshot_union(cfg: &ExperimentConfig, extra: &[f64]) -> Result<Vec<f64>, HarnessError> {
    let run = cfg.run()?;
    let mut t: Vec<f64> = run.snapshots.iter().chain(extra).copied().collect();
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() <= 0.5 * run.dt);
    if t.iter().any(|&s| s > run.horizon + 1e-12 || s < 0.0) {
        return Err(ConfigError::Invalid {
            key: "run.horizon".into(),
            reason: "experiment times must lie in [0, horizon]".into(),
        }
        .into());
    }
    Ok(t)
}

fn censoring(out: &mut Outcome, ens: &Ensemble) {
    let (c, n) = (ens.censored_count(), ens.paths.len());
    out.put("paths", n);
    out.put("censored", c);
    out.check("censoring", c * 100 <= n, || format!("{c} of {n} paths censored (limit 1%)"));
}

fn kernel_test(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let kt = cfg.kernel_test.clone().unwrap_or_default();
    let kp = cfg.kernel_params()?;
    let q = QuadratureSpec::new(kt.mode_count, kt.frequency_cutoff).map_err(run_err)?;
    let d = cfg.model.dim;
    let point = |x: f64| if d == 1 { vec![x] } else { vec![x, 0.0] };
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut closed = true;
    for &t in &kt.times {
        for &x in &kt.points {
            let s = kernel_spectral(t, &point(x), &kp, &q).map_err(run_err)?;
            match kernel_closed_form(t, &point(x), &kp) {
                Ok(c) => {
                    let rel = (s - c).abs() / c.abs();
                    worst = worst.max(rel);
                    rows.push((t, x, s, c, rel));
                }
                Err(KernelError::NoClosedForm { .. }) => {
                    closed = false;
                    rows.push((t, x, s, f64::NAN, f64::NAN));
                }
                Err(e) => return Err(run_err(e)),
            }
        }
    }
    out.file("kernel_test.csv", |w| {
        use std::io::Write;
        writeln!(w, "t,x,spectral,closed_form,rel_err")?;
        for (t, x, s, c, r) in &rows {
            writeln!(w, "{t:.16e},{x:.16e},{s:.16e},{c:.16e},{r:.16e}")?;
        }
        Ok(())
    });
    // p_t(x) = a^d p_{a^alpha t}(a x)
    let alpha = kp.alpha();
    let mut scaling = Vec::new();
    let mut worst_scaling: f64 = 0.0;
    for a in [0.5f64, 2.0] {
        for &t in &kt.times {
            for &x in &kt.points {
                let lhs = kernel_spectral(t, &point(x), &kp, &q).map_err(run_err)?;
                let rhs = a.powi(d as i32) * kernel_spectral(a.powf(alpha) * t, &point(a * x), &kp, &q).map_err(run_err)?;
                let res = (lhs - rhs).abs();
                worst_scaling = worst_scaling.max(res);
                scaling.push((a, t, x, lhs, rhs, res));
            }
        }
    }
    out.file("kernel_scaling.csv", |w| {
        use std::io::Write;
        writeln!(w, "a,t,x,lhs,rhs,residual")?;
        for (a, t, x, l, r, e) in &scaling {
            writeln!(w, "{a:.16e},{t:.16e},{x:.16e},{l:.16e},{r:.16e},{e:.16e}")?;
        }
        Ok(())
    });
    out.put("max_rel_err", if closed { Some(worst) } else { None });
    out.put("max_scaling_residual", worst_scaling);
    if closed {
        out.check("closed_form", worst < 1e-6, || format!("max relative error {worst:e} >= 1e-6"));
    }
    out.check("scaling", worst_scaling < 1e-8, || format!("max scaling residual {worst_scaling:e} >= 1e-8"));
    Ok(())
}

fn noise_test(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let nt = section(&cfg.noise_test, "noise_test")?;
    let params = cfg.model_params()?;
    let spec = params.noise.with_smoothing(None).map_err(run_err)?;
    let grid = *spec.grid();
    if let Some(&l) = nt.lags.iter().find(|&&l| l >= grid.points_per_axis()) {
        return Err(ConfigError::Invalid {
            key: "noise_test.lags".into(),
            reason: format!("lag {l} exceeds the grid"),
        }
        .into());
    }
    let sampler = NoiseSampler::new(&spec, nt.dt).map_err(run_err)?;
    let shifts: Vec<usize> = nt.lags.iter().map(|&h| grid.site_at([h as i64, 0])).collect();
    let rows = run_parallel(nt.samples, nt.threads, |i| {
        let mut rng = derive_stream(nt.seed, i);
        let dw = sampler.sample(&mut rng);
        let n = dw.len() as f64;
        shifts
            .iter()
            .map(|&s| (0..dw.len()).map(|x| dw[x] * dw[grid.shift(x, s)]).sum::<f64>() / n)
            .collect::<Vec<f64>>()
    });
    let f_lat = covariance_from_weights(&grid, &riesz_spectral_weights(&spec));
    let mut table = Vec::new();
    let mut worst_z: f64 = 0.0;
    for (j, &lag) in nt.lags.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let (m, se) = mean_se(&col);
        let target = nt.dt * f_lat[shifts[j]];
        let z = (m - target) / se;
        worst_z = worst_z.max(z.abs());
        table.push((lag, lag as f64 * grid.spacing(), m, target, se, z));
    }
    out.file("noise_test.csv", |w| {
        use std::io::Write;
        writeln!(w, "lag,distance,empirical,target,std_error,z")?;
        for (l, d, m, t, s, z) in &table {
            writeln!(w, "{l},{d:.16e},{m:.16e},{t:.16e},{s:.16e},{z:.16e}")?;
        }
        Ok(())
    });
    out.put("samples", nt.samples);
    out.put("max_abs_z", worst_z);
    out.check("covariance", worst_z <= 5.0, || format!("max |z| = {worst_z:.3} > 5"));
    if !nt.smoothing.is_empty() {
        let mut ns = nt.smoothing.clone();
        ns.sort_unstable();
        let mut diffs = Vec::new();
        for &n in &ns {
            let g = covariance_from_weights(&grid, &smoothed_weights(&spec, n));
            for (j, &lag) in nt.lags.iter().enumerate() {
                // smoothed covariances converge to the whole-space correlation
                let fv = riesz(&[lag as f64 * grid.spacing(); 1], spec.beta()).map_err(run_err)?;
                let gv = g[shifts[j]];
                diffs.push((n, lag, gv, fv, (gv - fv).abs()));
            }
        }
        let first: Vec<f64> = diffs.iter().filter(|d| d.1 == nt.lags[0]).map(|d| d.4).collect();
        out.file("noise_smoothing.csv", |w| {
            use std::io::Write;
            writeln!(w, "n,lag,smoothed,riesz,abs_diff")?;
            for (n, l, g, f, e) in &diffs {
                writeln!(w, "{n},{l},{g:.16e},{f:.16e},{e:.16e}")?;
            }
            Ok(())
        });
        let decreasing = first.windows(2).all(|w| w[1] < w[0]);
        out.put("smoothing_abs_diff", &first);
        out.check("smoothing_convergence", decreasing, || {
            format!("|g_n - f| at lag {} not strictly decreasing: {first:?}", nt.lags[0])
        });
    }
    Ok(())
}

fn simulate(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let run = cfg.run()?;
    let snaps = snapshot_union(cfg, &[run.horizon])?;
    let ens = ensemble(cfg, cfg.initial_field()?, &snaps)?;
    let grid = ens.grid;
    let rows: Vec<(usize, &crate::solver::Trajectory)> = ens
        .paths
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.trajectory().map(|t| (i, t)))
        .collect();
    out.file("simulate.csv", |w| {
        use std::io::Write;
        let two_d = grid.dim() == 2;
        writeln!(w, "{}", if two_d { "path,time,site,x,y,value" } else { "path,time,site,x,value" })?;
        for (p, traj) in &rows {
            for f in &traj.fields {
                for (i, v) in f.values.iter().enumerate() {
                    let c = grid.coords(i);
                    if two_d {
                        writeln!(w, "{p},{:.16e},{i},{:.16e},{:.16e},{v:.16e}", f.time, c[0], c[1])?;
                    } else {
                        writeln!(w, "{p},{:.16e},{i},{:.16e},{v:.16e}", f.time, c[0])?;
                    }
                }
            }
        }
        Ok(())
    });
    censoring(out, &ens);
    if ens.completed_count() > 0 {
        let sites: Vec<usize> = (0..grid.len()).collect();
        let pos = estimators::positivity_audit(&ens, &sites, run.horizon, &[1e-6, 1e-3]).map_err(run_err)?;
        out.put("median_infimum", pos.median_infimum);
        out.put("small_value_fractions", pos.fractions);
    }
    Ok(())
}

fn moments(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let mc = section(&cfg.moments, "moments")?;
    let run = cfg.run()?;
    let snaps = snapshot_union(cfg, &[run.horizon])?;
    let ens = ensemble(cfg, cfg.initial_field()?, &snaps)?;
    censoring(out, &ens);
    let sites = mc.sites.sites()?;
    let table = estimators::estimate_moments(&ens, &mc.ks, &snaps, &sites).map_err(run_err)?;
    out.file("moments.csv", |w| table.write_csv(w));
    if mc.lyapunov {
        let fit = estimators::lyapunov_fit(&table, 0).map_err(run_err)?;
        let theory = estimators::theta_theory(cfg.model.alpha, cfg.model.beta);
        out.file("moments_lyapunov.csv", |w| {
            use std::io::Write;
            writeln!(w, "k,gamma,std_error,r_squared,points,pre_asymptotic")?;
            for r in &fit.rates {
                writeln!(
                    w,
                    "{},{:.16e},{:.16e},{:.16e},{},{}",
                    r.k, r.gamma, r.std_error, r.r_squared, r.points, r.pre_asymptotic
                )?;
            }
            Ok(())
        });
        out.put("theta_hat", fit.theta_hat);
        out.put("theta_se", fit.theta_se);
        out.put("theta_theory", theory);
        out.put("fit_window", fit.window);
        if let Some(r) = fit.rate(2) {
            let (g, se) = (r.gamma, r.std_error);
            out.check("positive_growth", g > 3.0 * se, || format!("gamma(2) = {g:e} not above 3 SE = {:e}", 3.0 * se));
        }
        let ordered = fit.intermittency_ordered(2.0);
        out.check("intermittency_order", ordered, || "gamma(k)/k decreases beyond 2 SE".into());
    }
    Ok(())
}

fn tails(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let tc = section(&cfg.tails, "tails")?;
    let snaps = snapshot_union(cfg, &[tc.time])?;
    let u0 = cfg.initial_field()?;
    let u0_bar = u0.max();
    let ens = ensemble(cfg, u0, &snaps)?;
    censoring(out, &ens);
    let positive: Vec<f64> = snaps.iter().copied().filter(|&t| t > 0.0).collect();
    let table = estimators::estimate_moments(&ens, &tc.ks, &positive, &Sites::Pooled).map_err(run_err)?;
    let (alpha, beta, nu) = (cfg.model.alpha, cfg.model.beta, cfg.model.nu);
    let a = estimators::fit_moment_constant(&table, u0_bar, alpha, beta, nu);
    let report = estimators::tail_audit(&ens, tc.time, tc.site, &tc.lambdas, a, u0_bar, alpha, beta, nu).map_err(run_err)?;
    out.file("tails.csv", |w| report.write_csv(w));
    out.put("fitted_a", a);
    out.put("u0_bar", u0_bar);
    out.put("violations", report.violations());
    let v = report.violations();
    out.check("tail_bound", v == 0, || format!("{v} lambda values exceed the fitted bound"));
    Ok(())
}

fn compare(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let cc = cfg.compare.clone().unwrap_or(config::CompareConfig {
        initial: None,
        sigma: None,
        tolerance: 1e-9,
        strict: false,
        ks: vec![],
    });
    let run = cfg.run()?;
    let snaps = snapshot_union(cfg, &[run.horizon])?;
    let pu = cfg.model_params()?;
    let pv = match &cc.sigma {
        Some(s) => cfg.model_with_sigma(s)?,
        None => pu,
    };
    let u0 = cfg.initial_field()?;
    let v0 = match &cc.initial {
        Some(i) => i.field(&cfg.grid_spec()?, &cfg.model)?,
        None => u0.clone(),
    };
    let pair = CoupledEnsemble::run(&pu, &pv, &u0, &v0, run.horizon, run.dt, &snaps, run.paths, run.seed, run.threads)
        .map_err(run_err)?;
    censoring(out, &pair.u);
    out.put("tolerance", cc.tolerance);
    if pu.sigma == pv.sigma {
        let ordered_initial = u0.values.iter().zip(&v0.values).all(|(a, b)| a <= b);
        out.put("initial_ordered", ordered_initial);
        let report = estimators::comparison_audit(&pair, cc.tolerance).map_err(run_err)?;
        out.file("compare.csv", |w| report.write_csv(w));
        out.put("violations", report.violations);
        out.put("strict_paths", report.strict_paths);
        out.put("min_final_gap", report.min_final_gap());
        if ordered_initial {
            let v = report.violations;
            out.check("weak_comparison", v == 0, || format!("{v} site-times with u > v + {:e}", cc.tolerance));
        }
        if cc.strict {
            out.put("strict_exploratory", cfg.model.alpha < 1.0);
            let (s, n) = (report.strict_paths, report.final_gap.len());
            if cfg.model.alpha >= 1.0 {
                out.check("strong_comparison", s == n, || format!("strict gap in {s} of {n} paths"));
            }
        }
    }
    if !cc.ks.is_empty() {
        let times: Vec<f64> = snaps.iter().copied().filter(|&t| t > 0.0).collect();
        let tu = estimators::estimate_moments(&pair.u, &cc.ks, &times, &Sites::Pooled).map_err(run_err)?;
        let tv = estimators::estimate_moments(&pair.v, &cc.ks, &times, &Sites::Pooled).map_err(run_err)?;
        let rows = estimators::moment_comparison(&tu, &tv).map_err(run_err)?;
        out.file("compare_moments.csv", |w| {
            use std::io::Write;
            writeln!(w, "k,time,upper,lower,std_error,holds")?;
            for r in &rows {
                writeln!(w, "{},{:.16e},{:.16e},{:.16e},{:.16e},{}", r.k, r.time, r.upper, r.lower, r.std_error, r.holds)?;
            }
            Ok(())
        });
        let bad = rows.iter().filter(|r| !r.holds).count();
        out.put("moment_order_failures", bad);
        out.check("moment_comparison", bad == 0, || format!("{bad} entries with E u^k < E v^k - 2 SE"));
    }
    Ok(())
}

fn sup_growth(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let sc = section(&cfg.sup_growth, "sup_growth")?;
    let snaps = snapshot_union(cfg, &[sc.time])?;
    let ens = ensemble(cfg, cfg.initial_field()?, &snaps)?;
    censoring(out, &ens);
    let report = estimators::sup_growth(&ens, sc.time, &sc.radii, cfg.model.alpha, cfg.model.beta).map_err(run_err)?;
    out.file("sup_growth.csv", |w| report.write_csv(w));
    out.put("slope", report.fit.slope);
    out.put("r_squared", report.fit.r_squared);
    let (s, r2) = (report.fit.slope, report.fit.r_squared);
    out.check("positive_slope", s > 0.0, || format!("slope {s:e} is not positive"));
    out.check("goodness_of_fit", r2 >= 0.9, || format!("R^2 = {r2:.4} < 0.9"));
    out.check("nested", report.nested(), || "suprema not nondecreasing in the radius".into());
    Ok(())
}

fn holder(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let hc = section(&cfg.holder, "holder")?;
    let mut extra = vec![hc.time_base];
    extra.extend(hc.time_lags.iter().map(|l| hc.time_base + l));
    let snaps = snapshot_union(cfg, &extra)?;
    let ens = ensemble(cfg, cfg.initial_field()?, &snaps)?;
    censoring(out, &ens);
    let spec = HolderSpec {
        space_lags: hc.space_lags.clone(),
        time_base: hc.time_base,
        time_lags: hc.time_lags.clone(),
    };
    let report = estimators::holder_exponents(&ens, &spec, cfg.model.alpha, cfg.model.beta).map_err(run_err)?;
    out.file("holder.csv", |w| report.write_csv(w));
    out.put("spatial", &report.spatial);
    out.put("temporal", &report.temporal);
    for (name, e) in [("spatial_exponent", &report.spatial), ("temporal_exponent", &report.temporal)] {
        let gap = (e.estimate - e.theory).abs();
        out.check(name, gap <= hc.tolerance, || {
            format!("estimate {:.4} vs theory {:.4}, tolerance {}", e.estimate, e.theory, hc.tolerance)
        });
    }
    Ok(())
}

fn trichotomy(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let tc = section(&cfg.trichotomy, "trichotomy")?;
    let run = cfg.run()?;
    let snaps = snapshot_union(cfg, &[run.horizon])?;
    let grid = cfg.grid_spec()?;
    let mut rows = Vec::new();
    let mut censored = 0;
    let mut total = 0;
    for &d in &tc.decays {
        let u0 = estimators::trichotomy_profile(config::decay_of(d), cfg.model.beta, cfg.model.alpha, &grid).map_err(|e| {
            ConfigError::Invalid {
                key: "trichotomy.decays".into(),
                reason: e.to_string(),
            }
        })?;
        let ens = ensemble(cfg, u0, &snaps)?;
        censored += ens.censored_count();
        total += ens.paths.len();
        for (ti, &t) in ens.times.iter().enumerate() {
            let mut sups: Vec<f64> = ens
                .slices(ti)
                .iter()
                .map(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            if sups.is_empty() {
                continue;
            }
            let mean = sups.iter().sum::<f64>() / sups.len() as f64;
            sups.sort_by(f64::total_cmp);
            let m = sups.len();
            let median = if m % 2 == 1 { sups[m / 2] } else { 0.5 * (sups[m / 2 - 1] + sups[m / 2]) };
            rows.push((d, t, median, mean));
        }
    }
    out.file("trichotomy.csv", |w| {
        use std::io::Write;
        writeln!(w, "decay,time,median_sup,mean_sup")?;
        for (d, t, m, a) in &rows {
            writeln!(w, "{d:.16e},{t:.16e},{m:.16e},{a:.16e}")?;
        }
        Ok(())
    });
    out.put("paths", total);
    out.put("censored", censored);
    out.check("censoring", censored * 100 <= total, || format!("{censored} of {total} paths censored (limit 1%)"));
    Ok(())
}

/// Smallest separation at which localized iterates are independent.
pub fn independence_separation(n: usize, t: f64, alpha: f64) -> f64 {
    2.0 * (n as f64).powf(1.0 + 1.0 / alpha) * t.powf(1.0 / alpha)
}

fn picard_approx(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let pc = section(&cfg.picard, "picard")?;
    let run = cfg.run()?;
    let u0 = cfg.initial_field()?;
    let base = cfg.model_params()?;
    let at = |n: usize| -> Result<LocalizedPicard, HarnessError> {
        let noise = base.noise.with_smoothing(Some(n)).map_err(run_err)?;
        let params = crate::solver::ModelParams { noise, ..base };
        LocalizedPicard::new(&params, n, pc.time, run.dt).map_err(run_err)
    };
    let mut ns = pc.ns.clone();
    ns.sort_unstable();
    let mut rows = Vec::new();
    for &n in &ns {
        let plan = at(n)?;
        let devs = run_parallel(run.paths, run.threads, |i| {
            let mut rng = derive_stream(run.seed, i);
            plan.coupled(&u0, n, &mut rng).map(|(u, p)| {
                u.values
                    .iter()
                    .zip(&p.values)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
        });
        let finite: Vec<f64> = devs.into_iter().filter_map(Result::ok).filter(|v| v.is_finite()).collect();
        let (m, se) = mean_se(&finite);
        rows.push((n, m, se, finite.len()));
    }
    out.file("picard_approx.csv", |w| {
        use std::io::Write;
        writeln!(w, "n,mean_max_deviation,std_error,paths")?;
        for (n, m, s, p) in &rows {
            writeln!(w, "{n},{m:.16e},{s:.16e},{p}")?;
        }
        Ok(())
    });
    out.put("deviation", rows.iter().map(|r| json!({ "n": r.0, "mean": r.1, "se": r.2 })).collect::<Vec<_>>());
    let decreasing = rows.windows(2).all(|w| w[1].1 <= w[0].1 + 2.0 * w[0].2.hypot(w[1].2));
    out.check("picard_convergence", decreasing, || "deviation grows with n beyond 2 SE".into());
    if let Some(n) = pc.independence_n {
        let alpha = cfg.model.alpha;
        let need = independence_separation(n, pc.time, alpha);
        let sep = pc.separation.unwrap_or(need);
        if sep < need {
            return Err(ConfigError::Invalid {
                key: "picard.separation".into(),
                reason: format!("{sep} is below the independence threshold {need}"),
            }
            .into());
        }
        let grid = cfg.grid_spec()?;
        let far = grid.site_along_axis(sep);
        let plan = at(n)?;
        let pairs = run_parallel(run.paths, run.threads, |i| {
            let mut rng = derive_stream(run.seed, i);
            plan.run(&u0, n, &mut rng).map(|f| (f.values[0], f.values[far]))
        });
        let pairs: Vec<(f64, f64)> = pairs.into_iter().filter_map(Result::ok).collect();
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let rho = correlation(&a, &b);
        let limit = 5.0 / (a.len() as f64).sqrt();
        out.file("picard_independence.csv", |w| {
            use std::io::Write;
            writeln!(w, "n,separation,paths,correlation,limit")?;
            writeln!(w, "{n},{sep:.16e},{},{rho:.16e},{limit:.16e}", a.len())
        });
        out.put("independence_correlation", rho);
        out.put("independence_separation", sep);
        out.check("independence", rho.abs() < limit, || format!("|corr| = {:.4} >= {limit:.4}", rho.abs()));
    }
    Ok(())
}
