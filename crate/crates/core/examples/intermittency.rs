//! Moment Lyapunov exponents from a moderate ensemble.

use fracshe::ensemble::{Ensemble, EnsembleSpec};
use fracshe::estimators::{estimate_moments, lyapunov_fit, theta_theory, Sites};
use fracshe::grid::{Field, GridSpec};
use fracshe::kernels::KernelParams;
use fracshe::noise::NoiseSpec;
use fracshe::solver::{ModelParams, SigmaSpec};

fn main() {
    let g = GridSpec::new(1, 80.0, 256).unwrap();
    let times: Vec<f64> = (1..=12).map(|i| 0.25 * i as f64).collect();
    let ens = Ensemble::run(&EnsembleSpec {
        params: ModelParams::new(
            KernelParams::new(2.0, 1.0, 1).unwrap(),
            NoiseSpec::new(0.5, g, None).unwrap(),
            SigmaSpec::linear(0.5),
        )
        .unwrap(),
        u0: Field::constant(g, 1.0),
        horizon: 3.0,
        dt: 0.01,
        snapshot_times: times.clone(),
        paths: 400,
        master_seed: 9,
        threads: 0,
    })
    .unwrap();
    let table = estimate_moments(&ens, &[2, 3, 4], &times, &Sites::Pooled).unwrap();
    let fit = lyapunov_fit(&table, 0).unwrap();
    for r in &fit.rates {
        println!("k = {}: gamma = {:.4} +- {:.4}, gamma/k = {:.4}", r.k, r.gamma, r.std_error, r.gamma / r.k as f64);
    }
    println!("gamma(k)/k increasing: {}", fit.intermittency_ordered(2.0));
    if let Some(theta) = fit.theta_hat {
        println!("theta: fitted {theta:.3}, predicted {:.3}", theta_theory(2.0, 0.5));
    }
}
