//! Empirical upper tails against the analytic bound, with the moment
//! constant fitted from the same ensemble.

use fracshe::ensemble::{Ensemble, EnsembleSpec};
use fracshe::estimators::{estimate_moments, fit_moment_constant, tail_audit, Sites};
use fracshe::grid::{Field, GridSpec};
use fracshe::kernels::KernelParams;
use fracshe::noise::NoiseSpec;
use fracshe::solver::{ModelParams, SigmaSpec};

fn main() {
    let g = GridSpec::new(1, 20.0, 64).unwrap();
    let times = [0.25, 0.5, 0.75, 1.0];
    let ens = Ensemble::run(&EnsembleSpec {
        params: ModelParams::new(
            KernelParams::new(2.0, 1.0, 1).unwrap(),
            NoiseSpec::new(0.5, g, None).unwrap(),
            SigmaSpec::linear(1.0),
        )
        .unwrap(),
        u0: Field::constant(g, 1.0),
        horizon: 1.0,
        dt: 0.01,
        snapshot_times: times.to_vec(),
        paths: 2000,
        master_seed: 10,
        threads: 0,
    })
    .unwrap();
    let table = estimate_moments(&ens, &[1, 2, 3, 4], &times, &Sites::Pooled).unwrap();
    let a = fit_moment_constant(&table, 1.0, 2.0, 0.5, 1.0);
    println!("fitted A = {a:.3}");
    let lambdas = [1.5, 2.0, 3.0, 4.0, 6.0, 10.0];
    let report = tail_audit(&ens, 1.0, 0, &lambdas, a, 1.0, 2.0, 0.5, 1.0).unwrap();
    for row in &report.rows {
        println!("{row:?}");
    }
    println!("violations: {}", report.violations());
}
