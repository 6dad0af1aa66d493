//! Initial data with polynomial, slow and compact decay, and the median
//! supremum of the solution they produce.

use fracshe::ensemble::{Ensemble, EnsembleSpec};
use fracshe::estimators::{trichotomy_profile, Decay};
use fracshe::grid::GridSpec;
use fracshe::kernels::KernelParams;
use fracshe::noise::NoiseSpec;
use fracshe::solver::{ModelParams, SigmaSpec};

fn main() {
    let (alpha, beta) = (2.0, 0.5);
    let g = GridSpec::new(1, 40.0, 256).unwrap();
    let params = ModelParams::new(
        KernelParams::new(alpha, 1.0, 1).unwrap(),
        NoiseSpec::new(beta, g, None).unwrap(),
        SigmaSpec::linear(1.0),
    )
    .unwrap();
    let times = [0.5, 1.0, 1.5, 2.0];
    for decay in [Decay::Finite(0.0), Decay::Finite(1.0), Decay::Infinite] {
        let u0 = trichotomy_profile(decay, beta, alpha, &g).unwrap();
        let ens = Ensemble::run(&EnsembleSpec {
            params,
            u0,
            horizon: 2.0,
            dt: 0.005,
            snapshot_times: times.to_vec(),
            paths: 40,
            master_seed: 21,
            threads: 0,
        })
        .unwrap();
        let medians: Vec<String> = (1..ens.times.len())
            .map(|ti| {
                let mut sups: Vec<f64> = ens.slices(ti).iter().map(|s| s.iter().copied().fold(0.0, f64::max)).collect();
                sups.sort_by(f64::total_cmp);
                format!("{:.3}", sups[sups.len() / 2])
            })
            .collect();
        println!("{decay:?}: median sup at t = {times:?}: [{}]", medians.join(", "));
    }
}
