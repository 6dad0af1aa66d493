//! Spatial and temporal Hölder exponents from increment second moments.

use fracshe::ensemble::{Ensemble, EnsembleSpec};
use fracshe::estimators::{holder_exponents, HolderSpec};
use fracshe::grid::{Field, GridSpec};
use fracshe::kernels::KernelParams;
use fracshe::noise::NoiseSpec;
use fracshe::solver::{ModelParams, SigmaSpec};

fn main() {
    let (alpha, beta) = (2.0, 0.5);
    let g = GridSpec::new(1, 16.0, 512).unwrap();
    let lags = [0.002, 0.004, 0.008, 0.016];
    let mut snaps = vec![0.5];
    snaps.extend(lags.iter().map(|l| 0.5 + l));
    let ens = Ensemble::run(&EnsembleSpec {
        params: ModelParams::new(
            KernelParams::new(alpha, 1.0, 1).unwrap(),
            NoiseSpec::new(beta, g, None).unwrap(),
            SigmaSpec::linear(1.0),
        )
        .unwrap(),
        u0: Field::constant(g, 1.0),
        horizon: 0.516,
        dt: 0.0002,
        snapshot_times: snaps,
        paths: 60,
        master_seed: 11,
        threads: 0,
    })
    .unwrap();
    let spec = HolderSpec {
        space_lags: vec![1, 2, 4, 8],
        time_base: 0.5,
        time_lags: lags.to_vec(),
    };
    let r = holder_exponents(&ens, &spec, alpha, beta).unwrap();
    println!("space: {:.3} (theory {:.3})", r.spatial.estimate, (alpha - beta) / 2.0);
    println!("time:  {:.3} (theory {:.3})", r.temporal.estimate, (alpha - beta) / (2.0 * alpha));
}
