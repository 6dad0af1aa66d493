//! Growth of the spatial supremum with the window radius.

use fracshe::ensemble::{Ensemble, EnsembleSpec};
use fracshe::estimators::sup_growth;
use fracshe::grid::{Field, GridSpec};
use fracshe::kernels::KernelParams;
use fracshe::noise::NoiseSpec;
use fracshe::solver::{ModelParams, SigmaSpec};

fn main() {
    let g = GridSpec::new(1, 128.0, 512).unwrap();
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
        snapshot_times: vec![1.0],
        paths: 50,
        master_seed: 13,
        threads: 0,
    })
    .unwrap();
    let r = sup_growth(&ens, 1.0, &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0], 2.0, 0.5).unwrap();
    println!("{:>6} {:>12} {:>16}", "R", "(log R)^e", "median log sup");
    for ((radius, x), y) in r.radii.iter().zip(&r.abscissa).zip(&r.median_log_sup) {
        println!("{radius:>6} {x:>12.4} {y:>16.4}");
    }
    println!("slope {:.3}, R^2 {:.3}, nested {}", r.fit.slope, r.fit.r_squared, r.nested());
}
