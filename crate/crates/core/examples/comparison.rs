//! Coupled paths from ordered initial data stay ordered.

use fracshe::ensemble::CoupledEnsemble;
use fracshe::estimators::comparison_audit;
use fracshe::grid::{Field, GridSpec};
use fracshe::kernels::KernelParams;
use fracshe::noise::NoiseSpec;
use fracshe::solver::{ModelParams, SigmaSpec};

fn main() {
    let g = GridSpec::new(1, 20.0, 64).unwrap();
    let p = ModelParams::new(
        KernelParams::new(2.0, 1.0, 1).unwrap(),
        NoiseSpec::new(0.5, g, None).unwrap(),
        SigmaSpec::linear(1.0),
    )
    .unwrap();
    let u0 = Field::constant(g, 1.0);
    let v0 = Field::from_fn(g, |x| 1.0 + 0.5 * (-x[0] * x[0] / 2.0).exp());
    let pair = CoupledEnsemble::run(&p, &p, &u0, &v0, 1.0, 0.01, &[0.5, 1.0], 100, 7, 0).unwrap();
    let r = comparison_audit(&pair, 1e-9).unwrap();
    println!("violations: {}", r.violations);
    println!("strictly separated paths: {}/{}", r.strict_paths, r.final_gap.len());
    println!("smallest final gap: {:.3e}", r.min_final_gap());
}
