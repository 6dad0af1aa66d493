//! One path of the parabolic Anderson model driven by colored noise,
//! written as CSV to stdout.

use std::io::{stdout, BufWriter};

use fracshe::grid::{Field, GridSpec};
use fracshe::kernels::KernelParams;
use fracshe::noise::NoiseSpec;
use fracshe::rng::derive_stream;
use fracshe::solver::{simulate_path, ModelParams, SigmaSpec};

fn main() {
    let g = GridSpec::new(1, 20.0, 64).unwrap();
    let params = ModelParams::new(
        KernelParams::new(1.5, 1.0, 1).unwrap(),
        NoiseSpec::new(0.5, g, None).unwrap(),
        SigmaSpec::linear(1.0),
    )
    .unwrap();
    let (dt, _) = params.max_step();
    let dt = (0.5 * dt).min(0.01);
    let horizon = 200.0 * dt;
    let u0 = Field::from_fn(g, |x| 1.0 + (-x[0] * x[0]).exp());
    let path = simulate_path(&params, &u0, horizon, dt, &[0.5 * horizon, horizon], &mut derive_stream(42, 0)).unwrap();
    let last = path.final_field();
    eprintln!("t = {:.3}: min {:.4}, max {:.4}", last.time, last.min(), last.max());
    path.write_csv(&mut BufWriter::new(stdout())).unwrap();
}
