//! Spectral transition density against the Gaussian and Cauchy closed forms.

use fracshe::kernels::{kernel_closed_form, kernel_spectral, KernelParams, QuadratureSpec};

fn main() {
    let q = QuadratureSpec::default();
    for alpha in [1.0, 2.0] {
        let kp = KernelParams::new(alpha, 1.0, 1).unwrap();
        println!("alpha = {alpha}");
        println!("{:>6} {:>22} {:>22} {:>10}", "x", "spectral", "closed form", "rel err");
        for i in 0..=8 {
            let x = [0.5 * i as f64];
            let s = kernel_spectral(1.0, &x, &kp, &q).unwrap();
            let c = kernel_closed_form(1.0, &x, &kp).unwrap();
            println!("{:>6.2} {s:>22.15e} {c:>22.15e} {:>10.2e}", x[0], (s - c).abs() / c);
        }
    }

    // No closed form at alpha = 0.7, but the scaling identity still pins it down.
    let kp = KernelParams::new(0.7, 1.0, 1).unwrap();
    let (t, x, a) = (0.5, 1.3, 2.0f64);
    let lhs = kernel_spectral(t, &[x], &kp, &q).unwrap();
    let rhs = a * kernel_spectral(a.powf(0.7) * t, &[a * x], &kp, &q).unwrap();
    println!("alpha = 0.7 scaling residual: {:.2e}", (lhs - rhs).abs());
}
