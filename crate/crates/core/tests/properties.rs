use proptest::prelude::*;

use fracshe::estimators::{profile, upper_tail_bound, Decay};
use fracshe::grid::{Field, GridSpec};
use fracshe::kernels::{kernel_spectral, KernelParams, QuadratureSpec};
use fracshe::noise::{covariance_from_weights, q_n, riesz_spectral_weights, NoiseSpec};
use fracshe::rng::derive_stream;
use fracshe::solver::{semigroup_apply, step, ModelParams, SigmaFamily, SigmaSpec, Symbol};

fn family() -> impl Strategy<Value = SigmaFamily> {
    prop_oneof![
        Just(SigmaFamily::Linear),
        Just(SigmaFamily::ClippedLinear),
        Just(SigmaFamily::BoundedSmooth),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_scaling(alpha in 0.6f64..2.0, a in 0.3f64..3.0, t in 0.05f64..2.0, x in 0.0f64..3.0) {
        let kp = KernelParams::new(alpha, 1.0, 1).unwrap();
        let q = QuadratureSpec::default();
        let lhs = kernel_spectral(t, &[x], &kp, &q).unwrap();
        let rhs = a * kernel_spectral(a.powf(alpha) * t, &[a * x], &kp, &q).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn kernel_is_a_density_shape(alpha in 0.6f64..2.0, t in 0.05f64..2.0, x in 0.0f64..4.0) {
        let kp = KernelParams::new(alpha, 1.0, 1).unwrap();
        let q = QuadratureSpec::default();
        let near = kernel_spectral(t, &[x], &kp, &q).unwrap();
        let far = kernel_spectral(t, &[x + 0.5], &kp, &q).unwrap();
        prop_assert!(near >= 0.0 && far <= near + 1e-12);
    }

    #[test]
    fn weights_are_even_and_positive(beta in 0.05f64..0.95, n in 5usize..8, dim in 1usize..3) {
        let points = 1usize << n;
        let g = GridSpec::new(dim, 10.0, points).unwrap();
        let spec = NoiseSpec::new(beta, g, None).unwrap();
        let w = riesz_spectral_weights(&spec);
        for i in 0..g.len() {
            prop_assert!(w[i] > 0.0);
            prop_assert!((w[i] - w[g.negate(i)]).abs() <= 1e-12 * w[i]);
        }
        let f = covariance_from_weights(&g, &w);
        for i in 0..g.len() {
            prop_assert!((f[i] - f[g.negate(i)]).abs() <= 1e-9 * f[0].abs());
            prop_assert!(f[i] <= f[0] + 1e-9 * f[0].abs());
        }
    }

    #[test]
    fn window_in_unit_interval(x in -20.0f64..20.0, y in -20.0f64..20.0, n in 1usize..16) {
        let one = q_n(&[x], n);
        let two = q_n(&[x, y], n);
        prop_assert!((0.0..=1.0).contains(&one) && (0.0..=1.0).contains(&two));
        prop_assert!(two <= one + 1e-15);
        prop_assert_eq!(q_n(&[0.0], n), 1.0);
        prop_assert_eq!(one, q_n(&[-x], n));
    }

    #[test]
    fn sigma_within_lipschitz_cone(f in family(), scale in 0.0f64..3.0, x in -50.0f64..50.0) {
        let s = SigmaSpec::new(f, scale);
        prop_assert!(s.validate().is_ok());
        prop_assert!(s.eval(x).abs() <= scale * x.abs() * (1.0 + 1e-12));
        prop_assert_eq!(s.eval(0.0), 0.0);
    }

    #[test]
    fn linear_sigma_meets_lower_bound(scale in 0.01f64..3.0, frac in 0.0f64..1.0, x in 0.0f64..50.0) {
        let s = SigmaSpec::linear(scale).with_lower(frac * scale);
        prop_assert!(s.validate().is_ok());
        prop_assert!(s.eval(x) >= frac * scale * x * (1.0 - 1e-12));
    }

    #[test]
    fn profiles_decrease_radially(l in 0.0f64..5.0, beta in 0.05f64..1.0, r in 0.0f64..50.0, dr in 0.0f64..10.0) {
        for d in [Decay::Finite(l), Decay::Infinite] {
            let (a, b) = (profile(d, beta, r), profile(d, beta, r + dr));
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn tail_bound_decreases_in_lambda(
        l1 in 1.01f64..50.0, dl in 0.0f64..50.0, t in 0.01f64..5.0, a in 0.2f64..3.0, beta in 0.1f64..0.9,
    ) {
        let b1 = upper_tail_bound(l1 * a, t, a, 1.0, 2.0, beta, 1.0).unwrap();
        let b2 = upper_tail_bound((l1 + dl) * a, t, a, 1.0, 2.0, beta, 1.0).unwrap();
        prop_assert!(b1 > 0.0 && b1 <= 1.0);
        prop_assert!(b2 <= b1);
    }

    #[test]
    fn lattice_semigroup_is_positive_and_conservative(alpha in 0.5f64..2.0, t in 0.01f64..2.0, seed in 0u64..1000) {
        let g = GridSpec::new(1, 20.0, 64).unwrap();
        let kp = KernelParams::new(alpha, 1.0, 1).unwrap();
        let u = Field::from_fn(g, |x| ((x[0] * (seed as f64 + 1.0)).sin().abs() + 0.0).powi(3));
        let v = semigroup_apply(&u, t, &kp, Symbol::Lattice);
        prop_assert!(v.min() >= -1e-12);
        prop_assert!((v.mean() - u.mean()).abs() < 1e-12);
    }

    #[test]
    fn zero_sigma_step_is_deterministic(seed in 0u64..1000) {
        let g = GridSpec::new(1, 20.0, 64).unwrap();
        let p = ModelParams::new(
            KernelParams::new(2.0, 1.0, 1).unwrap(),
            NoiseSpec::new(0.5, g, None).unwrap(),
            SigmaSpec::linear(0.0),
        )
        .unwrap()
        .with_symbol(Symbol::Lattice);
        let u = Field::from_fn(g, |x| 1.0 + (-x[0] * x[0]).exp());
        let a = step(&u, 0.01, &p, &mut derive_stream(seed, 0)).unwrap();
        let b = semigroup_apply(&u, 0.01, &p.kernel, Symbol::Lattice);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-13);
        }
    }
}
