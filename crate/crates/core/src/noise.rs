//! Gaussian noise increments on the torus with Riesz covariance
//! `dt |x - y|^{-beta}`, and the smoothed family built from
//! `h = |x|^{-(d+beta)/2}` and the tent window `Q_n`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Field, GridSpec, LatticeFft};
use crate::kernels::riesz_fourier_constant;
use crate::quadrature::{self, Grading};
use crate::rng::RngStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("beta must satisfy 0 < beta < {dim}, got {beta}")]
    Beta { beta: f64, dim: usize },
    #[error("smoothing level must be at least 1")]
    Smoothing,
    #[error("time step must be positive, got {0}")]
    Step(f64),
}

/// Riesz noise on a grid, optionally smoothed at level `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    beta: f64,
    grid: GridSpec,
    smoothing_n: Option<usize>,
}

impl NoiseSpec {
    pub fn new(beta: f64, grid: GridSpec, smoothing_n: Option<usize>) -> Result<Self, NoiseError> {
        let dim = grid.dim();
        if !(beta > 0.0 && beta < dim as f64) {
            return Err(NoiseError::Beta { beta, dim });
        }
        if smoothing_n == Some(0) {
            return Err(NoiseError::Smoothing);
        }
        Ok(Self {
            beta,
            grid,
            smoothing_n,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn smoothing_n(&self) -> Option<usize> {
        self.smoothing_n
    }

    pub fn with_smoothing(self, n: Option<usize>) -> Result<Self, NoiseError> {
        Self::new(self.beta, self.grid, n)
    }

    /// Per-mode spectral weights of this spec: exact or smoothed.
    pub fn weights(&self) -> Vec<f64> {
        match self.smoothing_n {
            None => riesz_spectral_weights(self),
            Some(n) => smoothed_weights(self, n),
        }
    }

    /// Real per-mode amplitudes whose squares are [`NoiseSpec::weights`].
    /// Exact and smoothed amplitudes share a sign convention, so feeding the
    /// same white coefficients through both couples the two noises.
    pub fn amplitudes(&self) -> Vec<f64> {
        match self.smoothing_n {
            None => riesz_spectral_weights(self).into_iter().map(f64::sqrt).collect(),
            Some(n) => h_transform(self, Some(n)),
        }
    }
}

/// `C(d, beta) |xi|^{beta - d}` at every lattice mode. The zero mode takes the
/// value at the smallest nonzero wavenumber `2 pi / L`.
pub fn riesz_spectral_weights(spec: &NoiseSpec) -> Vec<f64> {
    let g = spec.grid;
    let c = riesz_fourier_constant(g.dim(), spec.beta);
    let p = spec.beta - g.dim() as f64;
    let k0 = g.fundamental();
    (0..g.len())
        .map(|i| {
            let k = g.wavenumber(i);
            c * if k == 0.0 { k0 } else { k }.powf(p)
        })
        .collect()
}

/// Tent window `prod_j (1 - |x_j| / n)_+`.
pub fn q_n(x: &[f64], n: usize) -> f64 {
    let n = n as f64;
    x.iter().map(|v| (1.0 - v.abs() / n).max(0.0)).product()
}

/// Exponent `(d + beta)/2` of `h` and the constant `kappa` with
/// `(kappa |.|^{-a}) * (kappa |.|^{-a}) = |.|^{-beta}`.
fn h_profile(dim: usize, beta: f64) -> (f64, f64) {
    let a = (dim as f64 + beta) / 2.0;
    let kappa = riesz_fourier_constant(dim, beta).sqrt() / riesz_fourier_constant(dim, a);
    (a, kappa)
}

/// Average of `|x|^{-a}` over the lattice cell centered at the origin.
fn origin_cell_average(dim: usize, dx: f64, a: f64) -> f64 {
    let half = dx / 2.0;
    if dim == 1 {
        return half.powf(-a) / (1.0 - a);
    }
    // eight triangles of the square; radial integral in closed form
    let wedge = quadrature::integrate(
        |th: f64| (half / th.cos()).powf(2.0 - a) / (2.0 - a),
        0.0,
        PI / 4.0,
        8,
        Grading::None,
    );
    8.0 * wedge / (dx * dx)
}

/// `h(x) Q_n(x)` on the lattice (`n = None` leaves `h` unwindowed), with the
/// origin cell replaced by its cell average.
pub fn h_lattice(spec: &NoiseSpec, n: Option<usize>) -> Vec<f64> {
    let g = spec.grid;
    let (a, kappa) = h_profile(g.dim(), spec.beta);
    let zero = kappa * origin_cell_average(g.dim(), g.spacing(), a);
    (0..g.len())
        .map(|i| {
            if i == 0 {
                return zero;
            }
            let c = g.coords(i);
            let window = n.map_or(1.0, |n| q_n(&c[..g.dim()], n));
            if window == 0.0 {
                0.0
            } else {
                kappa * g.radius(i).powf(-a) * window
            }
        })
        .collect()
}

/// Real part of `dx^d DFT(h Q_n)`; `h` is even, so the imaginary part is rounding.
fn h_transform(spec: &NoiseSpec, n: Option<usize>) -> Vec<f64> {
    let g = spec.grid;
    let fft = LatticeFft::new(g);
    let cell = g.cell_volume();
    fft.forward_real(&h_lattice(spec, n))
        .into_iter()
        .map(|c| c.re * cell)
        .collect()
}

/// `|F[h_n]|^2` per mode: the spectral weights of `g_n = h_n * h_n~`.
pub fn smoothed_weights(spec: &NoiseSpec, n: usize) -> Vec<f64> {
    h_transform(spec, Some(n)).into_iter().map(|v| v * v).collect()
}

/// Lag covariance `L^{-d} sum_k w_k e^{i xi_k r}` at every site `r`.
pub fn covariance_from_weights(grid: &GridSpec, weights: &[f64]) -> Vec<f64> {
    let fft = LatticeFft::new(*grid);
    let spectrum = weights.iter().map(|&w| Complex::new(w, 0.0)).collect();
    let scale = 1.0 / grid.cell_volume();
    fft.inverse_real(spectrum).into_iter().map(|v| v * scale).collect()
}

/// `int_0^t (p_{2s} * f_n)(0) ds` with `f_n = (h - h_n) * (h - h_n)~`,
/// computed mode by mode against the unwindowed lattice `h`.
pub fn residual_time_integral(spec: &NoiseSpec, n: usize, t: f64, alpha: f64, nu: f64) -> f64 {
    let g = spec.grid;
    let full = h_transform(spec, None);
    let windowed = h_transform(spec, Some(n));
    let mut total = 0.0;
    for i in 0..g.len() {
        let diff = full[i] - windowed[i];
        let rate = 2.0 * nu * g.wavenumber(i).powf(alpha);
        let time = if rate == 0.0 {
            t
        } else {
            -(-rate * t).exp_m1() / rate
        };
        total += diff * diff * time;
    }
    total / g.volume()
}

/// Reusable synthesizer of increments with fixed `dt`.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    grid: GridSpec,
    fft: LatticeFft,
    amplitudes: Vec<f64>,
    dt: f64,
}

impl NoiseSampler {
    pub fn new(spec: &NoiseSpec, dt: f64) -> Result<Self, NoiseError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(NoiseError::Step(dt));
        }
        let grid = spec.grid;
        let norm = (dt / grid.volume()).sqrt();
        let amplitudes = spec.amplitudes().into_iter().map(|a| a * norm).collect();
        Ok(Self {
            grid,
            fft: LatticeFft::new(grid),
            amplitudes,
            dt,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Hermitian standard complex normal coefficients, one per mode, with
    /// `E|Z_k|^2 = 1`. Self-conjugate modes are real.
    pub fn draw_white(&self, rng: &mut RngStream) -> Vec<Complex<f64>> {
        let g = self.grid;
        let mut z = vec![Complex::new(0.0, 0.0); g.len()];
        for k in 0..g.len() {
            let m = g.negate(k);
            if m == k {
                z[k] = Complex::new(rng.sample(StandardNormal), 0.0);
            } else if k < m {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let c = Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
                z[k] = c;
                z[m] = c.conj();
            }
        }
        z
    }

    /// Field `sum_k a_k Z_k e^{i xi_k x}` for the sampler's amplitudes.
    pub fn synthesize(&self, white: &[Complex<f64>]) -> Vec<f64> {
        self.synthesize_with(&self.amplitudes, white)
    }

    /// Same white coefficients through other amplitudes (already scaled by
    /// `sqrt(dt / L^d)`), for coupling two noises.
    pub fn synthesize_with(&self, amplitudes: &[f64], white: &[Complex<f64>]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = white.iter().zip(amplitudes).map(|(z, &a)| z * a).collect();
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let white = self.draw_white(rng);
        self.synthesize(&white)
    }
}

/// One increment with covariance `dt f_per(x - y)`.
pub fn sample_increment(spec: &NoiseSpec, dt: f64, rng: &mut RngStream) -> Result<Field, NoiseError> {
    let sampler = NoiseSampler::new(spec, dt)?;
    let values = sampler.sample(rng);
    Ok(Field {
        grid: spec.grid,
        values,
        time: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec1(beta: f64, n: usize, l: f64) -> NoiseSpec {
        NoiseSpec::new(beta, GridSpec::new(1, l, n).unwrap(), None).unwrap()
    }

    /// Periodized `|r|^{-beta}` by direct image sum, with each image's cell
    /// mean removed and the mean restored from the zero-mode weight.
    fn periodized_riesz(r: f64, l: f64, beta: f64, w0: f64) -> f64 {
        let cell_mean = |m: i64| {
            let (lo, hi) = (m as f64 * l - l / 2.0, m as f64 * l + l / 2.0);
            let prim = |s: f64| s.signum() * s.abs().powf(1.0 - beta) / (1.0 - beta);
            (prim(hi) - prim(lo)) / l
        };
        let mut total = w0 / l;
        for m in -20000i64..=20000 {
            total += (r + m as f64 * l).abs().powf(-beta) - cell_mean(m);
        }
        total
    }

    #[test]
    fn spec_validation() {
        let g = GridSpec::new(1, 10.0, 32).unwrap();
        assert!(NoiseSpec::new(1.0, g, None).is_err());
        assert!(NoiseSpec::new(0.0, g, None).is_err());
        assert!(NoiseSpec::new(0.5, g, Some(0)).is_err());
        let g2 = GridSpec::new(2, 10.0, 32).unwrap();
        assert!(NoiseSpec::new(1.5, g2, None).is_ok());
    }

    #[test]
    fn q_n_values() {
        assert_eq!(q_n(&[1.0], 2), 0.5);
        assert_eq!(q_n(&[3.0], 2), 0.0);
        assert_eq!(q_n(&[1.0, 1.0], 4), 0.5625);
    }

    #[test]
    fn weights_are_symmetric() {
        let s = spec1(0.5, 64, 20.0);
        let w = riesz_spectral_weights(&s);
        for k in 0..w.len() {
            assert_eq!(w[k], w[s.grid().negate(k)]);
        }
        let g2 = GridSpec::new(2, 20.0, 32).unwrap();
        let s2 = NoiseSpec::new(1.2, g2, Some(3)).unwrap();
        let w2 = s2.weights();
        for k in 0..w2.len() {
            assert!(w2[k] >= 0.0);
            assert!((w2[k] - w2[g2.negate(k)]).abs() <= 1e-12 * w2[k].abs().max(1.0));
        }
    }

    #[test]
    fn smoothed_covariance_approaches_riesz_as_n_grows() {
        let s = spec1(0.5, 1024, 64.0);
        let g = *s.grid();
        let sites: Vec<usize> = [1.0, 2.0, 4.0].iter().map(|&r| g.site_along_axis(r)).collect();
        let err = |n: usize| {
            let c = covariance_from_weights(&g, &smoothed_weights(&s, n));
            sites.iter().map(|&i| (c[i] - g.radius(i).powf(-0.5)).abs()).fold(0.0, f64::max)
        };
        let errs: Vec<f64> = [2, 4, 8, 16, 32].iter().map(|&n| err(n)).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(errs[4] < 0.25 * errs[0], "{errs:?}");
    }

    #[test]
    fn lattice_covariance_matches_periodization() {
        let s = spec1(0.5, 1024, 64.0);
        let w = riesz_spectral_weights(&s);
        let cov = covariance_from_weights(s.grid(), &w);
        for &r in &[4.0, 6.0, 8.0, 12.0, 16.0] {
            let site = s.grid().site_along_axis(r);
            let oracle = periodized_riesz(r, 64.0, 0.5, w[0]);
            assert!((cov[site] / oracle - 1.0).abs() < 0.02, "r={r}: {} vs {oracle}", cov[site]);
        }
    }

    #[test]
    fn h_normalization_reproduces_riesz_constant() {
        // unwindowed h transform approaches sqrt(C) |xi|^{(beta-d)/2} at low modes
        let s = spec1(0.5, 4096, 256.0);
        let hh = h_transform(&s, None);
        let c = riesz_fourier_constant(1, 0.5);
        for k in [4usize, 8, 16] {
            let xi = s.grid().wavenumber(k);
            let target = c.sqrt() * xi.powf(-0.25);
            assert!((hh[k] / target - 1.0).abs() < 0.05, "k={k}: {} vs {target}", hh[k]);
        }
    }

    #[test]
    fn identical_streams_give_identical_increments() {
        let s = spec1(0.5, 64, 16.0);
        let a = sample_increment(&s, 0.01, &mut RngStream::new(1, 2)).unwrap();
        let b = sample_increment(&s, 0.01, &mut RngStream::new(1, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn white_coefficients_are_hermitian() {
        let g = GridSpec::new(2, 8.0, 32).unwrap();
        let s = NoiseSpec::new(1.0, g, None).unwrap();
        let sampler = NoiseSampler::new(&s, 0.1).unwrap();
        let z = sampler.draw_white(&mut RngStream::new(0, 0));
        for k in 0..z.len() {
            assert_eq!(z[k], z[g.negate(k)].conj());
        }
        let field = sampler.synthesize(&z);
        assert!(field.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rejects_bad_step() {
        let s = spec1(0.5, 64, 16.0);
        assert!(NoiseSampler::new(&s, 0.0).is_err());
    }
}
