//! Localized Picard iterates `U^(n,j)`: the mild form with the kernel cut to
//! `|z| < (n s)^{1/alpha}` and the noise replaced by its `Q_n`-smoothed version.
//!
//! On the time grid `s_m = m dt` the iterate is
//! `U_m = P_{s_m} u0 + sum_{i<m} K^{R_m}_{(m-i) dt} * (sigma(U'_i) dF_i)` with
//! `U'` the previous level and `K^R_tau` the lattice kernel restricted to the
//! ball of radius `R_m = (n s_m)^{1/alpha}`. Without the window this is the
//! unrolled exponential-Euler scheme, so enough levels reproduce the stepper.

use rustfft::num_complex::Complex;
use thiserror::Error;

use crate::grid::Field;
use crate::noise::NoiseSampler;
use crate::rng::RngStream;
use crate::solver::{ModelParams, Propagator, SolverError, Stepper};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PicardError {
    #[error("noise smoothing level is {got:?}, the iterate needs Some({expected})")]
    SmoothingLevel { expected: usize, got: Option<usize> },
    #[error("window radius {radius} exceeds half the box {limit}; truncation is vacuous")]
    Window { radius: f64, limit: f64 },
    #[error("white noise has {got} steps, expected {expected}")]
    WhiteLength { expected: usize, got: usize },
    #[error("non-finite iterate at level {level}, t = {time}")]
    BlowUp { time: f64, level: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Precomputed plan for `U^(n,j)_t` at one `(n, t, dt)`.
#[derive(Debug, Clone)]
pub struct LocalizedPicard {
    params: ModelParams,
    n: usize,
    steps: usize,
    dt: f64,
    propagator: Propagator,
    /// `dx^d DFT(K^{R_m}_{l dt})` at index `m(m-1)/2 + l - 1`, `1 <= l <= m`.
    table: Vec<Vec<Complex<f64>>>,
    smoothed: NoiseSampler,
    exact: Stepper,
}

impl LocalizedPicard {
    pub fn new(params: &ModelParams, n: usize, t: f64, dt: f64) -> Result<Self, PicardError> {
        Self::build(params, n, t, dt, true)
    }

    fn build(params: &ModelParams, n: usize, t: f64, dt: f64, window: bool) -> Result<Self, PicardError> {
        if params.noise.smoothing_n() != Some(n) {
            return Err(PicardError::SmoothingLevel {
                expected: n,
                got: params.noise.smoothing_n(),
            });
        }
        let steps = (t / dt).round();
        if !(t > 0.0) || (steps * dt - t).abs() > 1e-9 * t {
            return Err(SolverError::Horizon { horizon: t, dt }.into());
        }
        let steps = steps as usize;
        let grid = *params.grid();
        let alpha = params.kernel.alpha();
        let radius = |m: usize| (n as f64 * m as f64 * dt).powf(1.0 / alpha);
        let limit = grid.side_length() / 2.0;
        if window && radius(steps) > limit {
            return Err(PicardError::Window {
                radius: radius(steps),
                limit,
            });
        }
        let exact_params = ModelParams {
            noise: params.noise.with_smoothing(None).map_err(SolverError::from)?,
            ..*params
        };
        let exact = Stepper::new(&exact_params, dt)?;
        let propagator = Propagator::new(grid, &params.kernel, params.symbol);
        let kernels: Vec<Vec<f64>> = (1..=steps).map(|l| propagator.kernel_values(l as f64 * dt)).collect();
        let radii: Vec<f64> = (0..grid.len()).map(|i| grid.radius(i)).collect();
        let cell = grid.cell_volume();
        let mut table = Vec::with_capacity(steps * (steps + 1) / 2);
        for m in 1..=steps {
            let r = radius(m);
            for kernel in kernels.iter().take(m) {
                let cut: Vec<f64> = kernel
                    .iter()
                    .zip(&radii)
                    .map(|(&k, &d)| if !window || d < r { k * cell } else { 0.0 })
                    .collect();
                table.push(propagator.fft().forward_real(&cut));
            }
        }
        let smoothed = NoiseSampler::new(&params.noise, dt).map_err(SolverError::from)?;
        Ok(Self {
            params: *params,
            n,
            steps,
            dt,
            propagator,
            table,
            smoothed,
            exact,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// Window radius at the final time.
    pub fn radius(&self) -> f64 {
        (self.n as f64 * self.horizon()).powf(1.0 / self.params.kernel.alpha())
    }

    fn kernel(&self, m: usize, lag: usize) -> &[Complex<f64>] {
        &self.table[m * (m - 1) / 2 + lag - 1]
    }

    /// White coefficients for every step, in time order.
    pub fn draw_white(&self, rng: &mut RngStream) -> Vec<Vec<Complex<f64>>> {
        (0..self.steps).map(|_| self.smoothed.draw_white(rng)).collect()
    }

    /// `U^(n,j)` at the final time for the given white coefficients.
    pub fn iterate(&self, u0: &Field, j: usize, white: &[Vec<Complex<f64>>]) -> Result<Field, PicardError> {
        if white.len() != self.steps {
            return Err(PicardError::WhiteLength {
                expected: self.steps,
                got: white.len(),
            });
        }
        if u0.grid != *self.params.grid() {
            return Err(SolverError::GridMismatch.into());
        }
        let horizon = self.horizon();
        if j == 0 {
            return Ok(Field {
                time: horizon,
                ..u0.clone()
            });
        }
        let fft = self.propagator.fft();
        let u0_hat = fft.forward_real(&u0.values);
        let sigma = self.params.sigma;
        let df: Vec<Vec<f64>> = white.iter().map(|z| self.smoothed.synthesize(z)).collect();
        let drift = |m: usize| {
            let mult = self.propagator.multipliers(m as f64 * self.dt);
            u0_hat.iter().zip(mult).map(|(c, k)| c * k).collect::<Vec<_>>()
        };
        // previous level at times 0..steps-1
        let mut prev: Vec<Vec<f64>> = vec![u0.values.clone(); self.steps];
        for level in 1..=j {
            let g_hat: Vec<Vec<Complex<f64>>> = prev
                .iter()
                .zip(&df)
                .map(|(u, w)| {
                    let g: Vec<f64> = u.iter().zip(w).map(|(&x, &dw)| sigma.eval(x) * dw).collect();
                    fft.forward_real(&g)
                })
                .collect();
            let targets: Vec<usize> = if level == j {
                vec![self.steps]
            } else {
                (1..self.steps).collect()
            };
            let mut next = vec![u0.values.clone()];
            for m in targets {
                let mut acc = drift(m);
                for (i, g) in g_hat.iter().enumerate().take(m) {
                    for ((a, gv), kv) in acc.iter_mut().zip(g).zip(self.kernel(m, m - i)) {
                        *a += gv * kv;
                    }
                }
                let values = fft.inverse_real(acc);
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(PicardError::BlowUp {
                        time: m as f64 * self.dt,
                        level,
                    });
                }
                if level == j {
                    return Ok(Field {
                        grid: u0.grid,
                        values,
                        time: horizon,
                    });
                }
                next.push(values);
            }
            prev = next;
        }
        unreachable!("the last level returns")
    }

    pub fn run(&self, u0: &Field, j: usize, rng: &mut RngStream) -> Result<Field, PicardError> {
        let white = self.draw_white(rng);
        self.iterate(u0, j, &white)
    }

    /// `(u_t, U^(n,j)_t)`: the exponential-Euler solution with exact noise
    /// and the iterate with smoothed noise, both from the same white draws.
    pub fn coupled(&self, u0: &Field, j: usize, rng: &mut RngStream) -> Result<(Field, Field), PicardError> {
        let stream = rng.id();
        let white = self.draw_white(rng);
        let mut u = Field { time: 0.0, ..u0.clone() };
        for z in &white {
            let dw = self.exact.sampler().synthesize(z);
            u = self.exact.advance(&u, &dw, stream)?;
        }
        let picard = self.iterate(u0, j, &white)?;
        Ok((u, picard))
    }
}

/// One draw of `U^(n,j)_t`.
pub fn localized_picard(
    params: &ModelParams,
    u0: &Field,
    n: usize,
    j: usize,
    t: f64,
    dt: f64,
    rng: &mut RngStream,
) -> Result<Field, PicardError> {
    LocalizedPicard::new(params, n, t, dt)?.run(u0, j, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::kernels::KernelParams;
    use crate::noise::NoiseSpec;
    use crate::solver::{SigmaSpec, Stepper};

    fn params(n: usize) -> ModelParams {
        let g = GridSpec::new(1, 32.0, 128).unwrap();
        ModelParams::new(
            KernelParams::new(2.0, 1.0, 1).unwrap(),
            NoiseSpec::new(0.5, g, Some(n)).unwrap(),
            SigmaSpec::linear(0.5),
        )
        .unwrap()
    }

    #[test]
    fn level_zero_is_initial_datum() {
        let p = params(2);
        let u0 = Field::from_fn(*p.grid(), |x| 1.0 + 0.1 * x[0].cos());
        let out = localized_picard(&p, &u0, 2, 0, 0.1, 0.01, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(out.values, u0.values);
    }

    #[test]
    fn smoothing_level_must_match() {
        let p = params(2);
        assert!(matches!(
            LocalizedPicard::new(&p, 3, 0.1, 0.01),
            Err(PicardError::SmoothingLevel { .. })
        ));
    }

    #[test]
    fn oversized_window_rejected() {
        let p = params(200);
        assert!(matches!(LocalizedPicard::new(&p, 200, 2.0, 0.01), Err(PicardError::Window { .. })));
    }

    #[test]
    fn unwindowed_full_depth_matches_stepper() {
        let p = params(4);
        let plan = LocalizedPicard::build(&p, 4, 0.1, 0.01, false).unwrap();
        let u0 = Field::from_fn(*p.grid(), |x| 1.0 + 0.2 * (x[0] / 3.0).sin());
        let white = plan.draw_white(&mut RngStream::new(5, 1));
        let picard = plan.iterate(&u0, plan.steps(), &white).unwrap();
        let stepper = Stepper::unchecked(&p, 0.01).unwrap();
        let mut u = u0.clone();
        for z in &white {
            let dw = stepper.sampler().synthesize(z);
            u = stepper.advance(&u, &dw, RngStream::new(5, 1).id()).unwrap();
        }
        let err = u.values.iter().zip(&picard.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }
}
