//! Exponential-Euler integration of the mild form
//! `u_t = P_t u_0 + int_0^t P_{t-s}[sigma(u_s) F(ds)]` on the torus, and
//! noise-coupled path pairs.

use std::io::Write;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Field, GridSpec, LatticeFft};
use crate::kernels::KernelParams;
use crate::noise::{covariance_from_weights, NoiseError, NoiseSampler, NoiseSpec};
use crate::rng::{RngStream, StreamId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("beta = {beta} must be below min(alpha, d) = {limit}")]
    Standing { beta: f64, limit: f64 },
    #[error("kernel dimension {kernel} differs from grid dimension {grid}")]
    Dimension { kernel: usize, grid: usize },
    #[error("sigma specification invalid: {0}")]
    Sigma(String),
    #[error("time step must be positive, got {0}")]
    Step(f64),
    #[error("time step {dt} exceeds the stability limit {limit} ({reason})")]
    StepTooLarge { dt: f64, limit: f64, reason: &'static str },
    #[error("horizon {horizon} is not a whole number of steps of size {dt}")]
    Horizon { horizon: f64, dt: f64 },
    #[error("snapshot times must be increasing and within [0, {horizon}]")]
    Snapshots { horizon: f64 },
    #[error("initial datum must be nonnegative, minimum is {0}")]
    NegativeInitial(f64),
    #[error("initial datum lives on a different grid")]
    GridMismatch,
    #[error("coupled paths need identical kernel and noise")]
    Uncoupled,
    #[error("blow-up (non-finite value) at t = {time} on stream {stream:?}")]
    BlowUp { time: f64, stream: StreamId },
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaFamily {
    /// `lambda x`
    Linear,
    /// `lambda x 1_{x >= 0}`
    ClippedLinear,
    /// `lambda tanh x`
    BoundedSmooth,
    /// `lambda`, constant; additive noise for tests, violates `sigma(0) = 0`.
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaSpec {
    pub family: SigmaFamily,
    pub scale: f64,
    pub lipschitz: f64,
    pub lower: Option<f64>,
}

impl SigmaSpec {
    /// Spec with Lipschitz metadata `|lambda|` and no lower bound.
    pub fn new(family: SigmaFamily, scale: f64) -> Self {
        Self {
            family,
            scale,
            lipschitz: scale.abs(),
            lower: None,
        }
    }

    pub fn linear(scale: f64) -> Self {
        Self::new(SigmaFamily::Linear, scale)
    }

    pub fn with_lower(mut self, lower: f64) -> Self {
        self.lower = Some(lower);
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.family {
            SigmaFamily::Linear => self.scale * x,
            SigmaFamily::ClippedLinear => {
                if x >= 0.0 {
                    self.scale * x
                } else {
                    0.0
                }
            }
            SigmaFamily::BoundedSmooth => self.scale * x.tanh(),
            SigmaFamily::Additive => self.scale,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    /// Check `sigma(0) = 0`, `|sigma(x)| <= L |x|` and, when a lower constant
    /// is set, `sigma(x) >= l x` for `x >= 0`, on a grid of sample points.
    pub fn validate(&self) -> Result<(), SolverError> {
        if !self.scale.is_finite() {
            return Err(SolverError::Sigma(format!("scale {} is not finite", self.scale)));
        }
        if !(self.lipschitz >= 0.0 && self.lipschitz.is_finite()) {
            return Err(SolverError::Sigma(format!("lipschitz constant {} is invalid", self.lipschitz)));
        }
        if self.family == SigmaFamily::Additive {
            return Ok(());
        }
        let tol = 1e-12;
        for i in -400..=400 {
            let x = i as f64 * 0.05;
            let s = self.eval(x);
            if s.abs() > self.lipschitz * x.abs() * (1.0 + tol) + tol {
                return Err(SolverError::Sigma(format!(
                    "|sigma({x})| = {} exceeds {} |x|",
                    s.abs(),
                    self.lipschitz
                )));
            }
            if let Some(l) = self.lower {
                if x >= 0.0 && s < l * x * (1.0 - tol) - tol {
                    return Err(SolverError::Sigma(format!("sigma({x}) = {s} is below {l} x")));
                }
            }
        }
        Ok(())
    }
}

/// Fourier multiplier used for the semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    /// `nu |xi|^alpha`, the continuum symbol restricted to lattice modes.
    Continuum,
    /// `nu (sum_i (2/dx)^2 sin^2(xi_i dx / 2))^{alpha/2}`, a fractional power of
    /// the discrete Laplacian. Its semigroup is positive and mass preserving.
    #[default]
    Lattice,
}

impl Symbol {
    /// Symbol value (without `nu`) at mode `k`.
    pub fn value(&self, grid: &GridSpec, k: usize, alpha: f64) -> f64 {
        match self {
            Symbol::Continuum => grid.wavenumber(k).powf(alpha),
            Symbol::Lattice => {
                let dx = grid.spacing();
                let xi = grid.wavevector(k);
                let s: f64 = xi[..grid.dim()]
                    .iter()
                    .map(|v| {
                        let h = 2.0 / dx * (v * dx / 2.0).sin();
                        h * h
                    })
                    .sum();
                s.powf(alpha / 2.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kernel: KernelParams,
    pub noise: NoiseSpec,
    pub sigma: SigmaSpec,
    pub symbol: Symbol,
}

impl ModelParams {
    pub fn new(kernel: KernelParams, noise: NoiseSpec, sigma: SigmaSpec) -> Result<Self, SolverError> {
        let p = Self {
            kernel,
            noise,
            sigma,
            symbol: Symbol::Lattice,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_symbol(mut self, symbol: Symbol) -> Self {
        self.symbol = symbol;
        self
    }

    pub fn with_sigma(mut self, sigma: SigmaSpec) -> Result<Self, SolverError> {
        self.sigma = sigma;
        self.validate()?;
        Ok(self)
    }

    pub fn grid(&self) -> &GridSpec {
        self.noise.grid()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let limit = self.kernel.alpha().min(self.kernel.dim() as f64);
        if !(self.noise.beta() < limit) {
            return Err(SolverError::Standing {
                beta: self.noise.beta(),
                limit,
            });
        }
        if self.kernel.dim() != self.grid().dim() {
            return Err(SolverError::Dimension {
                kernel: self.kernel.dim(),
                grid: self.grid().dim(),
            });
        }
        self.sigma.validate()
    }

    /// Largest step allowed by `dt <= dx^alpha / (4 nu)` and
    /// `L_sigma^2 dt f(dx) < 0.1`, with the binding reason.
    pub fn max_step(&self) -> (f64, &'static str) {
        let g = self.grid();
        let diffusive = g.spacing().powf(self.kernel.alpha()) / (4.0 * self.kernel.nu());
        let cov = covariance_from_weights(g, &self.noise.weights());
        let f_dx = cov[g.site_at([1, 0])];
        let l2 = self.sigma.lipschitz * self.sigma.lipschitz;
        let noisy = if l2 > 0.0 && f_dx > 0.0 {
            0.1 / (l2 * f_dx)
        } else {
            f64::INFINITY
        };
        if diffusive <= noisy {
            (diffusive, "dt <= dx^alpha / (4 nu)")
        } else {
            (noisy, "L_sigma^2 dt f(dx) < 0.1")
        }
    }
}

/// Spectral semigroup `P_t` on one grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    fft: LatticeFft,
    symbol_values: Vec<f64>,
    nu: f64,
}

impl Propagator {
    pub fn new(grid: GridSpec, kernel: &KernelParams, symbol: Symbol) -> Self {
        let symbol_values = (0..grid.len())
            .map(|k| symbol.value(&grid, k, kernel.alpha()))
            .collect();
        Self {
            fft: LatticeFft::new(grid),
            symbol_values,
            nu: kernel.nu(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.fft.grid()
    }

    pub fn fft(&self) -> &LatticeFft {
        &self.fft
    }

    /// Symbol values `Lambda_k`, without `nu`.
    pub fn symbol_values(&self) -> &[f64] {
        &self.symbol_values
    }

    /// Multipliers `exp(-t nu Lambda_k)`.
    pub fn multipliers(&self, t: f64) -> Vec<f64> {
        self.symbol_values.iter().map(|s| (-t * self.nu * s).exp()).collect()
    }

    pub fn apply_multipliers(&self, values: &[f64], multipliers: &[f64]) -> Vec<f64> {
        let mut spec = self.fft.forward_real(values);
        for (c, m) in spec.iter_mut().zip(multipliers) {
            *c *= m;
        }
        self.fft.inverse_real(spec)
    }

    pub fn apply(&self, values: &[f64], t: f64) -> Vec<f64> {
        self.apply_multipliers(values, &self.multipliers(t))
    }

    /// Lattice density of `P_t` at each site: `apply(delta_0 / dx^d)`.
    pub fn kernel_values(&self, t: f64) -> Vec<f64> {
        let scale = 1.0 / self.grid().volume();
        let spec: Vec<Complex<f64>> = self.multipliers(t).into_iter().map(|m| Complex::new(m * scale, 0.0)).collect();
        let mut buf = spec;
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// `P_t u` with the given symbol.
pub fn semigroup_apply(field: &Field, t: f64, kernel: &KernelParams, symbol: Symbol) -> Field {
    let p = Propagator::new(field.grid, kernel, symbol);
    Field {
        grid: field.grid,
        values: p.apply(&field.values, t),
        time: field.time + t,
    }
}

/// Fixed-step integrator for one model.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: ModelParams,
    dt: f64,
    propagator: Propagator,
    multipliers: Vec<f64>,
    sampler: NoiseSampler,
}

impl Stepper {
    /// Integrator with the step checked against [`ModelParams::max_step`].
    pub fn new(params: &ModelParams, dt: f64) -> Result<Self, SolverError> {
        let (limit, reason) = params.max_step();
        if dt > limit * (1.0 + 1e-12) {
            return Err(SolverError::StepTooLarge { dt, limit, reason });
        }
        Self::unchecked(params, dt)
    }

    /// Integrator without the stability heuristic.
    pub fn unchecked(params: &ModelParams, dt: f64) -> Result<Self, SolverError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::Step(dt));
        }
        params.validate()?;
        let propagator = Propagator::new(*params.grid(), &params.kernel, params.symbol);
        let multipliers = propagator.multipliers(dt);
        let sampler = NoiseSampler::new(&params.noise, dt)?;
        Ok(Self {
            params: *params,
            dt,
            propagator,
            multipliers,
            sampler,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sampler(&self) -> &NoiseSampler {
        &self.sampler
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    /// `P_dt[u + sigma(u) dW]` for a given increment `dw`.
    pub fn advance(&self, field: &Field, dw: &[f64], stream: StreamId) -> Result<Field, SolverError> {
        let sigma = self.params.sigma;
        let time = field.time + self.dt;
        let values = if sigma.is_zero() {
            self.propagator.apply_multipliers(&field.values, &self.multipliers)
        } else {
            let pre: Vec<f64> = field.values.iter().zip(dw).map(|(&u, &w)| u + sigma.eval(u) * w).collect();
            self.propagator.apply_multipliers(&pre, &self.multipliers)
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::BlowUp { time, stream });
        }
        Ok(Field {
            grid: field.grid,
            values,
            time,
        })
    }

    pub fn step(&self, field: &Field, rng: &mut RngStream) -> Result<Field, SolverError> {
        let dw = self.sampler.sample(rng);
        self.advance(field, &dw, rng.id())
    }
}

/// One exponential-Euler step.
pub fn step(field: &Field, dt: f64, params: &ModelParams, rng: &mut RngStream) -> Result<Field, SolverError> {
    Stepper::new(params, dt)?.step(field, rng)
}

/// Snapshots of one path. The first snapshot is the initial datum at time 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub dt: f64,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
    pub stream: StreamId,
}

impl Trajectory {
    pub fn final_field(&self) -> &Field {
        self.fields.last().expect("trajectory holds the initial datum")
    }

    /// Snapshot at the given time, matched to within half a step.
    pub fn at(&self, t: f64) -> Option<&Field> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 0.5 * self.dt)
            .map(|i| &self.fields[i])
    }

    /// CSV dump: `time,site,x[,y],value`, one row per site and snapshot.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        let g = self.params.grid();
        let two_d = g.dim() == 2;
        writeln!(out, "{}", if two_d { "time,site,x,y,value" } else { "time,site,x,value" })?;
        for field in &self.fields {
            for (i, v) in field.values.iter().enumerate() {
                let c = g.coords(i);
                if two_d {
                    writeln!(out, "{:.16e},{},{:.16e},{:.16e},{:.16e}", field.time, i, c[0], c[1], v)?;
                } else {
                    writeln!(out, "{:.16e},{},{:.16e},{:.16e}", field.time, i, c[0], v)?;
                }
            }
        }
        Ok(())
    }
}

/// Step indices of the requested snapshot times, after validating the horizon.
fn schedule(horizon: f64, dt: f64, snapshot_times: &[f64]) -> Result<(usize, Vec<usize>), SolverError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::Step(dt));
    }
    let steps = (horizon / dt).round();
    if !(horizon >= 0.0) || (steps * dt - horizon).abs() > 1e-9 * horizon.max(dt) {
        return Err(SolverError::Horizon { horizon, dt });
    }
    let mut marks = Vec::with_capacity(snapshot_times.len());
    let mut last = 0usize;
    for &t in snapshot_times {
        let k = (t / dt).round();
        if !(t >= 0.0 && t <= horizon * (1.0 + 1e-12)) {
            return Err(SolverError::Snapshots { horizon });
        }
        let k = k as usize;
        if k == 0 {
            continue;
        }
        if k <= last {
            return Err(SolverError::Snapshots { horizon });
        }
        marks.push(k);
        last = k;
    }
    Ok((steps as usize, marks))
}

fn check_initial(params: &ModelParams, u0: &Field) -> Result<(), SolverError> {
    if u0.grid != *params.grid() {
        return Err(SolverError::GridMismatch);
    }
    let m = u0.min();
    if m < 0.0 {
        return Err(SolverError::NegativeInitial(m));
    }
    Ok(())
}

/// Integrate to `horizon`, keeping `u0` and the fields at `snapshot_times`.
pub fn simulate_path(
    params: &ModelParams,
    u0: &Field,
    horizon: f64,
    dt: f64,
    snapshot_times: &[f64],
    rng: &mut RngStream,
) -> Result<Trajectory, SolverError> {
    let stepper = Stepper::new(params, dt)?;
    simulate_with(&stepper, u0, horizon, snapshot_times, rng)
}

/// [`simulate_path`] with a prebuilt stepper.
pub fn simulate_with(
    stepper: &Stepper,
    u0: &Field,
    horizon: f64,
    snapshot_times: &[f64],
    rng: &mut RngStream,
) -> Result<Trajectory, SolverError> {
    let params = stepper.params;
    let dt = stepper.dt;
    check_initial(&params, u0)?;
    let (steps, marks) = schedule(horizon, dt, snapshot_times)?;
    let mut start = u0.clone();
    start.time = 0.0;
    let mut times = vec![0.0];
    let mut fields = vec![start.clone()];
    let mut u = start;
    let mut next = marks.iter().peekable();
    for k in 1..=steps {
        if next.peek().is_none() {
            break;
        }
        u = stepper.step(&u, rng)?;
        u.time = k as f64 * dt;
        if next.peek() == Some(&&k) {
            next.next();
            times.push(u.time);
            fields.push(u.clone());
        }
    }
    Ok(Trajectory {
        params,
        dt,
        times,
        fields,
        stream: rng.id(),
    })
}

/// Two paths driven by the same noise increments.
#[allow(clippy::too_many_arguments)]
pub fn coupled_paths(
    params_u: &ModelParams,
    params_v: &ModelParams,
    u0: &Field,
    v0: &Field,
    horizon: f64,
    dt: f64,
    snapshot_times: &[f64],
    rng: &mut RngStream,
) -> Result<(Trajectory, Trajectory), SolverError> {
    if params_u.kernel != params_v.kernel || params_u.noise != params_v.noise || params_u.symbol != params_v.symbol {
        return Err(SolverError::Uncoupled);
    }
    let su = Stepper::new(params_u, dt)?;
    let sv = Stepper::new(params_v, dt)?;
    check_initial(params_u, u0)?;
    check_initial(params_v, v0)?;
    let (steps, marks) = schedule(horizon, dt, snapshot_times)?;
    let stream = rng.id();
    let mut u = Field { time: 0.0, ..u0.clone() };
    let mut v = Field { time: 0.0, ..v0.clone() };
    let mut tu = Trajectory {
        params: *params_u,
        dt,
        times: vec![0.0],
        fields: vec![u.clone()],
        stream,
    };
    let mut tv = Trajectory {
        params: *params_v,
        dt,
        times: vec![0.0],
        fields: vec![v.clone()],
        stream,
    };
    let mut next = marks.iter().peekable();
    for k in 1..=steps {
        if next.peek().is_none() {
            break;
        }
        let dw = su.sampler.sample(rng);
        u = su.advance(&u, &dw, stream)?;
        v = sv.advance(&v, &dw, stream)?;
        u.time = k as f64 * dt;
        v.time = u.time;
        if next.peek() == Some(&&k) {
            next.next();
            tu.times.push(u.time);
            tu.fields.push(u.clone());
            tv.times.push(v.time);
            tv.fields.push(v.clone());
        }
    }
    Ok((tu, tv))
}
