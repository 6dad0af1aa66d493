//! Symmetric alpha-stable heat kernel `p_t`, the Riesz correlation function
//! `f(x) = |x|^{-beta}`, and the heat-kernel/correlation integrals that the
//! moment and approximation estimates are built from.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::quadrature::{self, Grading};
use crate::rng::RngStream;

/// `e^{-DECAY}` = 1e-14: the spectral integrand is cut where it falls below this.
const DECAY: f64 = 14.0 * std::f64::consts::LN_10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("alpha must lie in (0, 2], got {0}")]
    Alpha(f64),
    #[error("nu must be positive, got {0}")]
    Nu(f64),
    #[error("dimension must be 1 or 2, got {0}")]
    Dimension(usize),
    #[error("mode count must be even and at least 16, got {0}")]
    ModeCount(usize),
    #[error("frequency cutoff must be positive, got {0}")]
    Cutoff(f64),
    #[error("time must be positive, got {0}")]
    Time(f64),
    #[error("radius must be positive, got {0}")]
    Radius(f64),
    #[error("frequency cutoff {cutoff} cannot resolve t = {t}: need at least {required}")]
    CutoffTooSmall { t: f64, cutoff: f64, required: f64 },
    #[error("no closed form for alpha = {alpha} in dimension {dim}")]
    NoClosedForm { alpha: f64, dim: usize },
    #[error("Riesz kernel is singular at the origin")]
    Singular,
    #[error("beta must satisfy 0 < beta < {limit}, got {beta}")]
    Beta { beta: f64, limit: f64 },
    #[error("point has dimension {got}, kernel has dimension {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("quadrature did not converge: estimate {estimate}, error estimate {error}")]
    Quadrature { estimate: f64, error: f64 },
    #[error("Monte Carlo truncated integrals are implemented in dimension 1 only")]
    MonteCarloDimension,
}

/// Stability index, viscosity and dimension of the fractional Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    alpha: f64,
    nu: f64,
    dim: usize,
}

impl KernelParams {
    pub fn new(alpha: f64, nu: f64, dim: usize) -> Result<Self, KernelError> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(KernelError::Alpha(alpha));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(KernelError::Nu(nu));
        }
        if !(dim == 1 || dim == 2) {
            return Err(KernelError::Dimension(dim));
        }
        Ok(Self { alpha, nu, dim })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fourier symbol `nu |xi|^alpha` of the generator.
    pub fn symbol(&self, xi: f64) -> f64 {
        self.nu * xi.abs().powf(self.alpha)
    }
}

/// Discretization of the inverse Fourier integral.
///
/// `mode_count` is the minimum number of Gauss-Legendre panels on the
/// frequency interval; `frequency_cutoff` is the largest frequency the rule
/// may reach. The integration range itself is set per `t` so that the
/// integrand has decayed below `1e-14`; a cutoff smaller than that is an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    mode_count: usize,
    frequency_cutoff: f64,
}

impl QuadratureSpec {
    pub fn new(mode_count: usize, frequency_cutoff: f64) -> Result<Self, KernelError> {
        if mode_count < 16 || !mode_count.is_multiple_of(2) {
            return Err(KernelError::ModeCount(mode_count));
        }
        if !(frequency_cutoff > 0.0) {
            return Err(KernelError::Cutoff(frequency_cutoff));
        }
        Ok(Self {
            mode_count,
            frequency_cutoff,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn frequency_cutoff(&self) -> f64 {
        self.frequency_cutoff
    }

    /// Frequency beyond which `exp(-rate |z|^alpha)` is below `1e-14`.
    fn range(&self, rate: f64, alpha: f64, t: f64) -> Result<f64, KernelError> {
        let required = (DECAY / rate).powf(1.0 / alpha);
        if required > self.frequency_cutoff {
            return Err(KernelError::CutoffTooSmall {
                t,
                cutoff: self.frequency_cutoff,
                required,
            });
        }
        Ok(required)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            mode_count: 256,
            frequency_cutoff: 1e8,
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_point(x: &[f64], kp: &KernelParams) -> Result<(), KernelError> {
    if x.len() != kp.dim {
        return Err(KernelError::PointDimension {
            expected: kp.dim,
            got: x.len(),
        });
    }
    Ok(())
}

/// Bessel `J_0(s)` from the periodic trapezoid rule on its integral form,
/// which converges geometrically once the node count exceeds `s`.
pub fn bessel_j0(s: f64) -> f64 {
    let s = s.abs();
    let n = ((s + 20.0 * s.cbrt()).ceil() as usize + 24).next_multiple_of(4);
    let step = 2.0 * PI / n as f64;
    (0..n).map(|j| (s * (j as f64 * step).sin()).cos()).sum::<f64>() / n as f64
}

/// Heat kernel `p_t(x) = (2 pi)^{-d} int e^{-i x.z} e^{-t nu |z|^alpha} dz`
/// evaluated by quadrature of the radial form of the Fourier integral.
pub fn kernel_spectral(t: f64, x: &[f64], kp: &KernelParams, q: &QuadratureSpec) -> Result<f64, KernelError> {
    if !(t > 0.0) {
        return Err(KernelError::Time(t));
    }
    check_point(x, kp)?;
    let r = norm(x);
    let rate = t * kp.nu;
    let top = q.range(rate, kp.alpha, t)?;
    // at most ~4 radians of oscillation per panel
    let panels = q.mode_count.max((r * top / 4.0).ceil() as usize);
    let alpha = kp.alpha;
    // For alpha = 2 the symbol is entire, so the contour moves onto the line
    // through the saddle at i x / (2 t nu). The oscillation disappears and the
    // deep tail keeps full relative accuracy.
    if alpha == 2.0 && r > 0.0 {
        let origin = vec![0.0; x.len()];
        return Ok((-r * r / (4.0 * rate)).exp() * kernel_spectral(t, &origin, kp, q)?);
    }
    let value = match kp.dim {
        1 => {
            quadrature::integrate(
                |z| (r * z).cos() * (-rate * z.powf(alpha)).exp(),
                0.0,
                top,
                panels,
                Grading::Left,
            ) / PI
        }
        _ => {
            quadrature::integrate(
                |z| bessel_j0(r * z) * (-rate * z.powf(alpha)).exp() * z,
                0.0,
                top,
                panels,
                Grading::Left,
            ) / (2.0 * PI)
        }
    };
    Ok(value.max(0.0))
}

/// Exact density for the Gaussian (`alpha = 2`, any dimension) and Cauchy
/// (`alpha = 1`, `d = 1`) cases.
pub fn kernel_closed_form(t: f64, x: &[f64], kp: &KernelParams) -> Result<f64, KernelError> {
    if !(t > 0.0) {
        return Err(KernelError::Time(t));
    }
    check_point(x, kp)?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let s = kp.nu * t;
    if kp.alpha == 2.0 {
        Ok((4.0 * PI * s).powf(-(kp.dim as f64) / 2.0) * (-r2 / (4.0 * s)).exp())
    } else if kp.alpha == 1.0 && kp.dim == 1 {
        Ok(s / (PI * (s * s + r2)))
    } else {
        Err(KernelError::NoClosedForm {
            alpha: kp.alpha,
            dim: kp.dim,
        })
    }
}

/// Riesz correlation `f(x) = |x|^{-beta}`, with `0 < beta < d` where `d`
/// is the length of `x`.
pub fn riesz(x: &[f64], beta: f64) -> Result<f64, KernelError> {
    let d = x.len() as f64;
    if !(beta > 0.0 && beta < d) {
        return Err(KernelError::Beta { beta, limit: d });
    }
    let r = norm(x);
    if r == 0.0 {
        return Err(KernelError::Singular);
    }
    Ok(r.powf(-beta))
}

/// `C(d, beta)` in `F[|x|^{-beta}](xi) = C(d, beta) |xi|^{beta - d}`.
pub fn riesz_fourier_constant(dim: usize, beta: f64) -> f64 {
    let d = dim as f64;
    2f64.powf(d - beta) * PI.powf(d / 2.0) * gamma((d - beta) / 2.0) / gamma(beta / 2.0)
}

/// Surface measure of the unit sphere in `R^d` for d = 1, 2.
fn sphere_area(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

fn check_beta(kp: &KernelParams, beta: f64) -> Result<(), KernelError> {
    let limit = kp.alpha.min(kp.dim as f64);
    if !(beta > 0.0 && beta < limit) {
        return Err(KernelError::Beta { beta, limit });
    }
    Ok(())
}

/// `int int p_t(x-y) p_t(x-w) f(y-w) dy dw`, reduced by the semigroup
/// property to `int p_{2t}(w) f(w) dw` and evaluated on the Fourier side,
/// `(2 pi)^{-d} C(d, beta) |S^{d-1}| int_0^inf e^{-2 t nu r^alpha} r^{beta-1} dr`.
pub fn correlation_integral_full(t: f64, kp: &KernelParams, beta: f64, q: &QuadratureSpec) -> Result<f64, KernelError> {
    if !(t > 0.0) {
        return Err(KernelError::Time(t));
    }
    check_beta(kp, beta)?;
    let rate = 2.0 * t * kp.nu;
    let top = q.range(rate, kp.alpha, t)?;
    let alpha = kp.alpha;
    // r = u^{1/beta} removes the r^{beta-1} singularity
    let radial = |panels: usize| {
        quadrature::integrate(
            |u| (-rate * u.powf(alpha / beta)).exp(),
            0.0,
            top.powf(beta),
            panels,
            Grading::Left,
        ) / beta
    };
    let coarse = radial(q.mode_count / 2);
    let fine = radial(q.mode_count);
    let prefactor = riesz_fourier_constant(kp.dim, beta) * sphere_area(kp.dim) / (2.0 * PI).powi(kp.dim as i32);
    let estimate = prefactor * fine;
    let error = prefactor * (fine - coarse).abs();
    if !(estimate.is_finite() && error <= 1e-9 * estimate.abs()) {
        return Err(KernelError::Quadrature { estimate, error });
    }
    Ok(estimate)
}

/// Region pair for the truncated double integrals over `B(x,R)^c x B(x,R)^c`
/// and `B(x,R)^c x B(x,R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationCase {
    OuterOuter,
    OuterInner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// A zero estimate means the sampled region carried no resolvable mass.
    pub fn is_resolved(&self) -> bool {
        self.value > 0.0 && self.std_error < self.value
    }
}

/// Draw from the symmetric stable law with characteristic function
/// `exp(-scale^alpha |theta|^alpha)` (Chambers-Mallows-Stuck).
pub fn sample_stable(alpha: f64, scale: f64, rng: &mut RngStream) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let e = -(1.0 - rng.random::<f64>()).ln();
    let x = if (alpha - 1.0).abs() < 1e-12 {
        v.tan()
    } else {
        (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / e).powf((1.0 - alpha) / alpha)
    };
    scale * x
}

/// One-dimensional law of `p_t` with a closed form for its tail.
enum TailLaw {
    Gauss { sd: f64 },
    Cauchy { scale: f64 },
}

impl TailLaw {
    fn density(&self, x: f64) -> f64 {
        match *self {
            TailLaw::Gauss { sd } => (-(x * x) / (2.0 * sd * sd)).exp() / (sd * (2.0 * PI).sqrt()),
            TailLaw::Cauchy { scale } => scale / (PI * (scale * scale + x * x)),
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            TailLaw::Gauss { sd } => sd,
            TailLaw::Cauchy { scale } => scale,
        }
    }

    /// `P(|X| > r)`.
    fn outer_mass(&self, r: f64) -> f64 {
        match *self {
            TailLaw::Gauss { sd } => erfc(r / (sd * 2f64.sqrt())),
            TailLaw::Cauchy { scale } => 1.0 - 2.0 / PI * (r / scale).atan(),
        }
    }

    /// Draw `|X|` conditioned on `|X| > r`.
    fn sample_outer(&self, r: f64, rng: &mut RngStream) -> f64 {
        let u: f64 = 1.0 - rng.random::<f64>();
        match *self {
            TailLaw::Gauss { sd } => {
                let q = u * erfc(r / (sd * 2f64.sqrt()));
                (sd * 2f64.sqrt() * erfc_inv(q)).max(r)
            }
            TailLaw::Cauchy { scale } => {
                let span = PI / 2.0 - (r / scale).atan();
                (scale / (u * span).tan()).max(r)
            }
        }
    }

    /// `int_B p(w) |y - w|^{-beta} dw` for `y > r`.
    fn inner(&self, y: f64, r: f64, beta: f64, case: TruncationCase) -> f64 {
        let panels = 24;
        let s = self.scale();
        // integrate in the separation `|y - w|` so the singularity sits at zero
        let below = |d: f64| self.density(y - d) * d.powf(-beta);
        match case {
            TruncationCase::OuterOuter => {
                let near = quadrature::integrate(below, 0.0, y - r, panels, Grading::Left);
                let above = quadrature::integrate_to_infinity(|d| self.density(y + d) * d.powf(-beta), 0.0, s, panels, true);
                let mirror = quadrature::integrate_to_infinity(|v| self.density(v) * (y + v).powf(-beta), r, s, panels, false);
                near + above + mirror
            }
            TruncationCase::OuterInner => quadrature::integrate(below, y - r, y + r, panels, Grading::Left),
        }
    }
}

/// Monte Carlo estimate of the truncated integral
/// `int_{A x B} p_t(y) p_t(w) |y - w|^{-beta} dy dw` with `A = B(0,R)^c` and
/// `B = A` (outer-outer) or `B = B(0,R)` (outer-inner), in dimension 1.
///
/// Samples are drawn from `p_t` restricted to `A`. For `alpha` in {1, 2} the
/// tail law is exact and the `w` integral is done by quadrature per sample;
/// otherwise both variables are drawn from the stable law and the indicator
/// estimator is used.
pub fn correlation_integral_truncated(
    t: f64,
    radius: f64,
    kp: &KernelParams,
    beta: f64,
    case: TruncationCase,
    sample_count: usize,
    rng: &mut RngStream,
) -> Result<McEstimate, KernelError> {
    if !(t > 0.0) {
        return Err(KernelError::Time(t));
    }
    if !(radius > 0.0) {
        return Err(KernelError::Radius(radius));
    }
    if kp.dim != 1 {
        return Err(KernelError::MonteCarloDimension);
    }
    check_beta(kp, beta)?;
    let s = kp.nu * t;
    let law = if kp.alpha == 2.0 {
        Some(TailLaw::Gauss { sd: (2.0 * s).sqrt() })
    } else if kp.alpha == 1.0 {
        Some(TailLaw::Cauchy { scale: s })
    } else {
        None
    };
    let mut values = Vec::with_capacity(sample_count);
    match law {
        Some(law) => {
            let mass = law.outer_mass(radius);
            for _ in 0..sample_count {
                let y = law.sample_outer(radius, rng);
                values.push(mass * law.inner(y, radius, beta, case));
            }
        }
        None => {
            let scale = s.powf(1.0 / kp.alpha);
            for _ in 0..sample_count {
                let y = sample_stable(kp.alpha, scale, rng);
                let w = sample_stable(kp.alpha, scale, rng);
                let in_a = y.abs() >= radius;
                let in_b = match case {
                    TruncationCase::OuterOuter => w.abs() >= radius,
                    TruncationCase::OuterInner => w.abs() < radius,
                };
                let v = if in_a && in_b && y != w {
                    (y - w).abs().powf(-beta)
                } else {
                    0.0
                };
                values.push(v);
            }
        }
    }
    let (value, std_error) = crate::stats::mean_se(&values);
    Ok(McEstimate {
        value,
        std_error,
        samples: sample_count,
    })
}

/// Ratio `p_t(x) / min(t^{-d/alpha}, t |x|^{-(d+alpha)})` whose boundedness
/// above and below is the two-sided heat kernel estimate.
pub fn two_sided_ratio(t: f64, x: &[f64], kp: &KernelParams, q: &QuadratureSpec) -> Result<f64, KernelError> {
    let p = kernel_spectral(t, x, kp, q)?;
    let d = kp.dim as f64;
    let r = norm(x);
    let envelope = t.powf(-d / kp.alpha).min(t * r.powf(-(d + kp.alpha)));
    Ok(p / envelope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kp(alpha: f64, dim: usize) -> KernelParams {
        KernelParams::new(alpha, 1.0, dim).unwrap()
    }

    #[test]
    fn spectral_matches_reference_values() {
        let q = QuadratureSpec::default();
        let g = kernel_spectral(1.0, &[0.0], &kp(2.0, 1), &q).unwrap();
        assert!((g - 0.2820947918).abs() < 1e-9, "{g}");
        let c = kernel_spectral(1.0, &[0.0], &kp(1.0, 1), &q).unwrap();
        assert!((c - std::f64::consts::FRAC_1_PI).abs() < 1e-9, "{c}");
    }

    #[test]
    fn closed_form_reference_values() {
        let v = kernel_closed_form(1.0, &[0.0], &kp(2.0, 1)).unwrap();
        assert!((v - 0.2820947918).abs() < 1e-10);
        let v = kernel_closed_form(1.0, &[10.0], &kp(1.0, 1)).unwrap();
        assert!((v - 0.0031515830).abs() < 1e-10);
        let v = kernel_closed_form(1.0, &[0.0, 0.0], &kp(2.0, 2)).unwrap();
        assert!((v - 0.0795774715).abs() < 1e-10);
        assert!(matches!(
            kernel_closed_form(1.0, &[0.0, 0.0], &kp(1.0, 2)),
            Err(KernelError::NoClosedForm { .. })
        ));
        assert!(kernel_closed_form(1.0, &[0.0], &kp(1.5, 1)).is_err());
    }

    #[test]
    fn spectral_2d_gaussian() {
        let q = QuadratureSpec::default();
        for &(t, x) in &[(1.0, [0.0, 0.0]), (0.5, [1.0, -0.5]), (1.0, [3.0, 2.0])] {
            let s = kernel_spectral(t, &x, &kp(2.0, 2), &q).unwrap();
            let c = kernel_closed_form(t, &x, &kp(2.0, 2)).unwrap();
            assert!((s - c).abs() <= 1e-9 * c.max(1e-3), "{t} {x:?}: {s} vs {c}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let q = QuadratureSpec::default();
        assert_eq!(kernel_spectral(0.0, &[0.0], &kp(2.0, 1), &q), Err(KernelError::Time(0.0)));
        let tiny = QuadratureSpec::new(16, 1.0).unwrap();
        assert!(matches!(
            kernel_spectral(0.01, &[0.0], &kp(2.0, 1), &tiny),
            Err(KernelError::CutoffTooSmall { .. })
        ));
        assert!(KernelParams::new(2.5, 1.0, 1).is_err());
        assert!(KernelParams::new(0.0, 1.0, 1).is_err());
        assert!(KernelParams::new(1.0, 0.0, 1).is_err());
        assert!(QuadratureSpec::new(15, 1.0).is_err());
        assert!(QuadratureSpec::new(18, 0.0).is_err());
    }

    #[test]
    fn riesz_values() {
        assert!((riesz(&[2.0], 0.5).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert_eq!(riesz(&[1.0], 0.3).unwrap(), 1.0);
        assert!((riesz(&[10.0], 0.9).unwrap() - 0.1258925412).abs() < 1e-10);
        assert_eq!(riesz(&[0.0], 0.5), Err(KernelError::Singular));
        assert!(riesz(&[1.0], 1.0).is_err());
        assert!((riesz(&[3.0, 4.0], 1.5).unwrap() - 5f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn riesz_constant_value() {
        assert!((riesz_fourier_constant(1, 0.5) - 2.5066282746).abs() < 1e-9);
    }

    #[test]
    fn bessel_reference() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j0(2.404825557695773)).abs() < 1e-13);
        assert!((bessel_j0(10.0) - (-0.2459357644513483)).abs() < 1e-13);
        assert!((bessel_j0(100.0) - 0.019985850304223122).abs() < 1e-13);
    }

    #[test]
    fn full_correlation_integral_rejects_bad_beta() {
        let q = QuadratureSpec::default();
        assert!(correlation_integral_full(1.0, &kp(2.0, 1), 1.0, &q).is_err());
        assert!(correlation_integral_full(1.0, &kp(0.5, 1), 0.6, &q).is_err());
    }

    #[test]
    fn stable_sampler_matches_cauchy_quartiles() {
        let mut rng = RngStream::new(3, 0);
        let n = 20000;
        let inside = (0..n)
            .filter(|_| sample_stable(1.0, 1.0, &mut rng).abs() < 1.0)
            .count();
        // P(|C| < 1) = 1/2
        let frac = inside as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.015, "{frac}");
    }

    #[test]
    fn tail_sampling_respects_region() {
        let mut rng = RngStream::new(5, 0);
        let law = TailLaw::Gauss { sd: 2f64.sqrt() };
        for _ in 0..1000 {
            assert!(law.sample_outer(8.0, &mut rng) >= 8.0);
        }
        let law = TailLaw::Cauchy { scale: 1.0 };
        for _ in 0..1000 {
            assert!(law.sample_outer(4.0, &mut rng) >= 4.0);
        }
    }

    #[test]
    fn full_integral_matches_gamma_form() {
        let q = QuadratureSpec::default();
        for &(alpha, beta, t, dim) in &[(2.0, 0.5, 1.0, 1), (1.0, 0.3, 0.2, 1), (1.5, 1.2, 3.0, 2), (0.5, 0.1, 1.0, 1)] {
            let k = kp(alpha, dim);
            let v = correlation_integral_full(t, &k, beta, &q).unwrap();
            let d = dim as f64;
            let sphere = if dim == 1 { 2.0 } else { 2.0 * PI };
            let exact = riesz_fourier_constant(dim, beta) * sphere / (2.0 * PI).powf(d) * gamma(beta / alpha)
                / (alpha * (2.0 * t).powf(beta / alpha));
            assert!((v / exact - 1.0).abs() < 1e-10, "{alpha} {beta}: {v} vs {exact}");
        }
    }

    #[test]
    fn truncated_integrals_vanish_into_full_for_small_radius() {
        let k = kp(2.0, 1);
        let q = QuadratureSpec::default();
        let full = correlation_integral_full(1.0, &k, 0.5, &q).unwrap();
        let mut rng = RngStream::new(11, 0);
        let oo = correlation_integral_truncated(1.0, 1e-6, &k, 0.5, TruncationCase::OuterOuter, 4000, &mut rng).unwrap();
        assert!((oo.value - full).abs() < 4.0 * oo.std_error + 1e-3 * full, "{oo:?} vs {full}");
        let oi = correlation_integral_truncated(1.0, 1e-6, &k, 0.5, TruncationCase::OuterInner, 200, &mut rng).unwrap();
        assert!(oi.value < 1e-4 * full, "{oi:?}");
    }
}
