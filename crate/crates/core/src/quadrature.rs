//! Composite Gauss-Legendre rules with geometric grading toward endpoints
//! where the integrand has an algebraic singularity or a kink.

use std::f64::consts::PI;
use std::sync::OnceLock;

const ORDER: usize = 16;
const GRADE_RATIO: f64 = 0.15;
const GRADE_LEVELS: usize = 60;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Integral of `f` over `[a, b]` with one Gauss-Legendre panel.
pub fn panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// Which endpoints of an interval carry a singularity worth grading toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    None,
    Left,
    Right,
    Both,
}

/// Composite rule on `[a, b]`: `panels` uniform panels, with the first and/or
/// last panel replaced by a geometrically graded cluster.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize, grading: Grading) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let grade_left = matches!(grading, Grading::Left | Grading::Both);
    let grade_right = matches!(grading, Grading::Right | Grading::Both);
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let hi = if p + 1 == panels { b } else { lo + h };
        if p == 0 && grade_left {
            total += graded_toward_left(&mut f, lo, hi);
        } else if p + 1 == panels && grade_right {
            total += graded_toward_right(&mut f, lo, hi);
        } else {
            total += panel(&mut f, lo, hi);
        }
    }
    total
}

fn graded_toward_left(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let width = b - a;
    let mut total = 0.0;
    let mut hi = 1.0;
    for _ in 0..GRADE_LEVELS {
        let lo = hi * GRADE_RATIO;
        total += panel(f, a + lo * width, a + hi * width);
        hi = lo;
    }
    total + panel(f, a, a + hi * width)
}

fn graded_toward_right(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let width = b - a;
    let mut total = 0.0;
    let mut hi = 1.0;
    for _ in 0..GRADE_LEVELS {
        let lo = hi * GRADE_RATIO;
        total += panel(f, b - hi * width, b - lo * width);
        hi = lo;
    }
    total + panel(f, b - hi * width, b)
}

/// Integral over `[a, inf)` via `x = a + s / (1 - s)`, graded toward both ends.
pub fn integrate_to_infinity(mut f: impl FnMut(f64) -> f64, a: f64, scale: f64, panels: usize, grade_left: bool) -> f64 {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let x = a + scale * s / (1.0 - s);
        let jac = scale / ((1.0 - s) * (1.0 - s));
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let grading = if grade_left { Grading::Both } else { Grading::Right };
    integrate(g, 0.0, 1.0, panels, grading)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m30 - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity_is_resolved() {
        // int_0^1 x^{-1/2} dx = 2
        let v = integrate(|x| x.powf(-0.5), 0.0, 1.0, 4, Grading::Left);
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        let v = integrate(|x| (-x).powf(-0.75), -1.0, 0.0, 4, Grading::Right);
        assert!((v - 4.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn semi_infinite_range() {
        // int_0^inf e^{-x} dx = 1, int_1^inf x^{-2.5} dx = 1/1.5
        let v = integrate_to_infinity(|x| (-x).exp(), 0.0, 1.0, 32, false);
        assert!((v - 1.0).abs() < 1e-12, "{v}");
        let v = integrate_to_infinity(|x| x.powf(-2.5), 1.0, 1.0, 32, false);
        assert!((v - 1.0 / 1.5).abs() < 1e-10, "{v}");
    }
}
