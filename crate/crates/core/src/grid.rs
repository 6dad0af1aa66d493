//! Periodic lattice standing in for `R^d`, lattice fields, and the FFT plumbing
//! shared by the noise synthesizer and the solver.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("dimension must be 1 or 2, got {0}")]
    Dimension(usize),
    #[error("points per axis must be even and at least 32, got {0}")]
    Points(usize),
    #[error("side length must be positive and finite, got {0}")]
    SideLength(f64),
    #[error("field has {got} values but the grid has {expected} sites")]
    Size { expected: usize, got: usize },
    #[error("non-finite value at site {site}")]
    NonFinite { site: usize },
}

/// Periodic box `[-L/2, L/2)^d` sampled with `N` points per axis.
///
/// Site index `i` on an axis sits at coordinate `i * dx` for `i < N/2` and at
/// `(i - N) * dx` otherwise, so site 0 is the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    side_length: f64,
    points_per_axis: usize,
}

impl GridSpec {
    pub fn new(dim: usize, side_length: f64, points_per_axis: usize) -> Result<Self, GridError> {
        if !(dim == 1 || dim == 2) {
            return Err(GridError::Dimension(dim));
        }
        if points_per_axis < 32 || !points_per_axis.is_multiple_of(2) {
            return Err(GridError::Points(points_per_axis));
        }
        if !(side_length.is_finite() && side_length > 0.0) {
            return Err(GridError::SideLength(side_length));
        }
        Ok(Self {
            dim,
            side_length,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.side_length / self.points_per_axis as f64
    }

    /// Total number of sites, `N^d`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.side_length.powi(self.dim as i32)
    }

    /// Signed integer offset of axis index `i` in `[-N/2, N/2)`.
    pub fn axis_offset(&self, i: usize) -> i64 {
        let n = self.points_per_axis as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Per-axis indices of a flat site index (row-major).
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        let n = self.points_per_axis;
        match self.dim {
            1 => [idx, 0],
            _ => [idx / n, idx % n],
        }
    }

    pub fn flatten(&self, ix: [usize; 2]) -> usize {
        match self.dim {
            1 => ix[0],
            _ => ix[0] * self.points_per_axis + ix[1],
        }
    }

    /// Coordinates of a site in the centered box.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let ix = self.unflatten(idx);
        let dx = self.spacing();
        let mut out = [0.0; 2];
        for (a, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = self.axis_offset(ix[a]) as f64 * dx;
        }
        out
    }

    /// Euclidean norm of the site coordinates, i.e. torus distance to the origin.
    pub fn radius(&self, idx: usize) -> f64 {
        let c = self.coords(idx);
        (c[0] * c[0] + c[1] * c[1]).sqrt()
    }

    /// Torus distance between two sites.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.radius(self.difference(a, b))
    }

    /// Flat index of the site `a - b` (mod N on each axis).
    pub fn difference(&self, a: usize, b: usize) -> usize {
        let n = self.points_per_axis;
        let ia = self.unflatten(a);
        let ib = self.unflatten(b);
        let mut out = [0usize; 2];
        for axis in 0..self.dim {
            out[axis] = (ia[axis] + n - ib[axis]) % n;
        }
        self.flatten(out)
    }

    /// Flat index of the site `a + b` (mod N on each axis).
    pub fn shift(&self, a: usize, b: usize) -> usize {
        let n = self.points_per_axis;
        let ia = self.unflatten(a);
        let ib = self.unflatten(b);
        let mut out = [0usize; 2];
        for axis in 0..self.dim {
            out[axis] = (ia[axis] + ib[axis]) % n;
        }
        self.flatten(out)
    }

    /// Flat index of the site with per-axis signed offsets from the origin.
    pub fn site_at(&self, offsets: [i64; 2]) -> usize {
        let n = self.points_per_axis as i64;
        let mut ix = [0usize; 2];
        for axis in 0..self.dim {
            ix[axis] = offsets[axis].rem_euclid(n) as usize;
        }
        self.flatten(ix)
    }

    /// Flat index of the mode `-k`.
    pub fn negate(&self, idx: usize) -> usize {
        let n = self.points_per_axis;
        let ix = self.unflatten(idx);
        let mut out = [0usize; 2];
        for axis in 0..self.dim {
            out[axis] = (n - ix[axis]) % n;
        }
        self.flatten(out)
    }

    /// Angular wavenumber vector of a mode index, `2 pi k / L` with `k` in `[-N/2, N/2)`.
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        let ix = self.unflatten(idx);
        let base = 2.0 * PI / self.side_length;
        let mut out = [0.0; 2];
        for (a, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = self.axis_offset(ix[a]) as f64 * base;
        }
        out
    }

    pub fn wavenumber(&self, idx: usize) -> f64 {
        let k = self.wavevector(idx);
        (k[0] * k[0] + k[1] * k[1]).sqrt()
    }

    /// Smallest nonzero wavenumber `2 pi / L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.side_length
    }

    /// Flat site index nearest to a physical offset along the first axis.
    pub fn site_along_axis(&self, distance: f64) -> usize {
        let steps = (distance / self.spacing()).round() as i64;
        self.site_at([steps, 0])
    }
}

/// Forward/inverse unnormalized DFT on a 1-d or 2-d lattice.
///
/// `forward` computes `sum_j v_j e^{-i xi_k x_j}`, `inverse` computes
/// `sum_k v_k e^{+i xi_k x_j}`; neither divides by `N^d`.
#[derive(Clone)]
pub struct LatticeFft {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for LatticeFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LatticeFft").field("grid", &self.grid).finish()
    }
}

impl LatticeFft {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn forward(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.inverse);
    }

    /// Forward transform of a real lattice function.
    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse transform divided by `N^d`, keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex<f64>>) -> Vec<f64> {
        self.inverse(&mut spectrum);
        let scale = 1.0 / self.grid.len() as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    fn run(&self, data: &mut [Complex<f64>], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.grid.len(), "buffer does not match grid");
        let n = self.grid.points_per_axis();
        plan.process(data);
        if self.grid.dim() == 2 {
            // columns via transpose, transform rows again, transpose back
            let mut t = transpose(data, n);
            plan.process(&mut t);
            let back = transpose(&t, n);
            data.copy_from_slice(&back);
        }
    }
}

fn transpose(data: &[Complex<f64>], n: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            out[c * n + r] = data[r * n + c];
        }
    }
    out
}

/// Real lattice function at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>, time: f64) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Size {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(site) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite { site });
        }
        Ok(Self { grid, values, time })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
            time: 0.0,
        }
    }

    /// Field sampled from a function of the site coordinates.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self {
            grid,
            values,
            time: 0.0,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(GridSpec::new(3, 1.0, 32), Err(GridError::Dimension(3)));
        assert_eq!(GridSpec::new(1, 1.0, 31), Err(GridError::Points(31)));
        assert_eq!(GridSpec::new(1, 1.0, 16), Err(GridError::Points(16)));
        assert!(GridSpec::new(1, -2.0, 32).is_err());
    }

    #[test]
    fn coordinates_are_centered() {
        let g = GridSpec::new(1, 8.0, 32).unwrap();
        assert_eq!(g.coords(0)[0], 0.0);
        assert_eq!(g.coords(1)[0], 0.25);
        assert_eq!(g.coords(31)[0], -0.25);
        assert_eq!(g.coords(16)[0], -4.0);
        assert!((g.distance(1, 31) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fft_roundtrip_2d() {
        let g = GridSpec::new(2, 4.0, 32).unwrap();
        let fft = LatticeFft::new(g);
        let vals: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let spec = fft.forward_real(&vals);
        let back = fft.inverse_real(spec);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_matches_direct_dft_2d() {
        let g = GridSpec::new(2, 4.0, 32).unwrap();
        let fft = LatticeFft::new(g);
        let vals: Vec<f64> = (0..g.len()).map(|i| ((i * 7 % 13) as f64).cos()).collect();
        let spec = fft.forward_real(&vals);
        for &k in &[0usize, 5, 33, 700] {
            let xi = g.wavevector(k);
            let mut acc = Complex::new(0.0, 0.0);
            for (j, v) in vals.iter().enumerate() {
                let x = g.coords(j);
                let ph = -(xi[0] * x[0] + xi[1] * x[1]);
                acc += Complex::new(ph.cos(), ph.sin()) * v;
            }
            assert!((acc - spec[k]).norm() < 1e-9, "mode {k}");
        }
    }
}
