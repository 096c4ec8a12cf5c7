//! Periodic grid, FFT-backed multipliers and the norms used by every functional.
//!
//! The whole-line problem is replaced by the box `[-X, X)` with `N` uniformly
//! spaced samples `x_j = (j - N/2)·h`, `h = 2X/N`. Transform coefficients are
//! stored in the usual FFT layout: index `k < N/2` carries wavenumber
//! `πk/X`, index `k >= N/2` carries `π(k-N)/X`.
//!
//! Discrete Parseval with this normalization reads
//! `h·Σ|f_j|² = (h/N)·Σ|F_k|²`, which is the weight used for all quadratic
//! forms evaluated in frequency space.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_length: f64,
    n_modes: usize,
}

impl GridSpec {
    pub fn new(half_length: f64, n_modes: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        if n_modes < 4 || !n_modes.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "number of modes must be even and at least 4, got {n_modes}"
            )));
        }
        Ok(Self {
            half_length,
            n_modes,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n_modes as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n_modes / 2) as f64) * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_modes).map(|j| self.x(j)).collect()
    }

    /// Signed integer mode number of FFT index `k`.
    pub fn mode_number(&self, k: usize) -> i64 {
        if k < self.n_modes / 2 {
            k as i64
        } else {
            k as i64 - self.n_modes as i64
        }
    }

    pub fn wavenumber(&self, k: usize) -> f64 {
        PI * self.mode_number(k) as f64 / self.half_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_modes).map(|k| self.wavenumber(k)).collect()
    }

    /// `πN/(2X)`, the magnitude of the Nyquist wavenumber.
    pub fn max_wavenumber(&self) -> f64 {
        PI * (self.n_modes / 2) as f64 / self.half_length
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_modes / 2
    }

    /// Same spacing on a box twice as long.
    pub fn doubled_domain(&self) -> Self {
        Self {
            half_length: 2.0 * self.half_length,
            n_modes: 2 * self.n_modes,
        }
    }

    /// Same box with twice as many samples.
    pub fn refined(&self) -> Self {
        Self {
            half_length: self.half_length,
            n_modes: 2 * self.n_modes,
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X={}, N={}", self.half_length, self.n_modes)
    }
}

/// Real samples of a grid function. Entries are finite by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    samples: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_modes() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid with {} modes",
                samples.len(),
                grid.n_modes()
            )));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field sample {j}")));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.n_modes()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|v| v * factor).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &RealField, b: f64) -> Result<Self> {
        self.same_grid(other)?;
        Self::new(
            self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    pub fn same_grid(&self, other: &RealField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "fields on {} and {}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `h·Σ f`.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.samples.iter().sum::<f64>()
    }

    /// Index of the sample with the largest magnitude.
    pub fn argmax_abs(&self) -> usize {
        self.samples
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, v)| {
                if v.abs() > bv {
                    (i, v.abs())
                } else {
                    (bi, bv)
                }
            })
            .0
    }
}

/// `(h·Σ|f|^p)^{1/p}`.
pub fn lp_norm(f: &RealField, p_exp: f64) -> f64 {
    let h = f.grid().spacing();
    let s: f64 = f.samples().iter().map(|v| v.abs().powf(p_exp)).sum();
    (h * s).powf(1.0 / p_exp)
}

/// Transform plans and wavenumbers for one grid. A context is meant to be
/// owned by a single worker; create one per thread with [`SpectralContext::new`].
#[derive(Clone)]
pub struct SpectralContext {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    xi: Vec<f64>,
}

impl fmt::Debug for SpectralContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralContext").field("grid", &self.grid).finish()
    }
}

impl SpectralContext {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n_modes();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            xi: grid.wavenumbers(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.xi
    }

    /// Weight turning `Σ w_k |F_k|²` into the quadrature `∫ ...dx`.
    pub fn parseval_weight(&self) -> f64 {
        self.grid.spacing() / self.grid.n_modes() as f64
    }

    pub fn forward_samples(&self, samples: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub fn forward(&self, f: &RealField) -> Vec<Complex64> {
        self.forward_samples(f.samples())
    }

    /// Inverse transform keeping the real part, normalized by `1/N`.
    pub fn inverse_real(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut coeffs);
        let scale = 1.0 / self.grid.n_modes() as f64;
        coeffs.into_iter().map(|c| c.re * scale).collect()
    }

    pub fn to_field(&self, coeffs: Vec<Complex64>) -> Result<RealField> {
        RealField::new(self.grid, self.inverse_real(coeffs))
    }

    fn check_grid(&self, f: &RealField) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "field on {} used with context on {}",
                f.grid(),
                self.grid
            )));
        }
        Ok(())
    }

    /// Inverse transform of `m(ξ_k)·f̂_k` for an even real symbol `m`.
    pub fn apply_multiplier(&self, f: &RealField, m: impl Fn(f64) -> f64) -> Result<RealField> {
        self.check_grid(f)?;
        let mut coeffs = self.forward(f);
        for (c, &xi) in coeffs.iter_mut().zip(&self.xi) {
            let mk = m(xi);
            if !mk.is_finite() {
                return Err(Error::NonFinite(format!("multiplier at ξ = {xi}")));
            }
            *c *= mk;
        }
        self.to_field(coeffs)
    }

    /// Multiplies by `iξ`; the Nyquist mode is dropped so the result stays real.
    pub fn derivative(&self, f: &RealField) -> Result<RealField> {
        self.check_grid(f)?;
        let mut coeffs = self.forward(f);
        self.differentiate_coeffs(&mut coeffs);
        self.to_field(coeffs)
    }

    pub fn differentiate_coeffs(&self, coeffs: &mut [Complex64]) {
        for (c, &xi) in coeffs.iter_mut().zip(&self.xi) {
            *c *= Complex64::new(0.0, xi);
        }
        coeffs[self.grid.nyquist_index()] = Complex64::new(0.0, 0.0);
    }

    /// Divides by `iξ` with the zero mode set to 0. The input must be mean
    /// free: `|∫f| = h·|F_0|` may not exceed `1e-12·‖f‖_{L²}·√(2X)`.
    pub fn antiderivative(&self, f: &RealField) -> Result<RealField> {
        self.check_grid(f)?;
        let mut coeffs = self.forward(f);
        let zero_mode = coeffs[0].norm() * self.grid.spacing();
        let tolerance = 1e-12 * lp_norm(f, 2.0) * (2.0 * self.grid.half_length()).sqrt();
        if zero_mode > tolerance {
            return Err(Error::NotMeanFree {
                zero_mode,
                tolerance,
            });
        }
        coeffs[0] = Complex64::new(0.0, 0.0);
        for (c, &xi) in coeffs.iter_mut().zip(&self.xi).skip(1) {
            *c /= Complex64::new(0.0, xi);
        }
        coeffs[self.grid.nyquist_index()] = Complex64::new(0.0, 0.0);
        self.to_field(coeffs)
    }

    /// `(h/N)·Σ w(ξ_k)·Re(a_k·conj(b_k))`.
    pub fn weighted_inner(&self, a: &[Complex64], b: &[Complex64], w: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = a
            .iter()
            .zip(b)
            .zip(&self.xi)
            .map(|((x, y), &xi)| w(xi) * (x * y.conj()).re)
            .sum();
        s * self.parseval_weight()
    }

    /// `‖f‖_{H^s}` with `(1+ξ²)^s` weights; `s = 0` recovers the L² norm.
    pub fn sobolev_norm(&self, f: &RealField, s: f64) -> Result<f64> {
        self.check_grid(f)?;
        let c = self.forward(f);
        Ok(self.sobolev_norm_coeffs(&c, s))
    }

    pub fn sobolev_norm_coeffs(&self, coeffs: &[Complex64], s: f64) -> f64 {
        let sum: f64 = coeffs
            .iter()
            .zip(&self.xi)
            .map(|(c, &xi)| {
                let w = if s == 0.0 { 1.0 } else { (1.0 + xi * xi).powf(s) };
                w * c.norm_sqr()
            })
            .sum();
        (sum * self.parseval_weight()).sqrt()
    }
}
