//! Scalar functionals of a state `(u, w)`.
//!
//! Quadratic functionals are weighted sums over transform coefficients;
//! `Q(u) = ∫|u|^{p+1}` is a real-space Riemann sum.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, RealField, SpectralContext};
use crate::symbols::ModelSpec;

/// The pair `(u, w)` of the first-order system `u_t = w_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateUW {
    pub u: RealField,
    pub w: RealField,
}

impl StateUW {
    pub fn new(u: RealField, w: RealField) -> Result<Self> {
        u.same_grid(&w)?;
        Ok(Self { u, w })
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self {
            u: RealField::zeros(grid),
            w: RealField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `½‖B^{-1/2}w‖²`
    pub kinetic: f64,
    /// `I(u)`
    pub dispersive: f64,
    /// `Q(u)/(p+1)`
    pub nonlinear: f64,
    pub total: f64,
    pub momentum: f64,
}

/// `|u|^{p-1}u`, with `|u| = 0` mapped to exactly 0.
#[inline]
pub fn signed_power(u: f64, p: f64) -> f64 {
    let a = u.abs();
    if a == 0.0 {
        0.0
    } else if p == 3.0 {
        u * a * a
    } else if p.fract() == 0.0 && p < 32.0 {
        u * a.powi(p as i32 - 1)
    } else {
        u.signum() * a.powf(p)
    }
}

/// The nonlinearity `g(u) = -|u|^{p-1}u`.
#[inline]
pub fn nonlinearity(u: f64, p: f64) -> f64 {
    -signed_power(u, p)
}

/// `G(u) = ∫₀ᵘ g = -|u|^{p+1}/(p+1)`.
#[inline]
pub fn nonlinearity_primitive(u: f64, p: f64) -> f64 {
    -u.abs().powf(p + 1.0) / (p + 1.0)
}

/// Evaluator bound to one model and one grid. Symbol values at the grid
/// wavenumbers are cached.
#[derive(Clone, Debug)]
pub struct Functionals {
    model: ModelSpec,
    ctx: SpectralContext,
    l: Vec<f64>,
    b: Vec<f64>,
}

impl Functionals {
    pub fn new(model: &ModelSpec, grid: GridSpec) -> Self {
        let ctx = SpectralContext::new(grid);
        let l = ctx.wavenumbers().iter().map(|&xi| model.l().symbol(xi)).collect();
        let b = ctx.wavenumbers().iter().map(|&xi| model.b().symbol(xi)).collect();
        Self {
            model: model.clone(),
            ctx,
            l,
            b,
        }
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn ctx(&self) -> &SpectralContext {
        &self.ctx
    }

    pub fn grid(&self) -> &GridSpec {
        self.ctx.grid()
    }

    pub fn p(&self) -> f64 {
        self.model.p()
    }

    /// `l(ξ_k)` at every FFT index.
    pub fn l_values(&self) -> &[f64] {
        &self.l
    }

    /// `b(ξ_k)` at every FFT index.
    pub fn b_values(&self) -> &[f64] {
        &self.b
    }

    fn check(&self, f: &RealField) -> Result<()> {
        if f.grid() != self.grid() {
            return Err(Error::GridMismatch(format!(
                "field on {} evaluated on {}",
                f.grid(),
                self.grid()
            )));
        }
        Ok(())
    }

    fn form(&self, a: &[Complex64], c: &[Complex64], weight: impl Fn(usize) -> f64) -> f64 {
        let s: f64 = a
            .iter()
            .zip(c)
            .enumerate()
            .map(|(k, (x, y))| weight(k) * (x * y.conj()).re)
            .sum();
        s * self.ctx.parseval_weight()
    }

    /// `½Σ ((l-γ²)/b)|û|²` from transform coefficients.
    pub fn i_gamma_coeffs(&self, u_hat: &[Complex64], gamma: f64) -> f64 {
        let g2 = gamma * gamma;
        0.5 * self.form(u_hat, u_hat, |k| (self.l[k] - g2) / self.b[k])
    }

    /// `‖B^{-1/2}f‖²` from transform coefficients.
    pub fn b_inv_sq_coeffs(&self, f_hat: &[Complex64]) -> f64 {
        self.form(f_hat, f_hat, |k| 1.0 / self.b[k])
    }

    /// `⟨B^{-1/2}f, B^{-1/2}g⟩` from transform coefficients.
    pub fn b_inv_inner_coeffs(&self, f_hat: &[Complex64], g_hat: &[Complex64]) -> f64 {
        self.form(f_hat, g_hat, |k| 1.0 / self.b[k])
    }

    /// `I(u) = ½∫(B^{-1/2}L^{1/2}u)²`.
    pub fn i(&self, u: &RealField) -> Result<f64> {
        self.check(u)?;
        Ok(self.i_gamma_coeffs(&self.ctx.forward(u), 0.0))
    }

    /// `Q(u) = ∫|u|^{p+1}`.
    pub fn q(&self, u: &RealField) -> Result<f64> {
        self.check(u)?;
        Ok(self.q_samples(u.samples()))
    }

    pub fn q_samples(&self, u: &[f64]) -> f64 {
        let e = self.p() + 1.0;
        let s: f64 = if e == 4.0 {
            u.iter().map(|v| (v * v) * (v * v)).sum()
        } else {
            u.iter().map(|v| v.abs().powf(e)).sum()
        };
        self.grid().spacing() * s
    }

    /// `‖B^{-1/2}u‖²`.
    pub fn b_inv_sq(&self, u: &RealField) -> Result<f64> {
        self.check(u)?;
        Ok(self.b_inv_sq_coeffs(&self.ctx.forward(u)))
    }

    /// `I_γ(u) = I(u) - (γ²/2)‖B^{-1/2}u‖²`, defined for `γ² < c₁²`.
    pub fn i_gamma(&self, u: &RealField, gamma: f64) -> Result<f64> {
        self.model.check_gamma(gamma)?;
        self.check(u)?;
        Ok(self.i_gamma_coeffs(&self.ctx.forward(u), gamma))
    }

    /// `V(u) = E(u, 0) = I(u) - Q(u)/(p+1)`.
    pub fn potential(&self, u: &RealField) -> Result<f64> {
        Ok(self.i(u)? - self.q(u)? / (self.p() + 1.0))
    }

    pub fn energy(&self, state: &StateUW) -> Result<EnergyBreakdown> {
        self.check(&state.u)?;
        self.check(&state.w)?;
        let u_hat = self.ctx.forward(&state.u);
        let w_hat = self.ctx.forward(&state.w);
        Ok(self.energy_coeffs(&u_hat, &w_hat, state.u.samples()))
    }

    pub fn energy_coeffs(&self, u_hat: &[Complex64], w_hat: &[Complex64], u: &[f64]) -> EnergyBreakdown {
        let kinetic = 0.5 * self.b_inv_sq_coeffs(w_hat);
        let dispersive = self.i_gamma_coeffs(u_hat, 0.0);
        let nonlinear = self.q_samples(u) / (self.p() + 1.0);
        EnergyBreakdown {
            kinetic,
            dispersive,
            nonlinear,
            total: kinetic + dispersive - nonlinear,
            momentum: self.b_inv_inner_coeffs(u_hat, w_hat),
        }
    }

    /// `M(u, w) = ∫(B^{-1/2}w)(B^{-1/2}u)`.
    pub fn momentum(&self, state: &StateUW) -> Result<f64> {
        self.check(&state.u)?;
        self.check(&state.w)?;
        Ok(self.b_inv_inner_coeffs(&self.ctx.forward(&state.u), &self.ctx.forward(&state.w)))
    }

    /// `E + γM`.
    pub fn augmented_energy(&self, state: &StateUW, gamma: f64) -> Result<f64> {
        self.model.check_gamma(gamma)?;
        let e = self.energy(state)?;
        Ok(e.total + gamma * e.momentum)
    }

    /// `½‖B^{-1/2}(w+γu)‖² + I_γ(u) - Q(u)/(p+1)`, which equals `E + γM`.
    pub fn augmented_energy_rhs(&self, state: &StateUW, gamma: f64) -> Result<f64> {
        self.model.check_gamma(gamma)?;
        let shifted = state.w.combine(1.0, &state.u, gamma)?;
        let kinetic = 0.5 * self.b_inv_sq(&shifted)?;
        Ok(kinetic + self.i_gamma(&state.u, gamma)? - self.q(&state.u)? / (self.p() + 1.0))
    }
}
