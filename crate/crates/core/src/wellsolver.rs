//! Best embedding constant `m(γ)` and well depth `d(γ)`.
//!
//! `m(γ)` is the minimum of `I_γ(u)` on `Q(u) = 1`, equivalently the
//! minimum of the scale-invariant quotient `J(u) = I_γ(u)^{(p+1)/2} / Q(u)`
//! raised to `2/(p+1)`. The depth follows in closed form,
//!
//! ```text
//! d(γ) = ((p-1)/(p+1)) · 2^{2/(p-1)} · m(γ)^{(p+1)/(p-1)}.
//! ```
//!
//! The minimizer is found by gradient descent on the constraint surface.
//! Gradients are taken in the inner product `⟨u, v⟩_A = ⟨Au, v⟩` with
//! `A = (l - γ²)/b`, so the step direction is
//!
//! ```text
//! d = u - c·A⁻¹(|u|^{p-1}u),   c = Q(u) / ⟨|u|^{p-1}u, A⁻¹(|u|^{p-1}u)⟩,
//! ```
//!
//! which is tangent to `Q = const` to first order. Each trial step is
//! rescaled back onto `Q = 1` and accepted by Armijo backtracking.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::{signed_power, Functionals};
use crate::spectral::{GridSpec, RealField};
use crate::symbols::ModelSpec;

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Relative decrease of `J` over `window` steps below which the descent
    /// is considered stalled.
    pub rel_tol: f64,
    /// Bound on `‖d‖_A / ‖u‖_A`.
    pub grad_tol: f64,
    pub window: usize,
    pub armijo: f64,
    /// Extra starting fields tried after the Gaussian and sech seeds.
    pub seeds: Vec<RealField>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            rel_tol: 1e-12,
            grad_tol: 1e-8,
            window: 10,
            armijo: 1e-4,
            seeds: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdResult {
    pub model: ModelSpec,
    pub grid: GridSpec,
    pub gamma: f64,
    pub m_value: f64,
    pub d_value: f64,
    /// Minimizer normalized to `Q = 1`.
    pub minimizer: RealField,
    pub iterations: usize,
    /// `‖d‖_A / ‖u‖_A` at the returned minimizer.
    pub residual: f64,
}

impl ThresholdResult {
    pub fn p(&self) -> f64 {
        self.model.p()
    }

    /// The minimizer rescaled onto `2I_γ = Q`; its potential equals `d`.
    pub fn ground_state(&self) -> RealField {
        let lambda = (2.0 * self.m_value).powf(1.0 / (self.p() - 1.0));
        self.minimizer.scaled(lambda)
    }
}

pub fn depth_from_m(m_value: f64, p: f64) -> f64 {
    (p - 1.0) / (p + 1.0) * 2f64.powf(2.0 / (p - 1.0)) * m_value.powf((p + 1.0) / (p - 1.0))
}

/// `J(u) = I_γ(u)^{(p+1)/2} / Q(u)`.
pub fn quotient(fns: &Functionals, u: &RealField, gamma: f64) -> Result<f64> {
    let p = fns.p();
    Ok(fns.i_gamma(u, gamma)?.powf(0.5 * (p + 1.0)) / fns.q(u)?)
}

/// Returns `λ = (2I_γ(u)/Q(u))^{1/(p-1)}` and `λu`, which satisfies
/// `2I_γ(λu) = Q(λu)`.
pub fn nehari_rescale(fns: &Functionals, u: &RealField, gamma: f64) -> Result<(f64, RealField)> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let i = fns.i_gamma(u, gamma)?;
    let q = fns.q(u)?;
    let lambda = (2.0 * i / q).powf(1.0 / (fns.p() - 1.0));
    Ok((lambda, u.scaled(lambda)))
}

/// `‖B⁻¹(L-γ²)φ - |φ|^{p-1}φ‖ / ‖φ‖` in L².
pub fn static_residual(fns: &Functionals, phi: &RealField, gamma: f64) -> Result<f64> {
    fns.model().check_gamma(gamma)?;
    let g2 = gamma * gamma;
    let a = fns
        .ctx()
        .apply_multiplier(phi, |xi| (fns.model().l().symbol(xi) - g2) / fns.model().b().symbol(xi))?;
    let p = fns.p();
    let (num, den) = a
        .samples()
        .iter()
        .zip(phi.samples())
        .fold((0.0, 0.0), |(n, d), (av, &f)| {
            let r = av - signed_power(f, p);
            (n + r * r, d + f * f)
        });
    Ok((num / den).sqrt())
}

struct Descent<'a> {
    fns: &'a Functionals,
    gamma: f64,
    a: Vec<f64>,
}

struct RunOutcome {
    u: RealField,
    i: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
}

impl<'a> Descent<'a> {
    fn new(fns: &'a Functionals, gamma: f64) -> Self {
        let g2 = gamma * gamma;
        let a = fns
            .l_values()
            .iter()
            .zip(fns.b_values())
            .map(|(l, b)| (l - g2) / b)
            .collect();
        Self { fns, gamma, a }
    }

    fn form(&self, x: &[Complex64], y: &[Complex64], w: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = x
            .iter()
            .zip(y)
            .zip(&self.a)
            .map(|((x, y), &a)| w(a) * (x * y.conj()).re)
            .sum();
        s * self.fns.ctx().parseval_weight()
    }

    /// Rescales `samples` to `Q = 1`.
    fn normalize(&self, mut samples: Vec<f64>) -> Option<Vec<f64>> {
        let q = self.fns.q_samples(&samples);
        if !(q.is_finite() && q > 0.0) {
            return None;
        }
        let s = q.powf(-1.0 / (self.fns.p() + 1.0));
        samples.iter_mut().for_each(|v| *v *= s);
        Some(samples)
    }

    fn run(&self, seed: &RealField, opts: &MinimizeOptions) -> Result<RunOutcome> {
        let ctx = self.fns.ctx();
        let p = self.fns.p();
        let half_exp = 0.5 * (p + 1.0);
        let mut u = self
            .normalize(seed.samples().to_vec())
            .ok_or(Error::ZeroField)?;
        let mut u_hat = ctx.forward_samples(&u);
        let mut i = 0.5 * self.form(&u_hat, &u_hat, |a| a);
        let mut history = vec![i.powf(half_exp)];
        let mut alpha: f64 = 1.0;
        let mut residual = f64::INFINITY;

        for it in 0..opts.max_iters {
            let n: Vec<f64> = u.iter().map(|&v| signed_power(v, p)).collect();
            let n_hat = ctx.forward_samples(&n);
            let denom = self.form(&n_hat, &n_hat, |a| 1.0 / a);
            let q: f64 = self.fns.q_samples(&u);
            let c = q / denom;
            let d_hat: Vec<Complex64> = u_hat
                .iter()
                .zip(&n_hat)
                .zip(&self.a)
                .map(|((uh, nh), &a)| uh - nh * (c / a))
                .collect();
            let slope = self.form(&d_hat, &d_hat, |a| a);
            residual = (slope.max(0.0) / (2.0 * i)).sqrt();

            let stalled = history.len() > opts.window && {
                let old = history[history.len() - 1 - opts.window];
                let now = history[history.len() - 1];
                old - now <= opts.rel_tol * now
            };
            if residual < opts.grad_tol && stalled {
                return Ok(self.finish(u, it, residual, true));
            }

            let mut step = (2.0 * alpha).min(1.0);
            let mut accepted = None;
            while step > 1e-14 {
                let trial_hat: Vec<Complex64> =
                    u_hat.iter().zip(&d_hat).map(|(uh, dh)| uh - dh * step).collect();
                if let Some(trial) = self.normalize(ctx.inverse_real(trial_hat)) {
                    let t_hat = ctx.forward_samples(&trial);
                    let i_new = 0.5 * self.form(&t_hat, &t_hat, |a| a);
                    if i_new <= i - opts.armijo * step * slope {
                        accepted = Some((trial, t_hat, i_new));
                        break;
                    }
                }
                step *= 0.5;
            }
            match accepted {
                Some((trial, t_hat, i_new)) => {
                    u = trial;
                    u_hat = t_hat;
                    i = i_new;
                    alpha = step;
                    history.push(i.powf(half_exp));
                }
                None => {
                    // no descent possible at working precision
                    let converged = residual < opts.grad_tol;
                    return Ok(self.finish(u, it, residual, converged));
                }
            }
        }
        Ok(self.finish(u, opts.max_iters, residual, false))
    }

    fn finish(&self, u: Vec<f64>, iterations: usize, residual: f64, converged: bool) -> RunOutcome {
        let u = RealField::new(*self.fns.grid(), u).expect("finite iterate");
        let u_hat = self.fns.ctx().forward(&u);
        let i = self.fns.i_gamma_coeffs(&u_hat, self.gamma);
        RunOutcome {
            u,
            i,
            iterations,
            residual,
            converged,
        }
    }
}

fn default_seeds(grid: GridSpec) -> Result<Vec<RealField>> {
    Ok(vec![
        RealField::from_fn(grid, |x| (-x * x).exp())?,
        RealField::from_fn(grid, |x| 1.0 / x.cosh())?,
    ])
}

/// Minimizes `J` from each seed and keeps the smallest value; among equal
/// values the minimizer whose peak sits closest to the origin wins.
pub fn minimize_embedding_constant(
    model: &ModelSpec,
    grid: GridSpec,
    gamma: f64,
    opts: &MinimizeOptions,
) -> Result<ThresholdResult> {
    model.ensure_valid()?;
    model.check_gamma(gamma)?;
    let fns = Functionals::new(model, grid);
    let descent = Descent::new(&fns, gamma);

    let mut seeds = default_seeds(grid)?;
    for s in &opts.seeds {
        if s.grid() != &grid {
            return Err(Error::GridMismatch(format!(
                "seed on {} for minimization on {grid}",
                s.grid()
            )));
        }
        seeds.push(s.clone());
    }

    let mut runs = Vec::with_capacity(seeds.len());
    for seed in &seeds {
        runs.push(descent.run(seed, opts)?);
    }

    let peak_offset = |u: &RealField| grid.x(u.argmax_abs()).abs();
    let better = |a: &RunOutcome, b: &RunOutcome| {
        if (a.i - b.i).abs() <= 1e-10 * b.i {
            peak_offset(&a.u) < peak_offset(&b.u)
        } else {
            a.i < b.i
        }
    };
    let any_converged = runs.iter().any(|r| r.converged);
    let mut best: Option<RunOutcome> = None;
    for r in runs.into_iter().filter(|r| r.converged || !any_converged) {
        if best.as_ref().is_none_or(|b| better(&r, b)) {
            best = Some(r);
        }
    }
    let best = best.ok_or(Error::ZeroField)?;

    let result = ThresholdResult {
        model: model.clone(),
        grid,
        gamma,
        m_value: best.i,
        d_value: depth_from_m(best.i, model.p()),
        minimizer: best.u,
        iterations: best.iterations,
        residual: best.residual,
    };
    if any_converged {
        Ok(result)
    } else {
        Err(Error::NotConverged {
            iterations: result.iterations,
            residual: result.residual,
            best: Box::new(result),
        })
    }
}
