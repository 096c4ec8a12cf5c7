//! Pseudo-spectral integration of
//!
//! ```text
//! u_t = w_x,    w_t = L u_x + B g(u)_x,    g(u) = -|u|^{p-1}u
//! ```
//!
//! with classical RK4 on the transform coefficients. The nonlinearity is
//! evaluated pointwise in real space and, when dealiasing is on, its modes
//! above `N/3` are discarded before differentiation.
//!
//! With Levine tracking the antiderivative `v` (`v_t = w`, `v_x = u`) is
//! advanced alongside and
//!
//! ```text
//! H   = ½‖B^{-1/2}v‖²
//! H'  = ⟨B^{-1/2}v, B^{-1/2}w⟩
//! H'' = ‖B^{-1/2}w‖² - 2I(u) + Q(u)
//! ```
//!
//! are recorded at every output sample.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify_with, Classification, Label, SIGN_TOLERANCE};
use crate::error::{Error, Result};
use crate::functionals::{nonlinearity, Functionals, StateUW};
use crate::spectral::RealField;
use crate::wellsolver::ThresholdResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record diagnostics every `output_stride` steps (and at the last step).
    pub output_stride: usize,
    pub dealias: bool,
    pub blowup_norm_threshold: f64,
    pub levine_tracking: bool,
    /// Times at which full states are kept; each is taken at the first step
    /// reaching it.
    pub snapshot_times: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            t_end: 1.0,
            output_stride: 10,
            dealias: true,
            blowup_norm_threshold: 1e6,
            levine_tracking: false,
            snapshot_times: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidParameter("output_stride must be at least 1".into()));
        }
        if !(self.blowup_norm_threshold > 0.0) {
            return Err(Error::InvalidParameter(
                "blowup_norm_threshold must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `round(t_end / dt)`, at least one step.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

/// `0.5 / (max|ξ| · max √l)` over the grid wavenumbers.
pub fn cfl_limit(fns: &Functionals) -> f64 {
    let xi_max = fns.grid().max_wavenumber();
    let l_max = fns.l_values().iter().cloned().fold(0.0, f64::max);
    0.5 / (xi_max * l_max.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub energy: f64,
    pub momentum: f64,
    /// `E + γM`; equals `energy` when `γ = 0`.
    pub energy_used: f64,
    /// `½‖B^{-1/2}w‖²`
    pub kinetic: f64,
    /// `½‖B^{-1/2}(w + γu)‖²`
    pub kinetic_gamma: f64,
    pub i: f64,
    pub i_gamma: f64,
    pub q: f64,
    pub two_i_minus_q: f64,
    /// `2I_γ - Q`
    pub sign_quantity: f64,
    pub u_hs0: f64,
    pub w_hs: f64,
    pub h: Option<f64>,
    pub hp: Option<f64>,
    pub hpp: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupTrigger {
    NormThreshold,
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub detected: bool,
    pub t_detect: Option<f64>,
    pub trigger: Option<BlowupTrigger>,
    /// `‖u‖_{H^{s₀}} + ‖w‖_{H^{s₀-ρ/2}}` at detection.
    pub norm_at_detect: Option<f64>,
    /// `(p+1)(d(γ) - E₀ - γM₀)`.
    pub delta_bound: f64,
    pub nu: f64,
    /// `t₀ + H(t₀)/(ν H'(t₀))` at the first sample with `H, H' > 0`; only
    /// reported for data starting in `Σ₋(γ)`.
    pub levine_upper_bound: Option<f64>,
    /// First sample time at which `|E - E₀| > RESOLUTION_DRIFT·max(1, |E₀|)`.
    /// Past this point the grid no longer resolves the solution.
    pub resolution_lost_at: Option<f64>,
}

/// Relative energy drift taken as loss of spatial resolution.
pub const RESOLUTION_DRIFT: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: StateUW,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub gamma: f64,
    pub p: f64,
    pub dt: f64,
    pub cfl_limit: f64,
    pub steps_taken: usize,
    pub levine_tracking: bool,
    pub initial: Classification,
    pub samples: Vec<Sample>,
    pub blowup: BlowupReport,
    /// Last finite state reached.
    pub final_state: StateUW,
    pub snapshots: Vec<Snapshot>,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn initial_label(&self) -> Label {
        self.initial.label
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// `max |E(t) - E(0)| / max(1, |E(0)|)`, likewise for `M`.
    pub fn drifts(&self) -> (f64, f64) {
        let Some(first) = self.samples.first() else {
            return (0.0, 0.0);
        };
        let scale_e = first.energy.abs().max(1.0);
        let scale_m = first.momentum.abs().max(1.0);
        self.samples.iter().fold((0.0, 0.0), |(de, dm), s| {
            (
                f64::max(de, (s.energy - first.energy).abs() / scale_e),
                f64::max(dm, (s.momentum - first.momentum).abs() / scale_m),
            )
        })
    }
}

#[derive(Clone, Debug)]
struct Coeffs {
    u: Vec<Complex64>,
    w: Vec<Complex64>,
    v: Option<Vec<Complex64>>,
}

impl Coeffs {
    /// `self + a·k`
    fn axpy(&self, a: f64, k: &Coeffs) -> Coeffs {
        let add = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(x, y)| x + y * a).collect()
        };
        Coeffs {
            u: add(&self.u, &k.u),
            w: add(&self.w, &k.w),
            v: match (&self.v, &k.v) {
                (Some(x), Some(y)) => Some(add(x, y)),
                _ => None,
            },
        }
    }

    fn accumulate(&mut self, a: f64, k: &Coeffs) {
        let acc = |x: &mut [Complex64], y: &[Complex64]| {
            x.iter_mut().zip(y).for_each(|(x, y)| *x += y * a);
        };
        acc(&mut self.u, &k.u);
        acc(&mut self.w, &k.w);
        if let (Some(x), Some(y)) = (&mut self.v, &k.v) {
            acc(x, y);
        }
    }
}

struct Flow<'a> {
    fns: &'a Functionals,
    /// `iξ` with the Nyquist entry zeroed.
    ik: Vec<Complex64>,
    /// `iξ·l(ξ)`
    ikl: Vec<Complex64>,
    /// `iξ·b(ξ)`, times the dealiasing mask.
    ikb: Vec<Complex64>,
    hs_u: Vec<f64>,
    hs_w: Vec<f64>,
    gamma: f64,
}

impl<'a> Flow<'a> {
    fn new(fns: &'a Functionals, dealias: bool, gamma: f64) -> Self {
        let grid = fns.grid();
        let n = grid.n_modes();
        let nyq = grid.nyquist_index();
        let xi = fns.ctx().wavenumbers();
        let mut ik: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(0.0, x)).collect();
        ik[nyq] = Complex64::new(0.0, 0.0);
        let ikl = ik.iter().zip(fns.l_values()).map(|(k, l)| k * l).collect();
        let ikb = ik
            .iter()
            .zip(fns.b_values())
            .enumerate()
            .map(|(j, (k, b))| {
                let keep = !dealias || 3 * grid.mode_number(j).unsigned_abs() as usize <= n;
                if keep {
                    k * b
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let model = fns.model();
        let s0 = model.s0();
        let sw = s0 - 0.5 * model.rho();
        let weight = |s: f64| -> Vec<f64> {
            let pw = fns.ctx().parseval_weight();
            xi.iter().map(|x| pw * (1.0 + x * x).powf(s)).collect()
        };
        Self {
            fns,
            ik,
            ikl,
            ikb,
            hs_u: weight(s0),
            hs_w: weight(sw),
            gamma,
        }
    }

    fn nonlinear_hat(&self, u_real: &[f64]) -> Vec<Complex64> {
        let p = self.fns.p();
        let g: Vec<f64> = u_real.iter().map(|&v| nonlinearity(v, p)).collect();
        self.fns.ctx().forward_samples(&g)
    }

    fn deriv(&self, y: &Coeffs) -> Coeffs {
        let u_real = self.fns.ctx().inverse_real(y.u.clone());
        let g_hat = self.nonlinear_hat(&u_real);
        let du = y.w.iter().zip(&self.ik).map(|(w, k)| w * k).collect();
        let dw = y
            .u
            .iter()
            .zip(&g_hat)
            .zip(self.ikl.iter().zip(&self.ikb))
            .map(|((u, g), (kl, kb))| u * kl + g * kb)
            .collect();
        Coeffs {
            u: du,
            w: dw,
            v: y.v.as_ref().map(|_| y.w.clone()),
        }
    }

    fn step(&self, y: &mut Coeffs, dt: f64) {
        let k1 = self.deriv(y);
        let k2 = self.deriv(&y.axpy(0.5 * dt, &k1));
        let k3 = self.deriv(&y.axpy(0.5 * dt, &k2));
        let k4 = self.deriv(&y.axpy(dt, &k3));
        y.accumulate(dt / 6.0, &k1);
        y.accumulate(dt / 3.0, &k2);
        y.accumulate(dt / 3.0, &k3);
        y.accumulate(dt / 6.0, &k4);
    }

    fn weighted_norm(c: &[Complex64], w: &[f64]) -> f64 {
        c.iter().zip(w).map(|(c, w)| w * c.norm_sqr()).sum::<f64>().sqrt()
    }

    fn blowup_norm(&self, y: &Coeffs) -> f64 {
        Self::weighted_norm(&y.u, &self.hs_u) + Self::weighted_norm(&y.w, &self.hs_w)
    }

    fn sample(&self, t: f64, y: &Coeffs) -> Sample {
        let fns = self.fns;
        let u_real = fns.ctx().inverse_real(y.u.clone());
        let e = fns.energy_coeffs(&y.u, &y.w, &u_real);
        let q = e.nonlinear * (fns.p() + 1.0);
        let g = self.gamma;
        let i_gamma = if g == 0.0 { e.dispersive } else { fns.i_gamma_coeffs(&y.u, g) };
        let kinetic_gamma = if g == 0.0 {
            e.kinetic
        } else {
            let shifted: Vec<Complex64> = y.w.iter().zip(&y.u).map(|(w, u)| w + u * g).collect();
            0.5 * fns.b_inv_sq_coeffs(&shifted)
        };
        let (h, hp, hpp) = match &y.v {
            Some(v) => (
                Some(0.5 * fns.b_inv_sq_coeffs(v)),
                Some(fns.b_inv_inner_coeffs(v, &y.w)),
                Some(2.0 * e.kinetic - 2.0 * e.dispersive + q),
            ),
            None => (None, None, None),
        };
        Sample {
            t,
            energy: e.total,
            momentum: e.momentum,
            energy_used: e.total + g * e.momentum,
            kinetic: e.kinetic,
            kinetic_gamma,
            i: e.dispersive,
            i_gamma,
            q,
            two_i_minus_q: 2.0 * e.dispersive - q,
            sign_quantity: 2.0 * i_gamma - q,
            u_hs0: Self::weighted_norm(&y.u, &self.hs_u),
            w_hs: Self::weighted_norm(&y.w, &self.hs_w),
            h,
            hp,
            hpp,
        }
    }

    fn to_state(&self, y: &Coeffs) -> Result<StateUW> {
        let ctx = self.fns.ctx();
        StateUW::new(ctx.to_field(y.u.clone())?, ctx.to_field(y.w.clone())?)
    }
}

/// Time derivatives `(u_t, w_t)` of a state.
pub fn rhs(fns: &Functionals, state: &StateUW, dealias: bool) -> Result<(RealField, RealField)> {
    if state.grid() != fns.grid() {
        return Err(Error::GridMismatch(format!(
            "state on {} with evaluator on {}",
            state.grid(),
            fns.grid()
        )));
    }
    let flow = Flow::new(fns, dealias, 0.0);
    let ctx = fns.ctx();
    let y = Coeffs {
        u: ctx.forward(&state.u),
        w: ctx.forward(&state.w),
        v: None,
    };
    let d = flow.deriv(&y);
    let du = RealField::new(*fns.grid(), ctx.inverse_real(d.u))
        .map_err(|_| Error::NonFinite("u_t".into()))?;
    let dw = RealField::new(*fns.grid(), ctx.inverse_real(d.w))
        .map_err(|_| Error::NonFinite("w_t (nonlinear overflow)".into()))?;
    Ok((du, dw))
}

/// Initial state `(φ, -γφ)` built from a `γ`-threshold's ground state; it
/// travels as `φ(x - γt)`.
pub fn traveling_wave(threshold: &ThresholdResult) -> StateUW {
    let phi = threshold.ground_state();
    let w = phi.scaled(-threshold.gamma);
    StateUW { u: phi, w }
}

/// Integrates from `state0` up to `config.t_end` or until blow-up is
/// detected. Classification and `δ` use `threshold`'s `γ` and depth.
pub fn integrate(
    state0: &StateUW,
    config: &SolverConfig,
    threshold: &ThresholdResult,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    let fns = Functionals::new(&threshold.model, threshold.grid);
    let initial = classify_with(&fns, state0, threshold)?;
    let gamma = threshold.gamma;
    let p = fns.p();
    let nu = (p - 1.0) / 4.0;
    let flow = Flow::new(&fns, config.dealias, gamma);
    let ctx = fns.ctx();

    let v0 = if config.levine_tracking {
        Some(ctx.forward(&ctx.antiderivative(&state0.u)?))
    } else {
        None
    };
    let mut y = Coeffs {
        u: ctx.forward(&state0.u),
        w: ctx.forward(&state0.w),
        v: v0,
    };

    let n_steps = config.n_steps();
    let dt = config.dt;
    let mut samples = vec![flow.sample(0.0, &y)];
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = config.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    let mut pending = pending.into_iter().peekable();
    while pending.next_if(|&ts| ts <= 0.0).is_some() {
        snapshots.push(Snapshot { t: 0.0, state: state0.clone() });
    }

    let mut blowup = BlowupReport {
        detected: false,
        t_detect: None,
        trigger: None,
        norm_at_detect: None,
        delta_bound: (p + 1.0) * (initial.depth_used - initial.energy_used),
        nu,
        levine_upper_bound: None,
        resolution_lost_at: None,
    };
    let mut last_finite = y.clone();
    let mut steps_taken = 0;

    for step in 1..=n_steps {
        flow.step(&mut y, dt);
        let t = step as f64 * dt;
        steps_taken = step;
        let norm = flow.blowup_norm(&y);
        if !norm.is_finite() || norm > config.blowup_norm_threshold {
            blowup.detected = true;
            blowup.t_detect = Some(t);
            if norm.is_finite() {
                blowup.trigger = Some(BlowupTrigger::NormThreshold);
                blowup.norm_at_detect = Some(norm);
                let s = flow.sample(t, &y);
                if s.energy.is_finite() {
                    samples.push(s);
                    last_finite = y.clone();
                }
            } else {
                blowup.trigger = Some(BlowupTrigger::NonFinite);
            }
            break;
        }
        if step % config.output_stride == 0 || step == n_steps {
            samples.push(flow.sample(t, &y));
        }
        while pending.next_if(|&ts| ts <= t + 1e-12 * dt).is_some() {
            snapshots.push(Snapshot { t, state: flow.to_state(&y)? });
        }
        last_finite.clone_from(&y);
    }

    let e0 = samples[0].energy;
    blowup.resolution_lost_at = samples
        .iter()
        .find(|s| !((s.energy - e0).abs() <= RESOLUTION_DRIFT * e0.abs().max(1.0)))
        .map(|s| s.t);
    if config.levine_tracking && initial.label == Label::SigmaMinus {
        blowup.levine_upper_bound = samples.iter().find_map(|s| match (s.h, s.hp) {
            (Some(h), Some(hp)) if h > 0.0 && hp > 0.0 => Some(s.t + h / (nu * hp)),
            _ => None,
        });
    }

    Ok(TrajectoryRecord {
        gamma,
        p,
        dt,
        cfl_limit: cfl_limit(&fns),
        steps_taken,
        levine_tracking: config.levine_tracking,
        initial,
        samples,
        blowup,
        final_state: flow.to_state(&last_finite)?,
        snapshots,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub applicable: bool,
    pub note: String,
    pub initial_label: Label,
    pub samples_checked: usize,
    pub sign_flips: usize,
    pub first_flip_time: Option<f64>,
    /// Violations of the label's energy bound: on `Σ₊`,
    /// `½‖B^{-1/2}(w+γu)‖² + ((p-1)/(p+1))I_γ < d(γ)`; on `Σ₋`,
    /// `I_γ > ((p+1)/(p-1))d(γ)`.
    pub bound_violations: usize,
    pub first_bound_violation: Option<f64>,
    /// Smallest slack of that bound over the samples.
    pub min_bound_margin: f64,
    pub passed: bool,
}

/// Checks that the sign of `2I_γ - Q` is preserved along the record and that
/// the energy bound matching the initial label holds at every sample.
pub fn invariance_monitor(record: &TrajectoryRecord) -> InvarianceReport {
    let label = record.initial.label;
    let mut report = InvarianceReport {
        applicable: label != Label::Supercritical,
        note: String::new(),
        initial_label: label,
        samples_checked: 0,
        sign_flips: 0,
        first_flip_time: None,
        bound_violations: 0,
        first_bound_violation: None,
        min_bound_margin: f64::INFINITY,
        passed: true,
    };
    if !report.applicable {
        report.note = "initial energy at or above the depth: out of theory scope".into();
        return report;
    }
    let p = record.p;
    let d = record.initial.depth_used;
    for s in &record.samples {
        report.samples_checked += 1;
        let tol = SIGN_TOLERANCE * (2.0 * s.i_gamma).max(s.q);
        let (sign_ok, margin) = match label {
            Label::SigmaPlus => (
                s.sign_quantity >= -tol,
                d - (s.kinetic_gamma + (p - 1.0) / (p + 1.0) * s.i_gamma),
            ),
            _ => (s.sign_quantity < tol, s.i_gamma - (p + 1.0) / (p - 1.0) * d),
        };
        if !sign_ok {
            report.sign_flips += 1;
            report.first_flip_time.get_or_insert(s.t);
        }
        report.min_bound_margin = report.min_bound_margin.min(margin);
        if !(margin > 0.0) {
            report.bound_violations += 1;
            report.first_bound_violation.get_or_insert(s.t);
        }
    }
    report.passed = report.sign_flips == 0 && report.bound_violations == 0;
    report.note = format!(
        "{} samples, {} sign flips, {} bound violations",
        report.samples_checked, report.sign_flips, report.bound_violations
    );
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevineReport {
    pub applicable: bool,
    pub note: String,
    pub delta: f64,
    pub nu: f64,
    pub samples_checked: usize,
    /// Samples at or after `resolution_lost_at`, which are not checked.
    pub samples_excluded: usize,
    /// Samples with `H'' < δ - tol`.
    pub hpp_violations: usize,
    /// Samples with `H·H'' - ((p+3)/4)H'² < -tol·(1 + |H·H''|)`.
    pub concavity_violations: usize,
    pub first_violation: Option<f64>,
    pub min_hpp_minus_delta: f64,
    /// Smallest `(H·H'' - ((p+3)/4)H'²) / (1 + |H·H''|)`.
    pub min_concavity_margin: f64,
    pub upper_bound: Option<f64>,
    pub passed: bool,
}

pub const LEVINE_TOLERANCE: f64 = 1e-6;

/// Verifies `H'' ≥ δ` and `H·H'' - ((p+3)/4)H'² ≥ 0` along a record that
/// starts in `Σ₋(γ)` (with `γM₀ ≥ 0` when `γ ≠ 0`); other records pass
/// vacuously. Both inequalities rest on conservation of `E`, so samples from
/// `resolution_lost_at` onwards are excluded and counted separately.
pub fn levine_check(record: &TrajectoryRecord) -> Result<LevineReport> {
    if !record.levine_tracking || record.samples.iter().any(|s| s.h.is_none()) {
        return Err(Error::InvalidParameter(
            "record has no Levine series; integrate with levine_tracking".into(),
        ));
    }
    let p = record.p;
    let delta = record.blowup.delta_bound;
    let mut report = LevineReport {
        applicable: false,
        note: String::new(),
        delta,
        nu: (p - 1.0) / 4.0,
        samples_checked: 0,
        samples_excluded: 0,
        hpp_violations: 0,
        concavity_violations: 0,
        first_violation: None,
        min_hpp_minus_delta: f64::INFINITY,
        min_concavity_margin: f64::INFINITY,
        upper_bound: record.blowup.levine_upper_bound,
        passed: true,
    };
    let init = &record.initial;
    if init.label != Label::SigmaMinus {
        report.note = format!("initial label {}: inequalities not asserted", init.label);
        return Ok(report);
    }
    if init.gamma * init.momentum < 0.0 {
        report.note = "gamma*M0 < 0: inequalities not asserted".into();
        return Ok(report);
    }
    report.applicable = true;
    let c = (p + 3.0) / 4.0;
    let cutoff = record.blowup.resolution_lost_at.unwrap_or(f64::INFINITY);
    for s in &record.samples {
        if s.t >= cutoff {
            report.samples_excluded += 1;
            continue;
        }
        let (h, hp, hpp) = (s.h.unwrap(), s.hp.unwrap(), s.hpp.unwrap());
        report.samples_checked += 1;
        let a = hpp - delta;
        let hh = h * hpp;
        let b = (hh - c * hp * hp) / (1.0 + hh.abs());
        report.min_hpp_minus_delta = report.min_hpp_minus_delta.min(a);
        report.min_concavity_margin = report.min_concavity_margin.min(b);
        let mut bad = false;
        if a < -LEVINE_TOLERANCE {
            report.hpp_violations += 1;
            bad = true;
        }
        if b < -LEVINE_TOLERANCE {
            report.concavity_violations += 1;
            bad = true;
        }
        if bad {
            report.first_violation.get_or_insert(s.t);
        }
    }
    report.passed = report.hpp_violations == 0 && report.concavity_violations == 0;
    report.note = format!(
        "delta = {delta:.6e}, {} samples ({} past resolution loss skipped), {} H'' violations, {} concavity violations",
        report.samples_checked,
        report.samples_excluded,
        report.hpp_violations,
        report.concavity_violations
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use crate::symbols::{preset, ModelSpec, Preset};
    use crate::wellsolver::{minimize_embedding_constant, MinimizeOptions};

    fn dd(g1: f64, g2: f64) -> ModelSpec {
        preset(Preset::DoubleDispersion { gamma1: g1, gamma2: g2 }, 3.0).unwrap()
    }

    /// A threshold record with a nominal depth, for runs that only need a
    /// label rather than an accurate `d`.
    fn nominal(model: &ModelSpec, grid: GridSpec, d: f64) -> ThresholdResult {
        ThresholdResult {
            model: model.clone(),
            grid,
            gamma: 0.0,
            m_value: 1.0,
            d_value: d,
            minimizer: RealField::zeros(grid),
            iterations: 0,
            residual: 0.0,
        }
    }

    fn gaussian(grid: GridSpec, a: f64, w: f64) -> RealField {
        RealField::from_fn(grid, |x| a * (-(x / w).powi(2)).exp()).unwrap()
    }

    fn max_diff(a: &RealField, b: &RealField) -> f64 {
        a.samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_state_stays_zero() {
        let grid = GridSpec::new(10.0, 64).unwrap();
        let model = dd(1.0, 1.0);
        let fns = Functionals::new(&model, grid);
        let (du, dw) = rhs(&fns, &StateUW::zero(grid), true).unwrap();
        assert!(du.is_zero() && dw.is_zero());
        let cfg = SolverConfig { dt: 0.01, t_end: 1.0, levine_tracking: true, ..Default::default() };
        let rec = integrate(&StateUW::zero(grid), &cfg, &nominal(&model, grid, 1.0)).unwrap();
        assert!(rec.final_state.u.is_zero() && rec.final_state.w.is_zero());
        assert_eq!(rec.drifts(), (0.0, 0.0));
        assert!(rec.samples.iter().all(|s| s.h == Some(0.0)));
        assert!(levine_check(&rec).unwrap().passed);
    }

    #[test]
    fn linear_mode_follows_dispersion_relation() {
        let grid = GridSpec::new(4.0 * std::f64::consts::PI, 64).unwrap();
        let model = dd(1.0, 2.0);
        let xi = 3.0 * std::f64::consts::PI / grid.half_length();
        let omega = xi * model.l().symbol(xi).sqrt();
        let a = 1e-8;
        let u0 = RealField::from_fn(grid, |x| a * (xi * x).cos()).unwrap();
        let state = StateUW::new(u0, RealField::zeros(grid)).unwrap();
        let period = 2.0 * std::f64::consts::PI / omega;
        for frac in [0.25, 0.5, 1.0] {
            let t = frac * period;
            let cfg = SolverConfig { dt: t / 400.0, t_end: t, ..Default::default() };
            let rec = integrate(&state, &cfg, &nominal(&model, grid, 1.0)).unwrap();
            let exact = RealField::from_fn(grid, |x| a * (xi * x).cos() * (omega * t).cos()).unwrap();
            // a phase error of 0.1% of a period would give ~6e-3·a
            assert!(max_diff(&rec.final_state.u, &exact) < 1e-5 * a, "frac {frac}");
        }
    }

    #[test]
    fn traveling_wave_translates() {
        let grid = GridSpec::new(30.0, 512).unwrap();
        let model = dd(1.0, 1.0);
        let gamma = 0.5;
        let th = minimize_embedding_constant(&model, grid, gamma, &MinimizeOptions::default()).unwrap();
        let state = traveling_wave(&th);
        let t_end = 10.0;
        let cfg = SolverConfig { dt: 0.01, t_end, output_stride: 100, ..Default::default() };
        let rec = integrate(&state, &cfg, &th).unwrap();
        assert!(!rec.blowup.detected);
        let fns = Functionals::new(&model, grid);
        let ctx = fns.ctx();
        let mut c = ctx.forward(&state.u);
        for (c, &xi) in c.iter_mut().zip(ctx.wavenumbers()) {
            *c *= Complex64::from_polar(1.0, -xi * gamma * t_end);
        }
        let shifted = ctx.to_field(c).unwrap();
        let rel = max_diff(&rec.final_state.u, &shifted) / state.u.max_abs();
        assert!(rel < 1e-2, "shape drift {rel}");
    }

    #[test]
    fn conserves_energy_and_momentum() {
        let grid = GridSpec::new(30.0, 512).unwrap();
        let model = dd(1.0, 2.0);
        let u0 = gaussian(grid, 0.6, 1.5);
        let w0 = RealField::from_fn(grid, |x| 0.2 * x * (-x * x).exp()).unwrap();
        let state = StateUW::new(u0, w0).unwrap();
        let fns = Functionals::new(&model, grid);
        let cfg = SolverConfig { dt: cfl_limit(&fns), t_end: 5.0, ..Default::default() };
        let rec = integrate(&state, &cfg, &nominal(&model, grid, 10.0)).unwrap();
        let (de, dm) = rec.drifts();
        assert!(de < 1e-8 && dm < 1e-8, "drifts {de:e} {dm:e}");
        assert!(rec.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn time_reversible() {
        let grid = GridSpec::new(30.0, 256).unwrap();
        let model = dd(1.0, 1.0);
        let th = nominal(&model, grid, 10.0);
        let u0 = gaussian(grid, 0.8, 1.0);
        let state = StateUW::new(u0.clone(), RealField::zeros(grid)).unwrap();
        let cfg = SolverConfig { dt: 0.005, t_end: 1.0, ..Default::default() };
        let fwd = integrate(&state, &cfg, &th).unwrap();
        let back = StateUW::new(fwd.final_state.u.clone(), fwd.final_state.w.scaled(-1.0)).unwrap();
        let rev = integrate(&back, &cfg, &th).unwrap();
        let rel = max_diff(&rev.final_state.u, &u0) / u0.max_abs();
        assert!(rel < 1e-6, "reversal error {rel}");
    }

    #[test]
    fn fourth_order_in_time() {
        let grid = GridSpec::new(20.0, 128).unwrap();
        let model = dd(1.0, 2.0);
        let th = nominal(&model, grid, 10.0);
        let state = StateUW::new(gaussian(grid, 1.0, 1.5), RealField::zeros(grid)).unwrap();
        let run = |dt: f64| {
            let cfg = SolverConfig { dt, t_end: 2.0, output_stride: 1000, ..Default::default() };
            integrate(&state, &cfg, &th).unwrap().final_state.u
        };
        let reference = run(0.0125);
        let e1 = max_diff(&run(0.2), &reference);
        let e2 = max_diff(&run(0.1), &reference);
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn levine_series_consistent_with_finite_differences() {
        let grid = GridSpec::new(30.0, 256).unwrap();
        let model = dd(1.0, 1.0);
        let th = nominal(&model, grid, 10.0);
        let fns = Functionals::new(&model, grid);
        let v0 = gaussian(grid, 1.0, 2.0);
        let u0 = fns.ctx().derivative(&v0).unwrap();
        let state = StateUW::new(u0, RealField::zeros(grid)).unwrap();
        let cfg = SolverConfig {
            dt: 0.01,
            t_end: 4.0,
            output_stride: 5,
            levine_tracking: true,
            ..Default::default()
        };
        let rec = integrate(&state, &cfg, &th).unwrap();
        let dt = 0.05;
        for w in rec.samples.windows(3) {
            let (h0, h1, h2) = (w[0].h.unwrap(), w[1].h.unwrap(), w[2].h.unwrap());
            let hp_fd = (h2 - h0) / (2.0 * dt);
            let hpp_fd = (h2 - 2.0 * h1 + h0) / (dt * dt);
            assert!((hp_fd - w[1].hp.unwrap()).abs() < 1e-3 * (1.0 + h1.abs()));
            assert!((hpp_fd - w[1].hpp.unwrap()).abs() < 1e-2 * (1.0 + w[1].hpp.unwrap().abs()));
        }
        let non_mean_free = StateUW::new(gaussian(grid, 1.0, 1.0), RealField::zeros(grid)).unwrap();
        assert!(matches!(
            integrate(&non_mean_free, &cfg, &th),
            Err(Error::NotMeanFree { .. })
        ));
        let plain = SolverConfig { levine_tracking: false, ..cfg };
        let rec = integrate(&state, &plain, &th).unwrap();
        assert!(levine_check(&rec).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig { dt: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { output_stride: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert_eq!(SolverConfig { dt: 0.1, t_end: 1.0, ..Default::default() }.n_steps(), 10);
    }

    #[test]
    fn supercritical_monitor_declines() {
        let grid = GridSpec::new(30.0, 128).unwrap();
        let model = dd(1.0, 1.0);
        let th = nominal(&model, grid, 1e-3);
        let state = StateUW::new(gaussian(grid, 0.5, 1.0), RealField::zeros(grid)).unwrap();
        let cfg = SolverConfig { dt: 0.01, t_end: 0.1, ..Default::default() };
        let rec = integrate(&state, &cfg, &th).unwrap();
        assert_eq!(rec.initial.label, Label::Supercritical);
        let rep = invariance_monitor(&rec);
        assert!(!rep.applicable && rep.passed);
    }
}
