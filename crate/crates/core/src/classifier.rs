//! Membership of a state in the stable set `Σ₊(γ)` or the unstable set `Σ₋(γ)`.
//!
//! With `γ = 0` the energy is `E` and the sign quantity is `2I - Q`; otherwise
//! the energy is `E + γM` and the sign quantity `2I_γ - Q`, compared against
//! `d(γ)`. States with energy at or above the depth are labelled
//! [`Label::Supercritical`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{Functionals, StateUW};
use crate::spectral::RealField;
use crate::wellsolver::ThresholdResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    SigmaPlus,
    SigmaMinus,
    Supercritical,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::SigmaPlus => "SigmaPlus",
            Label::SigmaMinus => "SigmaMinus",
            Label::Supercritical => "Supercritical",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    pub gamma: f64,
    /// `E` for `γ = 0`, otherwise `E + γM`.
    pub energy_used: f64,
    /// `d` or `d(γ)`.
    pub depth_used: f64,
    /// `2I_γ(u) - Q(u)`.
    pub sign_quantity: f64,
    pub energy: f64,
    pub momentum: f64,
    pub i: f64,
    pub q: f64,
}

/// Boundary tolerance on the sign quantity, relative to `max(2I_γ, Q)`.
pub const SIGN_TOLERANCE: f64 = 1e-12;

fn check_compatible(fns: &Functionals, state: &StateUW, threshold: &ThresholdResult) -> Result<()> {
    if fns.model() != &threshold.model {
        return Err(Error::InvalidModel(
            "threshold was computed for a different model".into(),
        ));
    }
    if state.grid() != &threshold.grid || fns.grid() != &threshold.grid {
        return Err(Error::GridMismatch(format!(
            "state on {} classified against threshold on {}",
            state.grid(),
            threshold.grid
        )));
    }
    Ok(())
}

/// Classifies with a caller-supplied evaluator, avoiding transform setup.
pub fn classify_with(
    fns: &Functionals,
    state: &StateUW,
    threshold: &ThresholdResult,
) -> Result<Classification> {
    check_compatible(fns, state, threshold)?;
    let gamma = threshold.gamma;
    let e = fns.energy(state)?;
    let q = e.nonlinear * (fns.p() + 1.0);
    let two_ig = if gamma == 0.0 {
        2.0 * e.dispersive
    } else {
        2.0 * fns.i_gamma(&state.u, gamma)?
    };
    let energy_used = if gamma == 0.0 {
        e.total
    } else {
        e.total + gamma * e.momentum
    };
    let depth_used = threshold.d_value;
    let sign_quantity = two_ig - q;
    let tol = SIGN_TOLERANCE * two_ig.max(q);
    let label = if energy_used >= depth_used {
        Label::Supercritical
    } else if sign_quantity >= -tol {
        Label::SigmaPlus
    } else {
        Label::SigmaMinus
    };
    Ok(Classification {
        label,
        gamma,
        energy_used,
        depth_used,
        sign_quantity,
        energy: e.total,
        momentum: e.momentum,
        i: e.dispersive,
        q,
    })
}

pub fn classify(state: &StateUW, threshold: &ThresholdResult) -> Result<Classification> {
    let fns = Functionals::new(&threshold.model, threshold.grid);
    classify_with(&fns, state, threshold)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub classification: Classification,
}

impl ScanRow {
    /// `E + γM`, the energy compared against the depth.
    pub fn energy_used(&self) -> f64 {
        self.classification.energy_used
    }

    pub fn sign_quantity(&self) -> f64 {
        self.classification.sign_quantity
    }
}

/// Classifies `(λ·u_shape, 0)` for each `λ`, sorted by `λ`.
pub fn scan_scaling_family(
    u_shape: &RealField,
    threshold: &ThresholdResult,
    lambdas: &[f64],
) -> Result<Vec<ScanRow>> {
    if lambdas.is_empty() {
        return Err(Error::EmptySamples);
    }
    if u_shape.is_zero() {
        return Err(Error::ZeroField);
    }
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite()) {
        return Err(Error::InvalidParameter(format!("scaling factor {bad}")));
    }
    let fns = Functionals::new(&threshold.model, threshold.grid);
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_iter()
        .map(|lambda| {
            let u = u_shape.scaled(lambda);
            let state = StateUW::new(u, RealField::zeros(*u_shape.grid()))?;
            Ok(ScanRow {
                lambda,
                classification: classify_with(&fns, &state, threshold)?,
            })
        })
        .collect()
}
