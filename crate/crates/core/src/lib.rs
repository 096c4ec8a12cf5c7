//! Potential-well laboratory for the nonlocal doubly dispersive wave equation
//!
//! ```text
//! u_tt - L u_xx = B(-|u|^{p-1} u)_xx
//! ```
//!
//! where `L` and `B` are Fourier multipliers with symbols `l(ξ)` and `b(ξ)`.
//! The crate evaluates the conserved quantities of the first-order system
//! `u_t = w_x`, `w_t = L u_x + B g(u)_x`, computes the best embedding constant
//! `m` and the well depth `d` by constrained minimization, classifies initial
//! data into the stable and unstable sets, and integrates the flow
//! pseudo-spectrally on a periodic box.

pub mod classifier;
pub mod dynamics;
pub mod error;
pub mod field_io;
pub mod functionals;
pub mod spectral;
pub mod symbols;
pub mod wellsolver;

pub use classifier::{classify, scan_scaling_family, Classification, Label, ScanRow};
pub use dynamics::{
    integrate, invariance_monitor, levine_check, rhs, BlowupReport, InvarianceReport, LevineReport,
    Sample, SolverConfig, TrajectoryRecord,
};
pub use error::{Error, Result};
pub use functionals::{EnergyBreakdown, Functionals, StateUW};
pub use spectral::{GridSpec, RealField, SpectralContext};
pub use symbols::{ModelSpec, OperatorSpec, Preset, ValidationReport};
pub use wellsolver::{
    depth_from_m, minimize_embedding_constant, nehari_rescale, MinimizeOptions, ThresholdResult,
};
