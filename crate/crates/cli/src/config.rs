//! Run configuration, read from TOML. Unknown keys are rejected everywhere.
//!
//! ```toml
//! gamma = 0.0
//! seed = 7
//!
//! [model]
//! p = 3.0
//! preset = { name = "double_dispersion", gamma1 = 1.0, gamma2 = 1.0 }
//!
//! [grid]
//! half_length = 30.0
//! n_modes = 1024
//!
//! [initial.u]
//! family = "gaussian"
//! amplitude = 0.5
//! width = 1.0
//!
//! [solver]
//! t_end = 5.0
//! ```
//!
//! A custom model replaces `preset` with `[model.l]` and `[model.b]` blocks
//! holding `numerator`/`denominator` coefficient lists in powers of `ξ²`
//! and an optional `frac_power` for the `(1+ξ²)^α` factor.

use std::path::{Path, PathBuf};

use potwell_core::dynamics::cfl_limit;
use potwell_core::symbols::{OperatorSpec, Term};
use potwell_core::{Functionals, GridSpec, MinimizeOptions, ModelSpec, Preset, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub threshold: ThresholdSection,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<OperatorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<OperatorConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// Coefficients of `P(t)`, `t = ξ²`, lowest power first.
    pub numerator: Vec<f64>,
    #[serde(default = "one")]
    pub denominator: Vec<f64>,
    #[serde(default)]
    pub frac_power: f64,
    /// Declared order, checked against the computed one when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
}

fn one() -> Vec<f64> {
    vec![1.0]
}

fn terms(coeffs: &[f64]) -> Vec<Term> {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| Term::new(c, k as u32))
        .collect()
}

impl OperatorConfig {
    pub fn build(&self) -> potwell_core::Result<OperatorSpec> {
        OperatorSpec::new(
            &terms(&self.numerator),
            &terms(&self.denominator),
            self.frac_power,
            self.order,
        )
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        let model = match (&self.preset, &self.l, &self.b) {
            (Some(p), None, None) => p.build(self.p).context("model preset")?,
            (None, Some(l), Some(b)) => {
                let l = l.build().context("operator L")?;
                let b = b.build().context("operator B")?;
                ModelSpec::new(l, b, self.p).context("model")?
            }
            (Some(_), _, _) => {
                return Err(CliError::Config(
                    "model: give either a preset or both operators, not both".into(),
                ))
            }
            _ => {
                return Err(CliError::Config(
                    "model: a preset or both [model.l] and [model.b] are required".into(),
                ))
            }
        };
        Ok(model)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_length: f64,
    pub n_modes: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec> {
        GridSpec::new(self.half_length, self.n_modes).map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

/// One initial field.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldInit {
    #[default]
    Zero,
    /// `A·exp(-((x-c)/w)²)`
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `A·sech(x/w)^k`
    SechPow {
        amplitude: f64,
        width: f64,
        exponent: f64,
    },
    /// `(A·exp(-(x/w)²))_x`, which has zero mean.
    DerivativeOfGaussian { amplitude: f64, width: f64 },
    /// `λ·φ` with `φ` the ground state on `2I_γ = Q`.
    ScaledGroundState { lambda: f64 },
    /// A sum of `count` Gaussian bumps with amplitudes in `[-A, A]`, centres
    /// in the middle half of the box and widths in `[0.5, 2]`, drawn from
    /// the run seed.
    RandomBumps { amplitude: f64, count: usize },
    /// A field file in CSV or binary format on the run grid.
    FromFile { path: PathBuf },
}


impl FieldInit {
    fn check(&self, which: &str) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("initial.{which}.{name} must be finite")))
            }
        };
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::Config(format!("initial.{which}.{name} must be positive")))
            }
        };
        match self {
            FieldInit::Zero => Ok(()),
            FieldInit::Gaussian { amplitude, width, center } => {
                finite("amplitude", *amplitude)?;
                finite("center", *center)?;
                positive("width", *width)
            }
            FieldInit::SechPow { amplitude, width, exponent } => {
                finite("amplitude", *amplitude)?;
                positive("exponent", *exponent)?;
                positive("width", *width)
            }
            FieldInit::DerivativeOfGaussian { amplitude, width } => {
                finite("amplitude", *amplitude)?;
                positive("width", *width)
            }
            FieldInit::ScaledGroundState { lambda } => finite("lambda", *lambda),
            FieldInit::RandomBumps { amplitude, count } => {
                finite("amplitude", *amplitude)?;
                if *count == 0 {
                    return Err(CliError::Config(format!("initial.{which}.count must be positive")));
                }
                Ok(())
            }
            FieldInit::FromFile { path } => {
                if path.exists() {
                    Ok(())
                } else {
                    Err(CliError::Config(format!(
                        "initial.{which}.path {} does not exist",
                        path.display()
                    )))
                }
            }
        }
    }

    pub fn needs_ground_state(&self) -> bool {
        matches!(self, FieldInit::ScaledGroundState { .. })
    }

    /// Sets a named scalar parameter; used by sweeps.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match (self, name) {
            (FieldInit::Gaussian { amplitude, .. }, "amplitude")
            | (FieldInit::SechPow { amplitude, .. }, "amplitude")
            | (FieldInit::DerivativeOfGaussian { amplitude, .. }, "amplitude")
            | (FieldInit::RandomBumps { amplitude, .. }, "amplitude") => amplitude,
            (FieldInit::Gaussian { width, .. }, "width")
            | (FieldInit::SechPow { width, .. }, "width")
            | (FieldInit::DerivativeOfGaussian { width, .. }, "width") => width,
            (FieldInit::Gaussian { center, .. }, "center") => center,
            (FieldInit::SechPow { exponent, .. }, "exponent") => exponent,
            (FieldInit::ScaledGroundState { lambda }, "lambda") => lambda,
            (other, _) => {
                return Err(CliError::Config(format!(
                    "parameter {name} does not apply to {other:?}"
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub u: FieldInit,
    #[serde(default)]
    pub w: FieldInit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Time step; defaults to the CFL heuristic for the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    pub output_stride: usize,
    pub dealias: bool,
    pub blowup_norm_threshold: f64,
    /// `None` turns tracking on exactly when `u₀` has zero mean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levine_tracking: Option<bool>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            dt: None,
            t_end: d.t_end,
            output_stride: d.output_stride,
            dealias: d.dealias,
            blowup_norm_threshold: d.blowup_norm_threshold,
            levine_tracking: None,
            snapshot_times: Vec::new(),
        }
    }
}

impl SolverSection {
    pub fn build(&self, fns: &Functionals, levine_default: bool) -> SolverConfig {
        SolverConfig {
            dt: self.dt.unwrap_or_else(|| cfl_limit(fns)),
            t_end: self.t_end,
            output_stride: self.output_stride,
            dealias: self.dealias,
            blowup_norm_threshold: self.blowup_norm_threshold,
            levine_tracking: self.levine_tracking.unwrap_or(levine_default),
            snapshot_times: self.snapshot_times.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub grad_tol: f64,
    /// Extra wave speeds for the `threshold` table, absolute.
    #[serde(default)]
    pub gammas: Vec<f64>,
    /// Extra wave speeds as fractions of `c₁`.
    #[serde(default)]
    pub gamma_fractions: Vec<f64>,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        let d = MinimizeOptions::default();
        Self {
            max_iters: d.max_iters,
            rel_tol: d.rel_tol,
            grad_tol: d.grad_tol,
            gammas: Vec::new(),
            gamma_fractions: Vec::new(),
        }
    }
}

impl ThresholdSection {
    pub fn options(&self) -> MinimizeOptions {
        MinimizeOptions {
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            grad_tol: self.grad_tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    pub dir: PathBuf,
    pub svg: bool,
    /// Cached threshold file; defaults to `<dir>/threshold.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_file: Option<PathBuf>,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            svg: true,
            threshold_file: None,
        }
    }
}

impl OutputsConfig {
    pub fn threshold_path(&self) -> PathBuf {
        self.threshold_file
            .clone()
            .unwrap_or_else(|| self.dir.join("threshold.json"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `u.<name>` or `w.<name>` for an initial-data parameter, or `gamma`.
    pub parameter: String,
    pub values: Vec<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        if let Some(dir) = origin.parent() {
            cfg.resolve_paths(dir);
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).context(format!("reading {}", path.display()))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("serializing config: {e}")))
    }

    /// Makes relative input paths relative to the config file's directory.
    fn resolve_paths(&mut self, base: &Path) {
        for init in [&mut self.initial.u, &mut self.initial.w] {
            if let FieldInit::FromFile { path } = init {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.model.p.is_finite() && self.model.p > 1.0) {
            return Err(CliError::Config(format!("model.p must exceed 1, got {}", self.model.p)));
        }
        self.grid.build()?;
        if !self.gamma.is_finite() {
            return Err(CliError::Config("gamma must be finite".into()));
        }
        self.initial.u.check("u")?;
        self.initial.w.check("w")?;
        let s = &self.solver;
        if let Some(dt) = s.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(CliError::Config(format!("solver.dt must be positive, got {dt}")));
            }
        }
        if !(s.t_end.is_finite() && s.t_end > 0.0) || s.output_stride == 0 {
            return Err(CliError::Config(
                "solver.t_end must be positive and solver.output_stride at least 1".into(),
            ));
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err(CliError::Config("sweep.values is empty".into()));
            }
            if sw.values.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(CliError::Config("sweep.values must be strictly ascending".into()));
            }
            self.with_parameter(&sw.parameter, sw.values[0])?;
        }
        Ok(())
    }

    /// A copy with one sweep parameter replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<RunConfig> {
        let mut cfg = self.clone();
        match name.split_once('.') {
            _ if name == "gamma" => cfg.gamma = value,
            Some(("u", field)) => cfg.initial.u.set(field, value)?,
            Some(("w", field)) => cfg.initial.w.set(field, value)?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown sweep parameter {name}; use gamma, u.<name> or w.<name>"
                )))
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BASIC: &str = r#"
gamma = 0.25
seed = 3

[model]
p = 3.0
preset = { name = "double_dispersion", gamma1 = 1.0, gamma2 = 2.0 }

[grid]
half_length = 30.0
n_modes = 256

[initial.u]
family = "derivative_of_gaussian"
amplitude = 2.0
width = 1.0

[initial.w]
family = "sech_pow"
amplitude = 0.1
width = 2.0
exponent = 2.0

[solver]
dt = 0.01
t_end = 2.0
output_stride = 5
dealias = true
blowup_norm_threshold = 1e6
snapshot_times = [1.0]

[sweep]
parameter = "u.amplitude"
values = [0.5, 1.0, 2.0]
"#;

    fn parse(s: &str) -> Result<RunConfig> {
        RunConfig::from_toml(s, Path::new("cfg.toml"))
    }

    #[test]
    fn parses_and_builds() {
        let cfg = parse(BASIC).unwrap();
        assert_eq!(cfg.gamma, 0.25);
        assert_eq!(cfg.initial.w, FieldInit::SechPow { amplitude: 0.1, width: 2.0, exponent: 2.0 });
        let model = cfg.model.build().unwrap();
        assert_eq!(model.rho(), 0.0);
        assert_eq!(cfg.grid.build().unwrap().n_modes(), 256);
        assert_eq!(cfg.outputs, OutputsConfig::default());
    }

    #[test]
    fn custom_operators() {
        let text = r#"
[model]
p = 3.0
[model.l]
numerator = [1.0, 1.0]
[model.b]
numerator = [1.0]
denominator = [1.0, 1.0]
order = -2.0
[grid]
half_length = 10.0
n_modes = 64
"#;
        let cfg = parse(text).unwrap();
        let m = cfg.model.build().unwrap();
        assert_eq!((m.rho(), m.r()), (2.0, 2.0));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let extra = BASIC.replace("seed = 3", "seed = 3\ncolour = 1");
        assert_eq!(parse(&extra).unwrap_err().exit_code(), 2);
        let extra = BASIC.replace("width = 1.0", "width = 1.0\nheight = 2.0");
        assert!(parse(&extra).is_err());
        let extra = BASIC.replace("gamma2 = 2.0", "gamma2 = 2.0, gamma3 = 1.0");
        assert!(parse(&extra).is_err());
        let bad = BASIC.replace("n_modes = 256", "n_modes = 255");
        assert_eq!(parse(&bad).unwrap_err().exit_code(), 2);
        let bad = BASIC.replace("values = [0.5, 1.0, 2.0]", "values = [1.0, 0.5]");
        assert!(parse(&bad).is_err());
        let bad = BASIC.replace("u.amplitude", "u.lambda");
        assert!(parse(&bad).is_err());
        let bad = BASIC.replace("width = 1.0", "width = -1.0");
        assert!(parse(&bad).is_err());
        let bad = BASIC.replace("family = \"sech_pow\"", "family = \"from_file\"\npath = \"nowhere.csv\"");
        assert!(parse(&bad).is_err());
    }

    #[test]
    fn model_errors() {
        let bad = BASIC.replace("gamma1 = 1.0", "gamma1 = -1.0");
        let err = parse(&bad).unwrap().model.build().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let both = BASIC.replace(
            "[grid]",
            "[model.l]\nnumerator = [1.0]\n[model.b]\nnumerator = [1.0]\n[grid]",
        );
        assert_eq!(parse(&both).unwrap().model.build().unwrap_err().exit_code(), 2);
    }

    fn arb_init() -> impl Strategy<Value = FieldInit> {
        prop_oneof![
            Just(FieldInit::Zero),
            (-5.0..5.0f64, 0.1..5.0f64, -3.0..3.0f64)
                .prop_map(|(amplitude, width, center)| FieldInit::Gaussian { amplitude, width, center }),
            (-5.0..5.0f64, 0.1..5.0f64, 0.5..4.0f64)
                .prop_map(|(amplitude, width, exponent)| FieldInit::SechPow { amplitude, width, exponent }),
            (-5.0..5.0f64, 0.1..5.0f64)
                .prop_map(|(amplitude, width)| FieldInit::DerivativeOfGaussian { amplitude, width }),
            (0.0..3.0f64).prop_map(|lambda| FieldInit::ScaledGroundState { lambda }),
            (0.0..3.0f64, 1..10usize).prop_map(|(amplitude, count)| FieldInit::RandomBumps { amplitude, count }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn toml_round_trip(
            u in arb_init(),
            w in arb_init(),
            gamma in -0.9..0.9f64,
            g1 in 0.1..4.0f64,
            g2 in 0.1..4.0f64,
            seed in any::<u32>(),
            dt in proptest::option::of(1e-4..0.1f64),
            lev in proptest::option::of(any::<bool>()),
        ) {
            let cfg = RunConfig {
                model: ModelConfig {
                    p: 3.0,
                    preset: Some(Preset::DoubleDispersion { gamma1: g1, gamma2: g2 }),
                    l: None,
                    b: None,
                },
                grid: GridConfig { half_length: 30.0, n_modes: 128 },
                initial: InitialConfig { u, w },
                gamma,
                seed: seed as u64,
                solver: SolverSection { dt, levine_tracking: lev, ..Default::default() },
                threshold: ThresholdSection { gamma_fractions: vec![0.25, 0.5], ..Default::default() },
                outputs: OutputsConfig::default(),
                sweep: Some(SweepConfig { parameter: "gamma".into(), values: vec![0.0, 0.1] }),
            };
            let text = cfg.to_toml().unwrap();
            let back: RunConfig = toml::from_str(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
