//! Fourier-multiplier symbols for the operators `L` and `B`.
//!
//! A symbol has the form
//!
//! ```text
//! s(ξ) = (1 + ξ²)^α · P(ξ²) / Q(ξ²)
//! ```
//!
//! with nonnegative polynomial coefficients and positive constant and leading
//! terms, so `s(ξ) > 0` everywhere and the growth order is
//! `2·(deg P − deg Q) + 2α`. Coercivity constants `(c_lower, c_upper)` bound
//! the symbol by `c²·(1+ξ²)^{order/2}` from both sides.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One term `coefficient · (ξ²)^power`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub power: u32,
}

impl Term {
    pub fn new(coefficient: f64, power: u32) -> Self {
        Self { coefficient, power }
    }
}

/// Lower and upper coercivity constants (not squared).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coercivity {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorSpec {
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    frac_power: f64,
    order: f64,
    coercivity: Coercivity,
}

const ORDER_TOL: f64 = 1e-12;
const BOUND_RTOL: f64 = 1e-12;
const FIT_SAMPLES: usize = 4096;

fn dense(terms: &[Term], which: &str) -> Result<Vec<f64>> {
    if terms.is_empty() {
        return Err(Error::InvalidOperator(format!("{which} polynomial has no terms")));
    }
    let degree = terms.iter().map(|t| t.power as usize).max().unwrap_or(0);
    let mut coeffs = vec![0.0; degree + 1];
    for t in terms {
        if !t.coefficient.is_finite() || t.coefficient < 0.0 {
            return Err(Error::InvalidOperator(format!(
                "{which} coefficient {} of (ξ²)^{} must be finite and nonnegative",
                t.coefficient, t.power
            )));
        }
        coeffs[t.power as usize] += t.coefficient;
    }
    while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
        coeffs.pop();
    }
    if coeffs[0] <= 0.0 {
        return Err(Error::InvalidOperator(format!(
            "{which} constant coefficient must be positive"
        )));
    }
    Ok(coeffs)
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

impl OperatorSpec {
    /// Builds a symbol from numerator and denominator terms in ξ² and the
    /// exponent of the `(1+ξ²)^α` factor. When `declared_order` is given it
    /// must match the growth order of the symbol. Coercivity constants are
    /// fitted over all of ℝ (dense sampling in a compactified variable plus
    /// the asymptotic ratio).
    pub fn new(
        numerator: &[Term],
        denominator: &[Term],
        frac_power: f64,
        declared_order: Option<f64>,
    ) -> Result<Self> {
        let numerator = dense(numerator, "numerator")?;
        let denominator = dense(denominator, "denominator")?;
        if !frac_power.is_finite() {
            return Err(Error::InvalidOperator("fractional power must be finite".into()));
        }
        let order = 2.0 * (numerator.len() as f64 - denominator.len() as f64) + 2.0 * frac_power;
        if let Some(declared) = declared_order {
            if (declared - order).abs() > ORDER_TOL {
                return Err(Error::InvalidOperator(format!(
                    "declared order {declared} does not match symbol growth order {order}"
                )));
            }
        }
        let mut spec = Self {
            numerator,
            denominator,
            frac_power,
            order,
            coercivity: Coercivity { lower: 1.0, upper: 1.0 },
        };
        spec.coercivity = spec.fit_global_coercivity();
        Ok(spec)
    }

    /// The constant symbol `s ≡ c`.
    pub fn constant(c: f64) -> Result<Self> {
        Self::new(&[Term::new(c, 0)], &[Term::new(1.0, 0)], 0.0, Some(0.0))
    }

    /// Overrides the fitted coercivity constants with declared ones. The
    /// declared values are checked later by [`validate_model`].
    pub fn with_coercivity(mut self, lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && upper >= lower && upper.is_finite()) {
            return Err(Error::InvalidOperator(format!(
                "coercivity constants must satisfy 0 < lower <= upper, got ({lower}, {upper})"
            )));
        }
        self.coercivity = Coercivity { lower, upper };
        Ok(self)
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    pub fn frac_power(&self) -> f64 {
        self.frac_power
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn coercivity(&self) -> Coercivity {
        self.coercivity
    }

    pub fn symbol(&self, xi: f64) -> f64 {
        let t = xi * xi;
        let base = horner(&self.numerator, t) / horner(&self.denominator, t);
        if self.frac_power == 0.0 {
            base
        } else {
            base * (1.0 + t).powf(self.frac_power)
        }
    }

    /// `s(ξ) / (1+ξ²)^{order/2}`; the fractional factor cancels exactly.
    pub fn coercivity_ratio(&self, xi: f64) -> f64 {
        self.ratio_in_t(xi * xi)
    }

    fn ratio_in_t(&self, t: f64) -> f64 {
        let shift = self.denominator.len() as i32 - self.numerator.len() as i32;
        horner(&self.numerator, t) / horner(&self.denominator, t) * (1.0 + t).powi(shift)
    }

    /// Limit of the coercivity ratio as |ξ| → ∞.
    pub fn asymptotic_ratio(&self) -> f64 {
        self.numerator[self.numerator.len() - 1] / self.denominator[self.denominator.len() - 1]
    }

    pub fn is_constant(&self) -> bool {
        self.numerator.len() == 1 && self.denominator.len() == 1 && self.frac_power == 0.0
    }

    fn fit_global_coercivity(&self) -> Coercivity {
        let mut lo = self.asymptotic_ratio();
        let mut hi = lo;
        for i in 0..FIT_SAMPLES {
            let s = i as f64 / FIT_SAMPLES as f64;
            let ratio = self.ratio_in_t(s / (1.0 - s));
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        Coercivity {
            lower: lo.sqrt(),
            upper: hi.sqrt(),
        }
    }
}

/// Evaluates `l(ξ)` or `b(ξ)`.
pub fn symbol_at(spec: &OperatorSpec, xi: f64) -> f64 {
    spec.symbol(xi)
}

/// Tightest coercivity constants over the given samples.
pub fn fit_coercivity_constants(spec: &OperatorSpec, xi_samples: &[f64]) -> Result<Coercivity> {
    if xi_samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (lo, hi) = xi_samples
        .iter()
        .map(|&xi| spec.coercivity_ratio(xi))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok(Coercivity {
        lower: lo.sqrt(),
        upper: hi.sqrt(),
    })
}

/// The pair `(L, B)` with the exponent `p` of `g(u) = -|u|^{p-1}u`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSpec {
    l: OperatorSpec,
    b: OperatorSpec,
    p: f64,
    rho: f64,
    r: f64,
    s0: f64,
    smoothness_ok: bool,
}

impl ModelSpec {
    /// Packages the operators with `p`. Only `p > 1` is enforced here; the
    /// index conditions on `(ρ, r)` are reported by [`validate_model`] and
    /// enforced by [`ModelSpec::ensure_valid`].
    pub fn new(l: OperatorSpec, b: OperatorSpec, p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidModel(format!("exponent p must exceed 1, got {p}")));
        }
        let rho = l.order();
        let r = -b.order();
        let s0 = 0.5 * r + 0.5 * rho;
        let smoothness_ok = smoothness_holds(p, s0);
        Ok(Self {
            l,
            b,
            p,
            rho,
            r,
            s0,
            smoothness_ok,
        })
    }

    pub fn l(&self) -> &OperatorSpec {
        &self.l
    }

    pub fn b(&self) -> &OperatorSpec {
        &self.b
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Order of `L`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Minus the order of `B`.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Energy-space index `r/2 + ρ/2`.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn smoothness_ok(&self) -> bool {
        self.smoothness_ok
    }

    /// Lower coercivity constant `c₁` of `L`; admissible γ satisfy `γ² < c₁²`.
    pub fn c1(&self) -> f64 {
        self.l.coercivity().lower
    }

    pub fn check_gamma(&self, gamma: f64) -> Result<()> {
        let c1_sq = self.c1() * self.c1();
        if !gamma.is_finite() || gamma * gamma >= c1_sq {
            return Err(Error::GammaOutOfRange {
                gamma_sq: gamma * gamma,
                c1_sq,
            });
        }
        Ok(())
    }

    pub fn index_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rho < 0.0 {
            out.push(format!("order of L must be nonnegative (ρ = {})", self.rho));
        }
        if self.r < 0.0 {
            out.push(format!("order of B must be nonpositive (r = {})", self.r));
        }
        if self.r + 0.5 * self.rho < 1.0 - ORDER_TOL {
            out.push(format!(
                "r + ρ/2 >= 1 violated (ρ = {}, r = {})",
                self.rho, self.r
            ));
        }
        if self.rho.abs() <= ORDER_TOL && (self.r - 1.0).abs() <= ORDER_TOL {
            out.push("(ρ,r)=(0,1) excluded".to_string());
        }
        if self.s0 <= 0.5 {
            out.push(format!("s0 = r/2 + ρ/2 must exceed 1/2 (s0 = {})", self.s0));
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.index_violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(v.join("; ")))
        }
    }
}

fn smoothness_holds(p: f64, s0: f64) -> bool {
    if p.fract() == 0.0 {
        if (p as i64) % 2 == 0 {
            s0 <= p - 2.0
        } else {
            true
        }
    } else {
        s0 <= p.floor() - 1.0
    }
}

/// A violated coercivity or index bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// `"L"`, `"B"` or `"model"`.
    pub operator: String,
    pub bound: String,
    /// Offending wavenumber; `None` for index conditions and the asymptotic check.
    pub xi: Option<f64>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub rho: f64,
    pub r: f64,
    pub s0: f64,
    pub p: f64,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

fn check_operator(name: &str, spec: &OperatorSpec, sorted: &[f64], out: &mut Vec<Violation>) {
    let c = spec.coercivity();
    let lo = c.lower * c.lower;
    let hi = c.upper * c.upper;
    let mut first_low = None;
    let mut first_high = None;
    for &xi in sorted {
        let ratio = spec.coercivity_ratio(xi);
        if first_low.is_none() && ratio < lo * (1.0 - BOUND_RTOL) {
            first_low = Some(xi);
        }
        if first_high.is_none() && ratio > hi * (1.0 + BOUND_RTOL) {
            first_high = Some(xi);
        }
    }
    if let Some(xi) = first_low {
        out.push(Violation {
            operator: name.into(),
            bound: "lower".into(),
            xi: Some(xi),
            message: format!(
                "{name}: c_lower²(1+ξ²)^(order/2) <= symbol fails at ξ = {xi} (c_lower = {})",
                c.lower
            ),
        });
    }
    if let Some(xi) = first_high {
        out.push(Violation {
            operator: name.into(),
            bound: "upper".into(),
            xi: Some(xi),
            message: format!(
                "{name}: symbol <= c_upper²(1+ξ²)^(order/2) fails at ξ = {xi} (c_upper = {})",
                c.upper
            ),
        });
    }
    let asym = spec.asymptotic_ratio();
    if asym < lo * (1.0 - BOUND_RTOL) || asym > hi * (1.0 + BOUND_RTOL) {
        out.push(Violation {
            operator: name.into(),
            bound: "asymptotic".into(),
            xi: None,
            message: format!(
                "{name}: asymptotic ratio {asym} outside [{lo}, {hi}] as |ξ| → ∞"
            ),
        });
    }
}

/// Checks the coercivity bounds of both operators at every sample, the
/// asymptotic ratio, and the index conditions on `(ρ, r)`. The smoothness
/// restriction on `p` is reported as a warning only.
pub fn validate_model(model: &ModelSpec, xi_samples: &[f64]) -> Result<ValidationReport> {
    if xi_samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sorted: Vec<f64> = xi_samples.to_vec();
    sorted.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));

    let mut violations = Vec::new();
    check_operator("L", model.l(), &sorted, &mut violations);
    check_operator("B", model.b(), &sorted, &mut violations);
    for message in model.index_violations() {
        violations.push(Violation {
            operator: "model".into(),
            bound: "index".into(),
            xi: None,
            message,
        });
    }

    let mut warnings = Vec::new();
    if !model.smoothness_ok() {
        warnings.push(format!(
            "p = {} with s0 = {}: g(u) is not smooth enough for the local existence theory",
            model.p(),
            model.s0()
        ));
    }

    Ok(ValidationReport {
        valid: violations.is_empty(),
        rho: model.rho(),
        r: model.r(),
        s0: model.s0(),
        p: model.p(),
        violations,
        warnings,
    })
}

/// Named special cases of the general equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    /// `u_tt - u_xx - γ₁u_xxtt + γ₂u_xxxx = (g(u))_xx`:
    /// `b = 1/(1+γ₁ξ²)`, `l = (1+γ₂ξ²)/(1+γ₁ξ²)`.
    DoubleDispersion { gamma1: f64, gamma2: f64 },
    /// `B = I`, `l = 1+γ₂ξ²`.
    GoodBoussinesq { gamma2: f64 },
}

impl Preset {
    pub const NAMES: [&'static str; 2] = ["double_dispersion", "good_boussinesq"];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::DoubleDispersion { .. } => "double_dispersion",
            Preset::GoodBoussinesq { .. } => "good_boussinesq",
        }
    }

    pub fn build(&self, p: f64) -> Result<ModelSpec> {
        preset(*self, p)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

pub fn preset(which: Preset, p: f64) -> Result<ModelSpec> {
    match which {
        Preset::DoubleDispersion { gamma1, gamma2 } => {
            positive("gamma1", gamma1)?;
            positive("gamma2", gamma2)?;
            let den = [Term::new(1.0, 0), Term::new(gamma1, 1)];
            let b = OperatorSpec::new(&[Term::new(1.0, 0)], &den, 0.0, Some(-2.0))?
                .with_coercivity(1f64.min(1.0 / gamma1).sqrt(), 1f64.max(1.0 / gamma1).sqrt())?;
            let ratio = gamma2 / gamma1;
            let l = OperatorSpec::new(&[Term::new(1.0, 0), Term::new(gamma2, 1)], &den, 0.0, Some(0.0))?
                .with_coercivity(1f64.min(ratio).sqrt(), 1f64.max(ratio).sqrt())?;
            ModelSpec::new(l, b, p)
        }
        Preset::GoodBoussinesq { gamma2 } => {
            positive("gamma2", gamma2)?;
            let b = OperatorSpec::constant(1.0)?;
            let l = OperatorSpec::new(
                &[Term::new(1.0, 0), Term::new(gamma2, 1)],
                &[Term::new(1.0, 0)],
                0.0,
                Some(2.0),
            )?
            .with_coercivity(1f64.min(gamma2).sqrt(), 1f64.max(gamma2).sqrt())?;
            ModelSpec::new(l, b, p)
        }
    }
}
