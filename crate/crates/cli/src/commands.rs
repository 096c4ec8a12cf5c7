//! Subcommand implementations. Each returns its result value and writes its
//! files under the configured output directory.

use std::path::{Path, PathBuf};

use potwell_core::classifier::classify_with;
use potwell_core::dynamics::BlowupReport;
use potwell_core::field_io;
use potwell_core::symbols::validate_model;
use potwell_core::{
    integrate, invariance_monitor, levine_check, minimize_embedding_constant, Classification,
    Functionals, GridSpec, InvarianceReport, Label, ModelSpec, Preset, ThresholdResult,
    ValidationReport,
};
use potwell_core::dynamics::LevineReport;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Context, Result};
use crate::init::build_state;
use crate::output::{ensure_dir, fmt17, trajectory_csv, write_json, write_text};
use crate::store::{self, ThresholdFile};
use crate::svg::{Chart, Series, PALETTE};

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        if let Some(o) = &self.out {
            cfg.outputs.dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

struct Setup {
    model: ModelSpec,
    grid: GridSpec,
    fns: Functionals,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    let model = cfg.model.build()?;
    let grid = cfg.grid.build()?;
    let report = validate_model(&model, &grid.wavenumbers()).context("validating model")?;
    if !report.valid {
        let first = &report.violations[0];
        return Err(CliError::Config(format!(
            "model violates {} bound on {}: {}",
            first.bound, first.operator, first.message
        )));
    }
    let fns = Functionals::new(&model, grid);
    Ok(Setup { model, grid, fns })
}

pub fn cmd_preset_list() -> String {
    let mut s = String::new();
    for p in [
        Preset::DoubleDispersion { gamma1: 1.0, gamma2: 1.0 },
        Preset::GoodBoussinesq { gamma2: 1.0 },
    ] {
        let params = match p {
            Preset::DoubleDispersion { .. } => "gamma1 > 0, gamma2 > 0: b = 1/(1+gamma1 xi^2), l = (1+gamma2 xi^2)/(1+gamma1 xi^2)",
            Preset::GoodBoussinesq { .. } => "gamma2 > 0: b = 1, l = 1+gamma2 xi^2",
        };
        s.push_str(&format!("{:<18} {params}\n", p.name()));
    }
    s
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationReport> {
    let model = cfg.model.build()?;
    let grid = cfg.grid.build()?;
    validate_model(&model, &grid.wavenumbers()).context("validating model")
}

fn gamma_list(cfg: &RunConfig, c1: f64) -> Vec<f64> {
    let mut gs = vec![cfg.gamma];
    gs.extend(&cfg.threshold.gammas);
    gs.extend(cfg.threshold.gamma_fractions.iter().map(|f| f * c1));
    gs.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    gs.dedup();
    gs
}

fn minimize(cfg: &RunConfig, s: &Setup, gamma: f64) -> Result<ThresholdResult> {
    minimize_embedding_constant(&s.model, s.grid, gamma, &cfg.threshold.options())
        .context(format!("minimizing for gamma = {gamma}"))
}

/// Computes `m(γ)`, `d(γ)` for the run's `γ` and any configured extras and
/// writes the threshold file.
pub fn cmd_threshold(cfg: &RunConfig) -> Result<ThresholdFile> {
    let s = setup(cfg)?;
    ensure_dir(&cfg.outputs.dir)?;
    let results = gamma_list(cfg, s.model.c1())
        .into_iter()
        .map(|g| minimize(cfg, &s, g))
        .collect::<Result<Vec<_>>>()?;
    let path = cfg.outputs.threshold_path();
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    store::save(&path, &results)
}

/// Threshold for `gamma`, from the cache when it matches, otherwise computed
/// and added to the cache.
fn obtain_threshold(cfg: &RunConfig, s: &Setup, gamma: f64) -> Result<ThresholdResult> {
    let path = cfg.outputs.threshold_path();
    let existing = store::load_all(&path, &s.model, s.grid)?;
    if let Some(hit) = existing.iter().flatten().find(|r| r.gamma == gamma) {
        return Ok(hit.clone());
    }
    let fresh = minimize(cfg, s, gamma)?;
    let mut all = existing.unwrap_or_default();
    all.push(fresh.clone());
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    store::save(&path, &all)?;
    Ok(fresh)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub gamma: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "M")]
    pub momentum: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub energy_used: f64,
    pub sign_quantity: f64,
    pub d: f64,
    pub label: Label,
}

impl From<Classification> for ClassRow {
    fn from(c: Classification) -> Self {
        Self {
            gamma: c.gamma,
            energy: c.energy,
            momentum: c.momentum,
            i: c.i,
            q: c.q,
            energy_used: c.energy_used,
            sign_quantity: c.sign_quantity,
            d: c.depth_used,
            label: c.label,
        }
    }
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Vec<ClassRow>> {
    let s = setup(cfg)?;
    ensure_dir(&cfg.outputs.dir)?;
    let th = obtain_threshold(cfg, &s, cfg.gamma)?;
    let phi = th.ground_state();
    let state = build_state(&cfg.initial, s.grid, Some(&phi), cfg.seed)?;
    let c = classify_with(&s.fns, &state, &th).context("classifying")?;
    let rows = vec![ClassRow::from(c)];
    write_json(&cfg.outputs.dir.join("classify.json"), &rows)?;
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Blowup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub initial: ClassRow,
    pub outcome: Outcome,
    pub t_final: f64,
    pub steps: usize,
    pub dt: f64,
    pub cfl_limit: f64,
    pub levine_tracking: bool,
    pub energy_drift: f64,
    pub momentum_drift: f64,
    pub blowup: BlowupReport,
    pub invariance: InvarianceReport,
    pub levine: Option<LevineReport>,
    pub files: Vec<String>,
}

fn diagnostics_chart(record: &potwell_core::TrajectoryRecord, d: f64) -> Chart {
    let series = |f: fn(&potwell_core::Sample) -> f64| -> Vec<(f64, f64)> {
        record.samples.iter().map(|s| (s.t, f(s))).collect()
    };
    Chart {
        title: "Diagnostics".into(),
        x_label: "t".into(),
        y_label: "value".into(),
        series: vec![
            Series::line("E + gamma M", series(|s| s.energy_used), PALETTE[0]),
            Series::line("I", series(|s| s.i), PALETTE[1]),
            Series::line("Q", series(|s| s.q), PALETTE[2]),
            Series::line("2I_gamma - Q", series(|s| s.sign_quantity), PALETTE[3]),
        ],
        hlines: vec![(d, "d".into())],
    }
}

fn simulate_into(
    cfg: &RunConfig,
    s: &Setup,
    th: &ThresholdResult,
    dir: &Path,
) -> Result<SimulationSummary> {
    ensure_dir(dir)?;
    let phi = th.ground_state();
    let state = build_state(&cfg.initial, s.grid, Some(&phi), cfg.seed)?;
    let mean_free = s.fns.ctx().antiderivative(&state.u).is_ok();
    let solver = cfg.solver.build(&s.fns, mean_free);
    let record = integrate(&state, &solver, th).context("integrating")?;
    let invariance = invariance_monitor(&record);
    let levine = if record.levine_tracking {
        Some(levine_check(&record).context("Levine check")?)
    } else {
        None
    };
    let (energy_drift, momentum_drift) = record.drifts();

    let mut files = vec!["trajectory.csv".to_string(), "summary.json".to_string()];
    write_text(&dir.join("trajectory.csv"), &trajectory_csv(&record))?;
    if cfg.outputs.svg {
        write_text(&dir.join("diagnostics.svg"), &diagnostics_chart(&record, th.d_value).render())?;
        files.push("diagnostics.svg".into());
    }
    for (k, snap) in record.snapshots.iter().enumerate() {
        for (tag, field) in [("u", &snap.state.u), ("w", &snap.state.w)] {
            let name = format!("snapshot_{k:03}_{tag}.bin");
            field_io::save(&dir.join(&name), field).context(format!("writing {name}"))?;
            files.push(name);
        }
    }

    let summary = SimulationSummary {
        initial: record.initial.into(),
        outcome: if record.blowup.detected { Outcome::Blowup } else { Outcome::Completed },
        t_final: record.final_time(),
        steps: record.steps_taken,
        dt: record.dt,
        cfl_limit: record.cfl_limit,
        levine_tracking: record.levine_tracking,
        energy_drift,
        momentum_drift,
        blowup: record.blowup.clone(),
        invariance,
        levine,
        files,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulationSummary> {
    let s = setup(cfg)?;
    ensure_dir(&cfg.outputs.dir)?;
    let th = obtain_threshold(cfg, &s, cfg.gamma)?;
    simulate_into(cfg, &s, &th, &cfg.outputs.dir)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// `completed`, `blowup` or `error`.
    pub outcome: String,
    pub label: Option<Label>,
    pub energy_used: Option<f64>,
    pub depth_used: Option<f64>,
    pub sign_quantity: Option<f64>,
    pub t_detect: Option<f64>,
    pub error: Option<String>,
    pub dir: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub values: Vec<f64>,
    pub rows: Vec<SweepRow>,
    /// (largest surviving value, smallest blow-up value) at the first
    /// completed-to-blowup transition.
    pub bracket: Option<[f64; 2]>,
    pub note: String,
}

/// First adjacent `completed → blowup` pair of values.
pub fn find_bracket(rows: &[SweepRow]) -> Option<[f64; 2]> {
    rows.windows(2)
        .find(|w| w[0].outcome == "completed" && w[1].outcome == "blowup")
        .map(|w| [w[0].value, w[1].value])
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,outcome,label,energy_used,depth_used,sign_quantity,t_detect\n");
    let o = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt17(r.value),
            r.outcome,
            r.label.map(|l| l.as_str()).unwrap_or(""),
            o(r.energy_used),
            o(r.depth_used),
            o(r.sign_quantity),
            o(r.t_detect),
        ));
    }
    out
}

fn sweep_chart(res: &SweepResult) -> Chart {
    let mut series = Vec::new();
    for (k, outcome) in ["completed", "blowup", "error"].iter().enumerate() {
        let pts: Vec<(f64, f64)> = res
            .rows
            .iter()
            .filter(|r| r.outcome == *outcome)
            .filter_map(|r| r.energy_used.map(|e| (r.value, e)))
            .collect();
        if !pts.is_empty() {
            series.push(Series::dots(outcome, pts, PALETTE[k]));
        }
    }
    let hlines = res
        .rows
        .iter()
        .find_map(|r| r.depth_used)
        .map(|d| vec![(d, "d".to_string())])
        .unwrap_or_default();
    Chart {
        title: format!("Sweep over {}", res.parameter),
        x_label: res.parameter.clone(),
        y_label: "E + gamma M".into(),
        series,
        hlines,
    }
}

/// Runs one simulation per sweep value on a pool of `threads` workers.
pub fn cmd_sweep(cfg: &RunConfig, threads: Option<usize>) -> Result<SweepResult> {
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep command needs a [sweep] section".into()))?;
    let s = setup(cfg)?;
    ensure_dir(&cfg.outputs.dir)?;
    let configs = sweep
        .values
        .iter()
        .map(|&v| cfg.with_parameter(&sweep.parameter, v))
        .collect::<Result<Vec<_>>>()?;

    // thresholds are computed up front so workers never write the cache
    let mut thresholds: Vec<ThresholdResult> = Vec::new();
    for c in &configs {
        if !thresholds.iter().any(|t| t.gamma == c.gamma) {
            thresholds.push(obtain_threshold(cfg, &s, c.gamma)?);
        }
    }

    let sweep_dir = cfg.outputs.dir.join("sweep");
    let run_one = |(k, c): (usize, &RunConfig)| -> SweepRow {
        let value = sweep.values[k];
        let rel = format!("sweep/run_{k:03}");
        let dir = sweep_dir.join(format!("run_{k:03}"));
        let th = thresholds.iter().find(|t| t.gamma == c.gamma).expect("threshold computed above");
        let local = Setup {
            model: s.model.clone(),
            grid: s.grid,
            fns: Functionals::new(&s.model, s.grid),
        };
        match simulate_into(c, &local, th, &dir) {
            Ok(sum) => SweepRow {
                value,
                outcome: match sum.outcome {
                    Outcome::Completed => "completed".into(),
                    Outcome::Blowup => "blowup".into(),
                },
                label: Some(sum.initial.label),
                energy_used: Some(sum.initial.energy_used),
                depth_used: Some(sum.initial.d),
                sign_quantity: Some(sum.initial.sign_quantity),
                t_detect: sum.blowup.t_detect,
                error: None,
                dir: rel,
            },
            Err(e) => SweepRow {
                value,
                outcome: "error".into(),
                label: None,
                energy_used: None,
                depth_used: None,
                sign_quantity: None,
                t_detect: None,
                error: Some(e.to_string()),
                dir: rel,
            },
        }
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| configs.par_iter().enumerate().map(run_one).collect());

    let bracket = find_bracket(&rows);
    let note = match bracket {
        Some([a, b]) => format!("bracket: survives at {a}, blows up at {b}"),
        None if rows.iter().all(|r| r.outcome == "completed") => {
            "no bracket: every run completed".into()
        }
        None if rows.iter().all(|r| r.outcome == "blowup") => "no bracket: every run blew up".into(),
        None => "no bracket: no completed-to-blowup transition".into(),
    };
    let result = SweepResult {
        parameter: sweep.parameter.clone(),
        values: sweep.values.clone(),
        rows,
        bracket,
        note,
    };
    write_json(&cfg.outputs.dir.join("sweep.json"), &result)?;
    write_text(&cfg.outputs.dir.join("sweep.csv"), &sweep_csv(&result.rows))?;
    if cfg.outputs.svg {
        write_text(&cfg.outputs.dir.join("sweep.svg"), &sweep_chart(&result).render())?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64, outcome: &str) -> SweepRow {
        SweepRow {
            value,
            outcome: outcome.into(),
            label: None,
            energy_used: None,
            depth_used: None,
            sign_quantity: None,
            t_detect: None,
            error: None,
            dir: String::new(),
        }
    }

    #[test]
    fn bracket_from_first_transition() {
        let rows = vec![row(0.5, "completed"), row(0.8, "completed"), row(1.1, "blowup"), row(1.4, "blowup")];
        assert_eq!(find_bracket(&rows), Some([0.8, 1.1]));
        let rows = vec![row(0.5, "completed"), row(0.8, "error"), row(1.1, "blowup")];
        assert_eq!(find_bracket(&rows), None);
        assert_eq!(find_bracket(&[row(1.0, "completed")]), None);
    }

    #[test]
    fn gamma_list_sorted_by_magnitude() {
        let text = r#"
gamma = 0.1
[model]
p = 3.0
preset = { name = "double_dispersion", gamma1 = 1.0, gamma2 = 1.0 }
[grid]
half_length = 10.0
n_modes = 64
[threshold]
max_iters = 100
rel_tol = 1e-12
grad_tol = 1e-8
gammas = [-0.3, 0.1]
gamma_fractions = [0.0, 0.5]
"#;
        let cfg = RunConfig::from_toml(text, Path::new("x.toml")).unwrap();
        assert_eq!(gamma_list(&cfg, 1.0), vec![0.0, 0.1, -0.3, 0.5]);
    }

    #[test]
    fn preset_list_names_everything() {
        let s = cmd_preset_list();
        for name in Preset::NAMES {
            assert!(s.contains(name));
        }
    }
}
