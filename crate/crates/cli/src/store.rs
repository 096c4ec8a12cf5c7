//! Threshold cache: a JSON file with one entry per `γ` and a binary sidecar
//! holding each minimizer.

use std::path::{Path, PathBuf};

use potwell_core::field_io;
use potwell_core::{GridSpec, ModelSpec, ThresholdResult};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context, Result};
use crate::output::{read_json, write_json};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub gamma: f64,
    pub m: f64,
    pub d: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Sidecar path, relative to the JSON file.
    pub minimizer_file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFile {
    pub model: serde_json::Value,
    pub grid: GridSpec,
    pub p: f64,
    pub c1: f64,
    pub entries: Vec<ThresholdEntry>,
}

fn model_value(model: &ModelSpec) -> Result<serde_json::Value> {
    serde_json::to_value(model).map_err(|e| CliError::Runtime(format!("serializing model: {e}")))
}

fn sidecar_name(path: &Path, index: usize) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("threshold");
    format!("{stem}_minimizer_{index}.bin")
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Writes `results` (all on one model and grid) to `path` plus sidecars.
pub fn save(path: &Path, results: &[ThresholdResult]) -> Result<ThresholdFile> {
    let first = results
        .first()
        .ok_or_else(|| CliError::Runtime("no threshold results to save".into()))?;
    let dir = base_dir(path);
    let mut entries = Vec::with_capacity(results.len());
    for (k, r) in results.iter().enumerate() {
        let name = sidecar_name(path, k);
        field_io::save(&dir.join(&name), &r.minimizer).context(format!("writing {name}"))?;
        entries.push(ThresholdEntry {
            gamma: r.gamma,
            m: r.m_value,
            d: r.d_value,
            iterations: r.iterations,
            residual: r.residual,
            minimizer_file: name,
        });
    }
    let file = ThresholdFile {
        model: model_value(&first.model)?,
        grid: first.grid,
        p: first.model.p(),
        c1: first.model.c1(),
        entries,
    };
    write_json(path, &file)?;
    Ok(file)
}

/// All entries of `path` if it was written for `model` on `grid`.
pub fn load_all(path: &Path, model: &ModelSpec, grid: GridSpec) -> Result<Option<Vec<ThresholdResult>>> {
    if !path.exists() {
        return Ok(None);
    }
    let file: ThresholdFile = read_json(path)?;
    if file.model != model_value(model)? || file.grid != grid {
        return Ok(None);
    }
    let dir = base_dir(path);
    let mut out = Vec::with_capacity(file.entries.len());
    for e in &file.entries {
        let minimizer = field_io::load(&dir.join(&e.minimizer_file))
            .context(format!("reading {}", e.minimizer_file))?;
        out.push(ThresholdResult {
            model: model.clone(),
            grid,
            gamma: e.gamma,
            m_value: e.m,
            d_value: e.d,
            minimizer,
            iterations: e.iterations,
            residual: e.residual,
        });
    }
    Ok(Some(out))
}

pub fn load_matching(path: &Path, model: &ModelSpec, grid: GridSpec, gamma: f64) -> Result<Option<ThresholdResult>> {
    Ok(load_all(path, model, grid)?.and_then(|all| all.into_iter().find(|r| r.gamma == gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use potwell_core::symbols::preset;
    use potwell_core::{minimize_embedding_constant, MinimizeOptions, Preset};

    #[test]
    fn save_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        let model = preset(Preset::DoubleDispersion { gamma1: 1.0, gamma2: 1.0 }, 3.0).unwrap();
        let grid = GridSpec::new(20.0, 128).unwrap();
        let opts = MinimizeOptions::default();
        let rs: Vec<ThresholdResult> = [0.0, 0.3]
            .iter()
            .map(|&g| minimize_embedding_constant(&model, grid, g, &opts).unwrap())
            .collect();
        save(&path, &rs).unwrap();
        let back = load_all(&path, &model, grid).unwrap().unwrap();
        assert_eq!(back, rs);
        assert_eq!(load_matching(&path, &model, grid, 0.3).unwrap().unwrap(), rs[1]);
        assert!(load_matching(&path, &model, grid, 0.2).unwrap().is_none());
        let other = preset(Preset::DoubleDispersion { gamma1: 1.0, gamma2: 2.0 }, 3.0).unwrap();
        assert!(load_all(&path, &other, grid).unwrap().is_none());
        assert!(load_all(&path, &model, GridSpec::new(20.0, 64).unwrap()).unwrap().is_none());
    }
}
