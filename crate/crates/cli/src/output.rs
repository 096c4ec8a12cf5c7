//! CSV and JSON writers. Floats are written with 17 significant digits so
//! identical runs give byte-identical files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use potwell_core::TrajectoryRecord;
use serde::Serialize;

use crate::error::{CliError, Context, Result};

pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt17(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

pub const TRAJECTORY_HEADER: &str = "t,E,M,I,Q,twoI_minus_Q,u_Hs0,w_Hs,H,Hp,Hpp";

pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let mut out = String::with_capacity(200 * (record.samples.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &record.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt17(s.t),
            fmt17(s.energy),
            fmt17(s.momentum),
            fmt17(s.i),
            fmt17(s.q),
            fmt17(s.two_i_minus_q),
            fmt17(s.u_hs0),
            fmt17(s.w_hs),
            opt17(s.h),
            opt17(s.hp),
            opt17(s.hpp),
        );
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).context(format!("creating {}", path.display()))?;
    f.write_all(text.as_bytes())
        .context(format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serializing {}: {e}", path.display())))?;
    write_text(path, &(text + "\n"))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).context(format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).context(format!("creating {}", dir.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt17(-2.0), "-2.0000000000000000e0");
    }
}
