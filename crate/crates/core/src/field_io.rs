//! Field persistence.
//!
//! * CSV: header `x,value`, one row per sample, 17 significant digits.
//! * Binary: `X` as f64, `N` as u64, then `N` f64 samples; all little-endian.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, RealField};

pub fn write_csv<W: Write>(mut out: W, field: &RealField) -> Result<()> {
    writeln!(out, "x,value")?;
    let g = field.grid();
    for (j, v) in field.samples().iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e}", g.x(j), v)?;
    }
    Ok(())
}

/// Reads a CSV field; the grid is recovered from the first abscissa
/// (`x_0 = -X`) and the row count.
pub fn read_csv<R: BufRead>(input: R) -> Result<RealField> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('x')) {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(x), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Format(format!("line {}: expected two columns", lineno + 1)));
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))
        };
        xs.push(parse(x)?);
        vs.push(parse(v)?);
    }
    let Some(&x0) = xs.first() else {
        return Err(Error::Format("no samples".into()));
    };
    let grid = GridSpec::new(-x0, xs.len())?;
    let h = grid.spacing();
    for (j, &x) in xs.iter().enumerate() {
        if (x - grid.x(j)).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Format(format!("abscissa {j} is not on a uniform grid")));
        }
    }
    RealField::new(grid, vs)
}

pub fn write_binary<W: Write>(mut out: W, field: &RealField) -> Result<()> {
    let g = field.grid();
    out.write_all(&g.half_length().to_le_bytes())?;
    out.write_all(&(g.n_modes() as u64).to_le_bytes())?;
    for v in field.samples() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<RealField> {
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b8)?;
    let half_length = f64::from_le_bytes(b8);
    input.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let grid = GridSpec::new(half_length, n)?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        input
            .read_exact(&mut b8)
            .map_err(|_| Error::Format("truncated payload".into()))?;
        samples.push(f64::from_le_bytes(b8));
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    RealField::new(grid, samples)
}

/// Loads a field by extension: `.csv` as CSV, anything else as binary.
pub fn load(path: &std::path::Path) -> Result<RealField> {
    let file = std::fs::File::open(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_csv(std::io::BufReader::new(file))
    } else {
        read_binary(std::io::BufReader::new(file))
    }
}

pub fn save(path: &std::path::Path, field: &RealField) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        write_csv(file, field)
    } else {
        write_binary(file, field)
    }
}
