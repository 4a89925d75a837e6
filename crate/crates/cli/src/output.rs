//! Deterministic text formats and atomic file writes.

use crate::CliError;
use kbwave::verify::Profile;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const PROFILE_HEADER: &str = "xi,f,f_prime,g";
pub const STATE_HEADER: &str = "x,u,v";

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv(header: &str, columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = String::with_capacity(80 * (rows + 1));
    out.push_str(header);
    out.push('\n');
    for i in 0..rows {
        let cells: Vec<String> = columns.iter().map(|c| num(c[i])).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn profile_csv(p: &Profile) -> String {
    let nan = vec![f64::NAN; p.len()];
    let fp = p.f_prime.as_deref().unwrap_or(&nan);
    let g = p.g.as_deref().unwrap_or(&nan);
    csv(PROFILE_HEADER, &[&p.xi, &p.f, fp, g])
}

pub fn state_csv(x: &[f64], u: &[f64], v: &[f64]) -> String {
    csv(STATE_HEADER, &[x, u, v])
}

pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(format!("serializing: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Failed(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `dir/stem.ext` for a path `dir/stem[.anything]`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}
