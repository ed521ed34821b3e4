//! Text mode-table checkpoints with a JSON sidecar.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::EquationSpec;
use crate::error::{Error, Result};
use crate::spectral::{Grid2D, SpectralField2D};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Sidecar describing a `.modes` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub grid: Grid2D,
    pub spec: EquationSpec,
    pub t: f64,
    pub modes_file: String,
}

fn sidecar_path(stem: &Path) -> PathBuf {
    stem.with_extension("json")
}

fn modes_path(stem: &Path) -> PathBuf {
    stem.with_extension("modes")
}

/// Writes `<stem>.modes` (one `m_x m_y re im` row per mode) and `<stem>.json`.
/// Returns both paths.
pub fn write_checkpoint(stem: &Path, field: &SpectralField2D, spec: &EquationSpec) -> Result<Vec<PathBuf>> {
    let mp = modes_path(stem);
    let mut w = BufWriter::new(fs::File::create(&mp)?);
    writeln!(w, "# m_x m_y re im")?;
    let g = &field.grid;
    for (i, c) in field.coeffs.iter().enumerate() {
        let (mx, my) = g.modes(i);
        // `{:?}` prints the shortest string that parses back to the same f64.
        writeln!(w, "{mx} {my} {:?} {:?}", c.re, c.im)?;
    }
    w.flush()?;
    let meta = Checkpoint {
        format_version: CHECKPOINT_FORMAT_VERSION,
        grid: *g,
        spec: *spec,
        t: field.time,
        modes_file: mp.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let sp = sidecar_path(stem);
    fs::write(&sp, serde_json::to_string_pretty(&meta)?)?;
    Ok(vec![mp, sp])
}

pub fn read_checkpoint(stem: &Path) -> Result<(SpectralField2D, Checkpoint)> {
    let meta: Checkpoint = serde_json::from_str(&fs::read_to_string(sidecar_path(stem))?)?;
    if meta.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(Error::Integrity(format!(
            "checkpoint format {} is not supported (expected {CHECKPOINT_FORMAT_VERSION})",
            meta.format_version
        )));
    }
    meta.grid.validate()?;
    let mp = stem.with_file_name(&meta.modes_file);
    let mut field = SpectralField2D::zeros(meta.grid);
    field.time = meta.t;
    let mut seen = vec![false; meta.grid.len()];
    for (lineno, line) in BufReader::new(fs::File::open(&mp)?).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::Integrity(format!("{}:{}: malformed mode row", mp.display(), lineno + 1));
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let mx: i64 = parts[0].parse().map_err(|_| bad())?;
        let my: i64 = parts[1].parse().map_err(|_| bad())?;
        let re: f64 = parts[2].parse().map_err(|_| bad())?;
        let im: f64 = parts[3].parse().map_err(|_| bad())?;
        let idx = meta.grid.index_of(mx, my).ok_or_else(bad)?;
        if seen[idx] {
            return Err(bad());
        }
        seen[idx] = true;
        field.coeffs[idx] = Complex64::new(re, im);
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Integrity(format!("{} is missing modes", mp.display())));
    }
    Ok((field, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Form;
    use crate::initial;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid2D::new(16, 8, 3.0, 4.0).unwrap();
        let mut u = initial::random_smooth(g, 1, 1.0, initial::Taper::Algebraic).unwrap();
        u.time = 0.125;
        let spec = EquationSpec::new(2, -1, Form::Symmetrized).unwrap();
        let stem = dir.path().join("ck_0001");
        let files = write_checkpoint(&stem, &u, &spec).unwrap();
        assert_eq!(files.len(), 2);
        let (back, meta) = read_checkpoint(&stem).unwrap();
        assert_eq!(back, u);
        assert_eq!(meta.spec, spec);
    }

    #[test]
    fn truncated_table_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid2D::square(8, 1.0).unwrap();
        let u = SpectralField2D::zeros(g);
        let spec = EquationSpec::new(1, 1, Form::Original).unwrap();
        let stem = dir.path().join("ck");
        write_checkpoint(&stem, &u, &spec).unwrap();
        let mp = stem.with_extension("modes");
        let text = fs::read_to_string(&mp).unwrap();
        let cut: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        fs::write(&mp, cut).unwrap();
        assert!(matches!(read_checkpoint(&stem), Err(Error::Integrity(_))));
    }
}
