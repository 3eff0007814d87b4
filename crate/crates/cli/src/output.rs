//! Deterministic artifact emission: sorted-key JSON, RFC-4180 CSV with
//! 17 significant digits, atomic file replacement.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Version string baked in at build time (`git describe` when available).
pub const VERSION: &str = env!("TML_GIT_DESCRIBE");

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub mode: String,
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
}

impl Provenance {
    pub fn new(mode: impl Into<String>, seed: Option<u64>, parameters: impl Serialize) -> Self {
        Provenance {
            version: VERSION,
            mode: mode.into(),
            seed,
            parameters: serde_json::to_value(parameters).expect("parameters serialize"),
        }
    }
}

/// Report envelope shared by every JSON artifact.
#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub provenance: Provenance,
    pub pass: bool,
    pub report: T,
}

/// Pretty JSON with keys sorted at every level.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    // serde_json's Map is ordered by key, so a round trip through Value sorts.
    let v = serde_json::to_value(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut out = serde_json::to_vec_pretty(&v).map_err(|e| CliError::Runtime(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Scientific notation with 17 significant digits; `NaN`, `inf`, `-inf` otherwise.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<Cell>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Runtime(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render)).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

/// Write via a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// To `path` when given, else stdout.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Runtime(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(f64::NAN), "NaN");
        let back: f64 = format_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_quotes_and_uses_lf() {
        let rows = vec![vec![Cell::Text("a,b".into()), Cell::Int(3), Cell::Bool(true)]];
        let s = String::from_utf8(csv_bytes(&["x", "y", "z"], &rows).unwrap()).unwrap();
        assert_eq!(s, "x,y,z\n\"a,b\",3,true\n");
    }

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let s = String::from_utf8(json_bytes(&S { zeta: 1, alpha: 2 }).unwrap()).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
