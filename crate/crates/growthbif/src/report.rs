//! Result persistence: a JSON envelope with schema version, config
//! echo, payload and provenance, plus flat CSV for tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::continuation::Branch;
use crate::error::{Error, Result};
use crate::spectrum::BifurcationPoint;

pub const SCHEMA: &str = "growthbif/v1";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultFile {
    pub schema: String,
    /// The configuration that produced the payload; re-running with it
    /// reproduces the payload bitwise (all algorithms deterministic).
    pub config: RunConfig,
    pub payload: Payload,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Table {
        columns: Vec<String>,
        /// Missing entries (e.g. degenerate symbol roots) are null.
        rows: Vec<Vec<Option<f64>>>,
    },
    Catalog {
        points: Vec<BifurcationPoint>,
        g_bullet: f64,
        k1: usize,
    },
    Branch(Branch),
    Checks {
        lines: Vec<CheckLine>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub flagged: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub n_r: usize,
    pub n_theta: usize,
    pub k_max: usize,
    pub wall_ms: u64,
}

impl ResultFile {
    pub fn new(config: &RunConfig, payload: Payload, wall_ms: u64) -> Self {
        ResultFile {
            schema: SCHEMA.to_string(),
            config: config.clone(),
            payload,
            provenance: Provenance {
                n_r: config.numerics.n_r,
                n_theta: config.numerics.n_theta,
                k_max: config.numerics.k_max,
                wall_ms,
            },
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ResultFile = serde_json::from_str(&text)?;
        if file.schema != SCHEMA {
            return Err(Error::config(format!(
                "{}: schema {:?} not supported (expected {SCHEMA:?})",
                path.display(),
                file.schema
            )));
        }
        Ok(file)
    }
}

/// Writes a table payload as flat CSV next to the JSON envelope.
pub fn write_csv(path: &Path, columns: &[String], rows: &[Vec<Option<f64>>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| match v {
                Some(x) => format!("{x:.17e}"),
                None => String::new(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_is_exact() {
        let cfg = RunConfig::default();
        let payload = Payload::Table {
            columns: vec!["k".to_string(), "d_k".to_string(), "g_k".to_string()],
            rows: vec![
                vec![Some(0.0), Some(0.092_043_933_446_178_25), None],
                vec![
                    Some(2.0),
                    Some(-0.034_321_855_936_069_2),
                    Some(174.815_721_247_012_66),
                ],
            ],
        };
        let file = ResultFile::new(&cfg, payload, 12);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.json");
        file.write(&path).unwrap();
        let back = ResultFile::read(&path).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn schema_mismatch_rejected() {
        let cfg = RunConfig::default();
        let mut file = ResultFile::new(&cfg, Payload::Checks { lines: vec![] }, 0);
        file.schema = "growthbif/v0".to_string();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        assert!(ResultFile::read(&path).is_err());
    }

    #[test]
    fn csv_cells_for_missing_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            &["a".to_string(), "b".to_string()],
            &[vec![Some(1.0), None], vec![Some(0.5), Some(2.0)]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,b");
        assert!(lines[1].ends_with(','));
    }
}
