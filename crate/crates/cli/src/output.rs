//! CSV / JSON writers. Every file starts with the provenance of the run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tescatter::assembly::QuadratureSettings;
use tescatter::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where a result came from.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub scene_hash: Option<String>,
    pub quadrature: QuadratureSettings,
}

impl Provenance {
    fn csv_header(&self) -> String {
        let q = &self.quadrature;
        format!(
            "# tescatter {VERSION}\n# scene_sha256 {}\n# quadrature outer_points={} inner_points={} delta={}\n",
            self.scene_hash.as_deref().unwrap_or("none"),
            q.outer_points,
            q.inner_points,
            q.delta
        )
    }

    pub fn json(&self) -> Value {
        json!({
            "tool": "tescatter",
            "version": VERSION,
            "scene_sha256": self.scene_hash,
            "quadrature": self.quadrature,
        })
    }
}

/// Accumulates a CSV document; cells are already formatted.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(prov: &Provenance, notes: &[String], columns: &[&str]) -> Self {
        let mut text = prov.csv_header();
        for n in notes {
            let _ = writeln!(text, "# {n}");
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        write_file(dir, name, &self.text)
    }
}

/// Round-trippable fixed format so repeated runs are byte-identical.
pub fn num(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).expect("json values always serialize");
    text.push('\n');
    write_file(dir, name, &text)
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let io = |path: &Path, source| Error::Io { path: path.display().to_string(), source };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| io(&path, e))?;
    Ok(path)
}
