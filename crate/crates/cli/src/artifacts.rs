//! Output directory bookkeeping: every file written goes through
//! [`Artifacts`], which records its hash for the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bimonetary_core::Panel;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{AtStage, CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn fmt_f64(x: f64) -> String {
    x.to_string()
}

pub struct Artifacts {
    dir: PathBuf,
    files: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).at("output")?;
        Ok(Artifacts { dir: dir.to_owned(), files: BTreeMap::new(), warnings: Vec::new() })
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        std::fs::write(self.dir.join(name), bytes).map_err(|e| CliError::io("output", &e))?;
        self.files.insert(name.to_owned(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::input("output", "Json", e.to_string()))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Header plus rows of already formatted cells.
    pub fn write_table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::input("output", "Csv", e.to_string());
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::input("output", "Csv", e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_panel(&mut self, name: &str, panel: &Panel) -> CliResult<()> {
        let mut buf = Vec::new();
        panel.write_csv_to(&mut buf).at("output")?;
        self.write_bytes(name, &buf)
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("{}", serde_json::json!({ "warning": message }));
        self.warnings.push(message);
    }

    /// Writes `run_manifest.json` listing every other output. Contains no
    /// timestamps or absolute output paths, so reruns are byte-identical.
    pub fn finish(self, manifest: Manifest) -> CliResult<PathBuf> {
        #[derive(Serialize)]
        struct Output<'a> {
            file: &'a str,
            sha256: &'a str,
        }
        let outputs: Vec<Output> = self.files.iter().map(|(f, h)| Output { file: f, sha256: h }).collect();
        let value = serde_json::json!({
            "command": manifest.command,
            "stages": manifest.stages,
            "seed": manifest.seed,
            "input": manifest.input,
            "config": manifest.config,
            "versions": {
                "bimonetary-cli": env!("CARGO_PKG_VERSION"),
                "bimonetary-core": bimonetary_core::VERSION,
            },
            "warnings": self.warnings,
            "outputs": outputs,
        });
        let mut text = serde_json::to_string_pretty(&value).expect("manifest serializes");
        text.push('\n');
        std::fs::write(self.dir.join("run_manifest.json"), text).at("output")?;
        Ok(self.dir)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputRecord {
    pub path: Option<String>,
    pub sha256: Option<String>,
    /// Set when the panel was generated instead of read.
    pub synthetic_rows: Option<usize>,
}

pub struct Manifest {
    pub command: String,
    pub stages: Vec<String>,
    pub seed: u64,
    pub input: InputRecord,
    pub config: serde_json::Value,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_outputs_with_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::create(dir.path()).unwrap();
        a.write_table("t.csv", &["x", "y"], &[vec!["1".into(), fmt_f64(0.5)]]).unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("t.csv")).unwrap(), "x,y\n1,0.5\n");
        let manifest = Manifest {
            command: "test".into(),
            stages: vec![],
            seed: 1,
            input: InputRecord { path: None, sha256: None, synthetic_rows: None },
            config: serde_json::json!({}),
        };
        a.finish(manifest).unwrap();
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_manifest.json")).unwrap()).unwrap();
        assert_eq!(m["outputs"][0]["file"], "t.csv");
        assert_eq!(m["outputs"][0]["sha256"], sha256_hex(b"x,y\n1,0.5\n"));
    }
}
