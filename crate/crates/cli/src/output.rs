//! Output directory layout: data files plus `manifest.json`, which records
//! everything needed to re-run the command.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// Bumped whenever a CSV column list changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const U1_COLUMNS: &[&str] = &[
    "N",
    "M1",
    "M2",
    "M3",
    "omega_MHz",
    "delta_MHz",
    "v_MHz",
    "tg_ns",
    "alpha_over_pi",
    "beta_over_pi",
    "beta_minus_2alpha_over_pi",
    "e_ro",
    "e_de_ns_per_tau",
];

pub const U2_COLUMNS: &[&str] = &[
    "Nc",
    "Nt",
    "omega_c_MHz",
    "delta_c_MHz",
    "omega_t_MHz",
    "delta_t_MHz",
    "v_MHz",
    "tc_ns",
    "tt_ns",
    "alpha_over_pi",
    "beta_over_pi",
    "gamma_over_pi",
    "beta_minus_alpha_minus_gamma_over_pi",
    "e_ro",
    "e_de_ns_per_tau",
];

pub const NOISE_COLUMNS: &[&str] = &["T_a_uK", "drift_mode", "mean_error", "ci_low", "ci_high", "n_traj"];

pub const REPRO_COLUMNS: &[&str] = &["case", "quantity", "computed", "reference", "tolerance", "pass"];

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub code_version: &'static str,
    pub schema_version: u32,
    pub command: &'a str,
    /// Positional arguments of the command, if any.
    pub args: Vec<String>,
    pub seed: u64,
    /// Informational; results do not depend on it.
    pub workers: usize,
    pub rerun: String,
    pub outputs: Vec<OutputFile>,
    pub config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<serde_json::Value>,
}

pub struct OutDir {
    pub path: PathBuf,
    files: Vec<OutputFile>,
}

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(path)?;
        Ok(OutDir { path: path.to_path_buf(), files: Vec::new() })
    }

    pub fn write_csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let p = self.path.join(name);
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(OutputFile { file: name.into(), columns: Some(columns.iter().map(|c| c.to_string()).collect()) });
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let p = self.path.join(name);
        fs::write(&p, serde_json::to_string_pretty(value)? + "\n")?;
        self.files.push(OutputFile { file: name.into(), columns: None });
        Ok(p)
    }

    /// Two-column whitespace-separated series with a `#` header line.
    pub fn write_series(&mut self, name: &str, header: [&str; 2], points: &[(f64, f64)]) -> Result<PathBuf, CliError> {
        let p = self.path.join(name);
        let mut s = format!("# {} {}\n", header[0], header[1]);
        for (x, y) in points {
            s.push_str(&format!("{x} {y}\n"));
        }
        fs::write(&p, s)?;
        self.files.push(OutputFile { file: name.into(), columns: Some(header.iter().map(|c| c.to_string()).collect()) });
        Ok(p)
    }

    pub fn finish(self, mut manifest: Manifest<'_>) -> Result<PathBuf, CliError> {
        manifest.outputs = self.files;
        let p = self.path.join("manifest.json");
        fs::write(&p, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(p)
    }
}

/// Shortest round-trip decimal form, so identical values give identical text.
pub fn num(x: f64) -> String {
    format!("{x}")
}
