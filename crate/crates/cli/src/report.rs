//! Run manifest, verdicts and report output.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One named check. Informational checks (`asserted == false`) never change
/// the exit status.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub asserted: bool,
    pub detail: String,
}

impl Verdict {
    pub fn assert(check: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            passed,
            asserted: true,
            detail: detail.into(),
        }
    }

    pub fn inform(check: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            asserted: false,
            ..Self::assert(check, passed, detail)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    #[serde(rename = "configDigest")]
    pub config_digest: String,
    pub seed: Option<u64>,
    pub versions: Versions,
    /// Only with `--timing`, so that default reports are reproducible.
    #[serde(rename = "wallTimeSeconds", skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    pub verdicts: Vec<Verdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub trispec: &'static str,
}

#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub manifest: RunManifest,
    pub result: T,
}

/// Hex SHA-256 of the canonical JSON of the resolved configuration.
pub fn digest(config: &impl Serialize) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Outcome of a subcommand before it is wrapped in a report.
pub struct Output<T: Serialize> {
    pub result: T,
    pub verdicts: Vec<Verdict>,
    pub seed: Option<u64>,
    pub config_digest: String,
    /// Optional figure data.
    pub csv: Option<String>,
}

pub struct Sinks<'a> {
    pub report: Option<&'a Path>,
    pub csv: Option<&'a Path>,
    pub command: Vec<String>,
    pub wall_time: Option<f64>,
}

/// Writes the report (stdout by default) and the CSV, and returns the names
/// of the failed asserted checks.
pub fn emit<T: Serialize>(out: Output<T>, sinks: &Sinks) -> std::io::Result<Vec<String>> {
    let failed: Vec<String> = out
        .verdicts
        .iter()
        .filter(|v| v.asserted && !v.passed)
        .map(|v| v.check.clone())
        .collect();
    let report = Report {
        manifest: RunManifest {
            command: sinks.command.clone(),
            config_digest: out.config_digest,
            seed: out.seed,
            versions: Versions {
                trispec: env!("CARGO_PKG_VERSION"),
            },
            wall_time: sinks.wall_time,
            verdicts: out.verdicts,
        },
        result: out.result,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    match sinks.report {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    if let Some(csv) = out.csv {
        match sinks.csv {
            Some(p) => fs::write(p, csv)?,
            None if sinks.report.is_some() => print!("{csv}"),
            None => {}
        }
    }
    Ok(failed)
}
