//! Run manifest: configuration echo, timing, termination, and hashes of the
//! pinned inputs, so every output file traces back to one run id.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub run_id: String,
    pub artifact_version: String,
    pub started: String,
    pub finished: String,
    pub termination: TerminationEcho,
    pub seed: u64,
    pub n: usize,
    pub config: RunConfig,
    pub fixture_hashes: FixtureHashes,
}

#[derive(Debug, Serialize)]
pub struct TerminationEcho {
    pub cause: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapse_step: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct FixtureHashes {
    /// Hash of the pinned-constants file in use.
    pub pinned_constants: String,
    /// Hash of the symbol table actually used by this run.
    pub symbol_cache: String,
}

pub fn termination_echo(t: knotflow::TerminationCause) -> TerminationEcho {
    match t {
        knotflow::TerminationCause::CriticalPoint => TerminationEcho {
            cause: "critical_point".into(),
            collapse_step: None,
        },
        knotflow::TerminationCause::TimeLimit => TerminationEcho {
            cause: "time_limit".into(),
            collapse_step: None,
        },
        knotflow::TerminationCause::StepCollapse { step } => TerminationEcho {
            cause: "step_collapse".into(),
            collapse_step: Some(step),
        },
    }
}

/// Deterministic run id from the exact config bytes, the seed and the
/// artifact version.
pub fn run_id(config_text: &str, seed: u64, version: &str) -> String {
    let mut h = Sha256::new();
    h.update(config_text.as_bytes());
    h.update(seed.to_le_bytes());
    h.update(version.as_bytes());
    hex16(&h.finalize())
}

pub fn hash_file(path: &std::path::Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path)?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(hex16(&h.finalize()))
}

/// Hash of the symbol values used at this `(alpha, n)`.
pub fn hash_symbol_table(alpha: f64, n: usize) -> anyhow::Result<String> {
    let table = knotflow::q_symbols_upto(alpha, n / 2)?;
    let mut h = Sha256::new();
    h.update(alpha.to_le_bytes());
    for v in table {
        h.update(v.to_le_bytes());
    }
    Ok(hex16(&h.finalize()))
}

fn hex16(digest: &[u8]) -> String {
    digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
}
