//! Artifact writing: one `result.json` with the resolved config and the
//! check table, a descent `history.csv`, and the fields as CSV columns.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use nehari_lab::solvers::HistoryEntry;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::scenarios::{Check, Outcome};

/// Bumped whenever the layout of `result.json` changes shape.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct ResultDocument<'a> {
    schema_version: u32,
    verdict: &'a str,
    config: &'a ExperimentConfig,
    checks: &'a [Check],
}

fn history_csv(history: &[HistoryEntry]) -> String {
    let mut out = String::from("iteration,energy,grad_norm\n");
    for entry in history {
        out.push_str(&format!(
            "{},{:.16e},{:.16e}\n",
            entry.iteration, entry.energy, entry.grad_norm
        ));
    }
    out
}

/// Writes all artifacts for one run. Writes happen sequentially on the
/// caller's thread by design: output determinism is part of the contract.
pub fn write_artifacts(
    dir: &Path,
    cfg: &ExperimentConfig,
    outcome: &Outcome,
    verdict: &str,
) -> Result<()> {
    let fields_dir = dir.join("fields");
    fs::create_dir_all(&fields_dir)
        .with_context(|| format!("creating output directory {}", fields_dir.display()))?;

    let doc = ResultDocument {
        schema_version: SCHEMA_VERSION,
        verdict,
        config: cfg,
        checks: &outcome.checks,
    };
    let mut json = serde_json::to_string_pretty(&doc).context("serializing result.json")?;
    json.push('\n');
    let result_path = dir.join("result.json");
    fs::write(&result_path, json)
        .with_context(|| format!("writing {}", result_path.display()))?;

    let history_path = dir.join("history.csv");
    fs::write(&history_path, history_csv(&outcome.history))
        .with_context(|| format!("writing {}", history_path.display()))?;

    for (stem, field) in &outcome.fields {
        let path = fields_dir.join(format!("{stem}.csv"));
        field
            .write_csv(&path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
