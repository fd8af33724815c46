//! Pipeline configuration files: flat TOML whose keys are `PipelineConfig` field names.
//! Keys from the file override a preset; unknown keys are rejected.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use pcf_core::config::PipelineConfig;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Asymptotic constants; infeasible below astronomically large Δ, so it always falls back.
    Paper,
    /// Scaled thresholds that let every stage run on desk-size graphs.
    Desk,
}

/// Builds the preset for `graph_delta` (or the file's `delta` when it sets one), then applies
/// every key of the file on top.
pub fn load(preset: Preset, graph_delta: usize, path: Option<&Path>) -> Result<PipelineConfig> {
    let overrides = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            let table: toml::Table =
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
            if let Some((key, _)) = table.iter().find(|(_, v)| v.is_table() || v.is_array()) {
                bail!("config key {key:?} must be a scalar value");
            }
            table
        }
        None => toml::Table::new(),
    };
    let delta = match overrides.get("delta") {
        Some(v) => v
            .as_integer()
            .and_then(|d| usize::try_from(d).ok())
            .context("config key \"delta\" must be a non-negative integer")?,
        None => graph_delta,
    };
    let base = match preset {
        Preset::Paper => PipelineConfig::paper(delta),
        Preset::Desk => PipelineConfig::desk(delta),
    };
    let mut merged = serde_json::to_value(&base)?;
    let Value::Object(fields) = &mut merged else { unreachable!("config serializes as an object") };
    for (key, value) in overrides {
        fields.insert(key, serde_json::to_value(value)?);
    }
    serde_json::from_value(merged).context("invalid pipeline config")
}
