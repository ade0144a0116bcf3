//! End-to-end orchestration: generate → score → smooth → analyze → plot,
//! recorded in a manifest of artifact digests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{analyze, AnalysisReport};
use crate::config::PipelineConfig;
use crate::curve::{build_curves, write_curves};
use crate::error::{Error, Result};
use crate::jsonl::write_jsonl;
use crate::plot::write_plots;
use crate::scoring::{cache_read, cache_write, ScoreIndex};
use crate::smoothing::smooth_all;
use crate::stimuli::generate_dataset;

pub const PAIRS_FILE: &str = "pairs.jsonl";
pub const SCORES_FILE: &str = "scores.jsonl";
pub const CURVES_FILE: &str = "curves.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const PLOTS_DIR: &str = "plots";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// SHA-256 of the resolved configuration, serialized canonically.
    pub config_sha256: String,
    pub scorer_id: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// SHA-256 of every artifact, keyed by path relative to the run directory.
    pub artifacts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces `output.dir`.
    pub out_dir: Option<PathBuf>,
    /// Replaces the remote scorer endpoint.
    pub endpoint_override: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub pairs: usize,
    pub report: AnalysisReport,
    pub manifest: RunManifest,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn stage<T>(name: &'static str, result: Result<T>) -> Result<T> {
    result.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

pub fn write_report(path: &Path, report: &AnalysisReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs every stage for the config file at `config_path`. On failure the
/// error names the stage; artifacts already written stay in place.
pub fn run_pipeline(config_path: &Path, options: &RunOptions) -> Result<RunOutcome> {
    let started_unix = unix_now();
    let config = stage("config", PipelineConfig::load(config_path))?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let scorer = stage(
        "config",
        config.resolve_scorer(base_dir, options.endpoint_override.as_deref()),
    )?;
    let dir = options.out_dir.clone().unwrap_or_else(|| config.output.dir.clone());
    stage("config", fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e)))?;

    let pairs = stage("generate", generate_dataset(&config.stimuli))?;
    stage("generate", write_jsonl(&dir.join(PAIRS_FILE), &pairs))?;
    log::info!("generated {} pairs", pairs.len());

    let scores_path = dir.join(SCORES_FILE);
    let index = if scores_path.exists() {
        match cache_read(&scores_path) {
            Ok(cached) => ScoreIndex::from_scored(&cached),
            Err(e) => {
                log::warn!("ignoring unreadable score cache: {e}");
                ScoreIndex::default()
            }
        }
    } else {
        ScoreIndex::default()
    };
    let scored = stage("score", scorer.score_with_cache(&pairs, &index))?;
    stage("score", cache_write(&scored, &scores_path))?;

    let curves = stage("smooth", build_curves(&scored, config.smoother.pooling))
        .and_then(|raw| stage("smooth", smooth_all(&raw, &config.smoother)))?;
    stage("smooth", write_curves(&dir.join(CURVES_FILE), &curves))?;

    let report = stage("analyze", analyze(&curves, &scored, &config.analysis))?;
    stage("analyze", write_report(&dir.join(REPORT_FILE), &report))?;

    let plots = stage("plot", write_plots(&curves, &config.analysis, &dir.join(PLOTS_DIR)))?;

    let mut artifacts = BTreeMap::new();
    for name in [PAIRS_FILE, SCORES_FILE, CURVES_FILE, REPORT_FILE] {
        artifacts.insert(name.to_string(), stage("manifest", sha256_file(&dir.join(name)))?);
    }
    for plot in &plots {
        let rel = plot.strip_prefix(&dir).unwrap_or(plot);
        artifacts.insert(
            rel.to_string_lossy().replace('\\', "/"),
            stage("manifest", sha256_file(plot))?,
        );
    }
    let config_json = serde_json::to_vec(&config).expect("config serializes");
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: hex::encode(Sha256::digest(config_json)),
        scorer_id: scorer.id(),
        started_unix,
        finished_unix: unix_now(),
        artifacts,
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    stage("manifest", fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e)))?;

    Ok(RunOutcome {
        dir,
        pairs: pairs.len(),
        report,
        manifest,
    })
}

/// Artifacts whose current digest differs from the manifest (or that are
/// missing).
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        field: "manifest".into(),
        message: e.to_string(),
    })?;
    let mut mismatched = Vec::new();
    for (name, digest) in &manifest.artifacts {
        match sha256_file(&dir.join(name)) {
            Ok(actual) if actual == *digest => {}
            _ => mismatched.push(name.clone()),
        }
    }
    Ok(mismatched)
}
