//! The pipeline configuration document and its validation.
//!
//! One JSON file with sections `stimuli`, `scorer`, `smoother`, `analysis`
//! and `output` drives a full run. Only `scorer` is mandatory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisConfig;
use crate::error::{Error, Result};
use crate::scoring::{check_health, OracleSpec, RemoteConfig, Scorer};
use crate::smoothing::SmootherConfig;
use crate::stimuli::StimulusConfig;

/// Environment variable overriding the remote scorer endpoint.
pub const ENDPOINT_ENV: &str = "FUZZPROBE_ENDPOINT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    Oracle,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerConfig {
    pub kind: ScorerKind,
    /// Inline oracle specification; defaults apply when neither this nor
    /// `oracle_spec` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    /// Oracle specification file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_spec: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remote: Option<RemoteConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("artifacts"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub stimuli: StimulusConfig,
    pub scorer: Option<ScorerConfig>,
    #[serde(default)]
    pub smoother: SmootherConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stimuli: StimulusConfig::default(),
            scorer: Some(ScorerConfig {
                kind: ScorerKind::Oracle,
                oracle: Some(OracleSpec::default()),
                oracle_spec: None,
                remote: None,
            }),
            smoother: SmootherConfig::default(),
            analysis: AnalysisConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// One configuration problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Dotted path into the config document; empty for the document itself.
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl From<(String, String)> for Diagnostic {
    fn from((path, message): (String, String)) -> Self {
        Diagnostic { path, message }
    }
}

impl From<Diagnostic> for Error {
    fn from(d: Diagnostic) -> Self {
        Error::Config {
            path: d.path,
            message: d.message,
        }
    }
}

fn parse(text: &str) -> std::result::Result<PipelineConfig, Diagnostic> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Diagnostic {
            path: if path == "." { String::new() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn scorer_section(&self) -> Result<&ScorerConfig> {
        self.scorer
            .as_ref()
            .ok_or_else(|| Error::config("scorer", "missing `scorer` section"))
    }

    /// Builds the scorer. `base_dir` anchors a relative `oracle_spec` path;
    /// `endpoint_override` replaces the remote endpoint.
    pub fn resolve_scorer(&self, base_dir: &Path, endpoint_override: Option<&str>) -> Result<Scorer> {
        let section = self.scorer_section()?;
        match section.kind {
            ScorerKind::Oracle => {
                let spec = match (&section.oracle_spec, &section.oracle) {
                    (Some(_), Some(_)) => {
                        return Err(Error::config("scorer", "give either `oracle` or `oracle_spec`, not both"))
                    }
                    (Some(file), None) => load_oracle_spec(&base_dir.join(file))?,
                    (None, Some(spec)) => spec.clone(),
                    (None, None) => OracleSpec::default(),
                };
                spec.validate()?;
                Ok(Scorer::Oracle(spec))
            }
            ScorerKind::Remote => {
                let mut remote = section
                    .remote
                    .clone()
                    .ok_or_else(|| Error::config("scorer.remote", "remote scorer needs a `remote` section"))?;
                if let Some(endpoint) = endpoint_override {
                    remote.endpoint = endpoint.to_string();
                }
                remote.validate()?;
                Ok(Scorer::Remote(remote))
            }
        }
    }

    /// Problems that would stop a run, without touching the network.
    pub fn diagnostics(&self, base_dir: &Path, endpoint_override: Option<&str>) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> = Vec::new();
        out.extend(self.stimuli.diagnostics().into_iter().map(Diagnostic::from));
        out.extend(self.smoother.diagnostics().into_iter().map(Diagnostic::from));
        out.extend(self.analysis.diagnostics().into_iter().map(Diagnostic::from));
        for (field, category) in [
            ("analysis.base_category", &self.analysis.base_category),
            ("analysis.target_category", &self.analysis.target_category),
        ] {
            if !self.stimuli.categories.contains(category) {
                out.push(Diagnostic {
                    path: field.into(),
                    message: format!("category {category:?} is not among the stimuli categories"),
                });
            }
        }
        for (i, range) in self.stimuli.units.iter().enumerate() {
            if range.min <= range.max && range.width() < crate::smoothing::MIN_SAMPLES {
                out.push(Diagnostic {
                    path: format!("stimuli.units[{i}]"),
                    message: format!(
                        "range yields {} temperatures; smoothing needs at least {}",
                        range.width(),
                        crate::smoothing::MIN_SAMPLES
                    ),
                });
            }
        }
        match self.resolve_scorer(base_dir, endpoint_override) {
            Err(Error::Config { path, message }) => out.push(Diagnostic { path, message }),
            Err(e) => out.push(Diagnostic {
                path: "scorer".into(),
                message: e.to_string(),
            }),
            Ok(Scorer::Oracle(spec)) => {
                for range in &self.stimuli.units {
                    for category in &self.stimuli.categories {
                        if let Err(Error::Config { path, message }) = spec.membership(range.unit, category) {
                            out.push(Diagnostic { path, message });
                        }
                    }
                }
            }
            Ok(Scorer::Remote(_)) => {}
        }
        out
    }
}

fn load_oracle_spec(path: &Path) -> Result<OracleSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config("scorer.oracle_spec", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::config("scorer.oracle_spec", format!("{}: {e}", path.display())))
}

/// Diagnostics for the config file at `path`; empty iff a run's
/// preconditions hold. With `probe_remote`, a remote scorer's `/health`
/// route must answer.
pub fn validate(path: &Path, endpoint_override: Option<&str>, probe_remote: bool) -> Result<Vec<Diagnostic>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config = match parse(&text) {
        Ok(c) => c,
        Err(d) => return Ok(vec![d]),
    };
    if config.scorer.is_none() {
        return Ok(vec![Diagnostic {
            path: "scorer".into(),
            message: "missing `scorer` section".into(),
        }]);
    }
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let mut out = config.diagnostics(base_dir, endpoint_override);
    if out.is_empty() && probe_remote {
        if let Ok(Scorer::Remote(remote)) = config.resolve_scorer(base_dir, endpoint_override) {
            if let Err(e) = check_health(&remote, Duration::from_secs(5)) {
                out.push(Diagnostic {
                    path: "scorer.remote.endpoint".into(),
                    message: format!("service not reachable: {e}"),
                });
            }
        }
    }
    Ok(out)
}
