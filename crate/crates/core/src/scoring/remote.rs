//! Batch client for the NLI scoring service.
//!
//! `POST {endpoint}/score` with `{"pairs": [{"premise", "hypothesis"}, ...]}`
//! answers `{"scores": [{"entailment", "neutral", "contradiction"}, ...]}` in
//! request order. Model-specific input formatting is the service's job.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use super::{LabelScores, ScoredPair};
use crate::error::{Error, Result};
use crate::stimuli::StimulusPair;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    pub endpoint: String,
    /// Provenance tag; defaults to `remote:<endpoint>`.
    pub id: Option<String>,
    pub batch_size: usize,
    /// Batches in flight at once.
    pub concurrency: usize,
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    pub timeout_secs: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: "http://127.0.0.1:8000".into(),
            id: None,
            batch_size: 64,
            concurrency: 4,
            max_attempts: 3,
            backoff_base_ms: 200,
            backoff_max_ms: 5_000,
            timeout_secs: 120,
        }
    }
}

impl RemoteConfig {
    pub fn scorer_id(&self) -> String {
        self.id
            .clone()
            .unwrap_or_else(|| format!("remote:{}", self.endpoint.trim_end_matches('/')))
    }

    pub fn validate(&self) -> Result<()> {
        if reqwest::Url::parse(&self.endpoint).is_err() {
            return Err(Error::config("scorer.remote.endpoint", format!("not a URL: {:?}", self.endpoint)));
        }
        if self.batch_size == 0 {
            return Err(Error::config("scorer.remote.batch_size", "must be >= 1"));
        }
        if self.concurrency == 0 {
            return Err(Error::config("scorer.remote.concurrency", "must be >= 1"));
        }
        if self.max_attempts == 0 {
            return Err(Error::config("scorer.remote.max_attempts", "must be >= 1"));
        }
        Ok(())
    }

    fn url(&self, route: &str) -> String {
        format!("{}/{route}", self.endpoint.trim_end_matches('/'))
    }

    fn backoff(&self, failed_attempt: u32) -> Duration {
        let factor = 1u64 << (failed_attempt - 1).min(20);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor).min(self.backoff_max_ms))
    }
}

/// Number of requests needed for `n` pairs.
pub fn batch_count(n: usize, batch_size: usize) -> usize {
    n.div_ceil(batch_size)
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    pairs: Vec<PairText<'a>>,
}

#[derive(Serialize)]
struct PairText<'a> {
    premise: &'a str,
    hypothesis: &'a str,
}

#[derive(Deserialize)]
struct RawRow {
    entailment: f64,
    neutral: f64,
    contradiction: f64,
}

#[derive(Deserialize)]
struct ScoreResponse {
    scores: Vec<RawRow>,
}

enum Attempt {
    Done(Vec<LabelScores>),
    Retry(String),
    Fatal(Error),
}

fn post_once(client: &Client, config: &RemoteConfig, batch: &[StimulusPair], index: usize) -> Attempt {
    let body = ScoreRequest {
        pairs: batch
            .iter()
            .map(|p| PairText {
                premise: &p.premise,
                hypothesis: &p.hypothesis,
            })
            .collect(),
    };
    let response = match client.post(config.url("score")).json(&body).send() {
        Ok(r) => r,
        Err(e) => return Attempt::Retry(e.to_string()),
    };
    let status = response.status();
    if status != StatusCode::OK {
        let detail = response.text().unwrap_or_default();
        let message = format!("HTTP {status}: {}", detail.trim());
        return if status.is_server_error()
            || status == StatusCode::TOO_MANY_REQUESTS
            || status == StatusCode::REQUEST_TIMEOUT
        {
            Attempt::Retry(message)
        } else {
            Attempt::Fatal(Error::Transport {
                batch: index,
                attempts: 1,
                message,
            })
        };
    }
    let protocol = |message: String| Attempt::Fatal(Error::Protocol { batch: index, message });
    let bytes = match response.bytes() {
        Ok(b) => b,
        Err(e) => return Attempt::Retry(e.to_string()),
    };
    let parsed: ScoreResponse = match serde_json::from_slice(&bytes) {
        Ok(p) => p,
        Err(e) => return protocol(format!("malformed response body: {e}")),
    };
    if parsed.scores.len() != batch.len() {
        return protocol(format!(
            "expected {} score rows, got {}",
            batch.len(),
            parsed.scores.len()
        ));
    }
    let mut rows = Vec::with_capacity(batch.len());
    for (row_idx, row) in parsed.scores.into_iter().enumerate() {
        match LabelScores::new(row.entailment, row.neutral, row.contradiction) {
            Ok(s) => rows.push(s),
            Err(e) => return protocol(format!("row {row_idx}: {e}")),
        }
    }
    Attempt::Done(rows)
}

fn post_with_retry(
    client: &Client,
    config: &RemoteConfig,
    batch: &[StimulusPair],
    index: usize,
) -> Result<Vec<LabelScores>> {
    let mut attempt = 1;
    loop {
        match post_once(client, config, batch, index) {
            Attempt::Done(rows) => return Ok(rows),
            Attempt::Fatal(Error::Transport { message, .. }) => {
                return Err(Error::Transport {
                    batch: index,
                    attempts: attempt,
                    message,
                })
            }
            Attempt::Fatal(e) => return Err(e),
            Attempt::Retry(message) if attempt >= config.max_attempts => {
                return Err(Error::Transport {
                    batch: index,
                    attempts: attempt,
                    message,
                })
            }
            Attempt::Retry(message) => {
                log::warn!("batch {index} attempt {attempt} failed: {message}");
                thread::sleep(config.backoff(attempt));
                attempt += 1;
            }
        }
    }
}

fn build_client(config: &RemoteConfig) -> Result<Client> {
    Client::builder()
        .timeout(Duration::from_secs(config.timeout_secs))
        .build()
        .map_err(|e| Error::Transport {
            batch: 0,
            attempts: 0,
            message: format!("cannot build HTTP client: {e}"),
        })
}

/// Scores `pairs` in batches, keeping input order. Up to `concurrency`
/// batches are in flight; the first failing batch (lowest index) is reported.
pub fn score_remote(pairs: &[StimulusPair], config: &RemoteConfig) -> Result<Vec<ScoredPair>> {
    config.validate()?;
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let client = build_client(config)?;
    let batches: Vec<&[StimulusPair]> = pairs.chunks(config.batch_size).collect();
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Result<Vec<LabelScores>>>>> =
        Mutex::new((0..batches.len()).map(|_| None).collect());

    thread::scope(|scope| {
        for _ in 0..config.concurrency.min(batches.len()) {
            scope.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let index = next.fetch_add(1, Ordering::Relaxed);
                let Some(batch) = batches.get(index) else { break };
                let outcome = post_with_retry(&client, config, batch, index);
                if outcome.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                results.lock().expect("result slots")[index] = Some(outcome);
            });
        }
    });

    // Batch indices are handed out in order, so any unvisited slot lies after
    // the first failure and the scan below returns that failure first.
    let id = config.scorer_id();
    let mut scored = Vec::with_capacity(pairs.len());
    let slots = results.into_inner().expect("result slots");
    for (batch, slot) in batches.iter().zip(slots) {
        let rows = slot.expect("batch visited before any unvisited one")?;
        for (pair, scores) in batch.iter().zip(rows) {
            scored.push(ScoredPair::new(pair.clone(), scores, id.clone())?);
        }
    }
    Ok(scored)
}

/// `GET {endpoint}/health`; succeeds on HTTP 200.
pub fn check_health(config: &RemoteConfig, timeout: Duration) -> Result<()> {
    let client = Client::builder().timeout(timeout).build().map_err(|e| Error::Transport {
        batch: 0,
        attempts: 0,
        message: e.to_string(),
    })?;
    let unreachable = |message: String| Error::Transport {
        batch: 0,
        attempts: 1,
        message,
    };
    let response = client
        .get(config.url("health"))
        .send()
        .map_err(|e| unreachable(e.to_string()))?;
    if response.status() == StatusCode::OK {
        Ok(())
    } else {
        Err(unreachable(format!("health check returned HTTP {}", response.status())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_arithmetic() {
        assert_eq!(batch_count(13410, 64), 210);
        assert_eq!(batch_count(0, 64), 0);
        assert_eq!(batch_count(64, 64), 1);
        assert_eq!(batch_count(65, 64), 2);
    }

    #[test]
    fn backoff_is_exponential_and_capped() {
        let config = RemoteConfig {
            backoff_base_ms: 100,
            backoff_max_ms: 350,
            ..RemoteConfig::default()
        };
        assert_eq!(config.backoff(1), Duration::from_millis(100));
        assert_eq!(config.backoff(2), Duration::from_millis(200));
        assert_eq!(config.backoff(3), Duration::from_millis(350));
    }

    #[test]
    fn empty_input_needs_no_service() {
        let config = RemoteConfig {
            endpoint: "http://127.0.0.1:9".into(),
            ..RemoteConfig::default()
        };
        assert!(score_remote(&[], &config).unwrap().is_empty());
    }

    #[test]
    fn invalid_config_rejected() {
        let config = RemoteConfig {
            batch_size: 0,
            ..RemoteConfig::default()
        };
        assert!(matches!(score_remote(&[], &config), Err(Error::Config { .. })));
    }

    #[test]
    fn scorer_id_defaults_to_endpoint() {
        let config = RemoteConfig {
            endpoint: "http://nli:8000/".into(),
            ..RemoteConfig::default()
        };
        assert_eq!(config.scorer_id(), "remote:http://nli:8000");
        assert_eq!(config.url("score"), "http://nli:8000/score");
    }
}
