//! Per-pair label probabilities from a remote NLI service, a synthetic fuzzy
//! oracle, or a persisted cache.

mod cache;
mod oracle;
mod remote;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stimuli::StimulusPair;

pub use cache::{cache_read, cache_write, ScoreIndex};
pub use oracle::{score_oracle, OracleSpec};
pub use remote::{batch_count, check_health, score_remote, RemoteConfig};

/// Maximum allowed deviation of a score row's sum from one.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

/// Probabilities of the three NLI labels for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScores")]
pub struct LabelScores {
    entailment: f64,
    neutral: f64,
    contradiction: f64,
}

#[derive(Deserialize)]
struct RawScores {
    entailment: f64,
    neutral: f64,
    contradiction: f64,
}

impl TryFrom<RawScores> for LabelScores {
    type Error = Error;

    fn try_from(raw: RawScores) -> Result<Self> {
        LabelScores::new(raw.entailment, raw.neutral, raw.contradiction)
    }
}

impl LabelScores {
    pub fn new(entailment: f64, neutral: f64, contradiction: f64) -> Result<Self> {
        for (name, p) in [
            ("entailment", entailment),
            ("neutral", neutral),
            ("contradiction", contradiction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Argument(format!("{name} probability {p} outside [0, 1]")));
            }
        }
        let sum = entailment + neutral + contradiction;
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::Argument(format!(
                "label probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(LabelScores {
            entailment,
            neutral,
            contradiction,
        })
    }

    /// The entailment score used by every downstream analysis.
    pub fn entailment(&self) -> f64 {
        self.entailment
    }

    pub fn neutral(&self) -> f64 {
        self.neutral
    }

    pub fn contradiction(&self) -> f64 {
        self.contradiction
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub pair: StimulusPair,
    pub scores: LabelScores,
    pub scorer_id: String,
}

impl ScoredPair {
    pub fn new(pair: StimulusPair, scores: LabelScores, scorer_id: impl Into<String>) -> Result<Self> {
        let scorer_id = scorer_id.into();
        if scorer_id.trim().is_empty() {
            return Err(Error::Argument("scorer_id must be non-empty".into()));
        }
        Ok(ScoredPair {
            pair,
            scores,
            scorer_id,
        })
    }

    pub fn entailment(&self) -> f64 {
        self.scores.entailment()
    }
}

/// A configured source of label scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scorer {
    Oracle(OracleSpec),
    Remote(RemoteConfig),
}

impl Scorer {
    pub fn id(&self) -> String {
        match self {
            Scorer::Oracle(spec) => spec.scorer_id(),
            Scorer::Remote(config) => config.scorer_id(),
        }
    }

    pub fn score(&self, pairs: &[StimulusPair]) -> Result<Vec<ScoredPair>> {
        match self {
            Scorer::Oracle(spec) => score_oracle(pairs, spec),
            Scorer::Remote(config) => score_remote(pairs, config),
        }
    }

    /// Scores `pairs`, reusing any entry of `index` recorded under this
    /// scorer's id. Only the missing pairs reach the underlying scorer.
    pub fn score_with_cache(&self, pairs: &[StimulusPair], index: &ScoreIndex) -> Result<Vec<ScoredPair>> {
        let id = self.id();
        let missing: Vec<StimulusPair> = pairs
            .iter()
            .filter(|p| index.get(&p.premise, &p.hypothesis, &id).is_none())
            .cloned()
            .collect();
        if !missing.is_empty() {
            log::info!("scoring {} of {} pairs with {id}", missing.len(), pairs.len());
        }
        let mut fresh = self.score(&missing)?.into_iter();
        pairs
            .iter()
            .map(|p| match index.get(&p.premise, &p.hypothesis, &id) {
                Some(scores) => ScoredPair::new(p.clone(), scores, id.clone()),
                None => Ok(fresh.next().expect("one score per missing pair")),
            })
            .collect()
    }
}
