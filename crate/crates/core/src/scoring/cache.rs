use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LabelScores, ScoredPair};
use crate::error::{Error, Result};
use crate::jsonl::{parse_line, write_jsonl};
use crate::stimuli::{StimulusPair, Unit};

/// One line of the score cache.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheRow {
    premise: String,
    hypothesis: String,
    temperature: i32,
    unit: Unit,
    location: String,
    category: String,
    entailment: f64,
    neutral: f64,
    contradiction: f64,
    scorer_id: String,
}

impl From<&ScoredPair> for CacheRow {
    fn from(s: &ScoredPair) -> Self {
        CacheRow {
            premise: s.pair.premise.clone(),
            hypothesis: s.pair.hypothesis.clone(),
            temperature: s.pair.temperature,
            unit: s.pair.unit,
            location: s.pair.location.clone(),
            category: s.pair.category.clone(),
            entailment: s.scores.entailment(),
            neutral: s.scores.neutral(),
            contradiction: s.scores.contradiction(),
            scorer_id: s.scorer_id.clone(),
        }
    }
}

pub fn cache_write(scored: &[ScoredPair], path: &Path) -> Result<()> {
    let rows: Vec<CacheRow> = scored.iter().map(CacheRow::from).collect();
    write_jsonl(path, &rows)
}

pub fn cache_read(path: &Path) -> Result<Vec<ScoredPair>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let row: CacheRow = parse_line(&line, line_no)?;
        let row_error = |field: &str, e: Error| Error::Parse {
            line: line_no,
            field: field.into(),
            message: e.to_string(),
        };
        let scores = LabelScores::new(row.entailment, row.neutral, row.contradiction)
            .map_err(|e| row_error("entailment/neutral/contradiction", e))?;
        let pair = StimulusPair {
            premise: row.premise,
            hypothesis: row.hypothesis,
            temperature: row.temperature,
            unit: row.unit,
            location: row.location,
            category: row.category,
        };
        out.push(ScoredPair::new(pair, scores, row.scorer_id).map_err(|e| row_error("scorer_id", e))?);
    }
    Ok(out)
}

/// Lookup of cached scores by `(premise, hypothesis, scorer_id)`.
#[derive(Debug, Default, Clone)]
pub struct ScoreIndex {
    entries: HashMap<(String, String, String), LabelScores>,
}

impl ScoreIndex {
    pub fn from_scored(scored: &[ScoredPair]) -> Self {
        let entries = scored
            .iter()
            .map(|s| {
                (
                    (s.pair.premise.clone(), s.pair.hypothesis.clone(), s.scorer_id.clone()),
                    s.scores,
                )
            })
            .collect();
        ScoreIndex { entries }
    }

    pub fn get(&self, premise: &str, hypothesis: &str, scorer_id: &str) -> Option<LabelScores> {
        // HashMap<(String, ..)> cannot be queried with borrowed tuples.
        self.entries
            .get(&(premise.to_string(), hypothesis.to_string(), scorer_id.to_string()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
