//! Entailment curves: entailment score against premise temperature for one
//! (unit, location, category) condition.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl::{read_jsonl, write_jsonl};
use crate::scoring::ScoredPair;
use crate::stimuli::Unit;

/// Location label of a curve averaged over every location of its unit.
pub const POOLED_LOCATION: &str = "*";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve")]
pub struct EntailmentCurve {
    pub unit: Unit,
    pub location: String,
    pub category: String,
    samples: Vec<(i32, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    smoothed: Option<Vec<(i32, f64)>>,
    /// Smoothing penalty that produced `smoothed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    smoothing_penalty: Option<f64>,
}

#[derive(Deserialize)]
struct RawCurve {
    unit: Unit,
    location: String,
    category: String,
    samples: Vec<(i32, f64)>,
    #[serde(default)]
    smoothed: Option<Vec<(i32, f64)>>,
    #[serde(default)]
    smoothing_penalty: Option<f64>,
}

impl TryFrom<RawCurve> for EntailmentCurve {
    type Error = Error;

    fn try_from(raw: RawCurve) -> Result<Self> {
        let mut curve = EntailmentCurve::new(raw.unit, raw.location, raw.category, raw.samples)?;
        if let Some(smoothed) = raw.smoothed {
            curve.set_smoothed(smoothed, raw.smoothing_penalty)?;
        }
        Ok(curve)
    }
}

/// Which series of a curve an analysis reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Raw,
    /// Smoothed values when present, raw otherwise.
    Smoothed,
}

impl EntailmentCurve {
    pub fn new(
        unit: Unit,
        location: impl Into<String>,
        category: impl Into<String>,
        samples: Vec<(i32, f64)>,
    ) -> Result<Self> {
        if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Argument(
                "curve temperatures must be strictly ascending".into(),
            ));
        }
        if let Some((t, e)) = samples.iter().find(|(_, e)| !(0.0..=1.0).contains(e)) {
            return Err(Error::Argument(format!(
                "entailment value {e} at {t} outside [0, 1]"
            )));
        }
        Ok(EntailmentCurve {
            unit,
            location: location.into(),
            category: category.into(),
            samples,
            smoothed: None,
            smoothing_penalty: None,
        })
    }

    pub fn samples(&self) -> &[(i32, f64)] {
        &self.samples
    }

    pub fn smoothed(&self) -> Option<&[(i32, f64)]> {
        self.smoothed.as_deref()
    }

    pub fn smoothing_penalty(&self) -> Option<f64> {
        self.smoothing_penalty
    }

    pub fn temperatures(&self) -> Vec<i32> {
        self.samples.iter().map(|(t, _)| *t).collect()
    }

    pub fn raw_values(&self) -> Vec<f64> {
        self.samples.iter().map(|(_, e)| *e).collect()
    }

    pub fn values(&self, source: Source) -> Vec<f64> {
        match (source, &self.smoothed) {
            (Source::Smoothed, Some(s)) => s.iter().map(|(_, v)| *v).collect(),
            _ => self.raw_values(),
        }
    }

    pub fn set_smoothed(&mut self, smoothed: Vec<(i32, f64)>, penalty: Option<f64>) -> Result<()> {
        let same_grid = smoothed.len() == self.samples.len()
            && smoothed.iter().zip(&self.samples).all(|(a, b)| a.0 == b.0);
        if !same_grid {
            return Err(Error::Argument(
                "smoothed series must share the sample temperature grid".into(),
            ));
        }
        self.smoothed = Some(smoothed);
        self.smoothing_penalty = penalty;
        Ok(())
    }

    pub fn label(&self) -> String {
        let location = if self.location.is_empty() {
            "no-location"
        } else {
            &self.location
        };
        format!("{}/{}/{}", self.unit, location, self.category)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// One curve per (unit, category), averaging locations per temperature.
    #[default]
    UnitCategory,
    /// One curve per (unit, location, category).
    PerLocation,
}

/// (unit, location, category)
type ConditionKey = (Unit, String, String);

/// Groups scored pairs into curves, in first-appearance order of their
/// condition. Entailment values at a repeated temperature are averaged.
pub fn build_curves(scored: &[ScoredPair], pooling: Pooling) -> Result<Vec<EntailmentCurve>> {
    let mut order: Vec<ConditionKey> = Vec::new();
    let mut groups: HashMap<ConditionKey, BTreeMap<i32, (f64, usize)>> = HashMap::new();
    for s in scored {
        let location = match pooling {
            Pooling::UnitCategory => POOLED_LOCATION.to_string(),
            Pooling::PerLocation => s.pair.location.clone(),
        };
        let key = (s.pair.unit, location, s.pair.category.clone());
        let group = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            BTreeMap::new()
        });
        let slot = group.entry(s.pair.temperature).or_insert((0.0, 0));
        slot.0 += s.entailment();
        slot.1 += 1;
    }
    order
        .into_iter()
        .map(|key| {
            let samples = groups[&key]
                .iter()
                .map(|(t, (sum, n))| (*t, (sum / *n as f64).clamp(0.0, 1.0)))
                .collect();
            let (unit, location, category) = key;
            EntailmentCurve::new(unit, location, category, samples)
        })
        .collect()
}

pub fn write_curves(path: &Path, curves: &[EntailmentCurve]) -> Result<()> {
    write_jsonl(path, curves)
}

pub fn read_curves(path: &Path) -> Result<Vec<EntailmentCurve>> {
    read_jsonl(path)
}
