//! Premise/hypothesis template expansion.
//!
//! Premises read `It is <t> degrees [<unit word>] [<location>].`, hypotheses
//! read `It is <category> [<location>].` The empty location string is the
//! "no location" setting and drops the trailing phrase entirely.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    None,
    Fahrenheit,
    Celsius,
}

impl Unit {
    pub const ALL: [Unit; 3] = [Unit::None, Unit::Fahrenheit, Unit::Celsius];

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::None => "none",
            Unit::Fahrenheit => "fahrenheit",
            Unit::Celsius => "celsius",
        }
    }

    fn default_word(self) -> Option<&'static str> {
        match self {
            Unit::None => None,
            Unit::Fahrenheit => Some("Fahrenheit"),
            Unit::Celsius => Some("Celsius"),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeStyle {
    /// `-10`
    #[default]
    Hyphen,
    /// `minus 10`
    Word,
}

/// Surface forms used when rendering sentences.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Templates {
    /// Overrides for the word placed after "degrees"; an empty string renders
    /// no unit word.
    pub unit_words: BTreeMap<Unit, String>,
    pub negative_style: NegativeStyle,
}

impl Templates {
    fn unit_word(&self, unit: Unit) -> Option<&str> {
        match self.unit_words.get(&unit) {
            Some(word) if word.is_empty() => None,
            Some(word) => Some(word),
            None => unit.default_word(),
        }
    }

    pub fn render_premise(&self, temperature: i32, unit: Unit, location: &str) -> String {
        let number = match (self.negative_style, temperature < 0) {
            (NegativeStyle::Word, true) => format!("minus {}", temperature.unsigned_abs()),
            _ => temperature.to_string(),
        };
        let mut sentence = format!("It is {number} degrees");
        if let Some(word) = self.unit_word(unit) {
            sentence.push(' ');
            sentence.push_str(word);
        }
        finish(sentence, location)
    }

    pub fn render_hypothesis(&self, category: &str, location: &str) -> String {
        finish(format!("It is {category}"), location)
    }
}

fn finish(mut sentence: String, location: &str) -> String {
    let location = location.trim();
    if !location.is_empty() {
        sentence.push(' ');
        sentence.push_str(location);
    }
    sentence.push('.');
    sentence
}

pub fn render_premise(temperature: i32, unit: Unit, location: &str) -> String {
    Templates::default().render_premise(temperature, unit, location)
}

pub fn render_hypothesis(category: &str, location: &str) -> String {
    Templates::default().render_hypothesis(category, location)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitRange {
    pub unit: Unit,
    pub min: i32,
    pub max: i32,
}

impl UnitRange {
    pub fn width(&self) -> usize {
        (self.max - self.min + 1).max(0) as usize
    }

    pub fn temperatures(&self) -> impl Iterator<Item = i32> {
        self.min..=self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StimulusConfig {
    pub units: Vec<UnitRange>,
    pub locations: Vec<String>,
    pub categories: Vec<String>,
    pub templates: Templates,
}

impl Default for StimulusConfig {
    fn default() -> Self {
        StimulusConfig {
            units: vec![
                UnitRange { unit: Unit::None, min: -50, max: 122 },
                UnitRange { unit: Unit::Fahrenheit, min: -50, max: 122 },
                UnitRange { unit: Unit::Celsius, min: -50, max: 50 },
            ],
            locations: ["", "in the bedroom", "in the living room", "in the basement", "outside", "inside"]
                .map(String::from)
                .to_vec(),
            categories: ["freezing", "cold", "cool", "warm", "hot"].map(String::from).to_vec(),
            templates: Templates::default(),
        }
    }
}

impl StimulusConfig {
    /// Structural problems, as `(path, message)` pairs.
    pub fn diagnostics(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if self.units.is_empty() {
            out.push(("stimuli.units".into(), "at least one unit is required".into()));
        }
        for (i, range) in self.units.iter().enumerate() {
            if range.min > range.max {
                out.push((
                    format!("stimuli.units[{i}]"),
                    format!("{} range [{}, {}] has min > max", range.unit, range.min, range.max),
                ));
            }
            if self.units[..i].iter().any(|r| r.unit == range.unit) {
                out.push((format!("stimuli.units[{i}]"), format!("unit {} listed twice", range.unit)));
            }
        }
        if self.locations.is_empty() {
            out.push(("stimuli.locations".into(), "at least one location is required".into()));
        }
        for (i, loc) in self.locations.iter().enumerate() {
            if self.locations[..i].contains(loc) {
                out.push((format!("stimuli.locations[{i}]"), format!("duplicate location {loc:?}")));
            }
        }
        if self.categories.is_empty() {
            out.push(("stimuli.categories".into(), "at least one category is required".into()));
        }
        for (i, cat) in self.categories.iter().enumerate() {
            if cat.trim().is_empty() {
                out.push((format!("stimuli.categories[{i}]"), "category word is empty".into()));
            } else if self.categories[..i].contains(cat) {
                out.push((format!("stimuli.categories[{i}]"), format!("duplicate category {cat:?}")));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.diagnostics().into_iter().next() {
            Some((path, message)) => Err(Error::config(path, message)),
            None => Ok(()),
        }
    }

    pub fn range(&self, unit: Unit) -> Option<&UnitRange> {
        self.units.iter().find(|r| r.unit == unit)
    }

    pub fn expected_count(&self) -> usize {
        self.units.iter().map(UnitRange::width).sum::<usize>()
            * self.locations.len()
            * self.categories.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusPair {
    pub premise: String,
    pub hypothesis: String,
    pub temperature: i32,
    pub unit: Unit,
    pub location: String,
    pub category: String,
}

impl StimulusPair {
    pub fn render(templates: &Templates, temperature: i32, unit: Unit, location: &str, category: &str) -> Self {
        StimulusPair {
            premise: templates.render_premise(temperature, unit, location),
            hypothesis: templates.render_hypothesis(category, location),
            temperature,
            unit,
            location: location.to_string(),
            category: category.to_string(),
        }
    }

    /// True when re-rendering the metadata reproduces the stored texts.
    pub fn is_consistent(&self, templates: &Templates) -> bool {
        *self == Self::render(templates, self.temperature, self.unit, &self.location, &self.category)
    }
}

/// Expands the configuration in (unit, temperature, location, category) order.
pub fn generate_dataset(config: &StimulusConfig) -> Result<Vec<StimulusPair>> {
    config.validate()?;
    let mut pairs = Vec::with_capacity(config.expected_count());
    for range in &config.units {
        for temperature in range.temperatures() {
            for location in &config.locations {
                for category in &config.categories {
                    pairs.push(StimulusPair::render(
                        &config.templates,
                        temperature,
                        range.unit,
                        location,
                        category,
                    ));
                }
            }
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn premise_examples() {
        assert_eq!(render_premise(0, Unit::None, "in the bedroom"), "It is 0 degrees in the bedroom.");
        assert_eq!(
            render_premise(70, Unit::None, "in the living room"),
            "It is 70 degrees in the living room."
        );
        assert_eq!(render_premise(-10, Unit::Celsius, ""), "It is -10 degrees Celsius.");
        assert_eq!(render_premise(40, Unit::None, "outside"), "It is 40 degrees outside.");
        assert_eq!(
            render_premise(40, Unit::Fahrenheit, "outside"),
            "It is 40 degrees Fahrenheit outside."
        );
        assert_eq!(render_premise(40, Unit::None, ""), "It is 40 degrees.");
    }

    #[test]
    fn hypothesis_examples() {
        assert_eq!(render_hypothesis("freezing", "in the bedroom"), "It is freezing in the bedroom.");
        assert_eq!(render_hypothesis("hot", "in the living room"), "It is hot in the living room.");
        assert_eq!(render_hypothesis("cool", ""), "It is cool.");
        assert_eq!(render_hypothesis("warm", "in the basement"), "It is warm in the basement.");
    }

    #[test]
    fn surface_overrides() {
        let templates = Templates {
            unit_words: BTreeMap::from([(Unit::Fahrenheit, "°F".to_string()), (Unit::Celsius, String::new())]),
            negative_style: NegativeStyle::Word,
        };
        assert_eq!(templates.render_premise(-5, Unit::Fahrenheit, "inside"), "It is minus 5 degrees °F inside.");
        assert_eq!(templates.render_premise(-5, Unit::Celsius, ""), "It is minus 5 degrees.");
    }

    #[test]
    fn default_counts() {
        let config = StimulusConfig::default();
        let pairs = generate_dataset(&config).unwrap();
        let count = |u: Unit| pairs.iter().filter(|p| p.unit == u).count();
        assert_eq!(count(Unit::None), 5190);
        assert_eq!(count(Unit::Fahrenheit), 5190);
        assert_eq!(count(Unit::Celsius), 3030);
        assert_eq!(pairs.len(), 13410);
        assert_eq!(config.expected_count(), 13410);
    }

    #[test]
    fn ordering_and_location_agreement() {
        let pairs = generate_dataset(&StimulusConfig::default()).unwrap();
        assert_eq!(pairs[0].premise, "It is -50 degrees.");
        assert_eq!(pairs[0].hypothesis, "It is freezing.");
        assert_eq!(pairs[1].category, "cold");
        assert_eq!(pairs[5].location, "in the bedroom");
        assert_eq!(pairs[30].temperature, -49);
        assert!(pairs.iter().all(|p| p.hypothesis.ends_with(&format!("{}.", p.location))));
        assert!(pairs.iter().all(|p| p.premise.ends_with('.') && p.hypothesis.ends_with('.')));
        assert!(pairs.iter().all(|p| !p.premise.contains("  ")));
    }

    #[test]
    fn invalid_range_rejected() {
        let mut config = StimulusConfig::default();
        config.units[2] = UnitRange { unit: Unit::Celsius, min: 50, max: -50 };
        assert!(matches!(generate_dataset(&config), Err(Error::Config { .. })));
        assert_eq!(config.diagnostics().len(), 1);
    }

    #[test]
    fn deterministic() {
        let a = serde_json::to_string(&generate_dataset(&StimulusConfig::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_dataset(&StimulusConfig::default()).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn count_identity(min in -60i32..60, width in 0i32..40, n_loc in 1usize..6, n_cat in 1usize..5) {
            let defaults = StimulusConfig::default();
            let config = StimulusConfig {
                units: vec![
                    UnitRange { unit: Unit::None, min, max: min + width },
                    UnitRange { unit: Unit::Celsius, min: min - 3, max: min + width },
                ],
                locations: defaults.locations[..n_loc].to_vec(),
                categories: defaults.categories[..n_cat].to_vec(),
                templates: Templates::default(),
            };
            let pairs = generate_dataset(&config).unwrap();
            let expected = ((width + 1) as usize + (width + 4) as usize) * n_loc * n_cat;
            prop_assert_eq!(pairs.len(), expected);
        }

        #[test]
        fn metadata_round_trip(t in -200i32..200, loc in 0usize..6, cat in 0usize..5, unit in 0usize..3) {
            let defaults = StimulusConfig::default();
            let pair = StimulusPair::render(
                &defaults.templates, t, Unit::ALL[unit], &defaults.locations[loc], &defaults.categories[cat]);
            let json = serde_json::to_string(&pair).unwrap();
            let back: StimulusPair = serde_json::from_str(&json).unwrap();
            prop_assert!(back.is_consistent(&defaults.templates));
            prop_assert_eq!(back, pair);
        }
    }
}
