use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LabelScores, ScoredPair};
use crate::error::{Error, Result};
use crate::fuzzy::{Hedge, MembershipFunction, MembershipKind};
use crate::stimuli::{StimulusPair, Unit};

/// Split of the non-entailment mass between `neutral` and `contradiction`.
const NEUTRAL_SHARE: f64 = 0.7;
const CONTRADICTION_SHARE: f64 = 0.3;

/// Ground-truth generator: each category's entailment score is its membership
/// degree at the premise temperature, optionally perturbed by gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    /// Membership function per unit, per category, over the raw numeral.
    #[serde(default = "default_memberships")]
    pub memberships: BTreeMap<Unit, BTreeMap<String, MembershipFunction>>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for OracleSpec {
    /// Temperature profiles on the Fahrenheit scale (shared by the no-unit
    /// condition) and their Celsius conversions; `hot` is `very warm`.
    fn default() -> Self {
        let bell = |a, b, c| MembershipFunction::generalized_bell(a, b, c).expect("valid bell");
        let warm = bell(28.0, 2.0, 95.0);
        let fahrenheit: BTreeMap<String, MembershipFunction> = [
            ("freezing", bell(45.0, 3.0, -30.0)),
            ("cold", bell(22.0, 2.5, 25.0)),
            ("cool", bell(12.0, 2.0, 58.0)),
            ("hot", warm.apply_hedge(&Hedge::very())),
            ("warm", warm),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let celsius = fahrenheit
            .iter()
            .map(|(k, mf)| (k.clone(), fahrenheit_to_celsius(mf)))
            .collect();
        OracleSpec {
            memberships: BTreeMap::from([
                (Unit::None, fahrenheit.clone()),
                (Unit::Fahrenheit, fahrenheit),
                (Unit::Celsius, celsius),
            ]),
            noise_sigma: 0.05,
            seed: 7,
        }
    }
}

fn default_memberships() -> BTreeMap<Unit, BTreeMap<String, MembershipFunction>> {
    OracleSpec::default().memberships
}

fn fahrenheit_to_celsius(mf: &MembershipFunction) -> MembershipFunction {
    match mf.kind() {
        MembershipKind::GeneralizedBell { a, b, c } => {
            MembershipFunction::generalized_bell(a * 5.0 / 9.0, *b, (c - 32.0) * 5.0 / 9.0)
                .expect("rescaled bell stays valid")
        }
        MembershipKind::Hedged { base, exponent } => fahrenheit_to_celsius(base)
            .apply_hedge(&Hedge::new("hedge", *exponent).expect("valid exponent")),
        _ => mf.clone(),
    }
}

impl OracleSpec {
    pub fn membership(&self, unit: Unit, category: &str) -> Result<&MembershipFunction> {
        self.memberships
            .get(&unit)
            .and_then(|per_cat| per_cat.get(category))
            .ok_or_else(|| {
                Error::config(
                    format!("scorer.oracle.memberships.{unit}.{category}"),
                    "oracle has no membership function for this unit/category",
                )
            })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::config(
                "scorer.oracle.noise_sigma",
                format!("must be finite and >= 0, got {}", self.noise_sigma),
            ));
        }
        Ok(())
    }

    pub fn scorer_id(&self) -> String {
        let json = serde_json::to_vec(self).expect("oracle spec serializes");
        let digest = hex::encode(Sha256::digest(json));
        format!("oracle:seed={}:sigma={}:{}", self.seed, self.noise_sigma, &digest[..12])
    }

    /// Noise for one pair, seeded from the spec seed and the pair's texts so a
    /// pair scores identically regardless of which batch it arrives in.
    fn noise(&self, pair: &StimulusPair) -> f64 {
        if self.noise_sigma == 0.0 {
            return 0.0;
        }
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(pair.premise.as_bytes());
        hasher.update([0u8]);
        hasher.update(pair.hypothesis.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(seed);
        Normal::new(0.0, self.noise_sigma)
            .expect("validated sigma")
            .sample(&mut rng)
    }
}

pub fn score_oracle(pairs: &[StimulusPair], spec: &OracleSpec) -> Result<Vec<ScoredPair>> {
    spec.validate()?;
    let id = spec.scorer_id();
    pairs
        .iter()
        .map(|pair| {
            let mu = spec
                .membership(pair.unit, &pair.category)?
                .evaluate(f64::from(pair.temperature))?;
            let entailment = (mu + spec.noise(pair)).clamp(0.0, 1.0);
            let rest = 1.0 - entailment;
            let scores = LabelScores::new(entailment, NEUTRAL_SHARE * rest, CONTRADICTION_SHARE * rest)?;
            ScoredPair::new(pair.clone(), scores, id.clone())
        })
        .collect()
}
