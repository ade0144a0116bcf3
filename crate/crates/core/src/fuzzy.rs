//! Fuzzy-set calculus: membership functions, linguistic hedges and
//! fuzzy semantic entailment.
//!
//! Hedges follow the classical concentration/dilation reading: a hedge with
//! exponent `e` maps a membership degree `μ` to `μ^e`. Exponents above one
//! concentrate (`very`, `extremely`), exponents below one dilate (`slightly`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a membership function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MembershipKind {
    /// `1 / (1 + |(x - c) / a|^(2b))`
    GeneralizedBell { a: f64, b: f64, c: f64 },
    /// Piecewise-linear interpolation over an ascending grid.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    /// `base(x)^exponent`
    Hedged {
        base: Box<MembershipFunction>,
        exponent: f64,
    },
    /// Contrast intensification of `base` around `crossover`.
    Intensified {
        base: Box<MembershipFunction>,
        crossover: f64,
        exponent: f64,
    },
}

/// A validated map from a scalar universe into `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MembershipKind", into = "MembershipKind")]
pub struct MembershipFunction(MembershipKind);

impl TryFrom<MembershipKind> for MembershipFunction {
    type Error = Error;

    fn try_from(kind: MembershipKind) -> Result<Self> {
        match &kind {
            MembershipKind::GeneralizedBell { a, b, c } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::Argument(format!("bell width must be > 0, got {a}")));
                }
                if !(b.is_finite() && *b > 0.0) {
                    return Err(Error::Argument(format!("bell slope must be > 0, got {b}")));
                }
                if !c.is_finite() {
                    return Err(Error::Argument(format!("bell center must be finite, got {c}")));
                }
            }
            MembershipKind::Tabulated { grid, values } => {
                if grid.is_empty() {
                    return Err(Error::Argument("tabulated grid is empty".into()));
                }
                if grid.len() != values.len() {
                    return Err(Error::Argument(format!(
                        "tabulated grid has {} points but {} values",
                        grid.len(),
                        values.len()
                    )));
                }
                if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Argument(
                        "tabulated grid must be finite and strictly ascending".into(),
                    ));
                }
                if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::Argument(format!(
                        "tabulated membership value {v} outside [0, 1]"
                    )));
                }
            }
            MembershipKind::Hedged { exponent, .. } => check_positive_exponent(*exponent)?,
            MembershipKind::Intensified {
                crossover,
                exponent,
                ..
            } => check_intensifier(*crossover, *exponent)?,
        }
        Ok(MembershipFunction(kind))
    }
}

impl From<MembershipFunction> for MembershipKind {
    fn from(mf: MembershipFunction) -> Self {
        mf.0
    }
}

impl Default for MembershipFunction {
    fn default() -> Self {
        MembershipFunction(MembershipKind::GeneralizedBell {
            a: 10.0,
            b: 4.0,
            c: 0.0,
        })
    }
}

fn check_positive_exponent(exponent: f64) -> Result<()> {
    if exponent.is_finite() && exponent > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "hedge exponent must be > 0, got {exponent}"
        )))
    }
}

fn check_intensifier(crossover: f64, exponent: f64) -> Result<()> {
    if !(crossover > 0.0 && crossover < 1.0) {
        return Err(Error::Argument(format!(
            "intensifier crossover must lie in (0, 1), got {crossover}"
        )));
    }
    if !(exponent.is_finite() && exponent > 1.0) {
        return Err(Error::Argument(format!(
            "intensifier exponent must be > 1, got {exponent}"
        )));
    }
    Ok(())
}

impl MembershipFunction {
    pub fn generalized_bell(a: f64, b: f64, c: f64) -> Result<Self> {
        MembershipKind::GeneralizedBell { a, b, c }.try_into()
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        MembershipKind::Tabulated { grid, values }.try_into()
    }

    pub fn kind(&self) -> &MembershipKind {
        &self.0
    }

    /// Membership degree of `x`, always within `[0, 1]`.
    ///
    /// Tabulated functions reject points outside their grid with a domain error.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Argument(format!("cannot evaluate membership at {x}")));
        }
        let degree = match &self.0 {
            MembershipKind::GeneralizedBell { a, b, c } => {
                1.0 / (1.0 + ((x - c) / a).abs().powf(2.0 * b))
            }
            MembershipKind::Tabulated { grid, values } => interpolate(grid, values, x)?,
            MembershipKind::Hedged { base, exponent } => base.evaluate(x)?.powf(*exponent),
            MembershipKind::Intensified {
                base,
                crossover,
                exponent,
            } => intensify_degree(base.evaluate(x)?, *crossover, *exponent),
        };
        Ok(degree.clamp(0.0, 1.0))
    }

    /// Raise the function to the hedge's exponent.
    ///
    /// Tabulated functions stay tabulated (node values are raised, so the law
    /// holds exactly at the nodes); stacked hedges collapse into one exponent.
    pub fn apply_hedge(&self, hedge: &Hedge) -> MembershipFunction {
        self.powered(hedge.exponent())
    }

    fn powered(&self, exponent: f64) -> MembershipFunction {
        let kind = match &self.0 {
            MembershipKind::Tabulated { grid, values } => MembershipKind::Tabulated {
                grid: grid.clone(),
                values: values.iter().map(|v| v.powf(exponent)).collect(),
            },
            MembershipKind::Hedged {
                base,
                exponent: inner,
            } => MembershipKind::Hedged {
                base: base.clone(),
                exponent: inner * exponent,
            },
            _ => MembershipKind::Hedged {
                base: Box::new(self.clone()),
                exponent,
            },
        };
        MembershipFunction(kind)
    }

    /// Contrast intensification: degrees at or below `crossover` are
    /// concentrated, degrees above it are dilated towards one.
    pub fn intensify(&self, crossover: f64, exponent: f64) -> Result<MembershipFunction> {
        check_intensifier(crossover, exponent)?;
        Ok(MembershipFunction(MembershipKind::Intensified {
            base: Box::new(self.clone()),
            crossover,
            exponent,
        }))
    }
}

fn interpolate(grid: &[f64], values: &[f64], x: f64) -> Result<f64> {
    let (min, max) = (grid[0], grid[grid.len() - 1]);
    if x < min || x > max {
        return Err(Error::Domain { x, min, max });
    }
    let hi = grid.partition_point(|g| *g < x);
    if grid[hi] == x {
        return Ok(values[hi]);
    }
    let lo = hi - 1;
    let t = (x - grid[lo]) / (grid[hi] - grid[lo]);
    Ok(values[lo] + t * (values[hi] - values[lo]))
}

pub(crate) fn intensify_degree(mu: f64, crossover: f64, exponent: f64) -> f64 {
    if mu <= crossover {
        crossover * (mu / crossover).powf(exponent)
    } else {
        1.0 - (1.0 - crossover) * ((1.0 - mu) / (1.0 - crossover)).powf(exponent)
    }
}

/// A linguistic hedge modelled as a power operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hedge {
    name: String,
    exponent: f64,
}

impl Hedge {
    pub fn new(name: impl Into<String>, exponent: f64) -> Result<Self> {
        check_positive_exponent(exponent)?;
        Ok(Hedge {
            name: name.into(),
            exponent,
        })
    }

    pub fn slightly() -> Self {
        Hedge {
            name: "slightly".into(),
            exponent: 0.5,
        }
    }

    pub fn very() -> Self {
        Hedge {
            name: "very".into(),
            exponent: 2.0,
        }
    }

    pub fn extremely() -> Self {
        Hedge {
            name: "extremely".into(),
            exponent: 4.0,
        }
    }

    /// Built-in hedge registry.
    pub fn lookup(name: &str) -> Option<Self> {
        match name {
            "slightly" => Some(Self::slightly()),
            "very" => Some(Self::very()),
            "extremely" => Some(Self::extremely()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }
}

/// A membership function sampled over a finite, strictly ascending universe.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzySet {
    universe: Vec<f64>,
    membership: MembershipFunction,
    degrees: Vec<f64>,
}

impl FuzzySet {
    pub fn new(universe: Vec<f64>, membership: MembershipFunction) -> Result<Self> {
        if universe.is_empty() {
            return Err(Error::Argument("fuzzy set universe is empty".into()));
        }
        if universe.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(
                "fuzzy set universe must be strictly ascending".into(),
            ));
        }
        let degrees = universe
            .iter()
            .map(|&x| membership.evaluate(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(FuzzySet {
            universe,
            membership,
            degrees,
        })
    }

    pub fn universe(&self) -> &[f64] {
        &self.universe
    }

    pub fn membership(&self) -> &MembershipFunction {
        &self.membership
    }

    /// Membership degrees at each universe point.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn hedged(&self, hedge: &Hedge) -> Result<FuzzySet> {
        FuzzySet::new(self.universe.clone(), self.membership.apply_hedge(hedge))
    }
}

/// `p` entails `q` iff `μ_p(x) ≤ μ_q(x) + tolerance` at every universe point.
pub fn fuzzy_entails(p: &FuzzySet, q: &FuzzySet, tolerance: f64) -> Result<bool> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(Error::Argument(format!(
            "entailment tolerance must be finite and >= 0, got {tolerance}"
        )));
    }
    if p.universe != q.universe {
        return Err(Error::Argument(
            "fuzzy sets are defined over different universes".into(),
        ));
    }
    Ok(p.degrees
        .iter()
        .zip(&q.degrees)
        .all(|(mp, mq)| *mp <= *mq + tolerance))
}
