//! Hedge-exponent fitting, ordering fractions, and cross-condition RMSE.
//!
//! The hedge fit asks which power `λ` best turns the base category's curve
//! into the target's: `E_target ≈ E_base^λ`. With `warm` as base and `hot`
//! as target, a fitted `λ` near 2 reads as "hot ≈ very warm".

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::curve::{build_curves, EntailmentCurve, Pooling, Source};
use crate::error::{Error, Result};
use crate::scoring::ScoredPair;
use crate::stimuli::Unit;

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!("rmse over {} vs {} values", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::Argument("rmse of empty series".into()));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// `count` evenly spaced values from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    max
                } else {
                    min + (max - min) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeFitResult {
    pub base_category: String,
    pub target_category: String,
    pub lambda_star: f64,
    pub rmse_at_star: f64,
    /// `(λ, rmse)` for every grid point, in grid order.
    pub grid: Vec<(f64, f64)>,
}

/// Exhaustive search for `argmin_λ rmse(target, base^λ)`. Ties go to the
/// smaller `λ`.
pub fn fit_hedge_values(
    base: &[f64],
    target: &[f64],
    grid: &[f64],
    base_category: &str,
    target_category: &str,
) -> Result<HedgeFitResult> {
    if grid.is_empty() || grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::Argument("hedge grid must be non-empty and finite".into()));
    }
    if base.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Argument("base curve values must lie in [0, 1]".into()));
    }
    let mut scored = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let hedged: Vec<f64> = base.iter().map(|v| v.powf(lambda)).collect();
        scored.push((lambda, rmse(target, &hedged)?));
    }
    let &(lambda_star, rmse_at_star) = scored
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .expect("grid is non-empty");
    Ok(HedgeFitResult {
        base_category: base_category.into(),
        target_category: target_category.into(),
        lambda_star,
        rmse_at_star,
        grid: scored,
    })
}

fn check_aligned(a: &EntailmentCurve, b: &EntailmentCurve) -> Result<()> {
    if a.temperatures() != b.temperatures() {
        return Err(Error::Argument(format!(
            "curves {} and {} have different temperature grids",
            a.label(),
            b.label()
        )));
    }
    Ok(())
}

/// Fits the hedge exponent on smoothed values when present, raw otherwise.
pub fn fit_hedge_exponent(
    base: &EntailmentCurve,
    target: &EntailmentCurve,
    grid: &[f64],
) -> Result<HedgeFitResult> {
    fit_hedge_exponent_from(base, target, grid, Source::Smoothed)
}

pub fn fit_hedge_exponent_from(
    base: &EntailmentCurve,
    target: &EntailmentCurve,
    grid: &[f64],
    source: Source,
) -> Result<HedgeFitResult> {
    check_aligned(base, target)?;
    fit_hedge_values(
        &base.values(source),
        &target.values(source),
        grid,
        &base.category,
        &target.category,
    )
}

/// `(count where base > target, aligned sample count)`.
fn ordering_counts(base: &EntailmentCurve, target: &EntailmentCurve, source: Source) -> Result<(usize, usize)> {
    check_aligned(base, target)?;
    let b = base.values(source);
    let t = target.values(source);
    Ok((b.iter().zip(&t).filter(|(x, y)| x > y).count(), b.len()))
}

/// Fraction of aligned samples where the base curve strictly exceeds the
/// target (e.g. `E_warm > E_hot`).
pub fn ordering_fraction(base: &EntailmentCurve, target: &EntailmentCurve, source: Source) -> Result<f64> {
    let (above, total) = ordering_counts(base, target, source)?;
    if total == 0 {
        return Err(Error::Argument("ordering fraction of empty curves".into()));
    }
    Ok(above as f64 / total as f64)
}

/// Ordering fraction over several locations: base and target curves are
/// paired by location and the counts pooled.
pub fn ordering_fraction_across(
    bases: &[&EntailmentCurve],
    targets: &[&EntailmentCurve],
    source: Source,
) -> Result<f64> {
    let (mut above, mut total) = (0, 0);
    for base in bases {
        let target = targets
            .iter()
            .find(|t| t.location == base.location)
            .ok_or_else(|| Error::Argument(format!("no target curve for {}", base.label())))?;
        let (a, n) = ordering_counts(base, target, source)?;
        above += a;
        total += n;
    }
    if total == 0 {
        return Err(Error::Argument("ordering fraction of empty curves".into()));
    }
    Ok(above as f64 / total as f64)
}

/// RMSE between two unit conditions, pairing values by identical
/// (location, category, temperature numeral); only shared keys count.
pub fn cross_condition_rmse(a: &[EntailmentCurve], b: &[EntailmentCurve], source: Source) -> Result<f64> {
    let mut lookup: HashMap<(&str, &str, i32), f64> = HashMap::new();
    for curve in b {
        for (t, v) in curve.temperatures().into_iter().zip(curve.values(source)) {
            lookup.insert((&curve.location, &curve.category, t), v);
        }
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for curve in a {
        for (t, v) in curve.temperatures().into_iter().zip(curve.values(source)) {
            if let Some(w) = lookup.get(&(curve.location.as_str(), curve.category.as_str(), t)) {
                xs.push(v);
                ys.push(*w);
            }
        }
    }
    if xs.is_empty() {
        return Err(Error::Argument("conditions share no (location, category, temperature) key".into()));
    }
    rmse(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Inclusive `[min, max]` of the linearly spaced hedge grid.
    pub lambda_grid: [f64; 2],
    pub lambda_count: usize,
    pub base_category: String,
    pub target_category: String,
    pub hedge_source: Source,
    pub ordering_source: Source,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            lambda_grid: [1.0, 8.0],
            lambda_count: 100,
            base_category: "warm".into(),
            target_category: "hot".into(),
            hedge_source: Source::Smoothed,
            ordering_source: Source::Raw,
        }
    }
}

impl AnalysisConfig {
    pub fn grid(&self) -> Vec<f64> {
        linear_grid(self.lambda_grid[0], self.lambda_grid[1], self.lambda_count)
    }

    pub fn diagnostics(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let [lo, hi] = self.lambda_grid;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            out.push((
                "analysis.lambda_grid".into(),
                format!("expected ascending positive bounds [min, max], got [{lo}, {hi}]"),
            ));
        }
        if self.lambda_count < 2 {
            out.push(("analysis.lambda_count".into(), "need at least 2 grid values".into()));
        }
        if self.base_category == self.target_category {
            out.push(("analysis.target_category".into(), "target must differ from base category".into()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitReport {
    pub hedge_fit: HedgeFitResult,
    pub ordering_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub hedge_source: Source,
    pub ordering_source: Source,
    pub units: BTreeMap<Unit, UnitReport>,
    /// Keyed `"<unit>_vs_<unit>"`.
    pub cross_condition_rmse: BTreeMap<String, f64>,
}

/// Unit-level series for one category: a pooled curve if present, otherwise
/// the mean over that unit's per-location curves.
pub(crate) fn unit_series(curves: &[EntailmentCurve], unit: Unit, category: &str, source: Source) -> Result<(Vec<i32>, Vec<f64>)> {
    let matching: Vec<&EntailmentCurve> = curves
        .iter()
        .filter(|c| c.unit == unit && c.category == category)
        .collect();
    if let Some(pooled) = matching.iter().find(|c| c.location == crate::curve::POOLED_LOCATION) {
        return Ok((pooled.temperatures(), pooled.values(source)));
    }
    let first = matching
        .first()
        .ok_or_else(|| Error::Argument(format!("no {category} curve for unit {unit}")))?;
    let grid = first.temperatures();
    let mut sums = vec![0.0; grid.len()];
    for c in &matching {
        if c.temperatures() != grid {
            return Err(Error::Argument(format!("curve {} has a different temperature grid", c.label())));
        }
        for (s, v) in sums.iter_mut().zip(c.values(source)) {
            *s += v;
        }
    }
    let n = matching.len() as f64;
    Ok((grid, sums.into_iter().map(|s| s / n).collect()))
}

/// Runs every analysis. `curves` supply the hedge fits; `raw` supplies the
/// per-pair statistics (ordering fractions in raw mode, cross-condition RMSE).
pub fn analyze(curves: &[EntailmentCurve], raw: &[ScoredPair], config: &AnalysisConfig) -> Result<AnalysisReport> {
    if let Some((path, message)) = config.diagnostics().into_iter().next() {
        return Err(Error::config(path, message));
    }
    let grid = config.grid();
    let per_location = build_curves(raw, Pooling::PerLocation)?;

    let mut units = BTreeMap::new();
    for unit in Unit::ALL {
        if !curves.iter().any(|c| c.unit == unit) {
            continue;
        }
        let (base_grid, base) = unit_series(curves, unit, &config.base_category, config.hedge_source)?;
        let (target_grid, target) = unit_series(curves, unit, &config.target_category, config.hedge_source)?;
        if base_grid != target_grid {
            return Err(Error::Argument(format!("{unit}: base and target grids differ")));
        }
        let hedge_fit = fit_hedge_values(&base, &target, &grid, &config.base_category, &config.target_category)?;

        let ordering_pool: &[EntailmentCurve] = match config.ordering_source {
            Source::Raw => &per_location,
            Source::Smoothed => curves,
        };
        let select = |category: &str| -> Vec<&EntailmentCurve> {
            ordering_pool
                .iter()
                .filter(|c| c.unit == unit && c.category == category)
                .collect()
        };
        let ordering = ordering_fraction_across(
            &select(&config.base_category),
            &select(&config.target_category),
            config.ordering_source,
        )?;
        units.insert(unit, UnitReport { hedge_fit, ordering_fraction: ordering });
    }

    let mut cross = BTreeMap::new();
    let conditions: Vec<Unit> = Unit::ALL
        .into_iter()
        .filter(|u| per_location.iter().any(|c| c.unit == *u))
        .collect();
    for (i, a) in conditions.iter().enumerate() {
        for b in &conditions[i + 1..] {
            let of = |u: Unit| -> Vec<EntailmentCurve> {
                per_location.iter().filter(|c| c.unit == u).cloned().collect()
            };
            let value = cross_condition_rmse(&of(*a), &of(*b), Source::Raw)?;
            cross.insert(format!("{a}_vs_{b}"), value);
        }
    }

    Ok(AnalysisReport {
        hedge_source: config.hedge_source,
        ordering_source: config.ordering_source,
        units,
        cross_condition_rmse: cross,
    })
}
