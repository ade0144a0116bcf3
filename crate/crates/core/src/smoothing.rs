//! Penalized natural cubic smoothing splines.
//!
//! For samples `(t_i, e_i)` the fit minimizes
//! `Σ (e_i - f(t_i))² + λ ∫ f''(t)² dt` over natural cubic splines with knots
//! at the sample points, using the Reinsch formulation
//! `(R + λ QᵀQ) γ = Qᵀe`, `f = e - λ Q γ`. The system is pentadiagonal and is
//! solved in banded form; the same factorization yields the trace of the
//! influence matrix needed for generalized cross-validation.

use serde::{Deserialize, Serialize};

use crate::banded::SymBanded;
use crate::curve::{EntailmentCurve, Pooling};
use crate::error::{Error, Result};

/// Minimum number of samples a curve needs before it can be smoothed.
pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Generalized cross-validation over the penalty grid.
    Gcv,
    Fixed(f64),
}

impl std::str::FromStr for Selection {
    type Err = Error;

    /// `gcv` or `fixed:<penalty>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "gcv" {
            return Ok(Selection::Gcv);
        }
        let value = s
            .strip_prefix("fixed:")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v > 0.0)
            .ok_or_else(|| Error::config("smoother.selection", format!("expected `gcv` or `fixed:<v>` with v > 0, got {s:?}")))?;
        Ok(Selection::Fixed(value))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmootherConfig {
    pub lambda_grid: Vec<f64>,
    pub selection: Selection,
    pub clamp_output: bool,
    pub pooling: Pooling,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        SmootherConfig {
            lambda_grid: log_grid(1e-4, 1e4, 50),
            selection: Selection::Gcv,
            clamp_output: true,
            pooling: Pooling::UnitCategory,
        }
    }
}

impl SmootherConfig {
    pub fn diagnostics(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if self.lambda_grid.is_empty() {
            out.push(("smoother.lambda_grid".into(), "grid must not be empty".into()));
        }
        if let Some(v) = self.lambda_grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            out.push(("smoother.lambda_grid".into(), format!("penalties must be positive, found {v}")));
        }
        if let Selection::Fixed(v) = self.selection {
            if !(v.is_finite() && v > 0.0) {
                out.push(("smoother.selection".into(), format!("fixed penalty must be positive, got {v}")));
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
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Result of one spline fit at a fixed penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFit {
    pub penalty: f64,
    pub fitted: Vec<f64>,
    /// Trace of the influence matrix (effective degrees of freedom).
    pub edf: f64,
    pub rss: f64,
    pub gcv: f64,
}

/// Reinsch matrices for one abscissa grid, reusable across penalties.
#[derive(Debug, Clone)]
pub struct SplineSystem {
    y: Vec<f64>,
    /// Nonzeros of column `j` of `Q`, at rows `j, j+1, j+2`.
    q_cols: Vec<[f64; 3]>,
    r: SymBanded,
    qtq: SymBanded,
    qty: Vec<f64>,
}

impl SplineSystem {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Argument(format!("{} abscissae but {} values", n, y.len())));
        }
        if n < 3 {
            return Err(Error::InsufficientData { needed: 3, got: n });
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) || x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(
                "spline abscissae must be finite and strictly ascending".into(),
            ));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m = n - 2;
        let q_cols: Vec<[f64; 3]> = (0..m)
            .map(|j| [1.0 / h[j], -1.0 / h[j] - 1.0 / h[j + 1], 1.0 / h[j + 1]])
            .collect();

        let mut r = SymBanded::zeros(m, 2);
        for j in 0..m {
            r.add(j, j, (h[j] + h[j + 1]) / 3.0);
            if j + 1 < m {
                r.add(j + 1, j, h[j + 1] / 6.0);
            }
        }

        let mut qtq = SymBanded::zeros(m, 2);
        for j in 0..m {
            for k in j..(j + 3).min(m) {
                // column k starts at row k; overlap with column j is rows k..j+2
                let dot: f64 = (k..=j + 2).map(|row| q_cols[j][row - j] * q_cols[k][row - k]).sum();
                qtq.add(k, j, dot);
            }
        }

        let qty = q_cols
            .iter()
            .enumerate()
            .map(|(j, q)| q[0] * y[j] + q[1] * y[j + 1] + q[2] * y[j + 2])
            .collect();

        Ok(SplineSystem {
            y: y.to_vec(),
            q_cols,
            r,
            qtq,
            qty,
        })
    }

    pub fn fit(&self, penalty: f64) -> Result<SplineFit> {
        if !(penalty.is_finite() && penalty > 0.0) {
            return Err(Error::Argument(format!("smoothing penalty must be > 0, got {penalty}")));
        }
        let n = self.y.len();
        let system = self.r.add_scaled(&self.qtq, penalty);
        let ldl = system
            .factor()
            .ok_or_else(|| Error::Argument(format!("spline system singular at penalty {penalty}")))?;
        let gamma = ldl.solve(&self.qty);

        let mut fitted = self.y.clone();
        for (j, (q, g)) in self.q_cols.iter().zip(&gamma).enumerate() {
            for (offset, qv) in q.iter().enumerate() {
                fitted[j + offset] -= penalty * qv * g;
            }
        }

        let inv = ldl.inverse_band();
        let m = gamma.len();
        let mut trace_qtq_inv = 0.0;
        for i in 0..m {
            trace_qtq_inv += self.qtq.get(i, i) * inv.get(i, i);
            for k in 1..=2.min(i) {
                trace_qtq_inv += 2.0 * self.qtq.get(i, i - k) * inv.get(i, i - k);
            }
        }
        let edf = n as f64 - penalty * trace_qtq_inv;
        let rss: f64 = self.y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
        let gcv = n as f64 * rss / (n as f64 - edf).powi(2);
        Ok(SplineFit {
            penalty,
            fitted,
            edf,
            rss,
            gcv,
        })
    }

    /// Fit at every grid penalty and keep the lowest GCV score; ties keep the
    /// earlier grid entry.
    pub fn fit_gcv(&self, grid: &[f64]) -> Result<SplineFit> {
        let mut best: Option<SplineFit> = None;
        for &penalty in grid {
            let fit = self.fit(penalty)?;
            if best.as_ref().is_none_or(|b| fit.gcv < b.gcv) {
                best = Some(fit);
            }
        }
        best.ok_or_else(|| Error::config("smoother.lambda_grid", "grid must not be empty"))
    }
}

/// Returns a copy of `curve` with its smoothed series filled in.
pub fn smooth(curve: &EntailmentCurve, config: &SmootherConfig) -> Result<EntailmentCurve> {
    config.validate()?;
    let samples = curve.samples();
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let x: Vec<f64> = samples.iter().map(|(t, _)| f64::from(*t)).collect();
    let y = curve.raw_values();
    let system = SplineSystem::new(&x, &y)?;
    let fit = match config.selection {
        Selection::Gcv => system.fit_gcv(&config.lambda_grid)?,
        Selection::Fixed(penalty) => system.fit(penalty)?,
    };
    let smoothed = samples
        .iter()
        .zip(&fit.fitted)
        .map(|((t, _), v)| (*t, if config.clamp_output { v.clamp(0.0, 1.0) } else { *v }))
        .collect();
    let mut out = curve.clone();
    out.set_smoothed(smoothed, Some(fit.penalty))?;
    Ok(out)
}

pub fn smooth_all(curves: &[EntailmentCurve], config: &SmootherConfig) -> Result<Vec<EntailmentCurve>> {
    curves
        .iter()
        .map(|c| {
            smooth(c, config).map_err(|e| match e {
                Error::InsufficientData { .. } => Error::Argument(format!("curve {}: {e}", c.label())),
                other => other,
            })
        })
        .collect()
}
