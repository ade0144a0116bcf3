//! SVG figures and their CSV companions.
//!
//! One entailment-vs-temperature panel per unit condition, plus one figure of
//! the fitted hedge exponent per unit with a dashed reference at λ = 2 (the
//! `very` hedge). Every plotted number is also written to CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{fit_hedge_values, unit_series, AnalysisConfig, HedgeFitResult};
use crate::curve::{EntailmentCurve, Source};
use crate::error::{Error, Result};
use crate::stimuli::Unit;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#17becf", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd", "#8c564b", "#7f7f7f",
];
const VERY_EXPONENT: f64 = 2.0;

struct Frame {
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let (lo, hi) = self.x_range;
        MARGIN + (v - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN)
    }

    fn open(&self, title: &str, x_label: &str, y_label: &str, x_ticks: &[f64], y_ticks: &[f64]) -> String {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
        let (x0, x1) = (self.x(self.x_range.0), self.x(self.x_range.1));
        let (y0, y1) = (self.y(self.y_range.0), self.y(self.y_range.1));
        let _ = writeln!(svg, r#"<path d="M{x0:.1},{y1:.1} V{y0:.1} H{x1:.1}" fill="none" stroke="black"/>"#);
        for t in x_ticks {
            let x = self.x(*t);
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                y0 + 4.0,
                y0 + 16.0,
                tick_label(*t)
            );
        }
        for t in y_ticks {
            let y = self.y(*t);
            let _ = writeln!(
                svg,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                x0 - 4.0,
                x0 - 6.0,
                y + 4.0,
                tick_label(*t)
            );
        }
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 14.0, escape(x_label));
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(y_label)
        );
        svg
    }
}

fn tick_label(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn categories_for(curves: &[EntailmentCurve], unit: Unit) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in curves.iter().filter(|c| c.unit == unit) {
        if !out.contains(&c.category) {
            out.push(c.category.clone());
        }
    }
    out
}

struct Series {
    category: String,
    temperatures: Vec<i32>,
    raw: Vec<f64>,
    smoothed: Vec<f64>,
}

fn unit_panel(unit: Unit, series: &[Series]) -> String {
    let t_min = series.iter().flat_map(|s| s.temperatures.first()).min().copied().unwrap_or(0);
    let t_max = series.iter().flat_map(|s| s.temperatures.last()).max().copied().unwrap_or(1);
    let frame = Frame {
        x_range: (f64::from(t_min), f64::from(t_max.max(t_min + 1))),
        y_range: (0.0, 1.0),
    };
    let span = f64::from(t_max - t_min);
    let step = if span > 100.0 { 25.0 } else { 10.0 };
    let mut svg = frame.open(
        &format!("Entailment by temperature ({unit})"),
        "temperature",
        "entailment score",
        &ticks(frame.x_range.0, frame.x_range.1, step),
        &ticks(0.0, 1.0, 0.25),
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(svg, r#"<g fill="{color}" fill-opacity="0.35">"#);
        for (t, v) in s.temperatures.iter().zip(&s.raw) {
            let _ = write!(svg, r#"<circle cx="{:.1}" cy="{:.1}" r="1.5"/>"#, frame.x(f64::from(*t)), frame.y(*v));
        }
        let _ = writeln!(svg, "</g>");
        let points: Vec<String> = s
            .temperatures
            .iter()
            .zip(&s.smoothed)
            .map(|(t, v)| format!("{:.1},{:.1}", frame.x(f64::from(*t)), frame.y(*v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
        let ly = MARGIN + 14.0 * i as f64;
        let lx = WIDTH - MARGIN - 70.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 14.0,
            lx + 18.0,
            ly + 4.0,
            escape(&s.category)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn lambda_figure(fits: &[(Unit, HedgeFitResult)], grid_range: [f64; 2]) -> String {
    let n = fits.len().max(1) as f64;
    let frame = Frame {
        x_range: (0.0, n + 1.0),
        y_range: (grid_range[0], grid_range[1]),
    };
    let mut svg = frame.open(
        "Best hedge exponent per unit",
        "unit condition",
        "lambda",
        &[],
        &ticks(grid_range[0], grid_range[1], 1.0),
    );
    let y_ref = frame.y(VERY_EXPONENT);
    let _ = writeln!(
        svg,
        r#"<line x1="{:.1}" y1="{y_ref:.1}" x2="{:.1}" y2="{y_ref:.1}" stroke="gray" stroke-dasharray="6,4"/>"#,
        frame.x(0.0),
        frame.x(n + 1.0)
    );
    for (i, (unit, fit)) in fits.iter().enumerate() {
        let x = frame.x(i as f64 + 1.0);
        let y = frame.y(fit.lambda_star);
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.1}" cy="{y:.1}" r="5" fill="{}"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{unit}</text><text x="{:.1}" y="{:.1}">{:.3}</text>"#,
            PALETTE[i % PALETTE.len()],
            HEIGHT - MARGIN + 16.0,
            x + 8.0,
            y + 4.0,
            fit.lambda_star
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

/// Writes the figures and CSV tables into `out_dir`; returns the created
/// files in a fixed order.
pub fn write_plots(curves: &[EntailmentCurve], config: &AnalysisConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let series_path = out_dir.join("series.csv");
    let mut series_csv = csv::Writer::from_path(&series_path).map_err(|e| csv_error(&series_path, e))?;
    series_csv
        .write_record(["unit", "category", "temperature", "raw", "smoothed"])
        .map_err(|e| csv_error(&series_path, e))?;

    let grid = config.grid();
    let mut fits = Vec::new();
    for unit in Unit::ALL {
        let categories = categories_for(curves, unit);
        if categories.is_empty() {
            continue;
        }
        let mut series = Vec::new();
        for category in categories {
            let (temperatures, raw) = unit_series(curves, unit, &category, Source::Raw)?;
            let (_, smoothed) = unit_series(curves, unit, &category, Source::Smoothed)?;
            for ((t, r), s) in temperatures.iter().zip(&raw).zip(&smoothed) {
                series_csv
                    .write_record([unit.as_str(), &category, &t.to_string(), &r.to_string(), &s.to_string()])
                    .map_err(|e| csv_error(&series_path, e))?;
            }
            series.push(Series { category, temperatures, raw, smoothed });
        }
        let path = out_dir.join(format!("entailment_{unit}.svg"));
        write_file(&path, &unit_panel(unit, &series))?;
        written.push(path);

        let base = series.iter().find(|s| s.category == config.base_category);
        let target = series.iter().find(|s| s.category == config.target_category);
        if let (Some(base), Some(target)) = (base, target) {
            let pick = |s: &Series| match config.hedge_source {
                Source::Raw => s.raw.clone(),
                Source::Smoothed => s.smoothed.clone(),
            };
            let fit = fit_hedge_values(&pick(base), &pick(target), &grid, &base.category, &target.category)?;
            fits.push((unit, fit));
        }
    }
    series_csv.flush().map_err(|e| Error::io(&series_path, e))?;
    written.push(series_path);

    let path = out_dir.join("hedge_lambda.svg");
    write_file(&path, &lambda_figure(&fits, config.lambda_grid))?;
    written.push(path);

    let fits_path = out_dir.join("hedge_fits.csv");
    let mut fits_csv = csv::Writer::from_path(&fits_path).map_err(|e| csv_error(&fits_path, e))?;
    fits_csv
        .write_record(["unit", "lambda", "rmse", "is_best"])
        .map_err(|e| csv_error(&fits_path, e))?;
    for (unit, fit) in &fits {
        for (lambda, rmse) in &fit.grid {
            let best = if *lambda == fit.lambda_star { "1" } else { "0" };
            fits_csv
                .write_record([unit.as_str(), &lambda.to_string(), &rmse.to_string(), best])
                .map_err(|e| csv_error(&fits_path, e))?;
        }
    }
    fits_csv.flush().map_err(|e| Error::io(&fits_path, e))?;
    written.push(fits_path);
    Ok(written)
}
