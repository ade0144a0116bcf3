//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use fuzzprobe_core::analysis::{fit_hedge_values, linear_grid, ordering_fraction};
use fuzzprobe_core::config::PipelineConfig;
use fuzzprobe_core::curve::{build_curves, EntailmentCurve, Pooling, Source};
use fuzzprobe_core::fuzzy::{fuzzy_entails, FuzzySet, Hedge, MembershipFunction};
use fuzzprobe_core::pipeline::{run_pipeline, RunOptions};
use fuzzprobe_core::scoring::{cache_read, cache_write};
use fuzzprobe_core::smoothing::{smooth, SmootherConfig};
use fuzzprobe_core::stimuli::{generate_dataset, StimulusConfig, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const STEP: f64 = 7.0 / 99.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn dataset_counts() -> Outcome {
    let pairs = generate_dataset(&StimulusConfig::default()).unwrap();
    let count = |u: Unit| pairs.iter().filter(|p| p.unit == u).count();
    let got = [count(Unit::None), count(Unit::Fahrenheit), count(Unit::Celsius), pairs.len()];
    outcome(got == [5190, 5190, 3030, 13410], format!("none/F/C/total = {got:?}"))
}

fn random_membership(rng: &mut ChaCha8Rng) -> MembershipFunction {
    let bell = MembershipFunction::generalized_bell(
        rng.gen_range(0.5..50.0),
        rng.gen_range(0.5..5.0),
        rng.gen_range(-50.0..150.0),
    )
    .unwrap();
    match rng.gen_range(0..4) {
        0 => bell,
        1 => bell.apply_hedge(&Hedge::new("h", rng.gen_range(0.25..4.0)).unwrap()),
        2 => bell.intensify(rng.gen_range(0.1..0.9), rng.gen_range(1.0..4.0)).unwrap(),
        _ => {
            let grid: Vec<f64> = (0..=30).map(|i| -100.0 + 10.0 * i as f64).collect();
            let values = grid.iter().map(|&x| bell.evaluate(x).unwrap()).collect();
            MembershipFunction::tabulated(grid, values).unwrap()
        }
    }
}

/// Range closure, composition, concentration/dilation inverse and the
/// extremely ⊆ very ⊆ base ⊆ slightly chain, pointwise within 1e-12.
fn hedge_algebra() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let mf = random_membership(&mut rng);
        let mut xs: Vec<f64> = (0..64).map(|_| rng.gen_range(-100.0..200.0)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let (e1, e2) = (rng.gen_range(0.25..4.0), rng.gen_range(0.25..4.0));
        let h1 = Hedge::new("h1", e1).unwrap();
        let h2 = Hedge::new("h2", e2).unwrap();
        let stacked = mf.apply_hedge(&h1).apply_hedge(&h2);
        let product = mf.apply_hedge(&Hedge::new("h12", e1 * e2).unwrap());
        let round_trip = mf.apply_hedge(&Hedge::very()).apply_hedge(&Hedge::slightly());
        let intensified = mf.intensify(rng.gen_range(0.05..0.95), rng.gen_range(1.0..5.0)).unwrap();
        let bell_like = !matches!(mf.kind(), fuzzprobe_core::fuzzy::MembershipKind::Tabulated { .. });
        for &x in &xs {
            let mu = mf.evaluate(x).unwrap();
            let outputs = [
                mu,
                stacked.evaluate(x).unwrap(),
                product.evaluate(x).unwrap(),
                round_trip.evaluate(x).unwrap(),
                intensified.evaluate(x).unwrap(),
            ];
            if outputs.iter().any(|v| !(0.0..=1.0).contains(v)) {
                failures.push(format!("case {case}: range at x={x}"));
            }
            if (outputs[1] - outputs[2]).abs() > TOL {
                failures.push(format!("case {case}: composition at x={x}"));
            }
            if bell_like && (outputs[2] - mu.powf(e1 * e2)).abs() > TOL {
                failures.push(format!("case {case}: power law at x={x}"));
            }
            if (outputs[3] - mu).abs() > TOL {
                failures.push(format!("case {case}: very/slightly inverse at x={x}"));
            }
        }
        let base = FuzzySet::new(xs, mf).unwrap();
        let chain = [
            base.hedged(&Hedge::extremely()).unwrap(),
            base.hedged(&Hedge::very()).unwrap(),
            base.hedged(&Hedge::new("identity", 1.0).unwrap()).unwrap(),
            base.hedged(&Hedge::slightly()).unwrap(),
        ];
        if chain.windows(2).any(|w| !fuzzy_entails(&w[0], &w[1], TOL).unwrap()) {
            failures.push(format!("case {case}: entailment chain"));
        }
    }
    let detail = match failures.first() {
        None => "1000 random membership functions".to_string(),
        Some(first) => format!("{} violations, first: {first}", failures.len()),
    };
    outcome(failures.is_empty(), detail)
}

/// Synthetic base curve: a random generalized bell over the no-unit range.
fn synthetic_base(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mf = MembershipFunction::generalized_bell(
        rng.gen_range(15.0..40.0),
        rng.gen_range(1.5..4.0),
        rng.gen_range(60.0..110.0),
    )
    .unwrap();
    (-50..=122).map(|t| mf.evaluate(t as f64).unwrap()).collect()
}

fn lambda_recovery() -> Outcome {
    let grid = linear_grid(1.0, 8.0, 100);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let mut worst = [0.0f64; 2];
    let mut misses = 0;
    for &target_lambda in &[1.5, 2.0, 3.0, 5.0] {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = synthetic_base(&mut rng);
            let target: Vec<f64> = base.iter().map(|v| v.powf(target_lambda)).collect();
            let clean = fit_hedge_values(&base, &target, &grid, "warm", "hot").unwrap().lambda_star;
            // The base stays the exact membership; only the target is observed with noise.
            let noisy_target: Vec<f64> =
                target.iter().map(|v| (v + noise.sample(&mut rng)).clamp(0.0, 1.0)).collect();
            let noisy = fit_hedge_values(&base, &noisy_target, &grid, "warm", "hot").unwrap().lambda_star;
            let errs = [(clean - target_lambda).abs() / STEP, (noisy - target_lambda).abs() / STEP];
            worst[0] = worst[0].max(errs[0]);
            worst[1] = worst[1].max(errs[1]);
            if errs[0] > 1.0 + 1e-9 || errs[1] > 3.0 + 1e-9 {
                misses += 1;
            }
        }
    }
    outcome(
        misses == 0,
        format!(
            "80 fits per noise level; worst error {:.2} steps noiseless, {:.2} steps at sigma=0.02",
            worst[0], worst[1]
        ),
    )
}

fn published_scores() -> Outcome {
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/published_scores.jsonl");
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("scores.jsonl");
    cache_write(&cache_read(&fixture).unwrap(), &copy).unwrap();
    let scored = cache_read(&copy).unwrap();
    let freezing = scored
        .iter()
        .find(|s| s.pair.temperature == 0 && s.pair.unit == Unit::None && s.pair.category == "freezing")
        .map(|s| s.entailment());
    let curves = build_curves(&scored, Pooling::UnitCategory).unwrap();
    let find = |c: &str| curves.iter().find(|k| k.category == c).unwrap();
    let (warm, hot) = (find("warm"), find("hot"));
    let pointwise: Vec<bool> = warm.raw_values().iter().zip(hot.raw_values()).map(|(w, h)| *w > h).collect();
    let fraction = ordering_fraction(warm, hot, Source::Raw).unwrap();
    outcome(
        scored.len() == 10 && freezing == Some(0.956) && pointwise == [true, true] && fraction == 1.0,
        format!("freezing@0 = {freezing:?}, warm>hot = {pointwise:?}, fraction = {fraction}"),
    )
}

fn smoother_quality() -> Outcome {
    let config = SmootherConfig::default();
    let mut wins = 0;
    for seed in 0..20 {
        let (curve, clean) = common::noisy_sine(seed);
        let smoothed = smooth(&curve, &config).unwrap();
        if common::rmse(&smoothed.values(Source::Smoothed), &clean) < common::rmse(&curve.raw_values(), &clean) {
            wins += 1;
        }
    }
    let mut worst: f64 = 0.0;
    let shapes: [Box<dyn Fn(i32) -> f64>; 4] = [
        Box::new(|_| 0.0),
        Box::new(|_| 0.37),
        Box::new(|_| 1.0),
        Box::new(|t| 0.2 + 0.004 * (t + 50) as f64),
    ];
    for shape in &shapes {
        let samples: Vec<(i32, f64)> = (-50..=122).map(|t| (t, shape(t))).collect();
        let curve = EntailmentCurve::new(Unit::None, "", "warm", samples).unwrap();
        let smoothed = smooth(&curve, &config).unwrap();
        for (a, b) in smoothed.values(Source::Smoothed).iter().zip(curve.raw_values()) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(
        wins >= 18 && worst <= 1e-9,
        format!("smoothed beats raw in {wins}/20 seeds; constant/affine max deviation {worst:.1e}"),
    )
}

fn argmin_correctness() -> Outcome {
    let grid = linear_grid(1.0, 8.0, 100);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut violations = 0;
    for _ in 0..100 {
        let base = synthetic_base(&mut rng);
        let target: Vec<f64> = if rng.gen_bool(0.5) {
            let lambda = rng.gen_range(1.0..8.0);
            base.iter().map(|v| (v.powf(lambda) + noise.sample(&mut rng)).clamp(0.0, 1.0)).collect()
        } else {
            synthetic_base(&mut rng)
        };
        let fit = fit_hedge_values(&base, &target, &grid, "warm", "hot").unwrap();
        for &lambda in &grid {
            let sq: f64 = base.iter().zip(&target).map(|(b, t)| (t - b.powf(lambda)).powi(2)).sum();
            let err = (sq / base.len() as f64).sqrt();
            if err < fit.rmse_at_star {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("100 pairs x 100 grid points, {violations} strictly better points"))
}

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, serde_json::to_string(&PipelineConfig::default()).unwrap()).unwrap();
    let run = |name: &str| {
        run_pipeline(&config, &RunOptions { out_dir: Some(dir.path().join(name)), endpoint_override: None }).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    let mut differing = Vec::new();
    for name in ["pairs.jsonl", "scores.jsonl", "curves.jsonl", "report.json"] {
        let x = std::fs::read(a.dir.join(name)).unwrap();
        let y = std::fs::read(b.dir.join(name)).unwrap();
        if x != y || a.manifest.artifacts.get(name) != b.manifest.artifacts.get(name) {
            differing.push(name);
        }
    }
    outcome(
        differing.is_empty() && a.pairs == 13410,
        format!("{} pairs; differing artifacts: {differing:?}", a.pairs),
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 7] = [
        ("dataset counts", Duration::from_secs(1), dataset_counts),
        ("hedge algebra", Duration::from_secs(5), hedge_algebra),
        ("lambda recovery", Duration::from_secs(10), lambda_recovery),
        ("published scores", Duration::from_secs(1), published_scores),
        ("smoother quality", Duration::from_secs(10), smoother_quality),
        ("argmin correctness", Duration::from_secs(5), argmin_correctness),
        ("end-to-end determinism", Duration::from_secs(30), end_to_end_determinism),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
