//! Synthetic data shared by integration tests.

use fuzzprobe_core::curve::EntailmentCurve;
use fuzzprobe_core::stimuli::Unit;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn truth(t: f64) -> f64 {
    0.5 + 0.4 * (t / 20.0).sin()
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Sine with σ=0.1 gaussian noise on the no-unit temperature range. Raw
/// samples are clamped to the unit interval as entailment scores are.
/// Returns the noisy curve and the clean values.
pub fn noisy_sine(seed: u64) -> (EntailmentCurve, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let samples: Vec<(i32, f64)> = (-50..=122)
        .map(|t| (t, (truth(t as f64) + noise.sample(&mut rng)).clamp(0.0, 1.0)))
        .collect();
    let clean = (-50..=122).map(|t| truth(t as f64)).collect();
    (EntailmentCurve::new(Unit::None, "", "warm", samples).unwrap(), clean)
}
