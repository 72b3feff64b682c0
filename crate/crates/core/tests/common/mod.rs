#![allow(dead_code)]

use adoptcone::{Technology, UnitVector, WorkerJob};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn canonical() -> WorkerJob {
    WorkerJob::new(vec![1.0, 1.0], vec![1.0, 1.0], 2.0, 1.0, 1.0).unwrap()
}

pub fn canonical_tech(chi: f64) -> Technology {
    Technology::from_unnormalized(&[0.8, 0.6], chi).unwrap()
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// σ drawn from `[lo, hi]` away from the excluded unit point.
pub fn sigma_away_from_one(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let s = rng.random_range(lo..hi);
        if (s - 1.0).abs() > 0.05 {
            return s;
        }
    }
}

/// Worker with log-uniform θ, s ∈ [0.2, 5], σ ∈ [0.3, 5], γ ∈ [0.3, 5].
pub fn random_worker(rng: &mut ChaCha8Rng, n: usize) -> WorkerJob {
    let theta = (0..n).map(|_| log_uniform(rng, 0.2, 5.0)).collect();
    let s = (0..n).map(|_| log_uniform(rng, 0.2, 5.0)).collect();
    let sigma = sigma_away_from_one(rng, 0.3, 5.0);
    let gamma = rng.random_range(0.3..5.0);
    WorkerJob::new(theta, s, sigma, gamma, log_uniform(rng, 0.2, 5.0)).unwrap()
}

/// Strictly interior direction.
pub fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> UnitVector {
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    UnitVector::normalize(&v).unwrap()
}

pub fn worker_strategy(max_n: usize) -> impl Strategy<Value = WorkerJob> {
    (1..=max_n)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.2f64..5.0, n),
                prop::collection::vec(0.2f64..5.0, n),
                prop_oneof![0.3f64..0.95, 1.05f64..5.0],
                0.3f64..5.0,
                0.2f64..5.0,
            )
        })
        .prop_map(|(theta, s, sigma, gamma, b)| WorkerJob::new(theta, s, sigma, gamma, b).unwrap())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
