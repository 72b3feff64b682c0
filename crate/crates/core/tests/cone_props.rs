mod common;

use adoptcone::*;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

#[test]
fn cone_nesting_over_sampled_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let w = random_worker(&mut rng, 4);
    let rho = solve_autarky(&w).rho_a;
    let chis: Vec<f64> = (0..20).map(|k| rho * (0.9 + 0.1 * k as f64)).collect();
    for _ in 0..1000 {
        let t = random_direction(&mut rng, 4);
        let mut inside = false;
        for &chi in &chis {
            let now = in_cone(&t, &ConeSpec::for_worker(&w, chi).unwrap()).unwrap();
            assert!(!inside || now);
            inside = now;
        }
    }
}

#[test]
fn half_angle_increases_with_capability() {
    let rho = 1.3;
    let p = UnitVector::normalize(&[1.0, 2.0]).unwrap();
    let grid: Vec<f64> = (0..100).map(|k| rho * (1.0 + 0.05 * (k + 1) as f64)).collect();
    for pair in grid.windows(2) {
        let a = half_angle(&ConeSpec::new(p.clone(), rho, pair[0]).unwrap()).unwrap();
        let b = half_angle(&ConeSpec::new(p.clone(), rho, pair[1]).unwrap()).unwrap();
        assert!((b - a) / (pair[1] - pair[0]) > 0.0);
    }
    // π/2 − φ₀ = arcsin(ϱ/χ), slightly above ϱ/χ
    let far = half_angle(&ConeSpec::new(p.clone(), rho, rho * 1e3).unwrap()).unwrap();
    assert!(((FRAC_PI_2 - far) - 1e-3f64.asin()).abs() < 1e-15);
    let further = half_angle(&ConeSpec::new(p, rho, rho * 1.001e3).unwrap()).unwrap();
    assert!(FRAC_PI_2 - further < 1e-3);
}

#[test]
fn membership_agrees_with_entry_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..1000 {
        let n = rng.random_range(2..=5);
        let w = random_worker(&mut rng, n);
        let t = random_direction(&mut rng, n);
        let chi0 = entry_threshold(&t, &w).unwrap();
        let chi = chi0 * rng.random_range(0.7..1.3);
        let cone = ConeSpec::for_worker(&w, chi).unwrap();
        assert_eq!(in_cone(&t, &cone).unwrap(), chi > chi0);
        let sol_regime = chi > chi0 * (1.0 + TIE_TOLERANCE);
        assert_eq!(in_cone(&t, &cone).unwrap(), sol_regime);
    }
}

#[test]
fn square_root_law_near_threshold() {
    for eps in [1e-3, 1e-4, 1e-5, 1e-6] {
        let a = sqrt_approximation_error(2.0, 2.0 * (1.0 + eps)).unwrap();
        assert!(a.relative_error < 0.005 && a.in_regime);
        // leading correction is 5ε/12 relative
        assert!((a.relative_error - 5.0 * eps / 12.0).abs() < eps * 1e-3, "{eps}: {}", a.relative_error);
    }
}

#[test]
fn measure_matches_arc_length_in_two_dimensions() {
    let h = 0.5f64.sqrt();
    let p = UnitVector::new(vec![h, h]).unwrap();
    for phi0 in [FRAC_PI_8, 0.1, 0.6] {
        let cone = ConeSpec::new(p.clone(), 1.0, 1.0 / phi0.cos()).unwrap();
        let m = adoption_measure(&cone, 100_000, 99).unwrap();
        let exact = 2.0 * phi0 / FRAC_PI_2;
        assert!((m.measure - exact).abs() < 3.0 * m.standard_error, "{phi0}: {m:?}");
    }
}

#[test]
fn measure_is_reproducible_and_seed_dependent() {
    let cone = ConeSpec::new(UnitVector::normalize(&[1.0, 2.0, 0.5]).unwrap(), 1.0, 1.2).unwrap();
    let a = adoption_measure(&cone, 20_000, 5).unwrap();
    let b = adoption_measure(&cone, 20_000, 5).unwrap();
    assert_eq!(a, b);
    let c = adoption_measure(&cone, 20_000, 6).unwrap();
    assert_ne!(a.measure, c.measure);
    // a longer run extends the shorter one index by index
    let prefix = adoption_measure(&cone, 10_000, 5).unwrap();
    let mut buf = [0.0; 3];
    let hits = (0..10_000u64)
        .filter(|&i| {
            sample_direction(5, i, 3, &mut buf);
            in_cone(&UnitVector::normalize(&buf).unwrap(), &cone).unwrap()
        })
        .count();
    assert_eq!(prefix.measure, hits as f64 / 10_000.0);
}

#[test]
fn standard_error_scales_with_inverse_root_of_samples() {
    let cone = ConeSpec::new(UnitVector::normalize(&[1.0, 1.0, 1.0]).unwrap(), 1.0, 1.15).unwrap();
    let se = |n: usize| adoption_measure(&cone, n, 17).unwrap().standard_error;
    let (s1, s2, s4) = (se(25_000), se(50_000), se(100_000));
    assert!((s1 / s2 - 2f64.sqrt()).abs() < 0.05, "{}", s1 / s2);
    assert!((s1 / s4 - 2.0).abs() < 0.07, "{}", s1 / s4);
}

#[test]
fn reported_standard_error_matches_seed_spread() {
    let cone = ConeSpec::new(UnitVector::normalize(&[1.0, 2.0]).unwrap(), 1.0, 1.1).unwrap();
    let runs: Vec<MeasureEstimate> = (0..200).map(|s| adoption_measure(&cone, 2_000, 1000 + s).unwrap()).collect();
    let mean = runs.iter().map(|r| r.measure).sum::<f64>() / 200.0;
    let sd = (runs.iter().map(|r| (r.measure - mean).powi(2)).sum::<f64>() / 199.0).sqrt();
    let reported = runs.iter().map(|r| r.standard_error).sum::<f64>() / 200.0;
    assert!((sd / reported - 1.0).abs() < 0.15, "{sd} vs {reported}");
}

#[test]
fn curvature_comparative_statics() {
    let w = WorkerJob::new(vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0], 2.0, 1.0, 1.0).unwrap();
    let t = UnitVector::normalize(&[2.0, 1.0, 1.0]).unwrap();
    let pts = curvature_sweep(&w, 2.0, &t, &[2.0, 4.0, 8.0, 16.0, 32.0], DEFAULT_SIGMA_SHARE).unwrap();
    for pair in pts.windows(2) {
        assert!(pair[1].phi0.unwrap() >= pair[0].phi0.unwrap());
        assert!(pair[1].ratio <= pair[0].ratio);
        assert!(pair[1].ratio >= 1.0);
    }
}

#[test]
fn flexible_worker_prices_approach_uniform() {
    let w = WorkerJob::new(vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0], 750.0, 250.0, 1.0).unwrap();
    let p = solve_autarky(&w).p_a;
    assert!(cosine_distance(&p, &[1.0, 1.0, 1.0]) < 1e-3);
}
