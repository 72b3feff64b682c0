mod common;

use adoptcone::*;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tech(rng: &mut ChaCha8Rng, w: &WorkerJob, lo: f64, hi: f64) -> Technology {
    let t = random_direction(rng, w.dim());
    let chi0 = entry_threshold(&t, w).unwrap();
    Technology::new(t, chi0 * rng.random_range(lo..hi)).unwrap()
}

#[test]
fn single_technology_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for k in 0..30 {
        let n = rng.random_range(2..=4);
        let w = random_worker(&mut rng, n);
        let tech = random_tech(&mut rng, &w, 0.9, 1.4);
        let single = optimal_intensity(&tech, &w).unwrap();
        let multi = solve_multi(&w, std::slice::from_ref(&tech)).unwrap();
        assert!((multi.lambdas[0] - single.lambda_star).abs() < 1e-5, "{k}: {} vs {}", multi.lambdas[0], single.lambda_star);
        assert!(rel(multi.output, single.output) < 1e-7);
    }
}

#[test]
fn solution_dominates_random_hull_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let w = random_worker(&mut rng, 3);
    let techs: Vec<Technology> = (0..3).map(|_| random_tech(&mut rng, &w, 1.0, 1.3)).collect();
    let sol = solve_multi(&w, &techs).unwrap();
    let b = w.budget();
    for _ in 0..10_000 {
        // random convex combination of a frontier point and the technology points
        let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.0f64..1.0).powi(3)).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(0.01..1.0)).collect();
        let x = revenue_maximizer(&p, &w).unwrap();
        let mut z: Vec<f64> = x.iter().map(|v| v * raw[0] / total).collect();
        for (k, tech) in techs.iter().enumerate() {
            for (zi, yi) in z.iter_mut().zip(tech.point(b)) {
                *zi += raw[k + 1] / total * yi;
            }
        }
        assert!(sol.output >= ces_output(&z, &w).unwrap().value - 1e-6);
    }
}

#[test]
fn output_weakly_increases_as_technologies_are_added() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..5 {
        let w = random_worker(&mut rng, 3);
        let techs: Vec<Technology> = (0..4).map(|_| random_tech(&mut rng, &w, 0.9, 1.3)).collect();
        let mut last = solve_autarky(&w).output;
        for k in 1..=techs.len() {
            let sol = solve_multi(&w, &techs[..k]).unwrap();
            assert!(sol.output >= last * (1.0 - 1e-10));
            let used: f64 = sol.lambdas.iter().sum();
            assert!(used <= 1.0 + 1e-12);
            assert!(cet_cost(&sol.x_h, &w).unwrap().value <= (1.0 - used) * w.budget() * (1.0 + 1e-9) + 1e-12);
            assert!(sol.gap <= 1e-8);
            last = sol.output;
        }
    }
}

#[test]
fn more_options_never_hurt() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    for _ in 0..10 {
        let w = random_worker(&mut rng, 2);
        let techs: Vec<Technology> = (0..3).map(|_| random_tech(&mut rng, &w, 0.9, 1.5)).collect();
        let joint = solve_multi(&w, &techs).unwrap();
        for tech in &techs {
            let single = optimal_intensity(tech, &w).unwrap();
            assert!(joint.output >= single.output - 1e-8);
        }
    }
}

#[test]
fn duplicate_technologies_leave_output_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..10 {
        let w = random_worker(&mut rng, 3);
        let tech = random_tech(&mut rng, &w, 1.0, 1.3);
        let one = solve_multi(&w, std::slice::from_ref(&tech)).unwrap();
        let two = solve_multi(&w, &[tech.clone(), tech]).unwrap();
        assert!(rel(one.output, two.output) < 1e-8);
    }
}

/// `ϱ_K(p) ≥ ϱ_{K−1}(p)` at any fixed `p`, so the threshold at fixed prices rises.
#[test]
fn rising_bar_at_fixed_prices() {
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    for _ in 0..50 {
        let n = rng.random_range(2..=4);
        let w = random_worker(&mut rng, n);
        let techs: Vec<Technology> = (0..3).map(|_| random_tech(&mut rng, &w, 0.9, 1.3)).collect();
        let cand = random_direction(&mut rng, n);
        let p_star = solve_multi(&w, &techs).unwrap().p_star;
        let probe = random_direction(&mut rng, n);
        for p in [p_star.as_slice(), probe.as_slice()] {
            for k in 1..=techs.len() {
                let big = k_unit_revenue(p, &w, &techs[..k]).unwrap() / dot(p, &cand);
                let small = k_unit_revenue(p, &w, &techs[..k - 1]).unwrap() / dot(p, &cand);
                assert!(big >= small);
            }
        }
    }
}

/// With prices re-optimized after adoption the threshold can fall: a tool
/// that floods task 2 raises the shadow price of task 1.
#[test]
fn reoptimized_threshold_can_fall() {
    let w = WorkerJob::new(vec![1.088220928864764, 2.7620554340363825], vec![0.4446359384679065, 0.8566663843066458], 1.5321245085129798, 2.00857971705285, 1.0).unwrap();
    let first = Technology::new(UnitVector::new(vec![0.08852327340300979, 0.9960741087218441]).unwrap(), 1.2593720849916674).unwrap();
    let cand_t = UnitVector::new(vec![0.937005833354874, 0.3493137103792782]).unwrap();
    let before = entry_threshold(&cand_t, &w).unwrap();
    let after = entry_threshold_after(&w, std::slice::from_ref(&first), &cand_t).unwrap();
    assert!(after < before * 0.9, "{after} vs {before}");

    // a candidate between the two thresholds fails alone but is used jointly
    let cand = Technology::new(cand_t, 0.5 * (before + after)).unwrap();
    assert_eq!(optimal_intensity(&cand, &w).unwrap().regime, Regime::NoAdoption);
    let base = solve_multi(&w, std::slice::from_ref(&first)).unwrap();
    let joint = solve_multi(&w, &[first, cand]).unwrap();
    assert!(joint.lambdas[1] > 1e-3, "{joint:?}");
    assert!(joint.output > base.output * (1.0 + 1e-6));
}

#[test]
fn entry_next_matches_joint_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    for _ in 0..20 {
        let w = random_worker(&mut rng, 3);
        let first = random_tech(&mut rng, &w, 1.05, 1.3);
        let cand = random_tech(&mut rng, &w, 0.8, 1.4);
        let decision = entry_next(&w, std::slice::from_ref(&first), &cand).unwrap();
        let base = solve_multi(&w, std::slice::from_ref(&first)).unwrap();
        let joint = solve_multi(&w, &[first, cand.clone()]).unwrap();
        let margin = (cand.chi / decision.threshold - 1.0).abs();
        if margin > 1e-3 {
            assert_eq!(decision.adopted, joint.lambdas[1] > 1e-7, "{decision:?} {joint:?}");
            assert_eq!(decision.adopted, joint.output > base.output * (1.0 + 1e-10));
        }
    }
}

#[test]
fn all_in_next_matches_joint_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(58);
    let mut seen = [0usize; 2];
    for _ in 0..30 {
        let w = random_worker(&mut rng, 2);
        let first = random_tech(&mut rng, &w, 1.05, 1.3);
        let t = random_direction(&mut rng, 2);
        let chi100 = corner_threshold(&t, &w).unwrap();
        let cand = Technology::new(t, chi100 * rng.random_range(0.9..2.5)).unwrap();
        let predicted = all_in_next(&w, std::slice::from_ref(&first), &cand).unwrap();
        let joint = solve_multi(&w, &[first, cand]).unwrap();
        if predicted {
            assert!(joint.lambdas[1] > 1.0 - 1e-6, "{joint:?}");
        } else {
            assert!(joint.lambdas[1] < 1.0 - 1e-9, "{joint:?}");
        }
        seen[predicted as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0);
}
