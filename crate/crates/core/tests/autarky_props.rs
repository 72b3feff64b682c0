mod common;

use adoptcone::oracle::{grid_autarky, GridSpec};
use adoptcone::*;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_invariants(w in worker_strategy(6)) {
        let a = solve_autarky(&w);
        prop_assert!(rel(cet_cost(&a.x_a, &w).unwrap().value, w.budget()) < 1e-9);
        let grad = ces_output(&a.x_a, &w).unwrap().gradient;
        prop_assert!(cosine_distance(&grad, &a.p_a) < 1e-8);
        prop_assert!((a.shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(rel(dot(&a.p_a, &a.x_a), w.budget() * a.rho_a) < 1e-9);
        prop_assert!(rel(autarky_output_per_budget(&w), productivity_index(&w).powf(output_per_budget_exponent(&w))) < 1e-9);
    }
}

#[test]
fn closed_form_matches_inner_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in 0..100 {
        let n = rng.random_range(2..=6);
        let w = random_worker(&mut rng, n);
        let a = solve_autarky(&w);
        let sol = concave_maximize(&CesObjective::new(&w), &w, w.budget(), &vec![0.0; n]).unwrap();
        for (c, s) in a.x_a.iter().zip(sol.x.iter()) {
            assert!(rel(*c, *s) < 1e-6, "instance {k}: {:?} vs {:?}", a.x_a, sol.x);
        }
    }
}

#[test]
fn closed_form_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let n = rng.random_range(2..=3);
        let w = random_worker(&mut rng, n);
        let a = solve_autarky(&w);
        let g = grid_autarky(&w, GridSpec::new(200, 6)).unwrap();
        assert!(rel(a.output, g.value) < 1e-9);
        for (c, s) in a.x_a.iter().zip(&g.x) {
            assert!(rel(*c, *s) < 1e-4, "{:?} vs {:?}", a.x_a, g.x);
        }
    }
}

/// The printed `Φ^{σ/(σ−1)}` disagrees with the brute-force optimum, the
/// exponent `(γ+σ)/((σ−1)(γ+1))` does not.
#[test]
fn output_per_budget_exponent_is_confirmed_by_grid() {
    let w = canonical();
    let g = grid_autarky(&w, GridSpec::new(10_000, 0)).unwrap();
    assert!(rel(g.value, 2.0 * 2f64.sqrt()) < 1e-6);
    let phi = productivity_index(&w);
    assert!(rel(g.value, phi.powf(output_per_budget_exponent(&w))) < 1e-6);
    assert!(rel(g.value, phi.powf(w.sigma() / (w.sigma() - 1.0))) > 0.1);

    let w = WorkerJob::new(vec![0.6, 1.7, 1.1], vec![2.0, 0.8, 1.3], 3.0, 0.5, 1.0).unwrap();
    let g = grid_autarky(&w, GridSpec::new(200, 6)).unwrap();
    let phi = productivity_index(&w);
    assert!(rel(g.value, phi.powf(output_per_budget_exponent(&w))) < 1e-9);
}

#[test]
fn jevons_sign_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let n = rng.random_range(2..=5);
        let w = random_worker(&mut rng, n);
        let i = rng.random_range(0..n);
        let h = 1e-6 * w.skills()[i];
        let mut up = w.skills().to_vec();
        let mut dn = w.skills().to_vec();
        up[i] += h;
        dn[i] -= h;
        let fd = (autarky_shares(&w.with_skills(up).unwrap())[i] - autarky_shares(&w.with_skills(dn).unwrap())[i]) / (2.0 * h);
        let an = jevons_share_derivative(&w, i).unwrap();
        assert_eq!(fd.signum(), (w.sigma() - 1.0).signum());
        assert_eq!(an.signum(), fd.signum());
        assert!(rel(an, fd) < 1e-5);
    }
}

#[test]
fn symmetric_shares_are_even() {
    let w = WorkerJob::new(vec![1.0, 1.0], vec![1.0, 1.0], 0.4, 2.0, 3.0).unwrap();
    assert_eq!(autarky_shares(&w), vec![0.5, 0.5]);
}
