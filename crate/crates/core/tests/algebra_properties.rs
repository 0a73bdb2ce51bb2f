use std::sync::Arc;

use proptest::prelude::*;
use tracemix::algebra::{
    dual_positivity_check, is_positive, l1_norm, l1_norm_singular, l1_norm_spectral, spectral_decompose,
};
use tracemix::mass::max_projection_mass;
use tracemix::random::{self, SeededRng};
use tracemix::{Algebra, Element, MassMode};

fn algebra_from(seed: u64, max_blocks: usize, max_dim: usize, equal_weights: bool) -> (Arc<Algebra>, SeededRng) {
    use rand::Rng;
    let mut rng = random::seeded(seed);
    let nb = rng.random_range(1..=max_blocks);
    let dims: Vec<usize> = (0..nb).map(|_| rng.random_range(1..=max_dim)).collect();
    let weights: Vec<f64> = if equal_weights {
        vec![0.5; nb]
    } else {
        (0..nb).map(|_| rng.random_range(0.1..3.0)).collect()
    };
    (Algebra::new(&dims, &weights, false).unwrap(), rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn spectral_reconstruction(seed in any::<u64>()) {
        let (a, mut rng) = algebra_from(seed, 3, 6, false);
        let x = random::hermitian(&a, &mut rng);
        let s = spectral_decompose(&x, 1e-10).unwrap();
        let err = l1_norm(&(&s.reconstruct() - &x));
        prop_assert!(err <= 1e-10 * (1.0 + l1_norm(&x)), "err {err}");
    }

    #[test]
    fn norm_paths_agree(seed in any::<u64>()) {
        let (a, mut rng) = algebra_from(seed, 3, 6, false);
        let x = random::hermitian(&a, &mut rng);
        let d = (l1_norm_spectral(&x, 1e-10).unwrap() - l1_norm_singular(&x)).abs();
        prop_assert!(d <= 1e-10, "diff {d}");
    }

    #[test]
    fn triangle_inequality_and_homogeneity(seed in any::<u64>(), c in -5.0..5.0f64) {
        let (a, mut rng) = algebra_from(seed, 3, 5, false);
        let x = random::gaussian_element(&a, &mut rng);
        let y = random::gaussian_element(&a, &mut rng);
        prop_assert!(l1_norm(&(&x + &y)) <= l1_norm(&x) + l1_norm(&y) + 1e-10);
        prop_assert!((l1_norm(&x.scale(c)) - c.abs() * l1_norm(&x)).abs() <= 1e-10 * (1.0 + l1_norm(&x)));
    }

    #[test]
    fn faithfulness_bounds_entries(seed in any::<u64>(), exponent in -14i32..0) {
        // |x_ij| ≤ ‖x_b‖_op ≤ ‖x_b‖_1 ≤ ‖x‖₁ / min_b w_b
        let (a, mut rng) = algebra_from(seed, 3, 5, false);
        let x = random::gaussian_element(&a, &mut rng);
        let x = x.scale(10f64.powi(exponent) / l1_norm(&x));
        let bound = l1_norm(&x) / a.min_weight();
        prop_assert!(x.max_abs_entry() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn dual_check_matches_eigenvalues(seed in any::<u64>(), shift in -1.0..1.0f64) {
        let (a, mut rng) = algebra_from(seed, 3, 4, false);
        let h = random::hermitian(&a, &mut rng);
        let lmin = is_positive(&h, 0.0).min_eigenvalue;
        let x = &h + &Element::identity(&a).scale(shift - lmin);
        prop_assert_eq!(dual_positivity_check(&x, 1e-8).unwrap(), is_positive(&x, 1e-8).positive);
    }

    #[test]
    fn exact_dominates_greedy(seed in any::<u64>(), frac in 0.0..1.2f64, equal in any::<bool>()) {
        let (a, mut rng) = algebra_from(seed, 3, 4, equal);
        let y = random::positive(&a, &mut rng);
        let delta = frac * a.unit_trace();
        let exact = max_projection_mass(&y, delta, MassMode::Exact, 1e-8).unwrap();
        let greedy = max_projection_mass(&y, delta, MassMode::Greedy, 1e-8).unwrap();
        prop_assert!(exact.value >= greedy.value);
        if equal {
            prop_assert_eq!(exact.value, greedy.value);
        }
    }

    #[test]
    fn projection_mass_is_monotone(seed in any::<u64>(), f1 in 0.0..1.2f64, f2 in 0.0..1.2f64) {
        let (a, mut rng) = algebra_from(seed, 3, 4, false);
        let y = random::positive(&a, &mut rng);
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let u = a.unit_trace();
        let v_lo = max_projection_mass(&y, lo * u, MassMode::Exact, 1e-8).unwrap().value;
        let v_hi = max_projection_mass(&y, hi * u, MassMode::Exact, 1e-8).unwrap().value;
        prop_assert!(v_lo <= v_hi);
    }
}
