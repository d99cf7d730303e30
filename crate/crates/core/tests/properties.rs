use holomimo::array::{element_positions, propagating_sample_set, steering_matrix, steering_vector, ArrayGeometry};
use holomimo::capacity::{eigen_spectrum, water_filling};
use holomimo::efficiency::transmission_efficiency_bound;
use holomimo::leakage::{draw_leakage, XprParameters};
use holomimo::CMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positions_are_centred(nx in 1usize..24, ny in 1usize..24, dx in 0.05f64..2.0, dy in 0.05f64..2.0) {
        let p = element_positions(nx, ny, dx, dy).unwrap();
        let n = p.len() as f64;
        let (sx, sy) = p.iter().fold((0.0, 0.0), |(a, b), r| (a + r.x, b + r.y));
        prop_assert!((sx / n).abs() < 1e-12 && (sy / n).abs() < 1e-12);
    }

    #[test]
    fn steering_vector_has_unit_norm(nx in 1usize..12, ny in 1usize..12, d in 0.1f64..1.0, theta in 0.0f64..std::f64::consts::FRAC_PI_2, phi in -std::f64::consts::PI..std::f64::consts::PI) {
        let g = ArrayGeometry::from_counts(nx, ny, d, d).unwrap();
        let v = steering_vector(&g, theta, phi).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steering_matrix_entries_are_unit_modulus(per_side in 1usize..10, divisor in 1usize..5) {
        let aperture = per_side as f64 / 2.0;
        let g = ArrayGeometry::new(aperture, aperture, 1.0 / (2.0 * divisor as f64), 1.0 / (2.0 * divisor as f64)).unwrap();
        let s = propagating_sample_set(aperture, aperture).unwrap();
        let u = steering_matrix(&g, &s).unwrap();
        prop_assert!(u.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn bound_is_one_iff_wide_enough(d in 0.05f64..1.5) {
        let chi = transmission_efficiency_bound(d, d).unwrap();
        if d >= std::f64::consts::FRAC_1_SQRT_2 {
            prop_assert_eq!(chi, 1.0);
        } else {
            prop_assert!(chi < 1.0);
        }
    }

    #[test]
    fn water_filling_spends_the_budget(gains in prop::collection::vec(0.01f64..100.0, 1..12), p in 0.01f64..50.0) {
        let a = water_filling(&gains, p);
        prop_assert!((a.powers.iter().sum::<f64>() - p).abs() < 1e-9 * p.max(1.0));
        prop_assert!(a.powers.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn spectrum_sums_to_frobenius_norm(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let eig = eigen_spectrum(&h);
        prop_assert_eq!(eig.len(), rows);
        prop_assert!(eig.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((eig.iter().sum::<f64>() - h.norm_squared()).abs() < 1e-9 * h.norm_squared().max(1.0));
    }

    #[test]
    fn leakage_blocks_preserve_power(mu in -10.0f64..20.0, sigma in 0.0f64..6.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let leak = draw_leakage(&XprParameters::log_normal(mu, sigma).unwrap(), 3, 2, &mut rng);
        for l in 0..3 {
            for m in 0..2 {
                let b = leak.block(l, m);
                let total: f64 = b.iter().flatten().map(|z| z.norm_sqr()).sum();
                prop_assert!((total - 2.0).abs() < 1e-9);
            }
        }
    }
}
