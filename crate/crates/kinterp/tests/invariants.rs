//! Property tests for the data-facing invariants.

use kinterp::dataset::{normalize, RawDataset};
use kinterp::kernel::{normalized_distribution, Temperature};
use proptest::prelude::*;

fn arb_dataset() -> impl Strategy<Value = RawDataset> {
    (1usize..=3, 5usize..=30).prop_flat_map(|(dim, n)| {
        (
            proptest::collection::vec(-1e3..1e3f64, n * dim),
            proptest::collection::vec(-1e2..1e2f64, n),
        )
            .prop_map(move |(points, values)| RawDataset::from_flat(points, values, dim).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // normalization lands every coordinate and value in [-1, 1] and the
    // stored transform inverts it
    #[test]
    fn normalization_round_trips(raw in arb_dataset()) {
        let (norm, transform) = normalize(&raw);
        for &c in norm.points_flat() {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&c));
        }
        for &v in norm.values() {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
        }
        for (orig, mapped) in raw.iter_points().zip(norm.iter_points()) {
            let back = transform.denormalize_point(mapped);
            for (a, b) in orig.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
        for (&orig, &mapped) in raw.values().iter().zip(norm.values()) {
            let back = transform.denormalize_value(mapped);
            prop_assert!((orig - back).abs() <= 1e-9 * orig.abs().max(1.0));
        }
    }

    // kernel weights form a probability distribution and depend only on
    // relative geometry
    #[test]
    fn kernel_weights_sum_to_one_and_translate(
        raw in arb_dataset(),
        theta in 1e-6..1e6f64,
        shift in -1e3..1e3f64,
        qseed in 0usize..5,
    ) {
        let dim = raw.dim();
        let query: Vec<f64> = raw.point(qseed % raw.len()).iter().map(|x| x + 0.1).collect();
        let t = Temperature::new(theta).unwrap();
        let p = normalized_distribution(&query, raw.points_flat(), dim, t).unwrap();
        let total: f64 = p.weights.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(p.weights.iter().all(|&w| w >= 0.0));

        let moved_q: Vec<f64> = query.iter().map(|x| x + shift).collect();
        let moved_c: Vec<f64> = raw.points_flat().iter().map(|x| x + shift).collect();
        let q = normalized_distribution(&moved_q, &moved_c, dim, t).unwrap();
        for (a, b) in p.weights.iter().zip(&q.weights) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
