use proptest::prelude::*;

use surface_afem::adaptivity::{dorfler_mark, ExactSum};

fn mass(eta: &[f64], set: &[usize]) -> f64 {
    set.iter()
        .map(|&i| eta[i] * eta[i])
        .collect::<ExactSum>()
        .value()
}

fn total(eta: &[f64]) -> f64 {
    eta.iter().map(|e| e * e).collect::<ExactSum>().value()
}

proptest! {
    #[test]
    fn marked_mass_reaches_the_bulk(
        eta in prop::collection::vec(0.0f64..10.0, 0..40),
        theta in 0.01f64..=1.0,
    ) {
        let marked = dorfler_mark(&eta, theta);
        if total(&eta) > 0.0 {
            prop_assert!(mass(&eta, &marked) >= theta * theta * total(&eta));
        } else {
            prop_assert!(marked.is_empty());
        }
    }

    #[test]
    fn marked_set_is_a_largest_prefix(
        eta in prop::collection::vec(0.0f64..10.0, 1..40),
        theta in 0.01f64..=1.0,
    ) {
        let marked = dorfler_mark(&eta, theta);
        let smallest_marked = marked.iter().map(|&i| eta[i]).fold(f64::INFINITY, f64::min);
        for i in (0..eta.len()).filter(|i| !marked.contains(i)) {
            prop_assert!(eta[i] <= smallest_marked);
        }
        // Dropping the last marked element loses the bulk property.
        if let Some((_, head)) = marked.split_last() {
            prop_assert!(mass(&eta, head) < theta * theta * total(&eta));
        }
    }

    #[test]
    fn larger_theta_marks_at_least_as_many(
        eta in prop::collection::vec(0.0f64..10.0, 1..40),
        a in 0.01f64..=1.0,
        b in 0.01f64..=1.0,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(dorfler_mark(&eta, lo).len() <= dorfler_mark(&eta, hi).len());
    }

    #[test]
    fn scaling_does_not_change_the_set(
        eta in prop::collection::vec(0.0f64..10.0, 1..40),
        theta in 0.01f64..=1.0,
        k in 0i32..8,
    ) {
        let scaled: Vec<f64> = eta.iter().map(|e| e * f64::powi(2.0, k)).collect();
        prop_assert_eq!(dorfler_mark(&eta, theta), dorfler_mark(&scaled, theta));
    }

    #[test]
    fn exact_sums_ignore_order(
        mut xs in prop::collection::vec(-1e12f64..1e12, 0..60),
        seed in any::<u64>(),
    ) {
        let forward = xs.iter().copied().collect::<ExactSum>().value();
        let mut s = seed;
        for i in (1..xs.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            xs.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(forward, xs.iter().copied().collect::<ExactSum>().value());
    }
}
