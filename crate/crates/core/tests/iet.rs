mod common;

use nibbled::iet::{EpsilonOptions, Iet};
use proptest::prelude::*;

fn opts() -> EpsilonOptions {
    EpsilonOptions::default()
}

#[test]
fn golden_rotation_is_of_recurrence_type() {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let t = Iet::rotation(1.0 - g, g).unwrap();
    let r = t.recurrence_diagnostic(10_000, 5_000, opts());
    assert!(!r.connection_found);
    assert!(r.min_tail >= 0.2, "{r:?}");
}

#[test]
fn near_rational_rotation_has_small_tail() {
    // within 1e−9 of 1/7: ε_n collapses long before any exact connection
    let a = 1.0 / 7.0 + 1e-9;
    let t = Iet::rotation(1.0 - a, a).unwrap();
    let r = t.recurrence_diagnostic(10_000, 5_000, opts());
    assert!(!r.connection_found);
    assert!(r.min_tail < 1e-3, "{r:?}");
}

#[test]
fn rational_rotation_connects() {
    let t = Iet::rotation(1.0 / 3.0, 2.0 / 3.0).unwrap();
    let r = t.recurrence_diagnostic(10, 5, opts());
    assert!(r.connection_n.is_some_and(|n| n <= 3));
    assert!(t.has_connection(3, 1e-12).is_some());
}

#[test]
fn endpoint_option_only_adds_points() {
    let t = Iet::new(vec![3, 1, 2], vec![0.3, 0.5, 0.2]).unwrap();
    let a = t.epsilon_sequence(50, opts());
    let b = t.epsilon_sequence(50, EpsilonOptions { include_endpoints: true });
    assert!(a.iter().zip(&b).all(|(x, y)| y <= x));
}

fn iet_strategy() -> impl Strategy<Value = Iet> {
    (2usize..7)
        .prop_flat_map(|d| (Just((1..=d).collect::<Vec<usize>>()).prop_shuffle(), prop::collection::vec(0.05f64..1.0, d)))
        .prop_map(|(perm, lengths)| Iet::new(perm, lengths).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn epsilon_matches_sorting_oracle(t in iet_strategy(), n in 0usize..120) {
        prop_assert_eq!(t.epsilon_n(n, opts()), common::epsilon_by_sorting(&t, n));
    }

    #[test]
    fn epsilon_is_non_increasing(t in iet_strategy()) {
        let e = t.epsilon_sequence(300, opts());
        prop_assert!(e.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn epsilon_scales_with_lengths(t in iet_strategy(), c in 0.1f64..10.0) {
        let a = t.epsilon_sequence(150, opts());
        let b = t.scaled(c).epsilon_sequence(150, opts());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((c * x - y).abs() <= 1e-9 * c * t.total());
        }
    }

    #[test]
    fn image_intervals_tile(t in iet_strategy()) {
        let mut im = t.image_intervals();
        for (j, &(lo, hi)) in im.iter().enumerate() {
            prop_assert!(((hi - lo) - t.lengths[j]).abs() <= 1e-12);
        }
        im.sort_by(|a, b| a.0.total_cmp(&b.0));
        prop_assert_eq!(im[0].0, 0.0);
        prop_assert!((im.last().unwrap().1 - t.total()).abs() <= 1e-12);
        prop_assert!(im.windows(2).all(|w| (w[0].1 - w[1].0).abs() <= 1e-12));
    }

    #[test]
    fn apply_translates_pieces(t in iet_strategy()) {
        // a fine grid keeps its spacing inside each image interval
        let n = 997;
        let h = t.total() / n as f64;
        let mut pts: Vec<(f64, f64)> = (0..n).map(|i| {
            let x = (i as f64 + 0.5) * h;
            (t.apply(x).unwrap(), x)
        }).collect();
        prop_assert!(pts.iter().all(|p| (0.0..t.total()).contains(&p.0)));
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let breaks = pts.windows(2).filter(|w| ((w[1].0 - w[0].0) - h).abs() > 1e-9).count();
        prop_assert!(breaks < t.d());
    }
}
