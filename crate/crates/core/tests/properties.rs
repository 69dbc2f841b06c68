use hdcp::dependence::{select_m, LagEnergyCurve};
use hdcp::engine::{l_trace, SeparationRule};
use hdcp::inference::{binary_segmentation, classify_errors, Analysis, InferenceConfig};
use hdcp::{compute_gram, DependenceWindow, SeriesMatrix};
use proptest::prelude::*;

fn series_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
    (0usize..=2, 1usize..=4).prop_flat_map(|(m, p)| {
        let n_lo = (3 * m + 4).max(6);
        (n_lo..=24).prop_flat_map(move |n| {
            (proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, p), n), Just(m))
        })
    })
}

fn rel_close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-10 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistic_ignores_common_shift((rows, m) in series_strategy(), shift in -50.0f64..50.0) {
        let w = DependenceWindow::new(m);
        let base = l_trace(&compute_gram(&SeriesMatrix::from_rows(&rows).unwrap()), w).unwrap();
        let moved: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().enumerate().map(|(j, v)| v + shift * (j as f64 + 1.0)).collect()).collect();
        let shifted = l_trace(&compute_gram(&SeriesMatrix::from_rows(&moved).unwrap()), w).unwrap();
        let scale = base.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in base.iter().zip(&shifted) {
            prop_assert!((a - b).abs() <= 1e-10 * scale.max(1.0) * (1.0 + shift * shift));
        }
    }

    #[test]
    fn statistic_mirrors_under_time_reversal((rows, m) in series_strategy()) {
        let w = DependenceWindow::new(m);
        let s = SeriesMatrix::from_rows(&rows).unwrap();
        let fwd = l_trace(&compute_gram(&s), w).unwrap();
        let rev = l_trace(&compute_gram(&s.reversed()), w).unwrap();
        let n = s.n();
        let scale = fwd.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for t in 1..n {
            prop_assert!(rel_close(fwd[t - 1], rev[n - t - 1], scale));
        }
    }

    #[test]
    fn rejection_is_monotone_in_level((rows, m) in series_strategy(), a in 0.001f64..0.5, b in 0.001f64..0.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let an = Analysis::new(&SeriesMatrix::from_rows(&rows).unwrap(), DependenceWindow::new(m), SeparationRule::default()).unwrap();
        let strict = an.test_aggregate(lo).unwrap();
        let loose = an.test_aggregate(hi).unwrap();
        prop_assert!(!strict.reject || loose.reject);
        prop_assert_eq!(strict.zscore.to_bits(), loose.zscore.to_bits());
    }

    #[test]
    fn segmentation_points_are_sorted_and_inside((rows, m) in series_strategy(), alpha in 0.01f64..0.5) {
        let s = SeriesMatrix::from_rows(&rows).unwrap();
        let found = binary_segmentation(&s, DependenceWindow::new(m), &InferenceConfig::with_alpha(alpha)).unwrap();
        prop_assert!(found.points.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(found.points.iter().all(|&t| t >= 1 && t < s.n()));
        prop_assert!(!found.trace.is_empty());
    }

    #[test]
    fn error_counts_partition(est in proptest::collection::btree_set(1usize..60, 0..6),
                              truth in proptest::collection::btree_set(1usize..60, 0..6),
                              tol in 0usize..4) {
        let est: Vec<usize> = est.into_iter().collect();
        let truth: Vec<usize> = truth.into_iter().collect();
        let c = classify_errors(&est, &truth, tol);
        prop_assert_eq!(c.false_positives + c.true_positives, est.len());
        prop_assert_eq!(c.false_negatives + c.true_positives, truth.len());
        let wider = classify_errors(&est, &truth, tol + 1);
        prop_assert!(wider.true_positives >= c.true_positives);
    }

    #[test]
    fn selected_order_never_grows_with_ratio(tail in proptest::collection::vec(-5.0f64..100.0, 1..10),
                                            r1 in 0.001f64..0.99, r2 in 0.001f64..0.99) {
        let mut w_hat = vec![100.0];
        w_hat.extend(tail);
        let curve = LagEnergyCurve { h_max: w_hat.len() - 1, w_hat };
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(select_m(&curve, hi).unwrap().m <= select_m(&curve, lo).unwrap().m);
    }

    #[test]
    fn centered_gram_rows_sum_to_zero((rows, _m) in series_strategy()) {
        let g = compute_gram(&SeriesMatrix::from_rows(&rows).unwrap());
        let c = g.centered();
        let scale = (0..c.dim()).map(|i| c.get(i + 1, i + 1).abs()).fold(1.0, f64::max);
        for i in 1..=c.dim() {
            prop_assert!(c.row_sum(i).abs() <= 1e-10 * scale * c.dim() as f64);
        }
    }
}
