use gardner_core::capacity::{
    alpha_c_correlated, alpha_c_uncorrelated, kappa_adj, CorrelationParams,
};
use gardner_core::gaussian::{f_gar, f_gar_derivative};
use gardner_core::margin::{max_margin, PatternMatrix};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = PatternMatrix> {
    (1..=max_rows, 2..=max_cols).prop_flat_map(|(m, n)| {
        prop::collection::vec(-3.0f64..3.0, m * n)
            .prop_map(move |data| PatternMatrix::new(m, n, data).unwrap())
    })
}

fn angular_margin(h: &PatternMatrix) -> f64 {
    let steps = 400_000;
    (0..steps)
        .map(|s| {
            let t = std::f64::consts::TAU * s as f64 / steps as f64;
            (0..h.rows())
                .map(|i| h.row(i)[0] * t.cos() + h.row(i)[1] * t.sin())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weak_duality_and_gap(h in matrix(40, 12)) {
        let c = max_margin(&h, 1e-9, 100_000).unwrap();
        prop_assert!(c.margin_lower <= c.margin_upper + 1e-12);
        prop_assert!(c.gap <= 1e-9);
        let norm: f64 = c.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-9);
        let achieved = h.mul_vec(&c.x).into_iter().fold(f64::INFINITY, f64::min);
        prop_assert!((achieved - c.sphere_margin).abs() < 1e-9);
        prop_assert!(c.lambda.iter().all(|&l| l >= 0.0));
        prop_assert!((c.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scale_covariance(h in matrix(30, 10), scale in 0.1f64..10.0) {
        let a = max_margin(&h, 1e-10, 100_000).unwrap();
        let b = max_margin(&h.scaled(scale), 1e-10 * scale, 100_000).unwrap();
        prop_assert!((b.margin_lower - scale * a.margin_lower).abs() <= 3e-10 * scale);
        prop_assert!((b.margin_upper - scale * a.margin_upper).abs() <= 3e-10 * scale);
    }

    #[test]
    fn more_rows_never_raise_the_margin(h in matrix(40, 10), cut in 1usize..40) {
        let m = cut.min(h.rows());
        let full = max_margin(&h, 1e-10, 100_000).unwrap();
        let part = max_margin(&h.prefix(m).unwrap(), 1e-10, 100_000).unwrap();
        prop_assert!(full.margin_lower <= part.margin_upper + 1e-10);
    }

    #[test]
    fn planar_instances_match_angular_search(h in matrix(8, 2)) {
        let c = max_margin(&h, 1e-10, 100_000).unwrap();
        let brute = angular_margin(&h).max(0.0);
        prop_assert!((brute - c.margin_lower).abs() < 1e-4, "{} vs {}", brute, c.margin_lower);
        prop_assert!((brute - c.margin_upper).abs() < 1e-4);
    }

    #[test]
    fn f_gar_is_increasing_and_convex(k in -6.0f64..6.0) {
        prop_assert!(f_gar_derivative(k) > 0.0);
        let h = 1e-3;
        prop_assert!(f_gar(k + h) - 2.0 * f_gar(k) + f_gar(k - h) > -1e-12);
    }

    #[test]
    fn correlation_can_only_raise_capacity(k in 0.0f64..2.0, m_a in 0.05f64..0.9) {
        let uncorrelated = alpha_c_uncorrelated(k).alpha_c;
        let correlated = alpha_c_correlated(k, CorrelationParams::new(m_a).unwrap()).unwrap().alpha_c;
        prop_assert!(correlated >= uncorrelated * (1.0 - 1e-12));
    }

    #[test]
    fn adjusted_margin_increases_with_kappa(k in -2.0f64..2.0, m_a in 0.1f64..0.9) {
        let p = CorrelationParams::new(m_a).unwrap();
        prop_assert!(kappa_adj(k + 0.05, p).unwrap() > kappa_adj(k, p).unwrap());
    }
}
