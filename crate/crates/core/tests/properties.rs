use opnorm_core::diagnostics::{empirical_survival, moment_ratio_profile};
use opnorm_core::kv::fmt_f64;
use opnorm_core::stats::wilson_interval;
use opnorm_core::{build_net, derive_trial_seed, opnorm, opnorm_closed, opnorm_exact, Matrix, NormKind};
use proptest::prelude::*;

const KINDS: [NormKind; 3] = [NormKind::Spectral, NormKind::One, NormKind::Inf];

fn matrix(rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Matrix> {
    (rows, cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0..10.0f64, r * c).prop_map(move |data| Matrix::new(r, c, data).unwrap())
    })
}

fn product(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.n_rows(), b.n_cols(), |i, j| {
        (0..a.n_cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
    })
}

fn square_pair() -> impl Strategy<Value = (Matrix, Matrix)> {
    (1usize..=8).prop_flat_map(|n| {
        let side = prop::collection::vec(-10.0..10.0f64, n * n).prop_map(move |d| Matrix::new(n, n, d).unwrap());
        (side.clone(), side)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_submultiplicative((a, b) in square_pair()) {
        let ab = product(&a, &b);
        for kind in KINDS {
            let lhs = opnorm(&ab, kind).unwrap();
            let rhs = opnorm(&a, kind).unwrap() * opnorm(&b, kind).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12, "{kind:?}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn norms_scale_with_absolute_value(m in matrix(1..=8, 1..=8), c in prop::sample::select(vec![-3.0, 0.5, 7.0])) {
        for kind in KINDS {
            let base = opnorm(&m, kind).unwrap();
            let scaled = opnorm(&m.scaled(c), kind).unwrap();
            prop_assert!((scaled - c.abs() * base).abs() <= 1e-10 * (1.0 + c.abs() * base));
        }
    }

    #[test]
    fn transpose_swaps_one_and_inf(m in matrix(1..=8, 1..=8)) {
        let t = m.transpose();
        prop_assert_eq!(opnorm_closed(&t, NormKind::One).unwrap(), opnorm_closed(&m, NormKind::Inf).unwrap());
        prop_assert_eq!(opnorm_closed(&t, NormKind::Inf).unwrap(), opnorm_closed(&m, NormKind::One).unwrap());
        let (s, st) = (opnorm_exact(&m).unwrap(), opnorm_exact(&t).unwrap());
        prop_assert!((s - st).abs() <= 1e-12 * (1.0 + s));
    }

    #[test]
    fn spectral_norm_sits_between_entry_and_frobenius_bounds(m in matrix(1..=8, 1..=8)) {
        let s = opnorm_exact(&m).unwrap();
        let slack = 1e-10 * (1.0 + s);
        prop_assert!(m.max_abs() <= s + slack);
        prop_assert!(s <= m.frobenius_norm() + slack);
        let k = m.max_abs();
        prop_assert!(s <= k * (m.n_rows() * m.n_cols()) as f64 + slack);
        let one = opnorm_closed(&m, NormKind::One).unwrap();
        let inf = opnorm_closed(&m, NormKind::Inf).unwrap();
        prop_assert!(s <= (one * inf).sqrt() + slack);
    }

    #[test]
    fn moment_ratios_ignore_signs(seed in any::<u64>()) {
        let xs = opnorm_core::ScalarDist::UniformSym { half_width: 1.0 }.draw(10_000, seed).unwrap();
        let flipped: Vec<f64> = xs.iter().enumerate().map(|(i, x)| if i % 3 == 0 { -x } else { *x }).collect();
        let a = moment_ratio_profile(&xs, 6).unwrap();
        let b = moment_ratio_profile(&flipped, 6).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn trial_seeds_are_distinct(master in any::<u64>(), i in any::<u64>(), j in any::<u64>()) {
        prop_assume!(i != j);
        prop_assert_ne!(derive_trial_seed(master, i), derive_trial_seed(master, j));
    }

    #[test]
    fn float_text_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let back: f64 = fmt_f64(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn wilson_interval_brackets_the_rate(trials in 1u64..100_000, frac in 0.0..=1.0f64) {
        let hits = ((trials as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(hits, trials);
        let p = hits as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn survival_is_non_increasing(xs in prop::collection::vec(-50.0..50.0f64, 1..200), mut ts in prop::collection::vec(0.0..60.0f64, 1..30)) {
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let s = empirical_survival(&xs, &ts).unwrap();
        prop_assert!(s.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn nets_are_separated_unit_points(dim in 2usize..=4, eps in 0.3..1.0f64, seed in any::<u64>()) {
        let net = build_net(dim, eps, seed, 500).unwrap();
        prop_assert!(!net.is_empty());
        prop_assert!(net.min_separation() >= eps - 1e-12);
        for p in net.points() {
            let len: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((len - 1.0).abs() < 1e-12);
        }
    }
}
