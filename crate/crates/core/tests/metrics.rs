use deepbo_core::metrics::{rank_sum_test, theoretical_diversity, TrialEnsemble};
use proptest::prelude::*;

/// Exact two-sided p-value by enumerating all label assignments.
fn exact_u_distribution(n1: usize, n2: usize) -> Vec<f64> {
    // counts[u] for U = #pairs a > b over all C(n1+n2, n1) splits of distinct values
    let n = n1 + n2;
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let mut u = 0usize;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                u += (0..i).filter(|j| mask >> j & 1 == 0).count();
            }
        }
        out.push(u as f64);
    }
    out
}

#[test]
fn u_statistic_null_moments() {
    let us = exact_u_distribution(5, 6);
    let mean = us.iter().sum::<f64>() / us.len() as f64;
    let var = us.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / us.len() as f64;
    assert!((mean - 15.0).abs() < 1e-12);
    assert!((var - 5.0 * 6.0 * 12.0 / 12.0).abs() < 1e-9);
}

#[test]
fn normal_approximation_tracks_exact_tail() {
    let a = [1.0, 2.0, 3.0, 5.0, 8.0];
    let b = [4.0, 6.0, 7.0, 9.0, 10.0, 11.0];
    let r = rank_sum_test(&a, &b).unwrap();
    let us = exact_u_distribution(5, 6);
    let exact = us.iter().filter(|&&u| u <= r.u).count() as f64 / us.len() as f64;
    assert!((r.p_less - exact).abs() < 0.02, "{} vs {exact}", r.p_less);
}

#[test]
fn censored_runs_rank_last() {
    let a = [1.0, 2.0, 3.0];
    let b = [4.0, f64::INFINITY, f64::INFINITY];
    let r = rank_sum_test(&a, &b).unwrap();
    assert_eq!(r.u, 0.0);
    assert!(rank_sum_test(&a, &[f64::NAN]).is_err());
}

proptest! {
    #[test]
    fn success_rate_is_monotone(taus in prop::collection::vec(prop::option::of(0.0..1e5f64), 1..40), t1 in 0.0..1e5f64, t2 in 0.0..1e5f64) {
        let e = TrialEnsemble::new(taus.clone(), 0.9, "f").unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(e.success_rate(lo) <= e.success_rate(hi));
        if let Ok(t) = e.expected_time() {
            let h: Vec<f64> = taus.iter().flatten().map(|v| v / 3600.0).collect();
            let (mn, mx) = h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            prop_assert!(t.mean_hours >= mn - 1e-12 && t.mean_hours <= mx + 1e-12);
        }
    }

    #[test]
    fn diversity_dominates(s in 0.0..=1.0f64, m in 1usize..12) {
        let d = theoretical_diversity(s, m).unwrap();
        prop_assert!(d >= s - 1e-15);
        if m > 1 && s > 1e-9 && s < 1.0 - 1e-9 {
            prop_assert!(d > s);
        }
    }

    #[test]
    fn u_counts_pairs(a in prop::collection::vec(0u8..20, 1..15), b in prop::collection::vec(0u8..20, 1..15)) {
        let fa: Vec<f64> = a.iter().map(|&v| v as f64).collect();
        let fb: Vec<f64> = b.iter().map(|&v| v as f64).collect();
        let direct: f64 = fa.iter().map(|x| fb.iter().map(|y| if x > y { 1.0 } else if x == y { 0.5 } else { 0.0 }).sum::<f64>()).sum();
        let r = rank_sum_test(&fa, &fb).unwrap();
        prop_assert!((r.u - direct).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&r.p_two_sided));
    }
}
