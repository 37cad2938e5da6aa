use deepbo_core::etr::{
    checkpoints_cr, cr_decide, msr_decide, q, running_average, survivor_rank_regret, AverageMode, Decision,
    EtrCheckpoint, EtrPolicy,
};
use deepbo_core::tabular::{default_space, generate_synthetic, CurveModel};
use proptest::prelude::*;

fn curves(levels: &[f64], len: usize) -> Vec<Vec<f64>> {
    levels.iter().map(|&v| vec![v; len]).collect()
}

fn refs(c: &[Vec<f64>]) -> Vec<&[f64]> {
    c.iter().map(Vec::as_slice).collect()
}

#[test]
fn checkpoint_and_throughput_values() {
    assert_eq!(checkpoints_cr(15, 0.1).unwrap(), (7, 13));
    assert_eq!(checkpoints_cr(100, 0.1).unwrap(), (50, 90));
    let direct = |b: f64| 1.0 / (0.5 * b + (1.0 - b).powi(3) + (1.0 - b) * b);
    for b in [0.1, 0.25, 0.5] {
        assert!((q(b).unwrap() - direct(b)).abs() < 1e-12);
    }
    assert!((q(0.1).unwrap() - 1.150_747_986_191_024).abs() < 1e-12);
    assert_eq!(q(0.5).unwrap(), 1.6);
    assert!((q(1e-9).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn compound_examples() {
    let levels: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let pop = curves(&levels, 7);
    let r = refs(&pop);
    assert_eq!(cr_decide(0.05, 7, &r, 15, 0.1, AverageMode::Mean).unwrap(), Decision::Terminate);
    assert_eq!(cr_decide(0.1, 7, &r, 15, 0.1, AverageMode::Mean).unwrap(), Decision::Continue);
    assert_eq!(cr_decide(0.05, 7, &[], 15, 0.1, AverageMode::Mean).unwrap(), Decision::Continue);
    // second checkpoint only counts entries that trained past j1
    let mut long = curves(&levels, 13);
    long.extend(curves(&[5.0; 20], 7));
    let r = refs(&long);
    assert_eq!(cr_decide(0.91, 13, &r, 15, 0.1, AverageMode::Mean).unwrap(), Decision::Continue);
    assert_eq!(cr_decide(0.85, 13, &r, 15, 0.1, AverageMode::Mean).unwrap(), Decision::Terminate);
}

#[test]
fn msr_examples() {
    let levels: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let pop = curves(&levels, 5);
    let r = refs(&pop);
    assert_eq!(msr_decide(0.5, 5, &r), Decision::Terminate);
    assert_eq!(msr_decide(0.6, 5, &r), Decision::Continue);
    assert_eq!(msr_decide(0.0, 5, &r[..2]), Decision::Continue);
    let p = EtrPolicy::median_stopping(15, None).unwrap();
    assert_eq!(p.msr_warmup(), 5);
    assert_eq!(p.decide(0.0, 4, &r), Decision::Continue);
    assert_eq!(p.decide(0.0, 5, &r), Decision::Terminate);
}

#[test]
fn literal_average() {
    assert!((running_average(&[0.2, 0.4, 0.6], 2, 3, AverageMode::Literal).unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn custom_checkpoints_validate() {
    let ok = EtrCheckpoint { start: 1, end: 3, eval: 4, threshold: 0.5 };
    assert!(EtrPolicy::custom(vec![ok], 10, AverageMode::Mean).is_ok());
    let bad = EtrCheckpoint { start: 4, end: 3, eval: 4, threshold: 0.5 };
    assert!(EtrPolicy::custom(vec![bad], 10, AverageMode::Mean).is_err());
    let late = EtrCheckpoint { start: 1, end: 3, eval: 11, threshold: 0.5 };
    assert!(EtrPolicy::custom(vec![late], 10, AverageMode::Mean).is_err());
}

#[test]
fn survivor_regret_identities() {
    let t = generate_synthetic(&default_space(), 37, 1, &CurveModel::default()).unwrap();
    let n = t.len();
    let best = (0..n).find(|&id| t.rank(id).unwrap() == 1).unwrap();
    let worst = (0..n).find(|&id| t.rank(id).unwrap() == n).unwrap();
    assert_eq!(survivor_rank_regret(&t, &[best]).unwrap(), 0.0);
    assert_eq!(survivor_rank_regret(&t, &[worst]).unwrap(), (n - 1) as f64 / n as f64);
    let all: Vec<usize> = (0..n).collect();
    assert_eq!(survivor_rank_regret(&t, &all).unwrap(), (n - 1) as f64 / (2 * n) as f64);
    assert!(survivor_rank_regret(&t, &[]).is_err());
}

fn population() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, 15), 0..25)
}

proptest! {
    #[test]
    fn compound_acts_only_at_checkpoints(pop in population(), y in 0.0..1.0f64, epoch in 1usize..=15) {
        let r = refs(&pop);
        let d = cr_decide(y, epoch, &r, 15, 0.1, AverageMode::Mean).unwrap();
        if epoch != 7 && epoch != 13 {
            prop_assert_eq!(d, Decision::Continue);
        }
    }

    #[test]
    fn half_beta_matches_msr_on_odd_populations(pop in population(), y in 0.0..1.0f64) {
        // nearest-rank and midpoint medians coincide for odd sizes; curves stop
        // at j1 so the collapsed second checkpoint has no population
        prop_assume!(pop.len() >= 3 && pop.len() % 2 == 1);
        let cut: Vec<Vec<f64>> = pop.iter().map(|c| c[..7].to_vec()).collect();
        let r = refs(&cut);
        let cr = cr_decide(y, 7, &r, 15, 0.5, AverageMode::Mean).unwrap();
        prop_assert_eq!(cr, msr_decide(y, 7, &r));
    }

    #[test]
    fn larger_beta_terminates_more(pop in population(), y in 0.0..1.0f64, b1 in 0.01..0.5f64, b2 in 0.01..0.5f64) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let r = refs(&pop);
        let a = cr_decide(y, 7, &r, 15, lo, AverageMode::Mean).unwrap();
        let b = cr_decide(y, 7, &r, 15, hi, AverageMode::Mean).unwrap();
        prop_assert!(!(a == Decision::Terminate && b == Decision::Continue));
    }

    #[test]
    fn q_increasing(a in 0.001..0.5f64, b in 0.001..0.5f64) {
        prop_assume!(a < b);
        prop_assert!(q(a).unwrap() < q(b).unwrap());
    }

    #[test]
    fn dominant_config_survives(pop in population(), epoch in 1usize..=15) {
        let r = refs(&pop);
        let top = pop.iter().flatten().copied().fold(0.0, f64::max) + 1e-6;
        prop_assert_eq!(cr_decide(top, epoch, &r, 15, 0.1, AverageMode::Mean).unwrap(), Decision::Continue);
        prop_assert_eq!(msr_decide(top, epoch, &r), Decision::Continue);
    }
}
