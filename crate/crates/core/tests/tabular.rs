use deepbo_core::hpspace::{Configuration, HyperparameterSpace, ParamDef, ParamValue, Scale};
use deepbo_core::tabular::{default_space, generate_synthetic, CurveModel, LearningCurve, SurrogateTable, TableEntry};
use proptest::prelude::*;

fn table_from_bests(bests: &[f64]) -> SurrogateTable {
    let space = HyperparameterSpace::new(vec![ParamDef::continuous("x", 0.0, 1.0, Scale::Linear).unwrap()]).unwrap();
    let entries = bests
        .iter()
        .enumerate()
        .map(|(id, &b)| TableEntry {
            config: Configuration { id, values: vec![ParamValue::Number(0.5)] },
            curve: LearningCurve::new(vec![b / 2.0, b, b * 0.9], vec![1.0; 3]).unwrap(),
        })
        .collect();
    SurrogateTable::new(space, 3, entries).unwrap()
}

#[test]
fn targets_and_regret() {
    let mut bests = vec![0.9, 0.8, 0.7];
    bests.extend((0..8).map(|i| 0.1 + 0.01 * i as f64));
    let t = table_from_bests(&bests);
    assert_eq!(t.target_accuracy(1).unwrap(), 0.9);
    assert_eq!(t.target_accuracy(3).unwrap(), 0.7);
    assert_eq!(t.rank_regret(0).unwrap(), 0.0);
    assert_eq!(t.rank_regret(3).unwrap(), 10.0 / 11.0);
    assert_eq!(t.best_until(1, 1).unwrap(), 0.4);
    assert_eq!(t.best_until(1, 3).unwrap(), 0.8);
    assert!(t.best_until(1, 4).is_err());
}

#[test]
fn large_table_regret_arithmetic() {
    assert_eq!((201.0 - 1.0) / 20_000.0, 0.01);
}

#[test]
fn ties_rank_by_id() {
    let t = table_from_bests(&[0.5; 11]);
    let ranks: Vec<usize> = (0..11).map(|id| t.rank(id).unwrap()).collect();
    assert_eq!(ranks, (1..=11).collect::<Vec<_>>());
}

#[test]
fn generator_contract() {
    let space = default_space();
    let m = CurveModel::default();
    assert_eq!(generate_synthetic(&space, 100, 7, &m).unwrap(), generate_synthetic(&space, 100, 7, &m).unwrap());
    assert!(generate_synthetic(&space, 10, 7, &m).is_err());
    let late = CurveModel { late_bloomer_fraction: 1.0, ..m.clone() };
    let t = generate_synthetic(&space, 50, 7, &late).unwrap();
    assert!(t.entries().iter().all(|e| e.curve.accuracy()[0] <= late.late_floor + 1e-12));
    let flat = CurveModel { lambda_range: [0.0, 0.0], noise_std: 0.0, ..m };
    let t = generate_synthetic(&space, 20, 7, &flat).unwrap();
    for e in t.entries() {
        let a = e.curve.accuracy();
        assert!(a.iter().all(|v| *v == a[0]));
    }
    assert!((t.max_terminal_best() - 0.95).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn table_orderings(seed in 0u64..10_000, n in 11usize..80) {
        let t = generate_synthetic(&default_space(), n, seed, &CurveModel::default()).unwrap();
        prop_assert_eq!(t.target_accuracy(1).unwrap(), t.max_terminal_best());
        for k in 1..n {
            prop_assert!(t.target_accuracy(k).unwrap() >= t.target_accuracy(k + 1).unwrap());
        }
        let mut regrets: Vec<f64> = (0..n).map(|id| t.rank_regret(id).unwrap()).collect();
        regrets.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (0..n).map(|r| r as f64 / n as f64).collect();
        prop_assert_eq!(regrets, expected);
        for e in t.entries() {
            prop_assert_eq!(e.curve.len(), 15);
            prop_assert!(e.curve.accuracy().iter().all(|a| (0.0..1.0).contains(a)));
            prop_assert!(e.curve.epoch_seconds().iter().all(|s| *s > 0.0));
        }
    }
}
