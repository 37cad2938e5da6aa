use std::time::Instant;

use deepbo_core::engine::{
    run_trial, Algorithm, Arm, DuplicateStrategy, EntryStatus, Portfolio, Trial, TrialSettings,
};
use deepbo_core::etr::{AverageMode, EtrPolicy};
use deepbo_core::hpspace::{Configuration, HyperparameterSpace, ParamDef, ParamValue, Scale};
use deepbo_core::surrogate::SurrogateKind;
use deepbo_core::tabular::{default_space, generate_synthetic, CurveModel, LearningCurve, SurrogateTable, TableEntry};
use deepbo_core::xform::hybrid_transform;
use deepbo_core::acquisition::AcqKind;

fn line_table(curves: Vec<Vec<f64>>, secs: f64) -> SurrogateTable {
    let n = curves.len();
    let space = HyperparameterSpace::new(vec![ParamDef::continuous("x", 0.0, 1.0, Scale::Linear).unwrap()]).unwrap();
    let e = curves[0].len();
    let entries = curves
        .into_iter()
        .enumerate()
        .map(|(id, acc)| TableEntry {
            config: Configuration { id, values: vec![ParamValue::Number(id as f64 / n as f64)] },
            curve: LearningCurve::new(acc, vec![secs; e]).unwrap(),
        })
        .collect();
    SurrogateTable::new(space, e, entries).unwrap()
}

fn synthetic(n: usize, late: f64, seed: u64) -> SurrogateTable {
    let model = CurveModel { late_bloomer_fraction: late, ..CurveModel::default() };
    generate_synthetic(&default_space(), n, seed, &model).unwrap()
}

fn rf_ei() -> Algorithm {
    Algorithm::Portfolio(Portfolio::single(Arm { surrogate: SurrogateKind::Rf, acq: AcqKind::Ei }))
}

#[test]
fn first_config_hits_target() {
    let mut curves = vec![vec![0.2, 0.5, 0.8, 0.85]];
    curves.extend((0..10).map(|_| vec![0.1, 0.2, 0.3, 0.3]));
    let table = line_table(curves, 10.0);
    let r = run_trial(&table, TrialSettings::new(rf_ei(), 1, 0.7, 3)).unwrap();
    assert_eq!(r.tau, Some(30.0));
    assert_eq!(r.evals_started, 1);
    assert_eq!(r.best_trace, vec![(10.0, 0.2), (20.0, 0.5), (30.0, 0.8)]);
}

#[test]
fn compound_rule_stops_flat_config() {
    // Ten strong configs first, then a flat one; target unreachable.
    let mut curves: Vec<Vec<f64>> = (0..10).map(|i| vec![0.5 + 0.01 * i as f64 + 0.001; 10]).collect();
    curves.push(vec![0.01; 10]);
    let table = line_table(curves, 5.0);
    let mut s = TrialSettings::new(rf_ei(), 1, 0.99, 0);
    s.etr = EtrPolicy::compound(10, 0.1, AverageMode::Mean).unwrap();
    let mut trial = Trial::new(&table, s).unwrap();
    let r = trial.run().unwrap();
    assert_eq!(r.tau, None);
    assert!(r.evals_terminated >= 1);
    let flat = trial.history().get(10).unwrap();
    assert_eq!(flat.status, EntryStatus::Terminated);
    assert_eq!(flat.curve.len(), 5);
}

#[test]
fn deterministic_and_conserving() {
    let table = synthetic(120, 0.2, 5);
    let target = table.target_accuracy(10).unwrap();
    for dup in [DuplicateStrategy::Naive, DuplicateStrategy::NextCandidate, DuplicateStrategy::InProgress] {
        let mut s = TrialSettings::new(Algorithm::Portfolio(Portfolio::default_six(2.0)), 4, target, 11);
        s.duplicates = dup;
        s.etr = EtrPolicy::compound(15, 0.1, AverageMode::Mean).unwrap();
        let t0 = Instant::now();
        let a = run_trial(&table, s.clone()).unwrap();
        eprintln!("{dup:?}: {:?} in {:?}", a.tau, t0.elapsed());
        let b = run_trial(&table, s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evals_started, a.evals_completed + a.evals_terminated + a.in_flight_at_end);
        assert!(a.best_trace.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        if let Some(tau) = a.tau {
            assert_eq!(a.best_trace.last().unwrap().0, tau);
            assert!(a.best_accuracy() > target);
        }
    }
}

#[test]
fn rotation_uses_each_arm_once_per_window() {
    let table = synthetic(60, 0.0, 2);
    let s = TrialSettings::new(Algorithm::Portfolio(Portfolio::default_six(2.0)), 1, 0.999, 4);
    let mut trial = Trial::new(&table, s).unwrap();
    trial.run().unwrap();
    let arms: Vec<usize> = trial.selections().iter().map(|r| r.arm.unwrap()).collect();
    assert!(arms.len() >= 12);
    for w in arms.windows(6) {
        let mut sorted = w.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, [0, 1, 2, 3, 4, 5]);
    }
}

#[test]
fn completed_entries_self_correct() {
    let table = synthetic(80, 0.3, 9);
    let mut s = TrialSettings::new(Algorithm::Portfolio(Portfolio::default_six(2.0)), 6, 0.999, 1);
    s.etr = EtrPolicy::compound(15, 0.1, AverageMode::Mean).unwrap();
    s.time_budget = Some(20_000.0);
    let mut trial = Trial::new(&table, s).unwrap();
    trial.run().unwrap();
    for e in trial.history().entries().iter().filter(|e| e.status == EntryStatus::Complete) {
        let full = table.curve(e.config_id).unwrap().terminal_best();
        assert_eq!(e.transformed_best, hybrid_transform(full, 0.3).unwrap());
    }
}

#[test]
fn in_progress_never_runs_duplicates() {
    let table = synthetic(40, 0.0, 3);
    let mut s = TrialSettings::new(Algorithm::Portfolio(Portfolio::default_six(2.0)), 6, 0.999, 8);
    s.duplicates = DuplicateStrategy::InProgress;
    let mut trial = Trial::new(&table, s).unwrap();
    let r = trial.run().unwrap();
    assert_eq!(r.collisions, 0);
    let mut seen = std::collections::BTreeSet::new();
    for rec in trial.selections() {
        assert!(seen.insert(rec.config_id), "config {} evaluated twice", rec.config_id);
    }
}

#[test]
fn random_and_hedge_baselines_run() {
    let table = synthetic(60, 0.0, 4);
    let target = table.target_accuracy(10).unwrap();
    for alg in [Algorithm::Random, Algorithm::gp_hedge()] {
        let s = TrialSettings::new(alg.clone(), 2, target, 5);
        let r = run_trial(&table, s.clone()).unwrap();
        assert!(r.tau.is_some(), "{alg:?}");
        assert_eq!(r, run_trial(&table, s).unwrap());
    }
}
