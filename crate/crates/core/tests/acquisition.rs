use deepbo_core::acquisition::{ei, integrated_acq, pi, ucb, AcqKind, HedgeState};
use deepbo_core::surrogate::Prediction;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[test]
fn closed_forms_match_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws: Vec<f64> = (0..1_000_000).map(|_| rng.sample(StandardNormal)).collect();
    for _ in 0..20 {
        let mean = rng.random_range(-1.0..1.0);
        let var = rng.random_range(0.01..1.0);
        let best = rng.random_range(-1.0..1.0);
        let sd: f64 = f64::sqrt(var);
        let (mut imp, mut hits) = (0.0, 0usize);
        for z in &draws {
            let v = mean + sd * z;
            if v > best {
                imp += v - best;
                hits += 1;
            }
        }
        let n = draws.len() as f64;
        assert!((ei(mean, var, best) - imp / n).abs() < 3e-3, "EI at ({mean}, {var}, {best})");
        assert!((pi(mean, var, best) - hits as f64 / n).abs() < 3e-3, "PI at ({mean}, {var}, {best})");
    }
}

#[test]
fn reference_values() {
    assert!((ei(0.0, 1.0, 0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    assert!((pi(1.0, 1.0, 0.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
    let mixed = [Prediction { mean: 0.0, var: 1.0 }, Prediction { mean: 0.0, var: 0.0 }];
    assert!((integrated_acq(AcqKind::Ei, &mixed, 0.0) - 0.199_471_140_200_716_34).abs() < 1e-12);
}

#[test]
fn hedge_draws_follow_probabilities() {
    let h = HedgeState { gains: [1.0, 0.0, -1.0], eta: 1.0 };
    let p = h.probabilities();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut counts = [0usize; 3];
    for _ in 0..60_000 {
        counts[h.select(&mut rng)] += 1;
    }
    for i in 0..3 {
        assert!((counts[i] as f64 / 60_000.0 - p[i]).abs() < 0.01);
    }
}

fn prediction() -> impl Strategy<Value = Prediction> {
    (-3.0..3.0f64, 0.0..4.0f64).prop_map(|(mean, var)| Prediction { mean, var })
}

proptest! {
    #[test]
    fn ranges(mean in -3.0..3.0f64, var in 0.0..4.0f64, best in -3.0..3.0f64) {
        prop_assert!(ei(mean, var, best) >= 0.0);
        let p = pi(mean, var, best);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(ucb(mean, var, 2.0) >= mean);
    }

    #[test]
    fn integration_ignores_order(mut preds in prop::collection::vec(prediction(), 1..8), best in -3.0..3.0f64) {
        for kind in [AcqKind::Ei, AcqKind::Pi, AcqKind::ucb()] {
            let a = integrated_acq(kind, &preds, best);
            preds.reverse();
            let b = integrated_acq(kind, &preds, best);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn hedge_probabilities(g in prop::array::uniform3(-20.0..20.0f64), eta in 0.01..5.0f64, c in -50.0..50.0f64) {
        let h = HedgeState { gains: g, eta };
        let p = h.probabilities();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted = HedgeState { gains: g.map(|v| v + c), eta }.probabilities();
        for (a, b) in p.iter().zip(shifted) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
