use deepbo_core::hpspace::{HyperparameterSpace, ParamDef, ParamValue, Scale};
use deepbo_core::tabular::default_space;
use proptest::prelude::*;

fn lr() -> ParamDef {
    ParamDef::continuous("lr", 1e-4, 0.4, Scale::Log).unwrap()
}

#[test]
fn log_decode_examples() {
    let space = HyperparameterSpace::new(vec![lr()]).unwrap();
    assert_eq!(space.decode(&[0.0]).unwrap(), vec![ParamValue::Number(1e-4)]);
    assert_eq!(space.decode(&[1.0]).unwrap(), vec![ParamValue::Number(0.4)]);
    let mid = space.decode(&[0.5]).unwrap()[0].as_number().unwrap();
    assert!((mid - (1e-4f64 * 0.4).sqrt()).abs() < 1e-15);
    assert!((mid - 6.3246e-3).abs() < 1e-7);
    let u = space.encode(&[ParamValue::Number(6.3246e-3)]).unwrap();
    assert!((u.0[0] - 0.5).abs() < 1e-6);
}

#[test]
fn encode_examples() {
    let space = HyperparameterSpace::new(vec![
        ParamDef::continuous("x", 0.0, 10.0, Scale::Linear).unwrap(),
        ParamDef::categorical("c", ["A", "B", "C"]).unwrap(),
    ])
    .unwrap();
    let f = space.encode(&[ParamValue::Number(2.5), ParamValue::Category("B".into())]).unwrap();
    assert_eq!(f.0, [0.25, 0.0, 1.0, 0.0]);
    assert_eq!(space.feature_len(), 4);
    assert!(space.encode(&[ParamValue::Number(11.0), ParamValue::Category("B".into())]).is_err());
    assert!(space.encode(&[ParamValue::Number(1.0), ParamValue::Category("D".into())]).is_err());
}

#[test]
fn discrete_buckets_are_equal_mass() {
    let space = HyperparameterSpace::new(vec![ParamDef::discrete("k", 1, 4).unwrap()]).unwrap();
    let got: Vec<f64> =
        [0.0, 0.24, 0.25, 0.74, 0.75, 1.0].iter().map(|&u| space.decode(&[u]).unwrap()[0].as_number().unwrap()).collect();
    assert_eq!(got, [1.0, 1.0, 2.0, 3.0, 4.0, 4.0]);
}

#[test]
fn invalid_definitions() {
    assert!(ParamDef::continuous("x", 1.0, 1.0, Scale::Linear).is_err());
    assert!(ParamDef::continuous("x", 0.0, 1.0, Scale::Log).is_err());
    assert!(ParamDef::categorical("c", ["A", "A"]).is_err());
    assert!(ParamDef::categorical("c", Vec::<String>::new()).is_err());
    assert!(HyperparameterSpace::new(vec![lr(), lr()]).is_err());
    assert!(HyperparameterSpace::new(vec![]).is_err());
}

#[test]
fn json_schema_roundtrip() {
    let space = default_space();
    let json = serde_json::to_string(&space).unwrap();
    let back: HyperparameterSpace = serde_json::from_str(&json).unwrap();
    assert_eq!(back, space);
    let parsed: HyperparameterSpace = serde_json::from_str(
        r#"[{"name":"lr","kind":"continuous","range":[0.0001,0.4],"scale":"log"},
            {"name":"opt","kind":"categorical","values":["sgd","adam"]}]"#,
    )
    .unwrap();
    assert_eq!(parsed.feature_len(), 3);
}

proptest! {
    #[test]
    fn roundtrip_and_feature_invariants(u in prop::collection::vec(0.0..=1.0f64, 6)) {
        let space = default_space();
        let values = space.decode(&u).unwrap();
        let f = space.encode(&values).unwrap();
        prop_assert_eq!(f.0.len(), space.feature_len());
        prop_assert!(f.0.iter().all(|v| (0.0..=1.0).contains(v)));
        let back = space.decode(&space.to_unit(&values).unwrap()).unwrap();
        for (a, b) in values.iter().zip(&back) {
            match (a, b) {
                (ParamValue::Number(x), ParamValue::Number(y)) => {
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "{} vs {}", x, y)
                }
                _ => prop_assert_eq!(a, b),
            }
        }
        // one-hot block of the trailing categorical sums to exactly 1
        let card = 4;
        let block = &f.0[f.0.len() - card..];
        prop_assert_eq!(block.iter().sum::<f64>(), 1.0);
    }
}
