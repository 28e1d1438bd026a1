mod common;

use common::*;
use maprepair::preference::{
    evaluate, features, knn_train, p_max, ComparisonLog, ConfusionMatrix, FeatureVector, Measurement, Prefer,
};
use maprepair::repair::RepairConfig;
use maprepair::scenario::{generate, Scenario, ScenarioConfig};
use maprepair::PreferenceFunction as Preference;

pub fn learning_scenarios(offset: u64, n: u64) -> Vec<Scenario> {
    (0..n)
        .map(|i| {
            generate(&ScenarioConfig {
                n_dep: 50,
                n_atoms: 3,
                n_vars: 6,
                n_views: 40,
                n_relations: Some(30),
                seed: offset + i,
                ..ScenarioConfig::default()
            })
            .unwrap()
        })
        .collect()
}

/// Trains 1-NN on comparisons of `golden` over one set of scenarios and
/// evaluates it on the comparisons over a disjoint set.
pub fn learn_and_evaluate(golden: &Preference) -> (usize, ConfusionMatrix, f64) {
    let config = RepairConfig::default();
    let train = ComparisonLog::record(&learning_scenarios(10_000, 600), golden, None, config).measurements();
    let model = Preference::Knn(knn_train(train.clone(), 1).unwrap());
    let eval = ComparisonLog::record(&learning_scenarios(20_000, 300), golden, None, config);
    let (cm, mcc) = evaluate(golden, &model, &eval.pairs());
    (train.len(), cm, mcc)
}

#[test]
fn join_choice_measurements_from_the_pipeline() {
    let schema = maprepair::model::Schema::from_relations([("R1", 3), ("S1", 3)]).unwrap();
    let s = Scenario {
        schema,
        views: Vec::new(),
        policy_instance: Some(join_choice_policy()),
        tgds: tgds(&["R1(x,y,z), S1(y,z,z) -> T1(x,z)"]),
        config: None,
    };
    let got = maprepair::preference::generate_training_set(&[s], &Preference::PMax, 100, RepairConfig::default());
    let rows: Vec<(i64, i64, u8)> = got
        .iter()
        .map(|m| (m.features.delta_fv, m.features.delta_j, m.choice.label()))
        .collect();
    assert_eq!(rows, vec![(1, -1, 2), (1, 0, 2), (0, 1, 2)]);
}

#[test]
fn empty_scenario_list_gives_no_measurements() {
    let got = maprepair::preference::generate_training_set(&[], &Preference::PMax, 10, RepairConfig::default());
    assert!(got.is_empty());
}

#[test]
fn one_nn_has_zero_training_error() {
    let data: Vec<Measurement> = learning_scenarios(30_000, 10)
        .iter()
        .flat_map(|s| {
            ComparisonLog::record(
                std::slice::from_ref(s),
                &Preference::PMax,
                None,
                RepairConfig::default(),
            )
            .measurements()
        })
        .collect();
    assert!(!data.is_empty());
    let model = knn_train::<f64>(data.clone(), 1).unwrap();
    // Identical feature vectors always carry the golden label, which is a
    // function of the features.
    for m in &data {
        assert_eq!(model.predict(m.features), m.choice);
    }
}

#[test]
fn learned_pmax_reaches_mcc_one() {
    let (n, cm, mcc) = learn_and_evaluate(&Preference::PMax);
    eprintln!("p_max: {n} training rows, {cm:?}, mcc {mcc}");
    assert!(n >= 1000, "{n}");
    assert_eq!(mcc, 1.0, "{cm:?}");
}

#[test]
fn learned_pavg_reaches_mcc_090() {
    let (n, cm, mcc) = learn_and_evaluate(&Preference::PAvg);
    eprintln!("p_avg: {n} training rows, {cm:?}, mcc {mcc}");
    assert!(n >= 1000, "{n}");
    assert!(mcc >= 0.90, "{cm:?} mcc {mcc}");
}

#[test]
fn features_are_antisymmetric_on_pipeline_pairs() {
    let log = ComparisonLog::record(
        &learning_scenarios(40_000, 5),
        &Preference::PMax,
        None,
        RepairConfig::default(),
    );
    for (a, b, _) in &log.entries {
        let f = features(a, b);
        assert_eq!(features(b, a), FeatureVector::new(-f.delta_fv, -f.delta_j));
        if f != FeatureVector::new(0, 0) {
            let ab = if p_max(a, b) == maprepair::preference::Choice::First {
                a
            } else {
                b
            };
            let ba = if p_max(b, a) == maprepair::preference::Choice::First {
                b
            } else {
                a
            };
            assert_eq!(ab, ba);
        }
        let _ = Preference::PMax.choose(a, b);
    }
}
