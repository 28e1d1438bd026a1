mod common;

use std::collections::BTreeSet;

use common::*;
use maprepair::chase::{flat, visible_chase};
use maprepair::homomorphism::find_homomorphisms;
use maprepair::model::{Atom, Instance, Substitution};
use maprepair::scenario::generate;
use proptest::prelude::*;

fn to_map(s: &Substitution) -> Map {
    s.iter().map(|(a, b)| (a.clone(), b.clone())).collect()
}

fn engine_homs(pattern: &[Atom], target: &Instance) -> BTreeSet<Map> {
    find_homomorphisms(pattern, target, &Substitution::new())
        .map(|h| to_map(&h))
        .collect()
}

/// Compares the bag-based flat instance with the reference chase on every
/// generated scenario whose flat instance has at most 30 facts. Returns the
/// number of comparisons and the mismatches.
pub fn flat_oracle_mismatches() -> (usize, Vec<String>) {
    let mut compared = 0;
    let mut bad = Vec::new();
    for c in small_configs().into_iter().chain(property_configs()) {
        let s = generate(&c).unwrap();
        for (name, sigma) in [("tgds", &s.tgds), ("views", &s.views)] {
            let got = flat(&visible_chase(sigma, &s.schema));
            if got.len() > 30 {
                continue;
            }
            compared += 1;
            let want = reference_visible_chase(sigma, &s.schema);
            if !isomorphic(&got, &want) {
                bad.push(format!("seed {} {name}:\n{got}\nvs\n{want}", c.seed));
            }
        }
    }
    (compared, bad)
}

#[test]
fn flat_matches_reference_chase_on_small_scenarios() {
    let (compared, bad) = flat_oracle_mismatches();
    assert!(compared >= 100, "only {compared} scenarios compared");
    assert!(bad.is_empty(), "{} mismatches, first:\n{}", bad.len(), bad[0]);
}

#[test]
fn homomorphisms_match_brute_force_on_scenario_instances() {
    let mut compared = 0;
    for c in small_configs() {
        let s = generate(&c).unwrap();
        let targets = [
            flat(&visible_chase(&s.views, &s.schema)),
            flat(&visible_chase(&s.tgds, &s.schema)),
        ];
        for target in targets.iter().filter(|t| t.len() <= 12) {
            let facts: Vec<Atom> = target.iter().cloned().collect();
            for t in s.tgds.iter().chain(&s.views) {
                compared += 1;
                assert_eq!(
                    engine_homs(t.body(), target),
                    brute_homs(t.body(), &facts, &Map::new()),
                    "seed {} pattern {t}",
                    c.seed
                );
            }
        }
    }
    assert!(compared >= 100, "only {compared} comparisons");
}

fn arb_term(vars: bool) -> impl Strategy<Value = String> {
    if vars {
        (0..4u8).prop_map(|i| format!("v{i}")).boxed()
    } else {
        prop_oneof![
            Just("*".to_string()),
            Just("a".to_string()),
            (0..4u8).prop_map(|i| format!("_n{i}"))
        ]
        .boxed()
    }
}

fn arb_atoms(vars: bool, max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        (
            prop_oneof![Just(("R", 2usize)), Just(("S", 1)), Just(("T", 3))],
            prop::collection::vec(arb_term(vars), 3),
        ),
        1..=max,
    )
    .prop_map(|atoms| {
        atoms
            .into_iter()
            .map(|((r, k), ts)| format!("{r}({})", ts[..k].join(",")))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn homomorphisms_match_brute_force(pattern in arb_atoms(true, 4), facts in arb_atoms(false, 12)) {
        let target = maprepair::model::parse_instance(&(facts.join(". ") + ".")).unwrap();
        let pattern: Vec<Atom> = pattern
            .iter()
            .map(|a| maprepair::model::parse_tgd(&format!("{a} -> Q(z)")).unwrap().body()[0].clone())
            .collect();
        let facts: Vec<Atom> = target.iter().cloned().collect();
        prop_assert_eq!(engine_homs(&pattern, &target), brute_homs(&pattern, &facts, &Map::new()));
    }
}
