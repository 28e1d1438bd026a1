mod common;

use common::*;
use maprepair::chase::{chase, derived_egds, flat, visible_chase, BagOrigin, Recompute, VisibleChase};
use maprepair::model::{critical_instance, parse_instance, Instance, Symbol};

#[test]
fn views_flat_instance_matches_listing() {
    let f = visible_chase(&running_views(), &running_schema());
    assert!(f.egds.is_empty());
    let got = flat(&f);
    assert!(isomorphic(&got, &expected_i1()), "{got}");
}

#[test]
fn tgds_forest_structure() {
    let sigma = sigma_st();
    let f = visible_chase(&sigma, &running_schema());
    assert_eq!(f.bags.len(), 5, "{}", f.to_dot());
    let origins: Vec<String> = f
        .bags
        .iter()
        .map(|b| match b.origin {
            BagOrigin::Inverse(t) => format!("inv {}", t.0),
            BagOrigin::Egd(e) => format!("egd {} {:?}", f.egds[e].origin.0, f.egds[e].equated),
        })
        .collect();
    assert_eq!(origins, vec!["inv 0", "inv 1", "inv 2", "egd 0 [e]", "egd 1 [c]"]);
    // The e-egd fires on the county bag, where e is still a null, and vice versa.
    assert_eq!(f.bags[3].predecessors, vec![f.bags[1].id]);
    assert_eq!(f.bags[4].predecessors, vec![f.bags[0].id]);
    assert_eq!(f.bags[3].depth, 2);
    let got = flat(&f);
    assert!(isomorphic(&got, &mapping_chase()), "{got}");
    assert!(isomorphic(&core(&got), &core(&five_fact_mapping_chase())));
}

#[test]
fn derived_egds_of_running_example() {
    let sigma = sigma_st();
    let f = visible_chase(&sigma, &running_schema());
    let i1: Instance = f
        .bags
        .iter()
        .filter(|b| b.depth == 1)
        .flat_map(|b| b.facts.clone())
        .collect();
    let egds = derived_egds(&sigma, &i1);
    assert_eq!(egds.len(), 2);
    assert_eq!(egds[0].equated, vec![Symbol::new("e")]);
    assert_eq!(egds[1].equated, vec![Symbol::new("c")]);
    let views = running_views();
    assert!(derived_egds(&views, &expected_i1()).is_empty());
}

#[test]
fn standard_chase_of_critical_instance() {
    let crt = critical_instance(&running_schema());
    let out = chase(&crt, &sigma_st()).minus(&crt);
    assert_eq!(out, parse_instance("EthDis(*,*). CountyDis(*,*). SO(*).").unwrap());
}

#[test]
fn matches_reference_chase() {
    for sigma in [sigma_st(), running_views(), tgds(&[MU_E_PRIME, MU_C])] {
        let got = flat(&visible_chase(&sigma, &running_schema()));
        let want = reference_visible_chase(&sigma, &running_schema());
        assert!(isomorphic(&got, &want), "{got} vs {want}");
    }
}

#[test]
fn incremental_reuse_gives_isomorphic_forest() {
    let mut inc = VisibleChase::new(Recompute::Incremental);
    let _ = inc.run(&sigma_st(), &running_schema());
    let again = inc.run(&sigma_st(), &running_schema());
    assert_eq!(again.stats.reused_bags, 3);
    let full = visible_chase(&sigma_st(), &running_schema());
    assert!(isomorphic(&flat(&again), &flat(&full)));
}
