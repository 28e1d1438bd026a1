//! Fixtures and brute-force oracles shared by the integration tests.
//!
//! The oracles only use the model types; they never call the chase or the
//! homomorphism engine of the crate.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use maprepair::model::{
    parse_dependencies, parse_instance, parse_schema, parse_tgd, Atom, Instance, Schema, Term, Tgd,
};
use maprepair::scenario::ScenarioConfig;

pub fn running_schema() -> Schema {
    parse_schema("P/4\nHN/2\nHS/2\nO/3\nS/4\n").unwrap()
}

pub fn running_views() -> Vec<Tgd> {
    parse_dependencies(
        "P(i,n,e,c), HN(i,d) -> V1(e,d).\n\
         P(i,n,e,c), HS(i,d) -> V2(c,d).\n\
         O(i,t,p) -> V3(t,p).\n\
         S(i,n,e,c) -> V4(e).\n",
        Some(&running_schema()),
        None,
    )
    .unwrap()
}

pub const MU_E: &str = "P(i,n,e,c), HN(i,d) -> EthDis(e,d)";
pub const MU_C: &str = "P(i,n,e,c), HN(i,d) -> CountyDis(c,d)";
pub const MU_S: &str = "S(i,n,e,c), O(i,t,p) -> SO(e)";
pub const MU_E_PRIME: &str = "P(i,n,e,c), HN(i,d) -> EthDis(d)";

/// Parses tgd texts with ids in list order.
pub fn tgds(texts: &[&str]) -> Vec<Tgd> {
    let joined: String = texts.iter().map(|t| format!("{t}.\n")).collect();
    parse_dependencies(&joined, Some(&running_schema()), None)
        .or_else(|_| parse_dependencies(&joined, None, None))
        .unwrap()
}

pub fn sigma_st() -> Vec<Tgd> {
    tgds(&[MU_E, MU_C, MU_S])
}

/// The visible instance of the running example views.
pub fn expected_i1() -> Instance {
    parse_instance("P(_ni,_nn,*,_nc). HN(_ni,*). P(_mi,_mn,_ne,*). HS(_mi,*). O(_oi,*,*). S(_si,_sn,*,_sc).").unwrap()
}

/// The final instance of the tgds without the second P fact (five facts).
pub fn five_fact_mapping_chase() -> Instance {
    parse_instance("P(_ni,_nn,*,*). HN(_ni,*). HN(_mi,*). S(_si,_sn,*,_sc). O(_si,_st,_sp).").unwrap()
}

/// The final instance including the P fact produced by the second egd bag.
pub fn mapping_chase() -> Instance {
    parse_instance("P(_ni,_nn,*,*). HN(_ni,*). P(_mi,_mn,*,*). HN(_mi,*). S(_si,_sn,*,_sc). O(_si,_st,_sp).").unwrap()
}

/// Visible instance of the running example views with the second view
/// reading HN in place of HS.
pub fn hn_variant_policy() -> Instance {
    parse_instance("P(_ni,_nn,*,_nc). HN(_ni,*). P(_mi,_mn,_ne,*). HN(_mi,*). O(_oi,*,*). S(_si,_sn,*,_sc).").unwrap()
}

pub fn join_choice_policy() -> Instance {
    parse_instance("R1(*,_n1,_n2). S1(_n1,_n2,_n2). S1(_n1,_n3,*). S1(_n1,*,*).").unwrap()
}

pub fn self_join_policy() -> Instance {
    parse_instance("R1(_n1,_n1,*). R1(*,*,_n2). S1(*).").unwrap()
}

pub fn tgd(text: &str) -> Tgd {
    parse_tgd(text).unwrap()
}

pub type Map = BTreeMap<Term, Term>;

fn bindable(t: &Term) -> bool {
    matches!(t, Term::Var(_) | Term::Null(_))
}

fn extend(atom: &Atom, fact: &Atom, map: &Map) -> Option<Map> {
    if atom.relation != fact.relation || atom.terms.len() != fact.terms.len() {
        return None;
    }
    let mut m = map.clone();
    for (p, f) in atom.terms.iter().zip(&fact.terms) {
        if bindable(p) {
            match m.get(p) {
                Some(img) if img != f => return None,
                Some(_) => {}
                None => {
                    m.insert(p.clone(), f.clone());
                }
            }
        } else if p != f {
            return None;
        }
    }
    Some(m)
}

/// Every homomorphism, by trying all assignments of pattern atoms to facts.
pub fn brute_homs(pattern: &[Atom], facts: &[Atom], fixed: &Map) -> BTreeSet<Map> {
    let mut out = BTreeSet::new();
    fn go(i: usize, pattern: &[Atom], facts: &[Atom], m: Map, out: &mut BTreeSet<Map>) {
        if i == pattern.len() {
            out.insert(m);
            return;
        }
        for f in facts {
            if let Some(m2) = extend(&pattern[i], f, &m) {
                go(i + 1, pattern, facts, m2, out);
            }
        }
    }
    go(0, pattern, facts, fixed.clone(), &mut out);
    out
}

pub fn brute_exists(pattern: &[Atom], facts: &[Atom], fixed: &Map) -> bool {
    fn go(i: usize, pattern: &[Atom], facts: &[Atom], m: Map) -> bool {
        if i == pattern.len() {
            return true;
        }
        facts
            .iter()
            .any(|f| extend(&pattern[i], f, &m).is_some_and(|m2| go(i + 1, pattern, facts, m2)))
    }
    go(0, pattern, facts, fixed.clone())
}

fn apply(m: &Map, a: &Atom) -> Atom {
    Atom::new(
        a.relation.clone(),
        a.terms
            .iter()
            .map(|t| m.get(t).cloned().unwrap_or_else(|| t.clone()))
            .collect(),
    )
}

fn facts_of(i: &Instance) -> Vec<Atom> {
    i.iter().cloned().collect()
}

/// Isomorphism up to a bijective renaming of nulls.
pub fn isomorphic(a: &Instance, b: &Instance) -> bool {
    if a.len() != b.len() || a.nulls().len() != b.nulls().len() {
        return false;
    }
    let fa = facts_of(a);
    let fb = facts_of(b);
    fn go(i: usize, fa: &[Atom], fb: &[Atom], m: Map, used: &mut Vec<bool>) -> bool {
        if i == fa.len() {
            return true;
        }
        for (j, f) in fb.iter().enumerate() {
            if used[j] {
                continue;
            }
            if let Some(m2) = extend(&fa[i], f, &m) {
                let images: BTreeSet<&Term> = m2.values().collect();
                if images.len() != m2.len() || m2.values().any(|v| !v.is_null()) {
                    continue;
                }
                used[j] = true;
                if go(i + 1, fa, fb, m2, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    go(0, &fa, &fb, Map::new(), &mut vec![false; fb.len()])
}

/// Homomorphic equivalence with `*` fixed.
pub fn hom_equivalent(a: &Instance, b: &Instance) -> bool {
    brute_exists(&facts_of(a), &facts_of(b), &Map::new()) && brute_exists(&facts_of(b), &facts_of(a), &Map::new())
}

/// Core by repeated retraction onto strictly smaller subinstances.
pub fn core(inst: &Instance) -> Instance {
    let mut cur = facts_of(inst);
    'outer: loop {
        for k in 0..cur.len() {
            let rest: Vec<Atom> = cur
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, f)| f.clone())
                .collect();
            let homs = brute_homs(&cur, &rest, &Map::new());
            if let Some(h) = homs.into_iter().next() {
                let mut image: Vec<Atom> = Vec::new();
                for f in &cur {
                    let g = apply(&h, f);
                    if !image.contains(&g) {
                        image.push(g);
                    }
                }
                cur = image;
                continue 'outer;
            }
        }
        return cur.into_iter().collect();
    }
}

/// Reference visible chase without bags: tgds on the critical instance,
/// inverse tgds on the new facts, then egds derived from the result are
/// applied by rewriting the whole instance until nothing changes.
pub fn reference_visible_chase(sigma: &[Tgd], schema: &Schema) -> Instance {
    let mut next_null = 1_000_000u32;
    let mut fresh = || {
        next_null += 1;
        Term::Null(next_null)
    };
    let crt: Vec<Atom> = schema
        .iter()
        .map(|(r, k)| Atom::new(r.clone(), vec![Term::Critical; k]))
        .collect();
    let step = |deps: &[(Vec<Atom>, Vec<Atom>)], input: &[Atom], fresh: &mut dyn FnMut() -> Term| {
        let mut out: Vec<Atom> = Vec::new();
        for (body, head) in deps {
            for h in brute_homs(body, input, &Map::new()) {
                if brute_exists(head, input, &h) {
                    continue;
                }
                let mut h2 = h.clone();
                for a in head {
                    for t in &a.terms {
                        if !h2.contains_key(t) {
                            let n = fresh();
                            h2.insert(t.clone(), n);
                        }
                    }
                }
                for a in head {
                    let f = apply(&h2, a);
                    if !out.contains(&f) {
                        out.push(f);
                    }
                }
            }
        }
        out
    };
    let forward: Vec<(Vec<Atom>, Vec<Atom>)> = sigma.iter().map(|t| (t.body().to_vec(), t.head().to_vec())).collect();
    let backward: Vec<(Vec<Atom>, Vec<Atom>)> = sigma.iter().map(|t| (t.head().to_vec(), t.body().to_vec())).collect();
    let i0: Vec<Atom> = step(&forward, &crt, &mut fresh)
        .into_iter()
        .filter(|f| !crt.contains(f))
        .collect();
    let mut cur = step(&backward, &i0, &mut fresh);

    let mut egds: Vec<(Vec<Atom>, BTreeSet<Term>)> = Vec::new();
    for t in sigma {
        let frontier: Vec<Term> = t.frontier().into_iter().map(Term::Var).collect();
        for h in brute_homs(t.body(), &cur, &Map::new()) {
            let eq: BTreeSet<Term> = frontier.iter().filter(|x| h[*x].is_null()).cloned().collect();
            if !eq.is_empty() && !egds.iter().any(|(b, e)| b == t.body() && *e == eq) {
                egds.push((t.body().to_vec(), eq));
            }
        }
    }
    loop {
        let mut changed = false;
        for (body, eq) in &egds {
            let hit = brute_homs(body, &cur, &Map::new())
                .into_iter()
                .find(|h| eq.iter().any(|x| h[x].is_null()));
            if let Some(h) = hit {
                let nu: Map = eq
                    .iter()
                    .filter(|x| h[*x].is_null())
                    .map(|x| (h[x].clone(), Term::Critical))
                    .collect();
                let mut next: Vec<Atom> = Vec::new();
                for f in &cur {
                    let g = apply(&nu, f);
                    if !next.contains(&g) {
                        next.push(g);
                    }
                }
                cur = next;
                changed = true;
            }
        }
        if !changed {
            return cur.into_iter().collect();
        }
    }
}

/// The mixed configurations of the property suite: 200 scenarios with at
/// most 50 tgds and 3 body atoms.
pub fn property_configs() -> Vec<ScenarioConfig> {
    (0..200u64)
        .map(|i| ScenarioConfig {
            n_dep: 5 + (i as usize % 10) * 5,
            n_atoms: 1 + (i as usize % 3),
            n_vars: 5,
            n_views: 4 + (i as usize % 5),
            seed: 1000 + i * 7919,
            ..ScenarioConfig::default()
        })
        .collect()
}

/// Small scenarios whose visible chases stay within reach of the
/// brute-force oracles.
pub fn small_configs() -> Vec<ScenarioConfig> {
    (0..200u64)
        .map(|i| ScenarioConfig {
            n_dep: 1 + (i as usize % 6),
            n_atoms: 1 + (i as usize % 3),
            n_vars: 3,
            n_views: 2 + (i as usize % 4),
            max_arity: 3,
            n_relations: Some(3),
            seed: 77 + i * 104729,
            ..ScenarioConfig::default()
        })
        .collect()
}
