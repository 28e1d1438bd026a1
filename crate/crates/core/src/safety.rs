//! Safety and partial-safety tests, unsafe-bag diagnosis and CQ disclosure.
//!
//! A tgd set is safe with respect to a policy when the flat visible-chase
//! instance of the tgds maps into that of the policy views by a
//! homomorphism fixing `*`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::chase::{flat, visible_chase, BagForest, BagId, VisibleChase};
use crate::error::{Error, Result};
use crate::homomorphism::{exists_homomorphism, first_homomorphism};
use crate::model::{Atom, Cq, Instance, NullId, Schema, Substitution, Symbol, Term, Tgd, TgdId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Safe,
    Unsafe,
    PartiallyUnsafe,
}

/// Outcome of a safety or partial-safety test.
#[derive(Clone, Debug, Serialize)]
pub struct SafetyReport {
    pub verdict: Verdict,
    /// The homomorphism proving safety.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Substitution>,
    pub unsafe_bags: Vec<BagId>,
    pub offending_tgds: Vec<TgdId>,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.verdict == Verdict::Safe
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// The policy side of a session: the source schema and the flat visible
/// chase instance of the policy views, computed once.
#[derive(Clone, Debug)]
pub struct PolicyContext {
    source: Schema,
    views: Vec<Tgd>,
    instance: Instance,
}

impl PolicyContext {
    pub fn from_views(views: &[Tgd], source: &Schema) -> Self {
        PolicyContext {
            source: source.clone(),
            views: views.to_vec(),
            instance: flat(&visible_chase(views, source)),
        }
    }

    /// A policy given directly by its visible instance.
    pub fn from_instance(instance: Instance, source: &Schema) -> Self {
        PolicyContext {
            source: source.clone(),
            views: Vec::new(),
            instance,
        }
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn source(&self) -> &Schema {
        &self.source
    }

    pub fn views(&self) -> &[Tgd] {
        &self.views
    }
}

/// Splits facts into groups connected through shared nulls.
fn null_components(facts: &[Atom]) -> Vec<Vec<Atom>> {
    let mut parent: Vec<usize> = (0..facts.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let mut owner: HashMap<NullId, usize> = HashMap::new();
    for (i, f) in facts.iter().enumerate() {
        for n in f.nulls() {
            match owner.get(&n) {
                Some(&j) => {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                }
                None => {
                    owner.insert(n, i);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Atom>> = BTreeMap::new();
    for (i, f) in facts.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(f.clone());
    }
    groups.into_values().collect()
}

/// A `*`-preserving homomorphism from `facts` into `target`, searched
/// independently on each null-connected component.
pub fn maps_into(facts: &[Atom], target: &Instance) -> Option<Substitution> {
    let mut witness = Substitution::new();
    for comp in null_components(facts) {
        let h = first_homomorphism(&comp, target, &Substitution::new())?;
        for (k, v) in h.iter() {
            witness.insert(k.clone(), v.clone());
        }
    }
    Some(witness)
}

/// A body homomorphism of `tgd` into `vis_v` sending every exported
/// variable to `*`.
pub fn partial_witness(tgd: &Tgd, vis_v: &Instance) -> Option<Substitution> {
    let fixed: Substitution = tgd
        .frontier()
        .into_iter()
        .map(|x| (Term::Var(x), Term::Critical))
        .collect();
    first_homomorphism(tgd.body(), vis_v, &fixed)
}

/// Checks every tgd separately; the witness keys are prefixed with the tgd id.
pub fn is_partially_safe(sigma: &[Tgd], vis_v: &Instance) -> SafetyReport {
    let mut witness = Substitution::new();
    let mut offending = Vec::new();
    for tgd in sigma {
        match partial_witness(tgd, vis_v) {
            Some(h) => {
                for (k, v) in h.iter() {
                    let key = Term::Var(Symbol::new(&format!("{}.{}", tgd.id, k)));
                    witness.insert(key, v.clone());
                }
            }
            None => offending.push(tgd.id),
        }
    }
    if offending.is_empty() {
        SafetyReport {
            verdict: Verdict::Safe,
            witness: Some(witness),
            unsafe_bags: Vec::new(),
            offending_tgds: Vec::new(),
        }
    } else {
        SafetyReport {
            verdict: Verdict::PartiallyUnsafe,
            witness: None,
            unsafe_bags: Vec::new(),
            offending_tgds: offending,
        }
    }
}

/// True if the bag's facts, as created, map into `vis_v`.
pub fn bag_is_safe(forest: &BagForest, id: BagId, vis_v: &Instance) -> bool {
    let bag = forest.bag(id);
    maps_into(&bag.facts, vis_v).is_some()
}

/// Bags that do not map into `vis_v`, in id order.
pub fn unsafe_bags(forest: &BagForest, vis_v: &Instance) -> Vec<BagId> {
    forest
        .bags
        .iter()
        .map(|b| b.id)
        .filter(|&id| !bag_is_safe(forest, id, vis_v))
        .collect()
}

/// Safety verdict for an already computed forest.
pub fn check_forest(forest: &BagForest, vis_v: &Instance) -> SafetyReport {
    let facts: Vec<Atom> = flat(forest).iter().cloned().collect();
    match maps_into(&facts, vis_v) {
        Some(h) => SafetyReport {
            verdict: Verdict::Safe,
            witness: Some(h),
            unsafe_bags: Vec::new(),
            offending_tgds: Vec::new(),
        },
        None => {
            let bags = unsafe_bags(forest, vis_v);
            let mut tgds: Vec<TgdId> = bags.iter().map(|&b| forest.origin_tgd(b)).collect();
            tgds.sort();
            tgds.dedup();
            SafetyReport {
                verdict: Verdict::Unsafe,
                witness: None,
                unsafe_bags: bags,
                offending_tgds: tgds,
            }
        }
    }
}

/// Checks `sigma` against a prepared policy.
pub fn check(sigma: &[Tgd], policy: &PolicyContext) -> SafetyReport {
    let forest = VisibleChase::default().run(sigma, policy.source());
    check_forest(&forest, policy.instance())
}

/// Decides whether `sigma` is safe with respect to the policy views.
pub fn is_safe(sigma: &[Tgd], views: &[Tgd], source: &Schema) -> SafetyReport {
    check(sigma, &PolicyContext::from_views(views, source))
}

/// True iff the all-`*` tuple answers `p` over the visible instance of
/// `sigma`, i.e. `p` is disclosed by `sigma` on every source instance.
pub fn is_disclosed(p: &Cq, sigma: &[Tgd], source: &Schema) -> Result<bool> {
    if !p.is_constants_free() {
        return Err(Error::InvalidQuery("the query contains constants".into()));
    }
    let visible = flat(&visible_chase(sigma, source));
    let fixed: Substitution = p.free.iter().map(|x| (Term::Var(x.clone()), Term::Critical)).collect();
    Ok(exists_homomorphism(&p.atoms, &visible, &fixed))
}
