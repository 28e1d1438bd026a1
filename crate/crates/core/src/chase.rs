//! The standard chase and the bag-organized visible chase.
//!
//! [`visible_chase`] chases the critical instance of the source schema with
//! the tgds, chases the resulting target facts back with the inverse tgds,
//! and then applies the egds derived from the tgds, recording every step as a
//! [`Bag`] of facts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homomorphism::{
    find_homomorphisms, first_homomorphism, is_active_egd_trigger, is_active_tgd_trigger, verify_homomorphism,
};
use crate::model::{
    critical_instance, Atom, DerivedEgd, Egd, Instance, NullGen, NullId, Schema, Substitution, Symbol, Term, Tgd, TgdId,
};

fn extend_with_nulls(tgd: &Tgd, h: &Substitution, nulls: &mut NullGen) -> Substitution {
    let mut ext = h.clone();
    for y in tgd.existentials() {
        ext.insert(Term::Var(y), nulls.fresh());
    }
    ext
}

/// Applies one tgd step: `inst ∪ h'(head)` where `h'` sends existential
/// variables to fresh nulls.
pub fn chase_tgd_step(inst: &Instance, tgd: &Tgd, h: &Substitution, nulls: &mut NullGen) -> Result<Instance> {
    if !verify_homomorphism(tgd.body(), inst, h) || !is_active_tgd_trigger(tgd, inst, h) {
        return Err(Error::NotActiveTrigger(format!("{h:?} for {tgd}")));
    }
    let ext = extend_with_nulls(tgd, h, nulls);
    let mut out = inst.clone();
    out.extend(ext.apply_atoms(tgd.head()));
    Ok(out)
}

/// Applies one egd step for `left = right` under trigger `h`.
///
/// A null is replaced by the other side; when both sides are constants the
/// chase fails.
pub fn chase_egd_step(inst: &Instance, egd: &Egd, h: &Substitution) -> Result<Instance> {
    if !verify_homomorphism(&egd.body, inst, h) {
        return Err(Error::NotActiveTrigger(format!("{h:?} is not a body homomorphism")));
    }
    let a = h.apply_term(&egd.left);
    let b = h.apply_term(&egd.right);
    if a == b {
        return Err(Error::NotActiveTrigger(format!("{a} already equals {b}")));
    }
    let nu: Substitution = match (a.is_constant(), b.is_constant()) {
        (true, true) => return Err(Error::ChaseFailure(a.to_string(), b.to_string())),
        (true, false) => [(b, a)].into_iter().collect(),
        (false, _) => [(a, b)].into_iter().collect(),
    };
    Ok(inst.apply(&nu))
}

/// Chases `inst` with `sigma` until no tgd has an active trigger.
///
/// Terminates for s-t tgds; dependencies are visited in input order and
/// triggers in enumeration order.
pub fn chase(inst: &Instance, sigma: &[Tgd]) -> Instance {
    let mut cur = inst.clone();
    let mut nulls = NullGen::after(inst);
    loop {
        let mut changed = false;
        for tgd in sigma {
            let triggers: Vec<Substitution> = find_homomorphisms(tgd.body(), &cur, &Substitution::new()).collect();
            for h in triggers {
                if is_active_tgd_trigger(tgd, &cur, &h) {
                    let ext = extend_with_nulls(tgd, &h, &mut nulls);
                    cur.extend(ext.apply_atoms(tgd.head()));
                    changed = true;
                }
            }
        }
        if !changed {
            return cur;
        }
    }
}

/// Groups body atoms into connected components (atoms sharing a variable).
pub(crate) fn components(atoms: &[Atom]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..atoms.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let mut owner: HashMap<&Symbol, usize> = HashMap::new();
    for (i, a) in atoms.iter().enumerate() {
        for v in a.vars() {
            if let Some(&j) = owner.get(v) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            } else {
                owner.insert(v, i);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..atoms.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Egds derived from `sigma` in `inst`: for every tgd and every body
/// homomorphism sending some frontier variable to a null, the egd equating
/// exactly those frontier variables with `*`. One egd per realized subset,
/// ordered by tgd, then subset size, then variable names.
pub fn derived_egds(sigma: &[Tgd], inst: &Instance) -> Vec<DerivedEgd> {
    let mut out = Vec::new();
    for tgd in sigma {
        let frontier: BTreeSet<Symbol> = tgd.frontier().into_iter().collect();
        if frontier.is_empty() {
            continue;
        }
        // Subsets realized by each connected component, combined by union.
        let mut combined: BTreeSet<BTreeSet<Symbol>> = [BTreeSet::new()].into_iter().collect();
        for comp in components(tgd.body()) {
            let atoms: Vec<Atom> = comp.iter().map(|&i| tgd.body()[i].clone()).collect();
            let local: Vec<Symbol> = atoms
                .iter()
                .flat_map(|a| a.vars())
                .filter(|v| frontier.contains(*v))
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let limit = 1usize.checked_shl(local.len() as u32).unwrap_or(usize::MAX);
            let mut realized: BTreeSet<BTreeSet<Symbol>> = BTreeSet::new();
            for h in find_homomorphisms(&atoms, inst, &Substitution::new()) {
                let s: BTreeSet<Symbol> = local
                    .iter()
                    .filter(|x| h.apply_term(&Term::Var((*x).clone())).is_null())
                    .cloned()
                    .collect();
                realized.insert(s);
                if realized.len() == limit {
                    break;
                }
            }
            if realized.is_empty() {
                combined.clear();
                break;
            }
            combined = combined
                .iter()
                .flat_map(|a| realized.iter().map(move |b| a.union(b).cloned().collect()))
                .collect();
        }
        let mut subsets: Vec<BTreeSet<Symbol>> = combined.into_iter().filter(|s| !s.is_empty()).collect();
        subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out.extend(subsets.into_iter().map(|s| DerivedEgd::new(tgd, s)));
    }
    out
}

/// Identifier of a bag; equal to its index in [`BagForest::bags`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
#[serde(transparent)]
pub struct BagId(pub u32);

impl std::fmt::Display for BagId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// The dependency that produced a bag.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BagOrigin {
    /// The inverse of the tgd with this id.
    Inverse(TgdId),
    /// The derived egd at this index of [`BagForest::egds`].
    Egd(usize),
}

/// A group of facts produced by one chase step.
#[derive(Clone, Debug)]
pub struct Bag {
    pub id: BagId,
    /// Facts as created; later unifications are not applied here.
    pub facts: Vec<Atom>,
    pub origin: BagOrigin,
    /// The trigger of the step that created the bag.
    pub trigger: Substitution,
    /// The trigger image of the dependency body.
    pub premise: Vec<Atom>,
    /// Sorted ids of the bags this bag was derived from.
    pub predecessors: Vec<BagId>,
    pub depth: u32,
}

/// Counters collected while chasing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChaseStats {
    pub tgd_triggers: usize,
    pub egd_triggers: usize,
    pub reused_bags: usize,
}

/// Result of the visible chase.
#[derive(Clone, Debug)]
pub struct BagForest {
    /// Facts obtained by chasing the critical instance with the tgds.
    pub target_facts: Instance,
    /// Inverse-chase bags followed by egd-derived bags, in creation order.
    pub bags: Vec<Bag>,
    pub egds: Vec<DerivedEgd>,
    /// Accumulated null-to-`*` unifications.
    pub unifier: Substitution,
    pub stats: ChaseStats,
}

impl BagForest {
    pub fn bag(&self, id: BagId) -> &Bag {
        &self.bags[id.0 as usize]
    }

    /// The tgd a bag is attributed to; for egd bags, the tgd the egd was
    /// derived from.
    pub fn origin_tgd(&self, id: BagId) -> TgdId {
        match self.bag(id).origin {
            BagOrigin::Inverse(t) => t,
            BagOrigin::Egd(e) => self.egds[e].origin,
        }
    }

    /// Bag facts with the unifier applied.
    pub fn unified_facts(&self, id: BagId) -> Vec<Atom> {
        dedup(self.bag(id).facts.iter().map(|f| self.unifier.apply_atom(f)))
    }

    /// The depth-1 bags below `id`.
    pub fn support(&self, id: BagId) -> BTreeSet<BagId> {
        let bag = self.bag(id);
        if bag.predecessors.is_empty() {
            return [id].into_iter().collect();
        }
        bag.predecessors.iter().flat_map(|&p| self.support(p)).collect()
    }

    /// `id` together with all bags it was transitively derived from.
    pub fn derivation(&self, id: BagId) -> BTreeSet<BagId> {
        let mut out: BTreeSet<BagId> = [id].into_iter().collect();
        for &p in &self.bag(id).predecessors {
            out.extend(self.derivation(p));
        }
        out
    }

    /// True if no bag lists `id` as a predecessor.
    pub fn is_maximal(&self, id: BagId) -> bool {
        !self.bags.iter().any(|b| b.predecessors.contains(&id))
    }

    /// Graphviz rendering: one node per bag, edges from predecessors.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph bags {\n  node [shape=box];\n");
        for b in &self.bags {
            let origin = match b.origin {
                BagOrigin::Inverse(t) => format!("{t}^-1"),
                BagOrigin::Egd(e) => format!("egd {} of {}", e, self.egds[e].origin),
            };
            let facts: Vec<String> = b.facts.iter().map(|f| f.to_string()).collect();
            let _ = writeln!(
                s,
                "  {} [label=\"{} depth {} <{}>\\n{}\"];",
                b.id,
                b.id,
                b.depth,
                origin,
                facts.join("\\n")
            );
            for p in &b.predecessors {
                let _ = writeln!(s, "  {} -> {};", p, b.id);
            }
        }
        s.push_str("}\n");
        s
    }
}

fn dedup(facts: impl IntoIterator<Item = Atom>) -> Vec<Atom> {
    let mut seen = BTreeSet::new();
    facts.into_iter().filter(|f| seen.insert(f.clone())).collect()
}

/// Union of all bag facts with the unifier applied.
pub fn flat(forest: &BagForest) -> Instance {
    forest
        .bags
        .iter()
        .flat_map(|b| b.facts.iter().map(|f| forest.unifier.apply_atom(f)))
        .collect()
}

/// Whether inverse-chase bags are reused between runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Recompute {
    /// Reuse the bags of tgds whose text and target facts did not change.
    #[default]
    Incremental,
    /// Chase everything from scratch.
    Full,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    body: Vec<Atom>,
    head: Vec<Atom>,
    targets: Vec<Atom>,
}

#[derive(Clone)]
struct CachedBag {
    facts: Vec<Atom>,
    trigger: Substitution,
    premise: Vec<Atom>,
}

/// A visible-chase engine that can be run repeatedly on evolving tgd sets.
///
/// Null ids keep increasing across runs, so reused and fresh bags never
/// share a null.
#[derive(Clone, Default)]
pub struct VisibleChase {
    nulls: NullGen,
    mode: Recompute,
    cache: HashMap<CacheKey, Vec<CachedBag>>,
}

impl VisibleChase {
    pub fn new(mode: Recompute) -> Self {
        VisibleChase {
            mode,
            ..Default::default()
        }
    }

    pub fn run(&mut self, sigma: &[Tgd], source: &Schema) -> BagForest {
        let mut stats = ChaseStats::default();
        let crt = critical_instance(source);

        let mut target_facts = Instance::new();
        for tgd in sigma {
            for h in find_homomorphisms(tgd.body(), &crt, &Substitution::new()) {
                if is_active_tgd_trigger(tgd, &crt, &h) {
                    stats.tgd_triggers += 1;
                    let ext = extend_with_nulls(tgd, &h, &mut self.nulls);
                    target_facts.extend(ext.apply_atoms(tgd.head()));
                }
            }
        }
        let base = target_facts.minus(&crt);

        let mut bags: Vec<Bag> = Vec::new();
        for tgd in sigma {
            let key = CacheKey {
                body: tgd.body().to_vec(),
                head: tgd.head().to_vec(),
                targets: base
                    .iter()
                    .filter(|f| tgd.head().iter().any(|a| a.relation == f.relation))
                    .cloned()
                    .collect(),
            };
            let cached = match (self.mode, self.cache.get(&key)) {
                (Recompute::Incremental, Some(c)) => {
                    stats.reused_bags += c.len();
                    c.clone()
                }
                _ => {
                    let inv = tgd.inverse();
                    let mut made = Vec::new();
                    for h in find_homomorphisms(inv.body(), &base, &Substitution::new()) {
                        if is_active_tgd_trigger(&inv, &base, &h) {
                            stats.tgd_triggers += 1;
                            let ext = extend_with_nulls(&inv, &h, &mut self.nulls);
                            made.push(CachedBag {
                                facts: dedup(ext.apply_atoms(inv.head())),
                                premise: h.apply_atoms(inv.body()),
                                trigger: h,
                            });
                        }
                    }
                    if self.mode == Recompute::Incremental {
                        self.cache.insert(key, made.clone());
                    }
                    made
                }
            };
            for c in cached {
                bags.push(Bag {
                    id: BagId(bags.len() as u32),
                    facts: c.facts,
                    origin: BagOrigin::Inverse(tgd.id),
                    trigger: c.trigger,
                    premise: c.premise,
                    predecessors: Vec::new(),
                    depth: 1,
                });
            }
        }

        let i1: Instance = bags.iter().flat_map(|b| b.facts.iter().cloned()).collect();
        let egds = derived_egds(sigma, &i1);
        let mut forest = BagForest {
            target_facts,
            bags,
            egds,
            unifier: Substitution::new(),
            stats,
        };
        chase_egds(&mut forest, i1);
        forest
    }
}

/// Runs the egd phase: each active trigger adds a bag derived from the bags
/// it is relevant to, and unifies the trigger's nulls with `*`.
/// Active triggers of `egd` on `current` that send some equated variable to
/// a null: for each equated variable and each null at one of its body
/// positions, the first active trigger with that binding. Connected
/// components of the body are matched separately; components without the
/// seeded variable reuse their first match.
fn find_egd_triggers(egd: &DerivedEgd, current: &Instance) -> Vec<Substitution> {
    let comps: Vec<Vec<Atom>> = components(&egd.body)
        .into_iter()
        .map(|c| c.into_iter().map(|i| egd.body[i].clone()).collect())
        .collect();
    let mut firsts: Vec<Option<Option<Substitution>>> = vec![None; comps.len()];
    let mut out: Vec<Substitution> = Vec::new();
    for x in &egd.equated {
        let var = Term::Var(x.clone());
        let Some(home) = comps.iter().position(|c| c.iter().any(|a| a.terms.contains(&var))) else {
            continue;
        };
        let mut seeds: Vec<Term> = Vec::new();
        let mut seen: HashSet<Term> = HashSet::new();
        for atom in &comps[home] {
            for (p, t) in atom.terms.iter().enumerate() {
                if *t != var {
                    continue;
                }
                for f in current.iter().filter(|f| f.relation == atom.relation) {
                    if f.terms.get(p).is_some_and(Term::is_null) && seen.insert(f.terms[p].clone()) {
                        seeds.push(f.terms[p].clone());
                    }
                }
            }
        }
        if seeds.is_empty() {
            continue;
        }
        let mut rest = Substitution::new();
        let mut matched = true;
        for (i, comp) in comps.iter().enumerate() {
            if i == home {
                continue;
            }
            let first = firsts[i].get_or_insert_with(|| first_homomorphism(comp, current, &Substitution::new()));
            match first {
                Some(h) => {
                    for (k, v) in h.iter() {
                        rest.insert(k.clone(), v.clone());
                    }
                }
                None => {
                    matched = false;
                    break;
                }
            }
        }
        if !matched {
            return Vec::new();
        }
        for n in seeds {
            let fixed: Substitution = [(var.clone(), n)].into_iter().collect();
            if let Some(mut h) = first_homomorphism(&comps[home], current, &fixed) {
                for (k, v) in rest.iter() {
                    h.insert(k.clone(), v.clone());
                }
                if is_active_egd_trigger(egd, &h) && !out.contains(&h) {
                    out.push(h);
                }
            }
        }
    }
    out
}

/// Applies the derived egds round-robin until none has an active trigger.
/// Each round collects the triggers of one egd on the current instance and
/// fires them in order, each one updated by the unifications of the ones
/// before it and skipped once it no longer equates a null.
fn chase_egds(forest: &mut BagForest, mut current: Instance) {
    let mut cur_facts: Vec<Vec<Atom>> = forest.bags.iter().map(|b| b.facts.clone()).collect();
    let mut holders: HashMap<NullId, BTreeSet<usize>> = HashMap::new();
    for (i, facts) in cur_facts.iter().enumerate() {
        for n in facts.iter().flat_map(|f| f.nulls()) {
            holders.entry(n).or_default().insert(i);
        }
    }
    loop {
        let mut changed = false;
        for e in 0..forest.egds.len() {
            let triggers = find_egd_triggers(&forest.egds[e], &current);
            let mut round = Substitution::new();
            for found in triggers {
                let egd = &forest.egds[e];
                let h: Substitution = found.iter().map(|(k, v)| (k.clone(), round.apply_term(v))).collect();
                let unified: BTreeSet<NullId> = egd
                    .equated
                    .iter()
                    .filter_map(|x| match h.apply_term(&Term::Var(x.clone())) {
                        Term::Null(n) => Some(n),
                        _ => None,
                    })
                    .collect();
                if unified.is_empty() {
                    continue;
                }
                let nu: Substitution = unified.iter().map(|&n| (Term::Null(n), Term::Critical)).collect();
                let premise = h.apply_atoms(&egd.body);
                let candidates: BTreeSet<usize> = unified
                    .iter()
                    .filter_map(|n| holders.get(n))
                    .flatten()
                    .copied()
                    .collect();
                let relevant: Vec<usize> = candidates
                    .into_iter()
                    .filter(|&b| cur_facts[b].iter().any(|f| premise.contains(f)))
                    .collect();
                let facts = dedup(
                    relevant
                        .iter()
                        .flat_map(|&b| cur_facts[b].iter().map(|f| nu.apply_atom(f))),
                );
                let depth = 1 + relevant.iter().map(|&b| forest.bags[b].depth).max().unwrap_or(0);
                let id = forest.bags.len();
                for &n in &unified {
                    if let Some(hs) = holders.remove(&n) {
                        for b in hs {
                            cur_facts[b] = dedup(cur_facts[b].iter().map(|f| nu.apply_atom(f)));
                        }
                    }
                }
                for n in facts.iter().flat_map(|f| f.nulls()) {
                    holders.entry(n).or_default().insert(id);
                }
                cur_facts.push(facts.clone());
                forest.bags.push(Bag {
                    id: BagId(id as u32),
                    facts,
                    origin: BagOrigin::Egd(e),
                    trigger: h,
                    premise,
                    predecessors: relevant.into_iter().map(|b| BagId(b as u32)).collect(),
                    depth,
                });
                for (n, t) in nu.iter() {
                    forest.unifier.insert(n.clone(), t.clone());
                    round.insert(n.clone(), t.clone());
                }
                forest.stats.egd_triggers += 1;
                changed = true;
            }
            if !round.is_empty() {
                current = current.apply(&round);
            }
        }
        if !changed {
            break;
        }
    }
}

/// Runs the visible chase of `sigma` from the critical instance of `source`.
pub fn visible_chase(sigma: &[Tgd], source: &Schema) -> BagForest {
    VisibleChase::new(Recompute::Full).run(sigma, source)
}
