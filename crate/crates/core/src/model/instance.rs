//! Instances: insertion-ordered sets of ground facts.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use indexmap::IndexSet;

use super::{Atom, NullId, Substitution, Symbol, Term};

/// Instances above this size get per-position term indexes.
const POSITION_INDEX_THRESHOLD: usize = 64;

/// A set of facts. Iteration follows insertion order, which keeps every
/// search over an instance deterministic.
#[derive(Default)]
pub struct Instance {
    facts: IndexSet<Atom>,
    index: OnceLock<FactIndex>,
}

#[derive(Default)]
pub(crate) struct RelIndex {
    pub(crate) arity: usize,
    pub(crate) facts: Vec<u32>,
    /// One map per position, present only on large instances.
    pub(crate) positions: Option<Vec<HashMap<Term, Vec<u32>>>>,
}

/// Relation (and optionally position) index over an instance.
#[derive(Default)]
pub(crate) struct FactIndex {
    by_rel: HashMap<Symbol, Vec<RelIndex>>,
}

impl FactIndex {
    fn build(facts: &IndexSet<Atom>) -> Self {
        let with_positions = facts.len() > POSITION_INDEX_THRESHOLD;
        let mut by_rel: HashMap<Symbol, Vec<RelIndex>> = HashMap::new();
        for (i, f) in facts.iter().enumerate() {
            let slots = by_rel.entry(f.relation.clone()).or_default();
            let pos = match slots.iter().position(|r| r.arity == f.arity()) {
                Some(p) => p,
                None => {
                    slots.push(RelIndex {
                        arity: f.arity(),
                        facts: Vec::new(),
                        positions: with_positions.then(|| vec![HashMap::new(); f.arity()]),
                    });
                    slots.len() - 1
                }
            };
            let rel = &mut slots[pos];
            rel.facts.push(i as u32);
            if let Some(maps) = rel.positions.as_mut() {
                for (p, t) in f.terms.iter().enumerate() {
                    maps[p].entry(t.clone()).or_default().push(i as u32);
                }
            }
        }
        FactIndex { by_rel }
    }

    pub(crate) fn relation(&self, name: &Symbol, arity: usize) -> Option<&RelIndex> {
        self.by_rel.get(name)?.iter().find(|r| r.arity == arity)
    }
}

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a fact; returns false if it was already present.
    pub fn insert(&mut self, fact: Atom) -> bool {
        debug_assert!(fact.is_ground(), "facts must be ground: {fact}");
        let added = self.facts.insert(fact);
        if added {
            self.index = OnceLock::new();
        }
        added
    }

    pub fn contains(&self, fact: &Atom) -> bool {
        self.facts.contains(fact)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.facts.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Atom> {
        self.facts.get_index(i)
    }

    pub(crate) fn index(&self) -> &FactIndex {
        self.index.get_or_init(|| FactIndex::build(&self.facts))
    }

    /// Applies `s` to every fact, merging facts that become equal.
    pub fn apply(&self, s: &Substitution) -> Instance {
        self.iter().map(|f| s.apply_atom(f)).collect()
    }

    /// Facts of `self` not in `other`.
    pub fn minus(&self, other: &Instance) -> Instance {
        self.iter().filter(|f| !other.contains(f)).cloned().collect()
    }

    pub fn nulls(&self) -> BTreeSet<NullId> {
        self.iter().flat_map(|f| f.nulls()).collect()
    }

    /// One fact per line, each terminated by `.`.
    pub fn to_text(&self) -> String {
        self.iter().map(|f| format!("{f}.\n")).collect()
    }
}

impl Clone for Instance {
    fn clone(&self) -> Self {
        Instance {
            facts: self.facts.clone(),
            index: OnceLock::new(),
        }
    }
}

/// Set equality; insertion order is ignored.
impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
    }
}

impl Eq for Instance {}

impl FromIterator<Atom> for Instance {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        let mut inst = Instance::new();
        inst.extend(iter);
        inst
    }
}

impl Extend<Atom> for Instance {
    fn extend<I: IntoIterator<Item = Atom>>(&mut self, iter: I) {
        for f in iter {
            self.insert(f);
        }
    }
}

impl<'a> IntoIterator for &'a Instance {
    type Item = &'a Atom;
    type IntoIter = indexmap::set::Iter<'a, Atom>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.facts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
