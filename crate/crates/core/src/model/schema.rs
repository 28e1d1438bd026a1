//! Relational schemas.

use std::fmt;

use indexmap::IndexMap;

use super::{Atom, Symbol, Term};
use crate::error::Error;
use crate::model::Instance;

/// Relation names with fixed arities, kept in declaration order.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Schema {
    relations: IndexMap<Symbol, usize>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a schema from `(name, arity)` pairs, rejecting duplicates.
    pub fn from_relations<'a>(rels: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self, Error> {
        let mut s = Schema::new();
        for (name, arity) in rels {
            s.add(Symbol::new(name), arity)?;
        }
        Ok(s)
    }

    pub fn add(&mut self, name: Symbol, arity: usize) -> Result<(), Error> {
        if self.relations.contains_key(&name) {
            return Err(Error::DuplicateRelation(name.to_string()));
        }
        self.relations.insert(name, arity);
        Ok(())
    }

    pub fn arity(&self, name: &Symbol) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn contains(&self, name: &Symbol) -> bool {
        self.relations.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.relations.iter().map(|(k, v)| (k, *v))
    }

    /// Checks that `atom` names a declared relation with matching arity.
    pub fn check_atom(&self, atom: &Atom) -> Result<(), Error> {
        match self.arity(&atom.relation) {
            None => Err(Error::UnknownRelation(atom.relation.to_string())),
            Some(k) if k != atom.arity() => Err(Error::ArityMismatch {
                relation: atom.relation.to_string(),
                expected: k,
                found: atom.arity(),
            }),
            Some(_) => Ok(()),
        }
    }

    /// Renders the schema in the `Name/arity` line format.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, arity) in &self.relations {
            writeln!(f, "{name}/{arity}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.relations.iter()).finish()
    }
}

/// One all-`*` fact per relation of `schema`.
pub fn critical_instance(schema: &Schema) -> Instance {
    schema
        .iter()
        .map(|(name, arity)| Atom::new(name.clone(), vec![Term::Critical; arity]))
        .collect()
}
