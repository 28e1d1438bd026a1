//! Substitutions over variables and labeled nulls.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{Serialize, SerializeMap, Serializer};

use super::{Atom, Term};

/// A finite map from bindable terms (variables, nulls) to terms.
///
/// Terms outside the domain map to themselves, so constants and `*` are
/// always preserved.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution(BTreeMap<Term, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, t: &Term) -> Option<&Term> {
        self.0.get(t)
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.0.contains_key(t)
    }

    pub fn insert(&mut self, from: Term, to: Term) -> Option<Term> {
        self.0.insert(from, to)
    }

    pub fn remove(&mut self, t: &Term) -> Option<Term> {
        self.0.remove(t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Term)> {
        self.0.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        self.0.get(t).cloned().unwrap_or_else(|| t.clone())
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom {
            relation: a.relation.clone(),
            terms: a.terms.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    pub fn apply_atoms(&self, atoms: &[Atom]) -> Vec<Atom> {
        atoms.iter().map(|a| self.apply_atom(a)).collect()
    }

    /// `other ∘ self`: first apply `self`, then `other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out: BTreeMap<Term, Term> = self.0.iter().map(|(k, v)| (k.clone(), other.apply_term(v))).collect();
        for (k, v) in &other.0 {
            out.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Substitution(out)
    }
}

impl FromIterator<(Term, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Term, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Substitution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(&k.to_string(), &v.to_string())?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_fixed() {
        let s: Substitution = [(Term::var("x"), Term::Null(1))].into_iter().collect();
        assert_eq!(s.apply_term(&Term::Critical), Term::Critical);
        assert_eq!(s.apply_term(&Term::var("x")), Term::Null(1));
        assert_eq!(s.apply_term(&Term::var("y")), Term::var("y"));
    }

    #[test]
    fn composition_applies_left_first() {
        let a: Substitution = [(Term::var("x"), Term::Null(1))].into_iter().collect();
        let b: Substitution = [(Term::Null(1), Term::Critical)].into_iter().collect();
        let c = a.then(&b);
        assert_eq!(c.apply_term(&Term::var("x")), Term::Critical);
        assert_eq!(c.apply_term(&Term::Null(1)), Term::Critical);
    }
}
