//! Tuple-generating dependencies, derived egds and conjunctive queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::term::write_conjunction;
use super::{Atom, Symbol, Term};
use crate::error::Error;

/// Stable identifier of a tgd. Repairs keep the id of the tgd they replace.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TgdId(pub u32);

impl fmt::Display for TgdId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// A tgd `body -> head` over variables only.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tgd {
    pub id: TgdId,
    body: Vec<Atom>,
    head: Vec<Atom>,
}

fn distinct_vars<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Vec<Symbol> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in atoms {
        for v in a.vars() {
            if seen.insert(v) {
                out.push(v.clone());
            }
        }
    }
    out
}

impl Tgd {
    pub fn new(id: TgdId, body: Vec<Atom>, head: Vec<Atom>) -> Result<Self, Error> {
        if body.is_empty() {
            return Err(Error::InvalidTgd("empty body".into()));
        }
        if head.is_empty() {
            return Err(Error::InvalidTgd("empty head".into()));
        }
        if let Some(t) = body.iter().chain(&head).flat_map(|a| &a.terms).find(|t| !t.is_var()) {
            return Err(Error::InvalidTgd(format!("non-variable term {t}")));
        }
        Ok(Tgd { id, body, head })
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn head(&self) -> &[Atom] {
        &self.head
    }

    /// Distinct body variables in order of first occurrence.
    pub fn body_vars(&self) -> Vec<Symbol> {
        distinct_vars(&self.body)
    }

    pub fn head_vars(&self) -> Vec<Symbol> {
        distinct_vars(&self.head)
    }

    /// Exported variables, in order of first occurrence in the body.
    pub fn frontier(&self) -> Vec<Symbol> {
        let head: BTreeSet<Symbol> = self.head_vars().into_iter().collect();
        self.body_vars().into_iter().filter(|v| head.contains(v)).collect()
    }

    pub fn is_frontier(&self, v: &Symbol) -> bool {
        self.head.iter().any(|a| a.vars().any(|w| w == v)) && self.body.iter().any(|a| a.vars().any(|w| w == v))
    }

    /// Head variables that do not occur in the body.
    pub fn existentials(&self) -> Vec<Symbol> {
        let body: BTreeSet<Symbol> = self.body_vars().into_iter().collect();
        self.head_vars().into_iter().filter(|v| !body.contains(v)).collect()
    }

    pub fn exported_count(&self) -> usize {
        self.frontier().len()
    }

    /// Number of distinct body variables occurring at two or more body positions.
    pub fn join_count(&self) -> usize {
        let mut counts: BTreeMap<&Symbol, usize> = BTreeMap::new();
        for v in self.body.iter().flat_map(Atom::vars) {
            *counts.entry(v).or_default() += 1;
        }
        counts.values().filter(|&&c| c >= 2).count()
    }

    /// `head -> body`, keeping the id.
    pub fn inverse(&self) -> Tgd {
        Tgd {
            id: self.id,
            body: self.head.clone(),
            head: self.body.clone(),
        }
    }

    /// True if some body atom repeats a variable.
    pub fn has_repeated_body_var(&self) -> bool {
        self.body.iter().any(Atom::has_repeated_var)
    }

    /// Removes every head position holding one of `vars`.
    pub fn hide(&self, vars: &BTreeSet<Symbol>) -> Tgd {
        let head = self
            .head
            .iter()
            .map(|a| Atom {
                relation: a.relation.clone(),
                terms: a
                    .terms
                    .iter()
                    .filter(|t| t.as_var().is_none_or(|v| !vars.contains(v)))
                    .cloned()
                    .collect(),
            })
            .collect();
        Tgd {
            id: self.id,
            body: self.body.clone(),
            head,
        }
    }

    /// Replaces the body. Exported variables that no longer occur in the new
    /// body are hidden from the head, so no frontier variable turns existential.
    pub fn with_body(&self, body: Vec<Atom>) -> Tgd {
        let new_vars: BTreeSet<Symbol> = distinct_vars(&body).into_iter().collect();
        let lost: BTreeSet<Symbol> = self.frontier().into_iter().filter(|v| !new_vars.contains(v)).collect();
        let hidden = self.hide(&lost);
        Tgd {
            id: self.id,
            body,
            head: hidden.head,
        }
    }

    pub fn with_id(&self, id: TgdId) -> Tgd {
        Tgd { id, ..self.clone() }
    }

    /// Serialization after renaming variables to `x0, x1, ...` in order of
    /// first occurrence. Two tgds are equal up to renaming iff their
    /// canonical forms are equal.
    pub fn canonical(&self) -> String {
        let mut names: BTreeMap<Symbol, Term> = BTreeMap::new();
        for v in distinct_vars(self.body.iter().chain(&self.head)) {
            let fresh = Term::var(&format!("x{}", names.len()));
            names.insert(v, fresh);
        }
        let rename = |atoms: &[Atom]| -> Vec<Atom> {
            atoms
                .iter()
                .map(|a| Atom {
                    relation: a.relation.clone(),
                    terms: a
                        .terms
                        .iter()
                        .map(|t| match t {
                            Term::Var(v) => names[v].clone(),
                            other => other.clone(),
                        })
                        .collect(),
                })
                .collect()
        };
        Tgd {
            id: self.id,
            body: rename(&self.body),
            head: rename(&self.head),
        }
        .to_string()
    }
}

impl fmt::Display for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_conjunction(f, &self.body)?;
        f.write_str(" -> ")?;
        write_conjunction(f, &self.head)
    }
}

impl fmt::Debug for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self)
    }
}

/// Inverts every tgd of `tgds`.
pub fn inverse(tgds: &[Tgd]) -> Vec<Tgd> {
    tgds.iter().map(Tgd::inverse).collect()
}

/// An egd `body -> x1 = * /\ ... /\ xk = *` derived from a tgd.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DerivedEgd {
    pub origin: TgdId,
    pub body: Vec<Atom>,
    /// Sorted, non-empty, a subset of the origin's frontier.
    pub equated: Vec<Symbol>,
}

impl DerivedEgd {
    pub fn new(origin: &Tgd, equated: impl IntoIterator<Item = Symbol>) -> Self {
        let equated: BTreeSet<Symbol> = equated.into_iter().collect();
        DerivedEgd {
            origin: origin.id,
            body: origin.body().to_vec(),
            equated: equated.into_iter().collect(),
        }
    }

    /// The single-equality egds this derived egd abbreviates.
    pub fn to_egds(&self) -> Vec<Egd> {
        self.equated
            .iter()
            .map(|x| Egd {
                body: self.body.clone(),
                left: Term::Var(x.clone()),
                right: Term::Critical,
            })
            .collect()
    }
}

impl fmt::Display for DerivedEgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_conjunction(f, &self.body)?;
        f.write_str(" -> ")?;
        for (i, x) in self.equated.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}=*")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DerivedEgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> {}", self.origin, self)
    }
}

/// A general egd `body -> left = right`. Either side may be a body variable
/// or the critical constant.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Egd {
    pub body: Vec<Atom>,
    pub left: Term,
    pub right: Term,
}

/// A conjunctive query with ordered free variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cq {
    pub atoms: Vec<Atom>,
    pub free: Vec<Symbol>,
}

impl Cq {
    pub fn new(atoms: Vec<Atom>, free: Vec<Symbol>) -> Result<Self, Error> {
        let vars: BTreeSet<Symbol> = distinct_vars(&atoms).into_iter().collect();
        if let Some(v) = free.iter().find(|v| !vars.contains(*v)) {
            return Err(Error::InvalidQuery(format!(
                "free variable {v} does not occur in the query"
            )));
        }
        Ok(Cq { atoms, free })
    }

    pub fn is_constants_free(&self) -> bool {
        self.atoms.iter().flat_map(|a| &a.terms).all(Term::is_var)
    }
}
