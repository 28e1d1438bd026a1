//! Terms and atoms.

use std::fmt;
use std::sync::Arc;

/// An interned-by-sharing name used for relations, variables and constants.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Identifier of a labeled null. Rendered as `_n<id>`.
pub type NullId = u32;

/// A term of an atom.
///
/// The critical constant `*` is its own variant so it can never collide with
/// an ordinary constant.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Critical,
    Const(Symbol),
    Null(NullId),
    Var(Symbol),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::new(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(Symbol::new(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Null(_))
    }

    pub fn is_critical(&self) -> bool {
        matches!(self, Term::Critical)
    }

    /// Constants (ordinary or critical) are never rebound by a substitution.
    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Critical | Term::Const(_))
    }

    /// Variables and nulls can be mapped by a homomorphism.
    pub fn is_bindable(&self) -> bool {
        matches!(self, Term::Var(_) | Term::Null(_))
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Critical => f.write_str("*"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Null(n) => write!(f, "_n{n}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A relational atom `R(t1, ..., tk)`. Positions are 1-based in
/// [`Atom::term_at`] and 0-based when indexing `terms` directly.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub relation: Symbol,
    pub terms: Vec<Term>,
}

impl Atom {
    pub fn new(relation: impl Into<Symbol>, terms: Vec<Term>) -> Self {
        Atom {
            relation: relation.into(),
            terms,
        }
    }

    pub fn arity(&self) -> usize {
        self.terms.len()
    }

    /// The term at 1-based position `i`.
    pub fn term_at(&self, i: usize) -> Option<&Term> {
        i.checked_sub(1).and_then(|i| self.terms.get(i))
    }

    pub fn is_ground(&self) -> bool {
        self.terms.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.terms.iter().filter_map(Term::as_var)
    }

    pub fn nulls(&self) -> impl Iterator<Item = NullId> + '_ {
        self.terms.iter().filter_map(|t| match t {
            Term::Null(n) => Some(*n),
            _ => None,
        })
    }

    /// True if some variable occurs at two positions of this atom.
    pub fn has_repeated_var(&self) -> bool {
        let vars: Vec<&Symbol> = self.vars().collect();
        vars.iter().enumerate().any(|(i, v)| vars[i + 1..].contains(v))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Writes atoms separated by `", "`.
pub(crate) fn write_conjunction(f: &mut fmt::Formatter<'_>, atoms: &[Atom]) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_uses_star_and_null_prefix() {
        let a = Atom::new("R", vec![Term::Critical, Term::Null(3), Term::var("x")]);
        assert_eq!(a.to_string(), "R(*,_n3,x)");
        assert_eq!(a.term_at(2), Some(&Term::Null(3)));
        assert_eq!(a.term_at(0), None);
    }

    #[test]
    fn repeated_var_is_per_atom() {
        let a = Atom::new("R", vec![Term::var("x"), Term::var("x"), Term::var("y")]);
        let b = Atom::new("R", vec![Term::var("x"), Term::var("y")]);
        assert!(a.has_repeated_var());
        assert!(!b.has_repeated_var());
    }
}
