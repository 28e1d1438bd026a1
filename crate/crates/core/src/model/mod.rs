//! Terms, atoms, dependencies, schemas and instances, with their text formats.

mod dependency;
mod instance;
mod parse;
mod schema;
mod subst;
mod term;

pub use dependency::{inverse, Cq, DerivedEgd, Egd, Tgd, TgdId};
pub use instance::Instance;
pub(crate) use instance::RelIndex;
pub use parse::{parse_dependencies, parse_instance, parse_schema, parse_tgd, serialize_dependencies};
pub use schema::{critical_instance, Schema};
pub use subst::Substitution;
pub use term::{Atom, NullId, Symbol, Term};

/// Hands out fresh labeled nulls `_n1, _n2, ...`; never repeats an id.
#[derive(Clone, Debug, Default)]
pub struct NullGen {
    next: NullId,
}

impl NullGen {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts after every null already used in `inst`.
    pub fn after(inst: &Instance) -> Self {
        NullGen {
            next: inst.nulls().last().copied().unwrap_or(0),
        }
    }

    pub fn fresh(&mut self) -> Term {
        self.next += 1;
        Term::Null(self.next)
    }
}

/// Hands out fresh variables `v1, v2, ...`, skipping names in use.
#[derive(Clone, Debug, Default)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn new() -> Self {
        Self::default()
    }

    /// A variable named `v<k>` that does not occur in `tgd`.
    pub fn fresh_for(&mut self, tgd: &Tgd) -> Symbol {
        let used: std::collections::BTreeSet<Symbol> = tgd.body_vars().into_iter().chain(tgd.head_vars()).collect();
        self.fresh_avoiding(&used)
    }

    pub fn fresh_avoiding(&mut self, used: &std::collections::BTreeSet<Symbol>) -> Symbol {
        loop {
            self.next += 1;
            let s = Symbol::new(&format!("v{}", self.next));
            if !used.contains(&s) {
                return s;
            }
        }
    }
}
