//! Breaking body joins of one tgd so another tgd's egd no longer applies.

use std::collections::{BTreeMap, BTreeSet};

use crate::homomorphism::find_homomorphisms;
use crate::model::{Atom, Instance, Substitution, Symbol, Term, Tgd, VarGen};
use crate::preference::{tournament, Prefer};

/// Largest number of repeated-variable positions whose subsets are explored.
const MAX_POSITIONS: usize = 16;

/// Turns variables into constants so a body can serve as a target instance.
fn freeze(a: &Atom) -> Atom {
    Atom::new(
        a.relation.clone(),
        a.terms
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Const(v.clone()),
                other => other.clone(),
            })
            .collect(),
    )
}

/// Candidate rewrites of `mu_a`, sorted by serialized form.
///
/// For each homomorphism from the body of `mu_b` into the body of `mu_a`
/// that sends an exported variable of `mu_b` to a non-exported variable of
/// `mu_a`, the positions of the image atoms that hold a variable repeated
/// within its atom are collected; every non-empty strict subset of those
/// positions yields a candidate in which the chosen positions get fresh
/// variables.
pub fn modify_candidates(mu_a: &Tgd, mu_b: &Tgd) -> Vec<Tgd> {
    if !mu_a.has_repeated_body_var() {
        return Vec::new();
    }
    let frozen_atoms: Vec<Atom> = mu_a.body().iter().map(freeze).collect();
    let frozen: Instance = frozen_atoms.iter().cloned().collect();
    let fa: BTreeSet<Symbol> = mu_a.frontier().into_iter().collect();
    let fb = mu_b.frontier();
    let mut out: BTreeMap<String, Tgd> = BTreeMap::new();
    for xi in find_homomorphisms(mu_b.body(), &frozen, &Substitution::new()) {
        let qualifies = fb.iter().any(|x| match xi.apply_term(&Term::Var(x.clone())) {
            Term::Const(v) => !fa.contains(&v),
            _ => false,
        });
        if !qualifies {
            continue;
        }
        let image: BTreeSet<usize> = mu_b
            .body()
            .iter()
            .filter_map(|b| {
                let f = xi.apply_atom(b);
                frozen_atoms.iter().position(|g| *g == f)
            })
            .collect();
        let mut positions: Vec<(usize, usize)> = Vec::new();
        for &i in &image {
            let atom = &mu_a.body()[i];
            for (p, t) in atom.terms.iter().enumerate() {
                if atom.terms.iter().filter(|u| *u == t).count() >= 2 {
                    positions.push((i, p));
                }
            }
        }
        if positions.len() < 2 || positions.len() > MAX_POSITIONS {
            continue;
        }
        let full = (1u32 << positions.len()) - 1;
        for mask in 1..full {
            let mut body = mu_a.body().to_vec();
            let mut used: BTreeSet<Symbol> = mu_a.body_vars().into_iter().chain(mu_a.head_vars()).collect();
            let mut vars = VarGen::new();
            for (k, &(i, p)) in positions.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    let v = vars.fresh_avoiding(&used);
                    used.insert(v.clone());
                    body[i].terms[p] = Term::Var(v);
                }
            }
            let r = mu_a.with_body(body);
            out.entry(r.to_string()).or_insert(r);
        }
    }
    out.into_values().collect()
}

/// The preferred rewrite of `mu_a`, if any.
pub fn modify_body(mu_a: &Tgd, mu_b: &Tgd, prf: &dyn Prefer) -> Option<Tgd> {
    let cands = modify_candidates(mu_a, mu_b);
    tournament(&cands, prf).ok()
}
