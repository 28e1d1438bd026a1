//! First-phase repair: rewrite each tgd until its body maps into the policy
//! instance with every exported variable sent to `*`.

use std::collections::{BTreeMap, BTreeSet};

use crate::homomorphism::find_homomorphisms;
use crate::model::{Atom, Instance, Substitution, Symbol, Term, Tgd, VarGen};
use crate::preference::{tournament, Prefer};

/// What the first phase can do with one tgd.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FirstPhase {
    /// Some body homomorphism already respects the exported variables.
    Unchanged,
    /// Distinct rewrites, sorted by serialized form.
    Repairs(Vec<Tgd>),
    /// The body does not map into the policy instance at all.
    NoHomomorphism,
}

/// One atom per body atom, with pairwise distinct fresh variables.
fn fresh_atoms(tgd: &Tgd) -> Vec<Atom> {
    tgd.body()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let terms = (0..a.arity())
                .map(|p| Term::Var(Symbol::new(&format!("#c{i}_{p}"))))
                .collect();
            Atom::new(a.relation.clone(), terms)
        })
        .collect()
}

/// Rewrites `tgd` against one assignment `xi` of the fresh atoms. Returns
/// `None` when no position had to change.
fn rewrite(tgd: &Tgd, fresh: &[Atom], xi: &Substitution) -> Option<Tgd> {
    let frontier: BTreeSet<Symbol> = tgd.frontier().into_iter().collect();
    let mut used: BTreeSet<Symbol> = tgd.body_vars().into_iter().chain(tgd.head_vars()).collect();
    let mut vars = VarGen::new();
    let mut psi: BTreeMap<Symbol, Term> = BTreeMap::new();
    let mut renamed: Vec<(Symbol, Symbol)> = Vec::new();
    let mut body = tgd.body().to_vec();
    let mut changed = false;
    for (i, atom) in tgd.body().iter().enumerate() {
        for (p, t) in atom.terms.iter().enumerate() {
            let x = t.as_var().expect("tgd bodies hold variables");
            let image = xi.apply_term(&fresh[i].terms[p]);
            let violates = (frontier.contains(x) && image != Term::Critical) || psi.get(x).is_some_and(|v| *v != image);
            if violates {
                let reuse = renamed
                    .iter()
                    .find(|(orig, new)| orig == x && psi.get(new) == Some(&image))
                    .map(|(_, new)| new.clone());
                let x2 = reuse.unwrap_or_else(|| {
                    let v = vars.fresh_avoiding(&used);
                    used.insert(v.clone());
                    renamed.push((x.clone(), v.clone()));
                    psi.insert(v.clone(), image.clone());
                    v
                });
                body[i].terms[p] = Term::Var(x2);
                changed = true;
            } else if !psi.contains_key(x) {
                psi.insert(x.clone(), image);
            }
        }
    }
    changed.then(|| tgd.with_body(body))
}

/// All first-phase rewrites of `tgd` against `vis_v`.
pub fn frepair_candidates(tgd: &Tgd, vis_v: &Instance) -> FirstPhase {
    let fresh = fresh_atoms(tgd);
    let mut repairs: BTreeMap<String, Tgd> = BTreeMap::new();
    let mut any = false;
    for xi in find_homomorphisms(&fresh, vis_v, &Substitution::new()) {
        any = true;
        match rewrite(tgd, &fresh, &xi) {
            None => return FirstPhase::Unchanged,
            Some(r) => {
                repairs.entry(r.to_string()).or_insert(r);
            }
        }
    }
    if any {
        FirstPhase::Repairs(repairs.into_values().collect())
    } else {
        FirstPhase::NoHomomorphism
    }
}

/// Applies the first phase to every tgd: unchanged tgds are kept, tgds with
/// no homomorphism are dropped, the rest are replaced by the preferred
/// rewrite.
pub fn frepair(sigma: &[Tgd], vis_v: &Instance, prf: &dyn Prefer) -> Vec<Tgd> {
    sigma
        .iter()
        .filter_map(|t| match frepair_candidates(t, vis_v) {
            FirstPhase::Unchanged => Some(t.clone()),
            FirstPhase::NoHomomorphism => None,
            FirstPhase::Repairs(rs) => tournament(&rs, prf).ok(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, parse_tgd};
    use crate::preference::p_max;

    fn policy() -> Instance {
        parse_instance("R1(*,_1,_2). S1(_1,_2,_2). S1(_1,_3,*). S1(_1,*,*).").unwrap()
    }

    #[test]
    fn three_repairs() {
        let mu = parse_tgd("R1(x,y,z), S1(y,z,z) -> T1(x,z)").unwrap();
        let FirstPhase::Repairs(rs) = frepair_candidates(&mu, &policy()) else {
            panic!("expected repairs");
        };
        let got: BTreeSet<String> = rs.iter().map(Tgd::canonical).collect();
        let want: BTreeSet<String> = [
            "R1(x,y,z1), S1(y,z1,z1) -> T1(x)",
            "R1(x,y,z1), S1(y,z2,z) -> T1(x,z)",
            "R1(x,y,z1), S1(y,z,z) -> T1(x,z)",
        ]
        .iter()
        .map(|t| parse_tgd(t).unwrap().canonical())
        .collect();
        assert_eq!(got, want);
        let best = frepair(&[mu], &policy(), &p_max);
        assert_eq!(
            best[0].canonical(),
            parse_tgd("R1(x,y,z1), S1(y,z,z) -> T1(x,z)").unwrap().canonical()
        );
    }

    #[test]
    fn safe_tgd_is_kept_and_unknown_relation_dropped() {
        let ok = parse_tgd("R1(x,y,z) -> T(x)").unwrap();
        assert_eq!(frepair_candidates(&ok, &policy()), FirstPhase::Unchanged);
        let missing = parse_tgd("Q(x) -> T(x)").unwrap();
        assert_eq!(frepair_candidates(&missing, &policy()), FirstPhase::NoHomomorphism);
        assert!(frepair(&[missing], &policy(), &p_max).is_empty());
    }
}
