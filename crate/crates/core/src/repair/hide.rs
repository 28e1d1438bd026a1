//! Hiding exported variables that an unsafe bag reveals.

use std::collections::{BTreeMap, BTreeSet};

use crate::chase::{BagForest, BagId};
use crate::error::{Error, Result};
use crate::homomorphism::find_homomorphisms;
use crate::model::{Instance, NullId, Substitution, Symbol, Term, Tgd};
use crate::preference::{tournament, Prefer};

/// Candidate tgds obtained by hiding, sorted by serialized form.
///
/// The bag's premise is turned into a pattern by replacing nulls with
/// variables; for each homomorphism into `vis_v`, every exported variable
/// that the bag's trigger sent to a null mapped to something other than `*`
/// is hidden. Errors when the premise has no homomorphism at all.
pub fn hide_candidates(forest: &BagForest, id: BagId, tgd: &Tgd, vis_v: &Instance) -> Result<Vec<Tgd>> {
    let bag = forest.bag(id);
    let to_var = |n: NullId| Term::Var(Symbol::new(&format!("#n{n}")));
    let nu: Substitution = bag
        .premise
        .iter()
        .flat_map(|f| f.nulls())
        .map(|n| (Term::Null(n), to_var(n)))
        .collect();
    let pattern = nu.apply_atoms(&bag.premise);
    let frontier = tgd.frontier();
    let mut out: BTreeMap<String, Tgd> = BTreeMap::new();
    let mut any = false;
    for xi in find_homomorphisms(&pattern, vis_v, &Substitution::new()) {
        any = true;
        let hidden: BTreeSet<Symbol> = frontier
            .iter()
            .filter(|y| match bag.trigger.apply_term(&Term::Var((*y).clone())) {
                Term::Null(n) => xi.apply_term(&to_var(n)) != Term::Critical,
                _ => false,
            })
            .cloned()
            .collect();
        if !hidden.is_empty() {
            let r = tgd.hide(&hidden);
            out.entry(r.to_string()).or_insert(r);
        }
    }
    if !any {
        return Err(Error::NoHomomorphism);
    }
    Ok(out.into_values().collect())
}

/// The preferred hiding repair of the tgd behind bag `id`, or `None` when no
/// homomorphism calls for hiding anything.
pub fn hide_exported(
    forest: &BagForest,
    id: BagId,
    tgd: &Tgd,
    vis_v: &Instance,
    prf: &dyn Prefer,
) -> Result<Option<Tgd>> {
    let cands = hide_candidates(forest, id, tgd, vis_v)?;
    if cands.is_empty() {
        return Ok(None);
    }
    tournament(&cands, prf).map(Some)
}
