//! Backtracking enumeration of homomorphisms from conjunctions of atoms into
//! instances.
//!
//! Variables and labeled nulls of the pattern are bindable; constants and the
//! critical constant `*` only match themselves, so every homomorphism found
//! here preserves `*`.

use crate::model::{Atom, DerivedEgd, Instance, RelIndex, Substitution, Term, Tgd};

pub use crate::model::Substitution as Homomorphism;

struct Frame {
    atom: usize,
    cands: Vec<u32>,
    next: usize,
    bound: Vec<Term>,
}

enum State {
    Start,
    Running,
    Done,
}

/// Lazy, duplicate-free sequence of homomorphisms; see [`find_homomorphisms`].
pub struct Homomorphisms<'a> {
    pattern: &'a [Atom],
    target: &'a Instance,
    sub: Substitution,
    used: Vec<bool>,
    stack: Vec<Frame>,
    state: State,
}

/// Enumerates every extension of `fixed` that maps each atom of `pattern` to
/// a fact of `target`.
///
/// Atoms are matched most-constrained first (fewest unbound terms, then
/// fewest candidate facts, then pattern order); candidate facts are tried in
/// insertion order. The sequence is deterministic and has no duplicates.
pub fn find_homomorphisms<'a>(pattern: &'a [Atom], target: &'a Instance, fixed: &Substitution) -> Homomorphisms<'a> {
    Homomorphisms {
        pattern,
        target,
        sub: fixed.clone(),
        used: vec![false; pattern.len()],
        stack: Vec::new(),
        state: State::Start,
    }
}

/// True iff some extension of `fixed` maps `pattern` into `target`.
pub fn exists_homomorphism(pattern: &[Atom], target: &Instance, fixed: &Substitution) -> bool {
    find_homomorphisms(pattern, target, fixed).next().is_some()
}

/// The first homomorphism, if any.
pub fn first_homomorphism(pattern: &[Atom], target: &Instance, fixed: &Substitution) -> Option<Substitution> {
    find_homomorphisms(pattern, target, fixed).next()
}

/// Checks that `h` maps every atom of `pattern` onto a fact of `target`.
pub fn verify_homomorphism(pattern: &[Atom], target: &Instance, h: &Substitution) -> bool {
    pattern
        .iter()
        .all(|a| a.terms.iter().all(|t| !t.is_bindable() || h.contains(t)) && target.contains(&h.apply_atom(a)))
}

fn image<'s>(sub: &'s Substitution, t: &'s Term) -> Option<&'s Term> {
    if t.is_bindable() {
        sub.get(t)
    } else {
        Some(t)
    }
}

fn candidates(atom: &Atom, target: &Instance, sub: &Substitution) -> Vec<u32> {
    let Some(rel) = target.index().relation(&atom.relation, atom.arity()) else {
        return Vec::new();
    };
    narrowest(rel, atom, sub).to_vec()
}

fn narrowest<'r>(rel: &'r RelIndex, atom: &Atom, sub: &Substitution) -> &'r [u32] {
    let mut best: &[u32] = &rel.facts;
    if let Some(maps) = &rel.positions {
        for (p, t) in atom.terms.iter().enumerate() {
            if let Some(img) = image(sub, t) {
                let list = maps[p].get(img).map_or(&[][..], Vec::as_slice);
                if list.len() < best.len() {
                    best = list;
                }
            }
        }
    }
    best
}

fn unbound(atom: &Atom, sub: &Substitution) -> usize {
    let mut seen: Vec<&Term> = Vec::new();
    for t in &atom.terms {
        if t.is_bindable() && !sub.contains(t) && !seen.contains(&t) {
            seen.push(t);
        }
    }
    seen.len()
}

fn try_match(atom: &Atom, fact: &Atom, sub: &mut Substitution, bound: &mut Vec<Term>) -> bool {
    for (pt, ft) in atom.terms.iter().zip(&fact.terms) {
        let ok = match image(sub, pt) {
            Some(img) => img == ft,
            None => {
                sub.insert(pt.clone(), ft.clone());
                bound.push(pt.clone());
                true
            }
        };
        if !ok {
            return false;
        }
    }
    true
}

impl Homomorphisms<'_> {
    fn push_next_frame(&mut self) {
        let mut best: Option<(usize, usize, usize, Vec<u32>)> = None;
        for (i, a) in self.pattern.iter().enumerate() {
            if self.used[i] {
                continue;
            }
            let free = unbound(a, &self.sub);
            let cands = candidates(a, self.target, &self.sub);
            let better = match &best {
                None => true,
                Some((f, n, _, _)) => (free, cands.len()) < (*f, *n),
            };
            if better {
                let empty = cands.is_empty();
                best = Some((free, cands.len(), i, cands));
                if empty {
                    break;
                }
            }
        }
        let (_, _, atom, cands) = best.expect("an unused atom remains");
        self.used[atom] = true;
        self.stack.push(Frame {
            atom,
            cands,
            next: 0,
            bound: Vec::new(),
        });
    }
}

impl Iterator for Homomorphisms<'_> {
    type Item = Substitution;

    fn next(&mut self) -> Option<Substitution> {
        match self.state {
            State::Done => return None,
            State::Start => {
                if self.pattern.is_empty() {
                    self.state = State::Done;
                    return Some(self.sub.clone());
                }
                self.state = State::Running;
                self.push_next_frame();
            }
            State::Running => {}
        }
        loop {
            let Some(top) = self.stack.last_mut() else {
                self.state = State::Done;
                return None;
            };
            for t in top.bound.drain(..) {
                self.sub.remove(&t);
            }
            if top.next >= top.cands.len() {
                self.used[top.atom] = false;
                self.stack.pop();
                continue;
            }
            let fact_idx = top.cands[top.next] as usize;
            top.next += 1;
            let atom = &self.pattern[top.atom];
            let fact = self.target.get(fact_idx).expect("indexed fact exists");
            if try_match(atom, fact, &mut self.sub, &mut top.bound) {
                if self.used.iter().all(|&u| u) {
                    return Some(self.sub.clone());
                }
                self.push_next_frame();
            }
        }
    }
}

/// A dependency whose triggers can be enumerated.
#[derive(Clone, Copy, Debug)]
pub enum Dependency<'a> {
    Tgd(&'a Tgd),
    Egd(&'a DerivedEgd),
}

/// Active triggers of `dep` in `inst`: for a tgd, body homomorphisms with no
/// extension to the head; for a derived egd, body homomorphisms sending some
/// equated variable to a term other than `*`.
pub fn active_triggers(dep: Dependency<'_>, inst: &Instance) -> Vec<Substitution> {
    match dep {
        Dependency::Tgd(t) => find_homomorphisms(t.body(), inst, &Substitution::new())
            .filter(|h| is_active_tgd_trigger(t, inst, h))
            .collect(),
        Dependency::Egd(e) => find_homomorphisms(&e.body, inst, &Substitution::new())
            .filter(|h| is_active_egd_trigger(e, h))
            .collect(),
    }
}

/// True iff `h` cannot be extended to map the head of `tgd` into `inst`.
pub fn is_active_tgd_trigger(tgd: &Tgd, inst: &Instance, h: &Substitution) -> bool {
    !exists_homomorphism(tgd.head(), inst, h)
}

/// True iff `h` sends some equated variable of `egd` somewhere other than `*`.
pub fn is_active_egd_trigger(egd: &DerivedEgd, h: &Substitution) -> bool {
    egd.equated
        .iter()
        .any(|x| h.apply_term(&Term::Var(x.clone())) != Term::Critical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, parse_tgd};

    fn atoms(tgd: &str) -> Vec<Atom> {
        parse_tgd(tgd).unwrap().body().to_vec()
    }

    #[test]
    fn fresh_atoms_into_example_instance() {
        let vis = parse_instance("R1(*,_1,_2). S1(_1,_2,_2). S1(_1,_3,*). S1(_1,*,*).").unwrap();
        let pattern = atoms("R1(x1,x2,x3), S1(x4,x5,x6) -> T()");
        let homs: Vec<_> = find_homomorphisms(&pattern, &vis, &Substitution::new()).collect();
        assert_eq!(homs.len(), 3);
        assert!(homs.iter().all(|h| verify_homomorphism(&pattern, &vis, h)));
    }

    #[test]
    fn empty_pattern_yields_fixed_once() {
        let vis = parse_instance("R(*).").unwrap();
        let fixed: Substitution = [(Term::var("x"), Term::Critical)].into_iter().collect();
        let homs: Vec<_> = find_homomorphisms(&[], &vis, &fixed).collect();
        assert_eq!(homs, vec![fixed]);
    }

    #[test]
    fn joins_are_respected() {
        let inst = parse_instance("R(a,b). R(b,c). S(c).").unwrap();
        let pattern = atoms("R(x,y), R(y,z), S(z) -> T()");
        let homs: Vec<_> = find_homomorphisms(&pattern, &inst, &Substitution::new()).collect();
        assert_eq!(homs.len(), 1);
        assert_eq!(homs[0].apply_term(&Term::var("x")), Term::constant("a"));
    }

    #[test]
    fn nulls_are_bindable_and_star_is_fixed() {
        let a = parse_instance("R(_x, *).").unwrap();
        let b = parse_instance("R(*, *).").unwrap();
        let c = parse_instance("R(*, _y).").unwrap();
        let pattern: Vec<Atom> = a.iter().cloned().collect();
        assert!(exists_homomorphism(&pattern, &b, &Substitution::new()));
        assert!(!exists_homomorphism(&pattern, &c, &Substitution::new()));
    }

    #[test]
    fn large_instances_use_position_index() {
        let text: String = (0..100).map(|i| format!("R(c{i}, c{}).", i + 1)).collect();
        let inst = parse_instance(&text).unwrap();
        let pattern = atoms("R(x,y), R(y,z) -> T()");
        assert_eq!(find_homomorphisms(&pattern, &inst, &Substitution::new()).count(), 99);
    }

    #[test]
    fn tgd_triggers() {
        let tgd = parse_tgd("R(x) -> S(x)").unwrap();
        let inst = parse_instance("R(a). R(b). S(a).").unwrap();
        let trig = active_triggers(Dependency::Tgd(&tgd), &inst);
        assert_eq!(trig.len(), 1);
        assert_eq!(trig[0].apply_term(&Term::var("x")), Term::constant("b"));
        assert!(active_triggers(Dependency::Tgd(&tgd), &Instance::new()).is_empty());
    }
}
