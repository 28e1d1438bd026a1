//! Two-phase repair of unsafe tgds.
//!
//! The first phase ([`frepair`]) makes every tgd partially safe on its own.
//! The second phase ([`srepair`]) runs the visible chase, picks unsafe bags
//! and applies [`hide_exported`] or [`modify_body`] until no unsafe bag is
//! left. Every change is recorded as a [`RepairStep`].

mod frepair;
mod hide;
mod modify;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use frepair::{frepair, frepair_candidates, FirstPhase};
pub use hide::{hide_candidates, hide_exported};
pub use modify::{modify_body, modify_candidates};

use crate::chase::{BagForest, BagId, BagOrigin, Recompute, VisibleChase};
use crate::error::{Error, Result};
use crate::model::{parse_tgd, Symbol, Tgd, TgdId};
use crate::preference::{tournament, Prefer};
use crate::safety::{check_forest, unsafe_bags, PolicyContext, SafetyReport};

/// Default bound on single-bag iterations of the second phase.
pub const DEFAULT_MAX_ITERATIONS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RepairConfig {
    pub max_iterations: usize,
    pub recompute: Recompute,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            recompute: Recompute::Incremental,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Per-tgd rewriting towards partial safety.
    First,
    /// Bag-driven repair.
    Second,
    /// Hiding or dropping left over after the iteration bound.
    Enforce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairKind {
    /// A first-phase rewrite: joins broken and/or variables hidden.
    BreakJoin,
    HideExported,
    ModifyBody,
    DropTgd,
}

/// One change to the tgd set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepairStep {
    pub iteration: usize,
    pub phase: Phase,
    pub kind: RepairKind,
    pub tgd: TgdId,
    pub before: String,
    /// The replacement, or `None` when the tgd was dropped.
    pub after: Option<String>,
}

/// Time spent per phase and work counters.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RepairStats {
    #[serde(serialize_with = "ser_ms")]
    pub chase_time: Duration,
    #[serde(serialize_with = "ser_ms")]
    pub safety_time: Duration,
    #[serde(serialize_with = "ser_ms")]
    pub total_time: Duration,
    pub iterations: usize,
    pub chase_runs: usize,
    pub bags: usize,
    pub active_triggers: usize,
}

fn ser_ms<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1000.0)
}

/// Result of [`repair`].
#[derive(Clone, Debug)]
pub struct RepairOutcome {
    pub tgds: Vec<Tgd>,
    pub log: Vec<RepairStep>,
    /// Safety of `tgds`, re-checked after repair.
    pub report: SafetyReport,
    pub warnings: Vec<String>,
    pub stats: RepairStats,
}

impl RepairOutcome {
    /// The log as JSON lines.
    pub fn log_jsonl(&self) -> String {
        self.log
            .iter()
            .map(|s| serde_json::to_string(s).expect("step serializes") + "\n")
            .collect()
    }
}

/// Applies a step log to the original tgds.
pub fn replay(original: &[Tgd], log: &[RepairStep]) -> Result<Vec<Tgd>> {
    let mut out: Vec<Option<Tgd>> = original.iter().cloned().map(Some).collect();
    for step in log {
        let slot = out
            .iter_mut()
            .find(|t| t.as_ref().is_some_and(|t| t.id == step.tgd))
            .ok_or_else(|| Error::InvalidTgd(format!("step refers to missing tgd {}", step.tgd)))?;
        *slot = match &step.after {
            Some(text) => Some(parse_tgd(text)?.with_id(step.tgd)),
            None => None,
        };
    }
    Ok(out.into_iter().flatten().collect())
}

/// Mutable state of one repair run.
struct Session<'a> {
    policy: &'a PolicyContext,
    prf: &'a dyn Prefer,
    config: RepairConfig,
    chase: VisibleChase,
    tgds: Vec<Tgd>,
    log: Vec<RepairStep>,
    stats: RepairStats,
    iteration: usize,
}

impl<'a> Session<'a> {
    fn new(policy: &'a PolicyContext, prf: &'a dyn Prefer, config: RepairConfig, tgds: Vec<Tgd>) -> Self {
        Session {
            policy,
            prf,
            config,
            chase: VisibleChase::new(config.recompute),
            tgds,
            log: Vec::new(),
            stats: RepairStats::default(),
            iteration: 0,
        }
    }

    fn forest(&mut self) -> BagForest {
        let t = Instant::now();
        let f = self.chase.run(&self.tgds, self.policy.source());
        self.stats.chase_time += t.elapsed();
        self.stats.chase_runs += 1;
        self.stats.bags = f.bags.len();
        self.stats.active_triggers += f.stats.tgd_triggers + f.stats.egd_triggers;
        f
    }

    fn unsafe_bags(&mut self, forest: &BagForest) -> Vec<BagId> {
        let t = Instant::now();
        let out = unsafe_bags(forest, self.policy.instance());
        self.stats.safety_time += t.elapsed();
        out
    }

    fn check(&mut self, forest: &BagForest) -> SafetyReport {
        let t = Instant::now();
        let r = check_forest(forest, self.policy.instance());
        self.stats.safety_time += t.elapsed();
        r
    }

    fn current(&self, id: TgdId) -> Option<&Tgd> {
        self.tgds.iter().find(|t| t.id == id)
    }

    fn install(&mut self, phase: Phase, kind: RepairKind, id: TgdId, after: Option<Tgd>) {
        let Some(pos) = self.tgds.iter().position(|t| t.id == id) else {
            return;
        };
        let before = self.tgds[pos].to_string();
        let after_text = after.as_ref().map(Tgd::to_string);
        if after_text.as_deref() == Some(before.as_str()) {
            return;
        }
        log::debug!("{phase:?} {kind:?} {id}: {before} => {after_text:?}");
        self.log.push(RepairStep {
            iteration: self.iteration,
            phase,
            kind,
            tgd: id,
            before,
            after: after_text,
        });
        match after {
            Some(t) => self.tgds[pos] = t.with_id(id),
            None => {
                self.tgds.remove(pos);
            }
        }
    }

    /// Hides `vars` in the current version of tgd `id`; drops it if nothing
    /// is left to hide.
    fn hide_vars(&mut self, phase: Phase, id: TgdId, vars: &BTreeSet<Symbol>) {
        let Some(cur) = self.current(id).cloned() else { return };
        let frontier: BTreeSet<Symbol> = cur.frontier().into_iter().collect();
        if frontier.is_disjoint(vars) {
            self.install(phase, RepairKind::DropTgd, id, None);
        } else {
            self.install(phase, RepairKind::HideExported, id, Some(cur.hide(vars)));
        }
    }

    /// Last resort for an unsafe bag: hide the variables its egd equates, or
    /// drop the tgd of an inverse bag.
    fn enforce_bag(&mut self, forest: &BagForest, id: BagId) {
        match forest.bag(id).origin {
            BagOrigin::Inverse(t) => self.install(Phase::Enforce, RepairKind::DropTgd, t, None),
            BagOrigin::Egd(e) => {
                let egd = &forest.egds[e];
                let vars: BTreeSet<Symbol> = egd.equated.iter().cloned().collect();
                self.hide_vars(Phase::Enforce, egd.origin, &vars);
            }
        }
    }

    fn first_phase(&mut self) {
        let vis_v = self.policy.instance();
        for t in self.tgds.clone() {
            match frepair_candidates(&t, vis_v) {
                FirstPhase::Unchanged => {}
                FirstPhase::NoHomomorphism => {
                    self.install(Phase::First, RepairKind::DropTgd, t.id, None);
                }
                FirstPhase::Repairs(rs) => {
                    let best = tournament(&rs, self.prf).expect("non-empty candidates");
                    self.install(Phase::First, RepairKind::BreakJoin, t.id, Some(best));
                }
            }
        }
    }

    /// The first (depth-1, depth-2) bag pair below `id` whose depth-1 origin
    /// repeats a variable inside an atom, with the rewrite it yields.
    fn modify_option(&self, forest: &BagForest, id: BagId) -> Option<(TgdId, Tgd)> {
        for b2 in forest.derivation(id) {
            if forest.bag(b2).depth != 2 {
                continue;
            }
            for &b1 in &forest.bag(b2).predecessors {
                if forest.bag(b1).depth != 1 {
                    continue;
                }
                let (ta, tb) = (forest.origin_tgd(b1), forest.origin_tgd(b2));
                let (Some(mu_a), Some(mu_b)) = (self.current(ta), self.current(tb)) else {
                    continue;
                };
                if !mu_a.has_repeated_body_var() {
                    continue;
                }
                if let Some(r) = modify_body(mu_a, mu_b, self.prf) {
                    return Some((ta, r));
                }
            }
        }
        None
    }

    /// One second-phase step on the lowest unsafe bag.
    fn repair_one(&mut self, forest: &BagForest, id: BagId) {
        let origin = forest.origin_tgd(id);
        let Some(mu) = self.current(origin).cloned() else {
            return;
        };
        let hidden = hide_exported(forest, id, &mu, self.policy.instance(), self.prf);
        let modified = self.modify_option(forest, id);
        match (hidden, modified) {
            (Ok(Some(h)), Some((target, m))) => {
                let pair = [h.clone(), m.clone()];
                let winner = tournament(&pair, self.prf).expect("two candidates");
                if winner == m && winner != h {
                    self.install(Phase::Second, RepairKind::ModifyBody, target, Some(m));
                } else {
                    self.install(Phase::Second, RepairKind::HideExported, origin, Some(h));
                }
            }
            (Ok(Some(h)), None) => self.install(Phase::Second, RepairKind::HideExported, origin, Some(h)),
            (_, Some((target, m))) => self.install(Phase::Second, RepairKind::ModifyBody, target, Some(m)),
            (Err(_), None) => self.install(Phase::Second, RepairKind::DropTgd, origin, None),
            (Ok(None), None) => self.enforce_bag(forest, id),
        }
    }

    /// The bulk step after the iteration bound: hide on maximal bags, drop
    /// the origins of the others.
    fn repair_all(&mut self, forest: &BagForest, bags: &[BagId]) {
        let mut dropped: BTreeSet<TgdId> = BTreeSet::new();
        for &id in bags {
            if !forest.is_maximal(id) {
                dropped.insert(forest.origin_tgd(id));
            }
        }
        for &id in bags {
            let origin = forest.origin_tgd(id);
            if dropped.contains(&origin) || !forest.is_maximal(id) {
                continue;
            }
            let Some(cur) = self.current(origin).cloned() else {
                continue;
            };
            let orig = cur;
            match hide_exported(forest, id, &orig, self.policy.instance(), self.prf) {
                Ok(Some(h)) => {
                    let keep: BTreeSet<Symbol> = h.frontier().into_iter().collect();
                    let vars: BTreeSet<Symbol> = orig.frontier().into_iter().filter(|v| !keep.contains(v)).collect();
                    self.hide_vars(Phase::Second, origin, &vars);
                }
                Ok(None) => self.enforce_bag(forest, id),
                Err(_) => {
                    dropped.insert(origin);
                }
            }
        }
        for id in dropped {
            self.install(Phase::Second, RepairKind::DropTgd, id, None);
        }
    }

    fn second_phase(&mut self) {
        let n = self.config.max_iterations;
        let mut i = 0;
        while i <= n {
            self.iteration = i;
            self.stats.iterations = i + 1;
            let forest = self.forest();
            let mut bags = self.unsafe_bags(&forest);
            if bags.is_empty() {
                break;
            }
            if i < n {
                bags.sort_by_key(|&b| (forest.bag(b).depth, b));
                self.repair_one(&forest, bags[0]);
            } else {
                self.repair_all(&forest, &bags);
            }
            i += 1;
        }
        self.iteration = i.min(n) + 1;
        loop {
            let forest = self.forest();
            let report = self.check(&forest);
            if report.is_safe() {
                break;
            }
            let bags = self.unsafe_bags(&forest);
            let before = self.tgds.len() + self.tgds.iter().map(Tgd::exported_count).sum::<usize>();
            if bags.is_empty() {
                for b in forest.bags.iter().filter(|b| b.depth > 1) {
                    self.enforce_bag(&forest, b.id);
                }
            } else {
                for id in bags {
                    self.enforce_bag(&forest, id);
                }
            }
            let after = self.tgds.len() + self.tgds.iter().map(Tgd::exported_count).sum::<usize>();
            if after == before {
                // Nothing left to hide: drop every tgd named by the report.
                for id in report.offending_tgds {
                    self.install(Phase::Enforce, RepairKind::DropTgd, id, None);
                }
                if self.tgds.len() + self.tgds.iter().map(Tgd::exported_count).sum::<usize>() == before {
                    let all: Vec<TgdId> = self.tgds.iter().map(|t| t.id).collect();
                    for id in all {
                        self.install(Phase::Enforce, RepairKind::DropTgd, id, None);
                    }
                }
            }
        }
    }
}

/// First-phase repair with logging, on its own.
pub fn frepair_logged(sigma: &[Tgd], policy: &PolicyContext, prf: &dyn Prefer) -> (Vec<Tgd>, Vec<RepairStep>) {
    let mut s = Session::new(policy, prf, RepairConfig::default(), sigma.to_vec());
    s.first_phase();
    (s.tgds, s.log)
}

/// Second-phase repair of partially safe tgds.
pub fn srepair(sigma: &[Tgd], policy: &PolicyContext, prf: &dyn Prefer, config: RepairConfig) -> RepairOutcome {
    run(sigma, policy, prf, config, false)
}

/// Full pipeline: first phase, then second phase, then a final safety check.
pub fn repair(sigma: &[Tgd], policy: &PolicyContext, prf: &dyn Prefer, config: RepairConfig) -> RepairOutcome {
    run(sigma, policy, prf, config, true)
}

fn run(sigma: &[Tgd], policy: &PolicyContext, prf: &dyn Prefer, config: RepairConfig, first: bool) -> RepairOutcome {
    let start = Instant::now();
    let mut s = Session::new(policy, prf, config, sigma.to_vec());
    if first {
        s.first_phase();
    }
    s.second_phase();
    let forest = s.forest();
    let report = s.check(&forest);
    s.stats.total_time = start.elapsed();
    let mut warnings = Vec::new();
    if s.tgds.is_empty() && !sigma.is_empty() {
        warnings.push("every tgd was dropped; the repaired mapping is empty".to_string());
    }
    for step in s.log.iter().filter(|st| st.kind == RepairKind::DropTgd) {
        warnings.push(format!("dropped {}: {}", step.tgd, step.before));
    }
    RepairOutcome {
        tgds: s.tgds,
        log: s.log,
        report,
        warnings,
        stats: s.stats,
    }
}
