//! Seeded generator of synthetic mapping scenarios.
//!
//! A scenario is a source schema, a set of policy views over it and a set
//! of GAV s-t tgds. Views are produced by four operators: `copy`, `merge`,
//! `delete` (attribute deletion) and `self_join`. All randomness comes from
//! a ChaCha8 stream seeded with [`ScenarioConfig::seed`].

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    parse_dependencies, parse_instance, parse_schema, serialize_dependencies, Atom, Instance, Schema, Symbol, Term,
    Tgd, TgdId,
};
use crate::safety::PolicyContext;

/// Environment variable that overrides configured seeds.
pub const SEED_ENV: &str = "MAPREPAIR_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    Copy,
    Merge,
    Delete,
    SelfJoin,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Operator::Copy, Operator::Merge, Operator::Delete, Operator::SelfJoin];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Number of s-t tgds.
    pub n_dep: usize,
    /// Maximum number of body atoms per tgd.
    pub n_atoms: usize,
    /// Maximum number of exported variables per tgd.
    pub n_vars: usize,
    /// Number of policy views.
    pub n_views: usize,
    /// Maximum relation arity.
    pub max_arity: usize,
    pub seed: u64,
    /// Number of source relations; derived from the other sizes when absent.
    pub n_relations: Option<usize>,
    /// View operators, applied round-robin.
    pub operators: Vec<Operator>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_dep: 10,
            n_atoms: 3,
            n_vars: 5,
            n_views: 8,
            max_arity: 5,
            seed: 0,
            n_relations: None,
            operators: Operator::ALL.to_vec(),
        }
    }
}

impl ScenarioConfig {
    /// Replaces the seed with the value of `MAPREPAIR_SEED` when it is set.
    pub fn with_env_seed(mut self) -> Result<Self> {
        if let Some(seed) = env_seed()? {
            self.seed = seed;
        }
        Ok(self)
    }

    fn relation_count(&self) -> usize {
        self.n_relations.unwrap_or_else(|| (self.n_atoms * 2).clamp(3, 12))
    }

    fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InfeasibleConfig(m.to_string()));
        if self.n_atoms == 0 {
            return fail("n_atoms must be at least 1");
        }
        if self.n_vars == 0 {
            return fail("n_vars must be at least 1");
        }
        if self.max_arity == 0 || self.max_arity > 5 {
            return fail("max_arity must be between 1 and 5");
        }
        if self.relation_count() == 0 {
            return fail("n_relations must be at least 1");
        }
        if self.n_vars > self.n_atoms * self.max_arity {
            return fail(&format!(
                "n_vars = {} exceeds the {} positions available to a body of {} atoms",
                self.n_vars,
                self.n_atoms * self.max_arity,
                self.n_atoms
            ));
        }
        if self.n_views > 0 && self.operators.is_empty() {
            return fail("at least one view operator is required");
        }
        if self.operators.contains(&Operator::SelfJoin) && self.max_arity < 2 {
            return fail("self_join needs max_arity >= 2");
        }
        Ok(())
    }
}

/// Reads `MAPREPAIR_SEED`.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidSeed(format!("{SEED_ENV}={v}"))),
        Err(_) => Ok(None),
    }
}

/// A generated or loaded scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub schema: Schema,
    pub views: Vec<Tgd>,
    /// A policy given directly as an instance instead of views.
    pub policy_instance: Option<Instance>,
    pub tgds: Vec<Tgd>,
    pub config: Option<ScenarioConfig>,
}

impl Scenario {
    /// The policy as a context for safety checks.
    pub fn policy(&self) -> PolicyContext {
        match &self.policy_instance {
            Some(i) => PolicyContext::from_instance(i.clone(), &self.schema),
            None => PolicyContext::from_views(&self.views, &self.schema),
        }
    }

    /// Writes `source.schema`, `views.tgds` (or `policy.instance`),
    /// `mapping.tgds` and, for generated scenarios, `config.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("source.schema"), self.schema.to_text())?;
        match &self.policy_instance {
            Some(i) => fs::write(dir.join("policy.instance"), i.to_text())?,
            None => fs::write(dir.join("views.tgds"), serialize_dependencies(&self.views))?,
        }
        fs::write(dir.join("mapping.tgds"), serialize_dependencies(&self.tgds))?;
        if let Some(c) = &self.config {
            fs::write(dir.join("config.json"), serde_json::to_string_pretty(c)? + "\n")?;
        }
        Ok(())
    }

    /// Reads a directory written by [`Scenario::write_dir`].
    pub fn read_dir(dir: &Path) -> Result<Scenario> {
        let schema = parse_schema(&fs::read_to_string(dir.join("source.schema"))?)?;
        let instance_path = dir.join("policy.instance");
        let (views, policy_instance) = if instance_path.exists() {
            (Vec::new(), Some(parse_instance(&fs::read_to_string(instance_path)?)?))
        } else {
            let text = fs::read_to_string(dir.join("views.tgds"))?;
            (parse_dependencies(&text, Some(&schema), None)?, None)
        };
        let tgds = parse_dependencies(&fs::read_to_string(dir.join("mapping.tgds"))?, Some(&schema), None)?;
        let config_path = dir.join("config.json");
        let config = if config_path.exists() {
            Some(serde_json::from_str(&fs::read_to_string(config_path)?)?)
        } else {
            None
        };
        Ok(Scenario {
            schema,
            views,
            policy_instance,
            tgds,
            config,
        })
    }
}

/// Probability that a tgd reuses the body of an earlier tgd, and separately
/// the probability that it reuses the body of a view. The exported
/// variables are always drawn afresh.
const SHARED_BODY_RATE: f64 = 0.3;

fn var(i: usize) -> Term {
    Term::var(&format!("x{i}"))
}

fn vars(n: usize) -> Vec<Term> {
    (0..n).map(var).collect()
}

fn tgd(id: usize, body: Vec<Atom>, head: Vec<Atom>) -> Tgd {
    Tgd::new(TgdId(id as u32), body, head).expect("generated tgds are well formed")
}

struct Generator {
    rng: ChaCha8Rng,
    relations: Vec<(Symbol, usize)>,
}

impl Generator {
    /// The relation of view `i`: every relation once in order, then random
    /// ones.
    fn relation(&mut self, i: usize) -> (Symbol, usize) {
        if i < self.relations.len() {
            self.relations[i].clone()
        } else {
            self.random_relation()
        }
    }

    fn random_relation(&mut self) -> (Symbol, usize) {
        let i = self.rng.random_range(0..self.relations.len());
        self.relations[i].clone()
    }

    fn view(&mut self, i: usize, op: Operator) -> Tgd {
        let head_rel = format!("V{i}");
        let (rel, arity) = self.relation(i);
        match op {
            Operator::Copy => {
                let xs = vars(arity);
                tgd(
                    i,
                    vec![Atom::new(rel, xs.clone())],
                    vec![Atom::new(head_rel.as_str(), xs)],
                )
            }
            Operator::Delete => {
                let xs = vars(arity);
                let keep = if arity > 1 { self.rng.random_range(1..arity) } else { 1 };
                let mut positions: Vec<usize> = (0..arity).collect();
                positions.shuffle(&mut self.rng);
                positions.truncate(keep);
                positions.sort_unstable();
                let head = positions.iter().map(|&p| xs[p].clone()).collect();
                tgd(i, vec![Atom::new(rel, xs)], vec![Atom::new(head_rel.as_str(), head)])
            }
            Operator::SelfJoin => {
                if arity < 2 {
                    return self.view(i, Operator::Copy);
                }
                let mut xs = vars(arity);
                let a = self.rng.random_range(0..arity);
                let mut b = self.rng.random_range(0..arity - 1);
                if b >= a {
                    b += 1;
                }
                xs[b] = xs[a].clone();
                let mut head: Vec<Term> = Vec::new();
                for t in &xs {
                    if !head.contains(t) {
                        head.push(t.clone());
                    }
                }
                tgd(i, vec![Atom::new(rel, xs)], vec![Atom::new(head_rel.as_str(), head)])
            }
            Operator::Merge => {
                let (rel2, arity2) = self.random_relation();
                let left = vars(arity);
                let mut right: Vec<Term> = (0..arity2).map(|p| var(arity + p)).collect();
                let a = self.rng.random_range(0..arity);
                let b = self.rng.random_range(0..arity2);
                right[b] = left[a].clone();
                let joined = left[a].clone();
                let mut head: Vec<Term> = Vec::new();
                for t in left.iter().chain(&right) {
                    if *t != joined && !head.contains(t) {
                        head.push(t.clone());
                    }
                }
                if head.is_empty() {
                    head.push(joined);
                }
                tgd(
                    i,
                    vec![Atom::new(rel, left), Atom::new(rel2, right)],
                    vec![Atom::new(head_rel.as_str(), head)],
                )
            }
        }
    }

    fn mapping(&mut self, i: usize, n_atoms: usize, n_vars: usize, earlier: &[Tgd], views: &[Tgd]) -> Tgd {
        let roll: f64 = self.rng.random();
        let shared = if roll < SHARED_BODY_RATE && !earlier.is_empty() {
            Some(earlier[self.rng.random_range(0..earlier.len())].body())
        } else if roll < 2.0 * SHARED_BODY_RATE && !views.is_empty() {
            Some(views[self.rng.random_range(0..views.len())].body())
        } else {
            None
        };
        if let Some(body) = shared.filter(|b| b.len() <= n_atoms) {
            let body = body.to_vec();
            let mut used: Vec<Term> = Vec::new();
            for t in body.iter().flat_map(|a| &a.terms) {
                if !used.contains(t) {
                    used.push(t.clone());
                }
            }
            return self.export(i, body, used, n_vars);
        }
        let atoms = self.rng.random_range(1..=n_atoms);
        let mut body = Vec::with_capacity(atoms);
        let mut used: Vec<Term> = Vec::new();
        for _ in 0..atoms {
            let (rel, arity) = self.random_relation();
            let mut terms = Vec::with_capacity(arity);
            for _ in 0..arity {
                let reuse = !used.is_empty() && self.rng.random_bool(0.25);
                let t = if reuse {
                    used[self.rng.random_range(0..used.len())].clone()
                } else {
                    let t = var(used.len());
                    used.push(t.clone());
                    t
                };
                terms.push(t);
            }
            body.push(Atom::new(rel, terms));
        }
        self.export(i, body, used, n_vars)
    }

    fn export(&mut self, i: usize, body: Vec<Atom>, used: Vec<Term>, n_vars: usize) -> Tgd {
        let exported = self.rng.random_range(1..=n_vars.min(used.len()));
        let mut head = used;
        head.shuffle(&mut self.rng);
        head.truncate(exported);
        head.sort();
        tgd(i, body, vec![Atom::new(format!("T{i}").as_str(), head)])
    }
}

/// Generates a scenario. Identical configurations give identical scenarios.
pub fn generate(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut relations = Vec::new();
    let mut schema = Schema::new();
    for i in 0..config.relation_count() {
        let arity = rng.random_range(1..=config.max_arity);
        let arity = if config.operators.contains(&Operator::SelfJoin) {
            arity.max(2)
        } else {
            arity
        };
        let name = Symbol::new(&format!("R{i}"));
        schema.add(name.clone(), arity)?;
        relations.push((name, arity));
    }
    let mut g = Generator { rng, relations };
    let views: Vec<Tgd> = (0..config.n_views)
        .map(|i| {
            let op = config.operators[i % config.operators.len()];
            g.view(i, op)
        })
        .collect();
    let mut tgds = Vec::with_capacity(config.n_dep);
    for i in 0..config.n_dep {
        let t = g.mapping(i, config.n_atoms, config.n_vars, &tgds, &views);
        tgds.push(t);
    }
    Ok(Scenario {
        schema,
        views,
        policy_instance: None,
        tgds,
        config: Some(config.clone()),
    })
}
