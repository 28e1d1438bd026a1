//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use maprepair::chase::{Recompute, VisibleChase};
use maprepair::model::serialize_dependencies;
use maprepair::preference::{evaluate, knn_train, read_training_csv, write_training_csv, ComparisonLog};
use maprepair::repair::{RepairConfig, RepairOutcome, DEFAULT_MAX_ITERATIONS};
use maprepair::safety::{check_forest, PolicyContext};
use maprepair::scenario::{env_seed, generate, Scenario, ScenarioConfig};
use maprepair::PreferenceFunction;
use serde_json::json;

use crate::input::{read_scenarios, Loaded, ScenarioArgs};
use crate::report::{ms, RunReport};

/// A preference function named on the command line: `max`, `avg` or
/// `knn:<training csv>`.
#[derive(Clone, Debug)]
pub enum PrefSpec {
    Max,
    Avg,
    Knn(PathBuf),
}

impl FromStr for PrefSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "max" => Ok(PrefSpec::Max),
            "avg" => Ok(PrefSpec::Avg),
            _ => match s.strip_prefix("knn:") {
                Some(p) if !p.is_empty() => Ok(PrefSpec::Knn(PathBuf::from(p))),
                _ => Err(format!("expected max, avg or knn:<model.csv>, found {s:?}")),
            },
        }
    }
}

/// Golden preference functions.
#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum Golden {
    Max,
    Avg,
}

impl Golden {
    fn prf(self) -> PreferenceFunction {
        match self {
            Golden::Max => PreferenceFunction::PMax,
            Golden::Avg => PreferenceFunction::PAvg,
        }
    }
}

fn load_model(path: &Path, k: usize) -> Result<PreferenceFunction> {
    let file = fs::File::open(path).with_context(|| format!("cannot open model {}", path.display()))?;
    let data = read_training_csv(file).with_context(|| format!("in model {}", path.display()))?;
    Ok(PreferenceFunction::Knn(
        knn_train(data, k).with_context(|| format!("in model {}", path.display()))?,
    ))
}

impl PrefSpec {
    fn build(&self, k: usize) -> Result<PreferenceFunction> {
        Ok(match self {
            PrefSpec::Max => PreferenceFunction::PMax,
            PrefSpec::Avg => PreferenceFunction::PAvg,
            PrefSpec::Knn(p) => load_model(p, k)?,
        })
    }
}

/// Generator settings: a JSON config file, then individual overrides, then
/// `MAPREPAIR_SEED`.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// Scenario config as JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of s-t tgds.
    #[arg(long)]
    pub n_dep: Option<usize>,
    /// Maximum number of body atoms per tgd.
    #[arg(long)]
    pub n_atoms: Option<usize>,
    /// Maximum number of exported variables per tgd.
    #[arg(long)]
    pub n_vars: Option<usize>,
    /// Number of policy views.
    #[arg(long)]
    pub n_views: Option<usize>,
    /// Number of source relations.
    #[arg(long)]
    pub n_relations: Option<usize>,
    /// Maximum relation arity.
    #[arg(long)]
    pub max_arity: Option<usize>,
    /// PRNG seed; MAPREPAIR_SEED takes precedence.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut c: ScenarioConfig = match &self.config {
            Some(p) => {
                serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?)
                    .with_context(|| format!("in config {}", p.display()))?
            }
            None => ScenarioConfig::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        over!(n_dep, n_atoms, n_vars, n_views, max_arity, seed);
        if self.n_relations.is_some() {
            c.n_relations = self.n_relations;
        }
        if let Some(s) = env_seed()? {
            c.seed = s;
        }
        Ok(c)
    }
}

fn recompute(full: bool) -> Recompute {
    if full {
        Recompute::Full
    } else {
        Recompute::Incremental
    }
}

fn path_strings(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: ScenarioArgs,
    /// Print a JSON run report.
    #[arg(long)]
    pub json: bool,
}

pub fn check(a: CheckArgs) -> Result<u8> {
    let start = Instant::now();
    let t = Instant::now();
    let Loaded {
        schema,
        policy,
        tgds,
        paths,
        ..
    } = a.input.load()?;
    let forest = VisibleChase::new(Recompute::Full).run(&tgds, &schema);
    let chase_time = t.elapsed();
    let t = Instant::now();
    let verdict = check_forest(&forest, policy.instance());
    let safety_time = t.elapsed();
    let mut r = RunReport::new("check", path_strings(&paths));
    r.verdict = Some(if verdict.is_safe() { "safe" } else { "unsafe" }.to_string());
    r.timings.visible_chase_ms = ms(chase_time);
    r.timings.safety_check_ms = ms(safety_time);
    r.timings.total_ms = ms(start.elapsed());
    r.counts.tgds_in = tgds.len();
    r.counts.tgds_out = tgds.len();
    r.counts.bags = forest.bags.len();
    r.counts.active_triggers = forest.stats.tgd_triggers + forest.stats.egd_triggers;
    r.counts.unsafe_bags = verdict.unsafe_bags.len();
    r.outputs = serde_json::to_value(&verdict)?;
    if a.json {
        println!("{}", r.to_json());
    } else if verdict.is_safe() {
        println!("safe");
    } else {
        println!("unsafe");
        for &id in &verdict.unsafe_bags {
            let bag = forest.bag(id);
            let facts: Vec<String> = bag.facts.iter().map(ToString::to_string).collect();
            println!("  bag {} from {}: {}", id.0, forest.origin_tgd(id), facts.join(", "));
        }
        for id in &verdict.offending_tgds {
            if let Some(t) = tgds.iter().find(|t| t.id == *id) {
                println!("  offending {id}: {t}");
            }
        }
    }
    Ok(if verdict.is_safe() { 0 } else { 1 })
}

#[derive(Args, Debug)]
pub struct RepairArgs {
    #[command(flatten)]
    pub input: ScenarioArgs,
    /// Preference function: max, avg or knn:<model.csv>.
    #[arg(long, default_value = "max")]
    pub pref: PrefSpec,
    /// Neighbours consulted by a k-NN preference.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Bound on single-bag repair iterations.
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,
    /// Output file for the repaired tgds; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Output file for the repair steps as JSON lines.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Recompute every inverse bag on each chase instead of reusing them.
    #[arg(long)]
    pub full_recompute: bool,
    /// Print a JSON run report.
    #[arg(long)]
    pub json: bool,
}

/// Runs the repair pipeline and fills a report.
pub fn run_repair(
    tgds: &[maprepair::model::Tgd],
    policy: &PolicyContext,
    prf: &PreferenceFunction,
    config: RepairConfig,
    report: &mut RunReport,
) -> RepairOutcome {
    let out = maprepair::repair::repair(tgds, policy, prf, config);
    let s = &out.stats;
    report.verdict = Some(if out.report.is_safe() { "safe" } else { "unsafe" }.to_string());
    report.timings.visible_chase_ms = ms(s.chase_time);
    report.timings.safety_check_ms = ms(s.safety_time);
    report.timings.repair_ms = ms(s.total_time.saturating_sub(s.chase_time + s.safety_time));
    report.timings.total_ms = ms(s.total_time);
    report.counts.tgds_in = tgds.len();
    report.counts.tgds_out = out.tgds.len();
    report.counts.bags = s.bags;
    report.counts.active_triggers = s.active_triggers;
    report.counts.unsafe_bags = out.report.unsafe_bags.len();
    report.counts.repairs_applied = out.log.len();
    report.warnings = out.warnings.clone();
    out
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

pub fn repair(a: RepairArgs) -> Result<u8> {
    let prf = a.pref.build(a.k)?;
    let loaded = a.input.load()?;
    let config = RepairConfig {
        max_iterations: a.max_iter,
        recompute: recompute(a.full_recompute),
    };
    let mut report = RunReport::new("repair", path_strings(&loaded.paths));
    let out = run_repair(&loaded.tgds, &loaded.policy, &prf, config, &mut report);
    if out.log.is_empty() && out.report.is_safe() {
        write_out(a.output.as_deref(), loaded.mapping_text.as_bytes())?;
    } else {
        write_out(a.output.as_deref(), serialize_dependencies(&out.tgds).as_bytes())?;
    }
    if let Some(p) = &a.log {
        fs::write(p, out.log_jsonl()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    report.outputs = json!({
        "mapping": a.output.as_ref().map(|p| p.display().to_string()),
        "log": a.log.as_ref().map(|p| p.display().to_string()),
        "steps": out.log,
    });
    for w in &out.warnings {
        if w.starts_with("dropped ") {
            log::info!("{w}");
        } else {
            log::warn!("{w}");
        }
    }
    if a.json {
        if a.output.is_some() {
            println!("{}", report.to_json());
        } else {
            eprintln!("{}", report.to_json());
        }
    }
    Ok(if out.report.is_safe() { 0 } else { 1 })
}

/// Scenarios from a directory, or generated from a config.
#[derive(Args, Debug)]
pub struct ScenarioSource {
    /// A scenario directory, or a directory of scenario directories.
    #[arg(long, conflicts_with = "gen")]
    pub scenarios: Option<PathBuf>,
    /// Generate scenarios from this JSON config instead.
    #[arg(long)]
    pub gen: Option<PathBuf>,
    /// Number of scenarios to generate, with consecutive seeds.
    #[arg(long, default_value_t = 20)]
    pub count: u64,
}

impl ScenarioSource {
    fn load(&self) -> Result<Vec<Scenario>> {
        if let Some(dir) = &self.scenarios {
            return read_scenarios(dir);
        }
        let Some(path) = &self.gen else {
            bail!("pass --scenarios <dir> or --gen <config.json>");
        };
        let base = ConfigArgs {
            config: Some(path.clone()),
            ..ConfigArgs::default()
        }
        .resolve()?;
        (0..self.count)
            .map(|i| {
                let c = ScenarioConfig {
                    seed: base.seed.wrapping_add(i),
                    ..base.clone()
                };
                Ok(generate(&c)?)
            })
            .collect()
    }
}

#[derive(Args, Debug)]
pub struct LearnArgs {
    /// Golden preference function whose choices are learned.
    #[arg(long, value_enum, default_value = "max")]
    pub golden: Golden,
    #[command(flatten)]
    pub source: ScenarioSource,
    /// Stop after this many measurements.
    #[arg(long)]
    pub size: Option<usize>,
    /// Bound on single-bag repair iterations.
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,
    /// Output training CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn learn(a: LearnArgs) -> Result<u8> {
    let scenarios = a.source.load()?;
    let config = RepairConfig {
        max_iterations: a.max_iter,
        ..RepairConfig::default()
    };
    let data = ComparisonLog::record(&scenarios, &a.golden.prf(), a.size, config).measurements();
    let mut buf = Vec::new();
    write_training_csv(&mut buf, &data)?;
    write_out(a.out.as_deref(), &buf)?;
    eprintln!("{} measurements from {} scenarios", data.len(), scenarios.len());
    Ok(0)
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Golden preference function the model is compared against.
    #[arg(long, value_enum, default_value = "max")]
    pub golden: Golden,
    /// Training CSV of the k-NN model.
    #[arg(long)]
    pub model: PathBuf,
    /// Neighbours consulted by a k-NN preference.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Scenarios whose golden comparisons are the evaluation pairs.
    #[arg(long = "pairs-from", conflicts_with = "gen")]
    pub pairs_from: Option<PathBuf>,
    /// Generate the evaluation scenarios from this JSON config instead.
    #[arg(long)]
    pub gen: Option<PathBuf>,
    /// Number of scenarios to generate, with consecutive seeds.
    #[arg(long, default_value_t = 20)]
    pub count: u64,
}

pub fn eval(a: EvalArgs) -> Result<u8> {
    let model = load_model(&a.model, a.k)?;
    let source = ScenarioSource {
        scenarios: a.pairs_from.clone(),
        gen: a.gen.clone(),
        count: a.count,
    };
    let scenarios = source.load()?;
    let golden = a.golden.prf();
    let pairs = ComparisonLog::record(&scenarios, &golden, None, RepairConfig::default()).pairs();
    if pairs.is_empty() {
        bail!("no comparison pairs in the given scenarios");
    }
    let (cm, mcc) = evaluate(&golden, &model, &pairs);
    println!(
        "{}",
        json!({"n11": cm.n11, "n22": cm.n22, "n12": cm.n12, "n21": cm.n21, "mcc": mcc})
    );
    Ok(0)
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Directory to write the scenario into.
    #[arg(short, long)]
    pub output: PathBuf,
}

pub fn gen(a: GenArgs) -> Result<u8> {
    let c = a.config.resolve()?;
    let s = generate(&c)?;
    s.write_dir(&a.output)?;
    println!("{}", a.output.display());
    Ok(0)
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Number of scenarios, with consecutive seeds from the configured one.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Preference function: max, avg or knn:<model.csv>.
    #[arg(long, default_value = "max")]
    pub pref: PrefSpec,
    /// Neighbours consulted by a k-NN preference.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Bound on single-bag repair iterations.
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output file for the reports as JSON lines; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn bench_one(c: &ScenarioConfig, prf: &PreferenceFunction, config: RepairConfig) -> Result<RunReport> {
    let s = generate(c)?;
    let mut r = RunReport::new("bench", vec![format!("seed={}", c.seed)]);
    let policy = s.policy();
    run_repair(&s.tgds, &policy, prf, config, &mut r);
    r.outputs = json!({"config": c});
    Ok(r)
}

pub fn bench(a: BenchArgs) -> Result<u8> {
    let base = a.config.resolve()?;
    let prf = a.pref.build(a.k)?;
    let config = RepairConfig {
        max_iterations: a.max_iter,
        ..RepairConfig::default()
    };
    let configs: Vec<ScenarioConfig> = (0..a.seeds)
        .map(|i| ScenarioConfig {
            seed: base.seed.wrapping_add(i),
            ..base.clone()
        })
        .collect();
    let jobs = a.jobs.max(1);
    let mut slots: Vec<Option<Result<RunReport>>> = (0..configs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (w, chunk) in slots.chunks_mut(configs.len().div_ceil(jobs).max(1)).enumerate() {
            let start = w * configs.len().div_ceil(jobs).max(1);
            let (configs, prf) = (&configs, &prf);
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(bench_one(&configs[start + i], prf, config));
                }
            });
        }
    });
    let reports: Vec<RunReport> = slots
        .into_iter()
        .map(|s| s.expect("every slot is filled"))
        .collect::<Result<_>>()?;
    let text: String = reports.iter().map(|r| r.to_json() + "\n").collect();
    write_out(a.out.as_deref(), text.as_bytes())?;
    let mut totals: Vec<f64> = reports.iter().map(|r| r.timings.total_ms).collect();
    let unsafe_out = reports.iter().filter(|r| r.verdict.as_deref() != Some("safe")).count();
    eprintln!(
        "{}",
        json!({
            "scenarios": reports.len(),
            "median_repair_ms": median(&mut totals),
            "max_repair_ms": totals.last().copied().unwrap_or(0.0),
            "unsafe_outputs": unsafe_out,
        })
    );
    Ok(if unsafe_out == 0 { 0 } else { 1 })
}
