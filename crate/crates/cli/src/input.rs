//! Loading schemas, policies and mappings from disk.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use maprepair::model::{parse_dependencies, parse_instance, parse_schema, Instance, Schema, Tgd};
use maprepair::safety::PolicyContext;
use maprepair::scenario::Scenario;

/// Where a scenario comes from: a directory with the standard file names,
/// or individual files.
#[derive(Args, Debug, Clone)]
pub struct ScenarioArgs {
    /// Scenario directory holding source.schema, views.tgds (or
    /// policy.instance) and mapping.tgds.
    pub dir: Option<PathBuf>,
    /// Source schema file, one `Name/arity` per line.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Policy views as tgds.
    #[arg(long, conflicts_with = "policy_instance")]
    pub views: Option<PathBuf>,
    /// Policy given directly as its visible instance.
    #[arg(long)]
    pub policy_instance: Option<PathBuf>,
    /// The s-t tgds to check or repair.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
}

/// A loaded scenario, with the original mapping text kept verbatim.
pub struct Loaded {
    pub schema: Schema,
    pub policy: PolicyContext,
    pub tgds: Vec<Tgd>,
    pub mapping_text: String,
    pub paths: Vec<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn with_path<T>(r: maprepair::Result<T>, path: &Path) -> Result<T> {
    r.map_err(|e| anyhow::anyhow!("{}:{e}", path.display()))
}

pub fn load_schema(path: &Path) -> Result<Schema> {
    with_path(parse_schema(&read(path)?), path)
}

pub fn load_tgds(path: &Path, schema: &Schema) -> Result<(Vec<Tgd>, String)> {
    let text = read(path)?;
    let tgds = with_path(parse_dependencies(&text, Some(schema), None), path)?;
    Ok((tgds, text))
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    with_path(parse_instance(&read(path)?), path)
}

impl ScenarioArgs {
    fn pick(&self, explicit: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
        explicit
            .clone()
            .or_else(|| self.dir.as_ref().map(|d| d.join(name)).filter(|p| p.exists()))
    }

    pub fn load(&self) -> Result<Loaded> {
        let Some(schema_path) = self.pick(&self.schema, "source.schema") else {
            bail!("no source schema: pass a scenario directory or --schema");
        };
        let Some(mapping_path) = self.pick(&self.mapping, "mapping.tgds") else {
            bail!("no mapping: pass a scenario directory or --mapping");
        };
        let schema = load_schema(&schema_path)?;
        let mut paths = vec![schema_path];
        let views_path = self.views.clone().or_else(|| {
            if self.policy_instance.is_some() {
                None
            } else {
                self.pick(&None, "views.tgds")
                    .filter(|_| self.pick(&None, "policy.instance").is_none())
            }
        });
        let policy = if let Some(p) = views_path {
            let (views, _) = load_tgds(&p, &schema)?;
            paths.push(p);
            PolicyContext::from_views(&views, &schema)
        } else if let Some(p) = self.pick(&self.policy_instance, "policy.instance") {
            let inst = load_instance(&p)?;
            paths.push(p);
            PolicyContext::from_instance(inst, &schema)
        } else {
            bail!("no policy: pass --views or --policy-instance");
        };
        let (tgds, mapping_text) = load_tgds(&mapping_path, &schema)?;
        paths.push(mapping_path);
        Ok(Loaded {
            schema,
            policy,
            tgds,
            mapping_text,
            paths,
        })
    }
}

/// Scenario directories under `root`: `root` itself when it holds a
/// mapping, otherwise its subdirectories that do, sorted by name.
pub fn scenario_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    if root.join("mapping.tgds").exists() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .with_context(|| format!("cannot read {}", root.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("mapping.tgds").exists())
        .collect();
    dirs.sort();
    Ok(dirs)
}

pub fn read_scenarios(root: &Path) -> Result<Vec<Scenario>> {
    scenario_dirs(root)?
        .iter()
        .map(|d| Scenario::read_dir(d).with_context(|| format!("in scenario {}", d.display())))
        .collect()
}
