use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{load_village_dir, natural_cmp, IngestConfig};

use super::bundle::VillageBundle;
use super::config::{RunConfig, SCHEMA_VERSION};
use super::summary::{summarize_dir, CorpusSummary};
use super::village::analyze_village;

pub const VILLAGES_DIR: &str = "villages";
pub const PARTITIONS_DIR: &str = "partitions";
pub const NETWORKS_DIR: &str = "community_networks";
pub const ERRORS_FILE: &str = "errors.json";
pub const RUN_FILE: &str = "run.json";

/// A village that could not be analyzed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VillageFailure {
    pub village_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorsManifest {
    pub schema_version: u32,
    pub config_hash: String,
    pub failures: Vec<VillageFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub config_hash: String,
    /// Settings that affect results, as canonical key-value text.
    pub config: String,
    pub villages: Vec<String>,
    pub failed: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub villages: Vec<String>,
    pub failures: Vec<VillageFailure>,
    /// `None` when every village failed.
    pub summary: Option<CorpusSummary>,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Subdirectories of the corpus, one per village, in natural id order.
pub fn discover_villages(corpus_dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(corpus_dir)
        .map_err(|e| Error::io(format!("listing {}", corpus_dir.display()), e))?;
    let mut villages: Vec<(String, PathBuf)> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .filter_map(|p| {
            let name = p.file_name()?.to_str()?.to_owned();
            (!name.starts_with('.')).then_some((name, p))
        })
        .collect();
    villages.sort_by(|a, b| natural_cmp(&a.0, &b.0));
    if villages.is_empty() {
        return Err(Error::NoVillages(corpus_dir.to_owned()));
    }
    Ok(villages)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

/// CSV text with a leading `# config_hash=...` comment line.
pub(crate) fn csv_text<T: Serialize>(config_hash: &str, rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(
        w.into_inner()
            .map_err(|e| Error::io("buffering csv", e.into_error()))?,
    )
    .expect("csv output is utf-8");
    Ok(format!(
        "# config_hash={config_hash} schema_version={SCHEMA_VERSION}\n{body}"
    ))
}

/// File-name-safe form of a village id.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_village_artifacts(out: &Path, bundle: &VillageBundle) -> Result<()> {
    let stem = file_stem(&bundle.village_id);
    write_json(&out.join(VILLAGES_DIR).join(format!("{stem}.json")), bundle)?;
    write_text(
        &out.join(PARTITIONS_DIR).join(format!("{stem}.csv")),
        &csv_text(&bundle.config_hash, &bundle.partition)?,
    )?;
    let net_dir = out.join(NETWORKS_DIR).join(&stem);
    create_dir(&net_dir)?;
    for net in &bundle.community_networks {
        let dot = net.to_dot(&format!("{}_{}", bundle.village_id, net.attribute));
        write_text(
            &net_dir.join(format!("{}.dot", net.attribute)),
            &format!("// config_hash={}\n{dot}", bundle.config_hash),
        )?;
        #[derive(Serialize)]
        struct Wrapped<'a> {
            schema_version: u32,
            config_hash: &'a str,
            village_id: &'a str,
            #[serde(flatten)]
            network: &'a crate::segregation::CommunityNetwork,
        }
        write_json(
            &net_dir.join(format!("{}.json", net.attribute)),
            &Wrapped {
                schema_version: SCHEMA_VERSION,
                config_hash: &bundle.config_hash,
                village_id: &bundle.village_id,
                network: net,
            },
        )?;
    }
    Ok(())
}

fn run_village(cfg: &RunConfig, hash: &str, id: &str, dir: &Path) -> Result<VillageBundle> {
    let ingest = IngestConfig {
        village_id: id.to_owned(),
        layer_format: cfg.layer_format,
        respondents_as_nodes: cfg.respondents_as_nodes,
    };
    let dataset = load_village_dir(dir, &ingest)?;
    let bundle = analyze_village(&dataset, cfg, hash)?;
    write_village_artifacts(&cfg.output_dir, &bundle)?;
    Ok(bundle)
}

/// Analyzes every village of the corpus and writes all artifacts.
///
/// Villages run in parallel on a pool of `cfg.workers` threads. A village
/// that fails is listed in `errors.json` and the rest still run. Output is
/// identical for identical configs regardless of the worker count.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let villages = discover_villages(&cfg.corpus_dir)?;
    let hash = cfg.hash();
    let out = &cfg.output_dir;
    for sub in [VILLAGES_DIR, PARTITIONS_DIR, NETWORKS_DIR] {
        let dir = out.join(sub);
        if dir.exists() {
            fs::remove_dir_all(&dir)
                .map_err(|e| Error::io(format!("clearing {}", dir.display()), e))?;
        }
        create_dir(&dir)?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<VillageBundle>> = pool.install(|| {
        villages
            .par_iter()
            .map(|(id, dir)| run_village(cfg, &hash, id, dir))
            .collect()
    });

    let mut failures = Vec::new();
    let mut succeeded = Vec::new();
    for ((id, _), outcome) in villages.iter().zip(outcomes) {
        match outcome {
            Ok(_) => succeeded.push(id.clone()),
            Err(e) => failures.push(VillageFailure {
                village_id: id.clone(),
                message: e.to_string(),
            }),
        }
    }
    write_json(
        &out.join(ERRORS_FILE),
        &ErrorsManifest {
            schema_version: SCHEMA_VERSION,
            config_hash: hash.clone(),
            failures: failures.clone(),
        },
    )?;
    write_json(
        &out.join(RUN_FILE),
        &RunManifest {
            schema_version: SCHEMA_VERSION,
            config_hash: hash,
            config: cfg.canonical_text(),
            villages: succeeded,
            failed: failures.iter().map(|f| f.village_id.clone()).collect(),
        },
    )?;
    let summary = if failures.len() < villages.len() {
        Some(summarize_dir(out)?)
    } else {
        None
    };
    Ok(RunReport {
        output_dir: out.clone(),
        villages: villages.into_iter().map(|(id, _)| id).collect(),
        failures,
        summary,
    })
}
