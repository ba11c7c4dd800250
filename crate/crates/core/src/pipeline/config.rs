//! Key-value run configuration.
//!
//! One `key = value` pair per line; blank lines and lines starting with `#`
//! are ignored. Relative paths are resolved against the config file's
//! directory. Recognized keys and defaults:
//!
//! ```text
//! corpus_dir = corpus                 # required: one subdirectory per village
//! output_dir = out                    # required
//! layer_format = edge_csv             # edge_csv | adjacency_matrix
//! respondents_as_nodes = true
//! fit_mode = joint                    # joint | per_attribute | both
//! feature.<attribute> = match         # match[:edges] | difference[:edges] | off
//! permutation.tolerances = 0.05, 0.20
//! permutation.replicates = 1000
//! permutation.seed = 1
//! louvain.seeds = 1                   # first seed gives the reported partition
//! community_network.node_min = 0.05
//! community_network.edge_min = 0.05
//! segregation.missing = exclude       # exclude | category
//! segregation.between_cutoff = 0
//! workers = 0                         # 0 = all cores; SEGNET_WORKERS overrides
//! ```
//!
//! Bin edges are inclusive upper edges, e.g. `feature.age = match:30,40,50,64`.
//! By default all seven attributes are match-encoded, with age and
//! education binned.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attributes::{Attribute, Bins};
use crate::dyadic::{Encoding, FeatureEncoding, FeatureSpec};
use crate::error::{Error, Result};
use crate::ingest::LayerFormat;

/// Version of the artifact layout written by [`run_pipeline`](super::run_pipeline).
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "SEGNET_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    Joint,
    PerAttribute,
    Both,
}

impl FitMode {
    pub fn joint(self) -> bool {
        matches!(self, FitMode::Joint | FitMode::Both)
    }

    pub fn per_attribute(self) -> bool {
        matches!(self, FitMode::PerAttribute | FitMode::Both)
    }
}

/// Treatment of missing values in NMI and segregation measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingMode {
    /// Drop nodes with the attribute missing.
    Exclude,
    /// Treat missing as one more category.
    Category,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationSettings {
    pub tolerances: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    pub layer_format: LayerFormat,
    pub respondents_as_nodes: bool,
    pub fit_mode: FitMode,
    pub features: FeatureSpec,
    pub permutation: PermutationSettings,
    pub louvain_seeds: Vec<u64>,
    pub node_min: f64,
    pub edge_min: f64,
    pub missing: MissingMode,
    pub between_cutoff: f64,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Defaults for everything but the two directories.
    pub fn new(corpus_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            corpus_dir: corpus_dir.into(),
            output_dir: output_dir.into(),
            layer_format: LayerFormat::EdgeCsv,
            respondents_as_nodes: true,
            fit_mode: FitMode::Joint,
            features: FeatureSpec::default_joint(),
            permutation: PermutationSettings {
                tolerances: vec![0.05, 0.20],
                replicates: 1000,
                seed: 1,
            },
            louvain_seeds: vec![1],
            node_min: 0.05,
            edge_min: 0.05,
            missing: MissingMode::Exclude,
            between_cutoff: 0.0,
            workers: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::parse(&text, base)?;
        cfg.apply_env()?;
        Ok(cfg)
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::new(PathBuf::new(), PathBuf::new());
        let mut seen = BTreeSet::new();
        let mut features: Vec<Option<FeatureEncoding>> =
            cfg.features.features.iter().cloned().map(Some).collect();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fail = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_owned()) {
                return Err(fail(format!("`{key}` set twice")));
            }
            let path = |v: &str| base.join(v);
            match key {
                "corpus_dir" => cfg.corpus_dir = path(value),
                "output_dir" => cfg.output_dir = path(value),
                "layer_format" => {
                    cfg.layer_format = match value {
                        "edge_csv" => LayerFormat::EdgeCsv,
                        "adjacency_matrix" => LayerFormat::AdjacencyMatrix,
                        _ => return Err(fail(format!("unknown layer format `{value}`"))),
                    }
                }
                "respondents_as_nodes" => {
                    cfg.respondents_as_nodes = parse_bool(value).map_err(fail)?
                }
                "fit_mode" => {
                    cfg.fit_mode = match value {
                        "joint" => FitMode::Joint,
                        "per_attribute" => FitMode::PerAttribute,
                        "both" => FitMode::Both,
                        _ => return Err(fail(format!("unknown fit mode `{value}`"))),
                    }
                }
                "permutation.tolerances" => {
                    cfg.permutation.tolerances = parse_list(value).map_err(fail)?
                }
                "permutation.replicates" => {
                    cfg.permutation.replicates = parse(value).map_err(fail)?
                }
                "permutation.seed" => cfg.permutation.seed = parse(value).map_err(fail)?,
                "louvain.seeds" => cfg.louvain_seeds = parse_list(value).map_err(fail)?,
                "community_network.node_min" => cfg.node_min = parse(value).map_err(fail)?,
                "community_network.edge_min" => cfg.edge_min = parse(value).map_err(fail)?,
                "segregation.missing" => {
                    cfg.missing = match value {
                        "exclude" => MissingMode::Exclude,
                        "category" => MissingMode::Category,
                        _ => return Err(fail(format!("unknown missing mode `{value}`"))),
                    }
                }
                "segregation.between_cutoff" => cfg.between_cutoff = parse(value).map_err(fail)?,
                "workers" => {
                    let w: usize = parse(value).map_err(fail)?;
                    cfg.workers = (w > 0).then_some(w);
                }
                _ => match key.strip_prefix("feature.") {
                    Some(name) => {
                        let attr = Attribute::from_str(name).map_err(|e| fail(e.to_string()))?;
                        let k = Attribute::ALL.iter().position(|&a| a == attr).unwrap();
                        features[k] = parse_feature(attr, value).map_err(fail)?;
                    }
                    None => return Err(fail(format!("unknown key `{key}`"))),
                },
            }
        }
        if cfg.corpus_dir.as_os_str().is_empty() {
            return Err(Error::Config("`corpus_dir` is required".into()));
        }
        if cfg.output_dir.as_os_str().is_empty() {
            return Err(Error::Config("`output_dir` is required".into()));
        }
        cfg.features = FeatureSpec::new(features.into_iter().flatten().collect())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.permutation;
        if p.tolerances.is_empty() {
            return Err(Error::Config(
                "permutation.tolerances must not be empty".into(),
            ));
        }
        if let Some(t) = p.tolerances.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Config(format!("tolerance {t} must be positive")));
        }
        if p.replicates == 0 {
            return Err(Error::Config(
                "permutation.replicates must be at least 1".into(),
            ));
        }
        if self.louvain_seeds.is_empty() {
            return Err(Error::Config("louvain.seeds must not be empty".into()));
        }
        for (name, v) in [("node_min", self.node_min), ("edge_min", self.edge_min)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "community_network.{name} must lie in [0, 1), got {v}"
                )));
            }
        }
        self.features.validate()
    }

    /// Applies the worker-count environment override.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            let w: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV}: not a count: `{v}`")))?;
            self.workers = (w > 0).then_some(w);
        }
        Ok(())
    }

    /// Every setting that affects results, one `key = value` per line in a
    /// fixed order. Paths and the worker count are left out.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let layer = match self.layer_format {
            LayerFormat::EdgeCsv => "edge_csv",
            LayerFormat::AdjacencyMatrix => "adjacency_matrix",
        };
        let fit_mode = match self.fit_mode {
            FitMode::Joint => "joint",
            FitMode::PerAttribute => "per_attribute",
            FitMode::Both => "both",
        };
        let missing = match self.missing {
            MissingMode::Exclude => "exclude",
            MissingMode::Category => "category",
        };
        let join = |xs: Vec<String>| xs.join(", ");
        writeln!(s, "schema_version = {SCHEMA_VERSION}").unwrap();
        writeln!(s, "layer_format = {layer}").unwrap();
        writeln!(s, "respondents_as_nodes = {}", self.respondents_as_nodes).unwrap();
        writeln!(s, "fit_mode = {fit_mode}").unwrap();
        for attr in Attribute::ALL {
            let value = match self.features.features.iter().find(|f| f.attribute == attr) {
                None => "off".to_owned(),
                Some(f) => format_feature(f),
            };
            writeln!(s, "feature.{} = {value}", attr.name()).unwrap();
        }
        let p = &self.permutation;
        writeln!(
            s,
            "permutation.tolerances = {}",
            join(p.tolerances.iter().map(f64::to_string).collect())
        )
        .unwrap();
        writeln!(s, "permutation.replicates = {}", p.replicates).unwrap();
        writeln!(s, "permutation.seed = {}", p.seed).unwrap();
        writeln!(
            s,
            "louvain.seeds = {}",
            join(self.louvain_seeds.iter().map(u64::to_string).collect())
        )
        .unwrap();
        writeln!(s, "community_network.node_min = {}", self.node_min).unwrap();
        writeln!(s, "community_network.edge_min = {}", self.edge_min).unwrap();
        writeln!(s, "segregation.missing = {missing}").unwrap();
        writeln!(s, "segregation.between_cutoff = {}", self.between_cutoff).unwrap();
        s
    }

    /// SHA-256 of [`canonical_text`](Self::canonical_text), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

fn parse<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',').map(|x| parse(x.trim())).collect()
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn parse_feature(attr: Attribute, v: &str) -> std::result::Result<Option<FeatureEncoding>, String> {
    let (kind, edges) = match v.split_once(':') {
        Some((k, e)) => (k.trim(), Some(e)),
        None => (v, None),
    };
    let encoding = match kind {
        "off" if edges.is_none() => return Ok(None),
        "match" => Encoding::Match,
        "difference" => Encoding::AbsDifference,
        _ => return Err(format!("unknown encoding `{v}`")),
    };
    let bins = edges.map(parse_list).transpose()?.map(Bins::new);
    Ok(Some(FeatureEncoding {
        attribute: attr,
        encoding,
        bins,
    }))
}

fn format_feature(f: &FeatureEncoding) -> String {
    let kind = match f.encoding {
        Encoding::Match => "match",
        Encoding::AbsDifference => "difference",
    };
    match &f.bins {
        None => kind.to_owned(),
        Some(b) => {
            let edges: Vec<String> = b.upper_edges.iter().map(u32::to_string).collect();
            format!("{kind}:{}", edges.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let text = "\
# comment
corpus_dir = data
output_dir = /tmp/out
permutation.tolerances = 0.1
feature.savings = off
feature.age = difference
feature.education = match:5,10
louvain.seeds = 3, 4
segregation.missing = category
";
        let cfg = RunConfig::parse(text, Path::new("/base")).unwrap();
        assert_eq!(cfg.corpus_dir, Path::new("/base/data"));
        assert_eq!(cfg.output_dir, Path::new("/tmp/out"));
        assert_eq!(cfg.permutation.tolerances, vec![0.1]);
        assert_eq!(cfg.permutation.replicates, 1000);
        assert_eq!(cfg.louvain_seeds, vec![3, 4]);
        assert_eq!(cfg.missing, MissingMode::Category);
        let attrs = cfg.features.attributes();
        assert_eq!(attrs.len(), 6);
        assert!(!attrs.contains(&Attribute::Savings));
        let age = &cfg.features.features[1];
        assert_eq!((age.encoding, &age.bins), (Encoding::AbsDifference, &None));
        assert_eq!(cfg.features.features[4].bins, Some(Bins::new(vec![5, 10])));
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "corpus_dir = c\noutput_dir = o\nfeature.age = match:20,60\nfit_mode = both\n";
        let cfg = RunConfig::parse(text, Path::new(".")).unwrap();
        let again = RunConfig::parse(
            &format!(
                "corpus_dir = c\noutput_dir = o\n{}",
                cfg.canonical_text()
                    .lines()
                    .skip(1)
                    .collect::<Vec<_>>()
                    .join("\n")
            ),
            Path::new("."),
        )
        .unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.hash().len(), 64);
        let other =
            RunConfig::parse(&format!("{text}permutation.seed = 2\n"), Path::new(".")).unwrap();
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn rejects_bad_input() {
        let base = Path::new(".");
        for text in [
            "output_dir = o\n",
            "corpus_dir = c\n",
            "corpus_dir = c\noutput_dir = o\nbogus = 1\n",
            "corpus_dir = c\noutput_dir = o\npermutation.replicates = 0\n",
            "corpus_dir = c\noutput_dir = o\npermutation.tolerances = \n",
            "corpus_dir = c\noutput_dir = o\ncorpus_dir = d\n",
            "corpus_dir = c\noutput_dir = o\nfeature.caste = difference\n",
            "corpus_dir = c\noutput_dir = o\nfeature.height = match\n",
            "corpus_dir = c\noutput_dir = o\ncommunity_network.node_min = 1\n",
            "corpus_dir = c\noutput_dir = o\njust words\n",
        ] {
            assert!(RunConfig::parse(text, base).is_err(), "accepted {text:?}");
        }
    }
}
