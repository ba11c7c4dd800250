//! Seeded generators with known ground truth: attributed stochastic block
//! models and dyad samples from the logistic tie model.
//!
//! Both produce a [`VillageDataset`] (single layer `synthetic`, node ids
//! `"0"`, `"1"`, ...) so the whole pipeline runs on them unchanged.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributes::{Attribute, AttributeTable};
use crate::community::Partition;
use crate::error::{Error, Result};
use crate::graph::NodeIds;
use crate::ingest::{write_village_dir, VillageDataset};

pub const LAYER: &str = "synthetic";

/// How values of one attribute are assigned to nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeRule {
    /// Every node of block `b` gets the `b`-th value.
    ByBlock(Vec<String>),
    /// Independent draw per node from `(value, weight)` pairs.
    Distribution(Vec<(String, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeAssignment {
    pub attribute: Attribute,
    pub rule: AttributeRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributedSbmConfig {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    #[serde(default)]
    pub attributes: Vec<AttributeAssignment>,
    pub seed: u64,
}

impl AttributedSbmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::Config(
                "block sizes must be nonempty and at least 1".into(),
            ));
        }
        if !(0.0 <= self.p_out && self.p_out <= self.p_in && self.p_in <= 1.0) {
            return Err(Error::Config(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        for a in &self.attributes {
            if let AttributeRule::ByBlock(values) = &a.rule {
                if values.len() != self.block_sizes.len() {
                    return Err(Error::Config(format!(
                        "{} has {} block values for {} blocks",
                        a.attribute,
                        values.len(),
                        self.block_sizes.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Expected degree of a node in block `b`: within and between parts.
    pub fn expected_degree(&self, b: usize) -> (f64, f64) {
        let n = self.node_count() as f64;
        let nb = self.block_sizes[b] as f64;
        ((nb - 1.0) * self.p_in, (n - nb) * self.p_out)
    }

    fn mean_expected_degree(&self) -> f64 {
        let n = self.node_count() as f64;
        (0..self.block_sizes.len())
            .map(|b| {
                let (w, o) = self.expected_degree(b);
                self.block_sizes[b] as f64 * (w + o)
            })
            .sum::<f64>()
            / n
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticVillage {
    pub dataset: VillageDataset,
    pub planted: Partition,
    pub warnings: Vec<String>,
}

fn node_ids(n: usize) -> NodeIds {
    NodeIds::from_ids((0..n).map(|i| i.to_string())).expect("distinct")
}

fn sample_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    weights.len() - 1
}

fn parse_values(attr: Attribute, values: &[&str]) -> Result<Vec<u32>> {
    values
        .iter()
        .map(|v| {
            attr.parse_value(v)?.ok_or_else(|| Error::InvalidValue {
                attribute: attr.name().to_owned(),
                value: String::new(),
            })
        })
        .collect()
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty()
        || weights.iter().any(|&w| w.is_nan() || w < 0.0)
        || weights.iter().sum::<f64>() <= 0.0
    {
        return Err(Error::Config(
            "category weights must be nonnegative with positive sum".into(),
        ));
    }
    Ok(())
}

fn assign_attributes(
    table: &mut AttributeTable,
    block_of: &[usize],
    assignments: &[AttributeAssignment],
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    for a in assignments {
        match &a.rule {
            AttributeRule::ByBlock(values) => {
                let refs: Vec<&str> = values.iter().map(String::as_str).collect();
                let codes = parse_values(a.attribute, &refs)?;
                for (i, &b) in block_of.iter().enumerate() {
                    table.row_mut(i).set(a.attribute, Some(codes[b]));
                }
            }
            AttributeRule::Distribution(pairs) => {
                let refs: Vec<&str> = pairs.iter().map(|p| p.0.as_str()).collect();
                let codes = parse_values(a.attribute, &refs)?;
                let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
                check_weights(&weights)?;
                for i in 0..block_of.len() {
                    let k = sample_weighted(rng, &weights);
                    table.row_mut(i).set(a.attribute, Some(codes[k]));
                }
            }
        }
    }
    Ok(())
}

/// Draws every pair independently with `p_in` inside blocks and `p_out`
/// across them; returns the dataset together with the planted blocks.
pub fn generate_attribute_sbm(cfg: &AttributedSbmConfig) -> Result<SyntheticVillage> {
    cfg.validate()?;
    let n = cfg.node_count();
    let block_of: Vec<usize> = cfg
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();

    let mut edge_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if block_of[i] == block_of[j] {
                cfg.p_in
            } else {
                cfg.p_out
            };
            if edge_rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let mut attr_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    attr_rng.set_stream(1);
    let mut table = AttributeTable::all_missing(n);
    assign_attributes(&mut table, &block_of, &cfg.attributes, &mut attr_rng)?;

    let dataset = VillageDataset::from_layers(
        format!("sbm-{}", cfg.seed),
        node_ids(n),
        table,
        BTreeMap::from([(LAYER.to_owned(), edges)]),
    );
    let planted = Partition::new(&dataset.graph, &block_of);
    let mut warnings = Vec::new();
    let c = cfg.mean_expected_degree();
    // giant component of a random graph covers half the nodes at c = 2 ln 2
    if c < 2.0 * std::f64::consts::LN_2 {
        warnings.push(format!(
            "expected mean degree {c:.3} is too low for the largest component to cover half the nodes"
        ));
    }
    Ok(SyntheticVillage {
        dataset,
        planted,
        warnings,
    })
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One match-indicator effect: nodes draw a category from `weights`
/// (indexed by attribute code) and a same-category dyad adds `beta` to the
/// log-odds of a tie.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchEffect {
    pub attribute: Attribute,
    pub beta: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadSampleConfig {
    pub beta0: f64,
    pub effects: Vec<MatchEffect>,
    pub n_nodes: usize,
    pub seed: u64,
}

/// Samples node categories, then each dyad's tie independently with
/// probability `logistic(beta0 + Σ beta_d · match_d)`.
pub fn generate_dyad_sample(cfg: &DyadSampleConfig) -> Result<VillageDataset> {
    let n = cfg.n_nodes;
    let mut attr_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    attr_rng.set_stream(1);
    let mut table = AttributeTable::all_missing(n);
    let mut codes: Vec<Vec<u32>> = Vec::with_capacity(cfg.effects.len());
    for e in &cfg.effects {
        check_weights(&e.weights)?;
        let limit = if e.attribute.is_numeric() {
            usize::MAX
        } else {
            e.attribute.category_count()
        };
        if e.weights.len() > limit {
            return Err(Error::Config(format!(
                "{} has {} categories, got {} weights",
                e.attribute,
                limit,
                e.weights.len()
            )));
        }
        let col: Vec<u32> = (0..n)
            .map(|_| sample_weighted(&mut attr_rng, &e.weights) as u32)
            .collect();
        for (i, &c) in col.iter().enumerate() {
            table.row_mut(i).set(e.attribute, Some(c));
        }
        codes.push(col);
    }

    // all match patterns share a handful of probabilities; check them up front
    let max_logit = cfg.beta0 + cfg.effects.iter().map(|e| e.beta.max(0.0)).sum::<f64>();
    let min_logit = cfg.beta0 + cfg.effects.iter().map(|e| e.beta.min(0.0)).sum::<f64>();
    for x in [min_logit, max_logit] {
        let p = logistic(x);
        if !(p > 0.0 && p < 1.0) || !x.is_finite() {
            return Err(Error::Config(format!(
                "tie probability {p} at log-odds {x} is not inside (0, 1)"
            )));
        }
    }

    let mut edge_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let logit = cfg.beta0
                + cfg
                    .effects
                    .iter()
                    .zip(&codes)
                    .filter(|(_, col)| col[i] == col[j])
                    .map(|(e, _)| e.beta)
                    .sum::<f64>();
            if edge_rng.gen::<f64>() < logistic(logit) {
                edges.push((i, j));
            }
        }
    }
    Ok(VillageDataset::from_layers(
        format!("dyads-{}", cfg.seed),
        node_ids(n),
        table,
        BTreeMap::from([(LAYER.to_owned(), edges)]),
    ))
}

/// A synthetic village description as accepted by `segnet synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticSpec {
    Sbm {
        id: String,
        #[serde(flatten)]
        config: AttributedSbmConfig,
    },
    Dyads {
        id: String,
        #[serde(flatten)]
        config: DyadSampleConfig,
    },
}

/// JSON config for a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Where `segnet synth` writes the corpus, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub villages: Vec<SyntheticSpec>,
}

/// A generated village; `planted` is set for block models.
#[derive(Debug, Clone)]
pub struct GeneratedVillage {
    pub dataset: VillageDataset,
    pub planted: Option<Partition>,
    pub warnings: Vec<String>,
}

impl SyntheticSpec {
    pub fn id(&self) -> &str {
        match self {
            SyntheticSpec::Sbm { id, .. } | SyntheticSpec::Dyads { id, .. } => id,
        }
    }

    pub fn generate(&self) -> Result<GeneratedVillage> {
        match self {
            SyntheticSpec::Sbm { id, config } => {
                let mut v = generate_attribute_sbm(config)?;
                v.dataset.village_id = id.clone();
                Ok(GeneratedVillage {
                    dataset: v.dataset,
                    planted: Some(v.planted),
                    warnings: v.warnings,
                })
            }
            SyntheticSpec::Dyads { id, config } => {
                let mut d = generate_dyad_sample(config)?;
                d.village_id = id.clone();
                Ok(GeneratedVillage {
                    dataset: d,
                    planted: None,
                    warnings: Vec::new(),
                })
            }
        }
    }
}

/// File holding the planted blocks of a generated block model.
pub const PLANTED_FILE: &str = "planted.csv";

impl SynthConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let mut cfg: SynthConfig = serde_json::from_str(&text)?;
        if let (Some(out), Some(base)) = (&cfg.output_dir, path.parent()) {
            cfg.output_dir = Some(base.join(out));
        }
        Ok(cfg)
    }

    /// Generates every village (in parallel) and writes each to
    /// `dir/<id>/` in the canonical ingest layout, plus `planted.csv`
    /// (`node_id,community`) for block models.
    pub fn write_corpus(&self, dir: &Path) -> Result<Vec<GeneratedVillage>> {
        let mut ids: Vec<&str> = self.villages.iter().map(|v| v.id()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("village id `{}` used twice", w[0])));
        }
        let villages: Vec<GeneratedVillage> = self
            .villages
            .par_iter()
            .map(SyntheticSpec::generate)
            .collect::<Result<_>>()?;
        for v in &villages {
            let vdir = dir.join(&v.dataset.village_id);
            write_village_dir(&v.dataset, &vdir)?;
            if let Some(p) = &v.planted {
                let path = vdir.join(PLANTED_FILE);
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["node_id", "community"])?;
                for i in 0..p.node_count() {
                    w.write_record([v.dataset.node_ids.id(i), &p.label(i).to_string()])?;
                }
                w.flush()
                    .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
            }
        }
        Ok(villages)
    }
}
