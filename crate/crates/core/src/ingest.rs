//! Loading village datasets from relation-layer files and a covariate table.
//!
//! Canonical on-disk layout:
//!
//! * one CSV per relation type with header `source,target`;
//! * an attribute CSV with header
//!   `node_id,sex,age,religion,caste,education,workflag,savings`, where an
//!   empty cell marks a missing value.
//!
//! Layers may instead be dense 0/1 adjacency matrices (see
//! [`adapt_adjacency_matrix`]); node ids are then the row indices.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attributes::{Attribute, AttributeTable, NodeAttributes};
use crate::error::{Error, Result};
use crate::graph::{NodeIds, UndirectedGraph};

pub const EDGE_HEADER: [&str; 2] = ["source", "target"];
pub const ATTRIBUTE_HEADER: [&str; 8] = [
    "node_id",
    "sex",
    "age",
    "religion",
    "caste",
    "education",
    "workflag",
    "savings",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerFormat {
    #[default]
    EdgeCsv,
    AdjacencyMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub village_id: String,
    pub layer_format: LayerFormat,
    /// Keep survey respondents without any tie as isolated nodes. When
    /// false they are reported in `unmatched_attribute_rows` instead.
    pub respondents_as_nodes: bool,
}

impl IngestConfig {
    pub fn new(village_id: impl Into<String>) -> Self {
        Self {
            village_id: village_id.into(),
            layer_format: LayerFormat::EdgeCsv,
            respondents_as_nodes: true,
        }
    }
}

/// One village: the union graph over all relation layers plus covariates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VillageDataset {
    pub village_id: String,
    pub node_ids: NodeIds,
    pub graph: UndirectedGraph,
    pub attributes: AttributeTable,
    /// Per layer, its deduplicated edges `(i, j)` with `i < j`.
    pub layers: BTreeMap<String, Vec<(usize, usize)>>,
    /// Attribute rows whose id is not a node of the graph.
    pub unmatched_attribute_rows: Vec<String>,
}

impl VillageDataset {
    /// Edge count per relation layer.
    pub fn relation_layers(&self) -> BTreeMap<String, usize> {
        self.layers
            .iter()
            .map(|(name, edges)| (name.clone(), edges.len()))
            .collect()
    }

    /// Builds a dataset from index-based layers; the graph is their union.
    pub fn from_layers(
        village_id: impl Into<String>,
        node_ids: NodeIds,
        attributes: AttributeTable,
        layers: BTreeMap<String, Vec<(usize, usize)>>,
    ) -> Self {
        let n = node_ids.len();
        let layers: BTreeMap<_, _> = layers
            .into_iter()
            .map(|(name, edges)| (name, normalize_edges(edges)))
            .collect();
        let graph = UndirectedGraph::from_edges(n, layers.values().flatten().copied());
        Self {
            village_id: village_id.into(),
            node_ids,
            graph,
            attributes,
            layers,
            unmatched_attribute_rows: Vec::new(),
        }
    }

    /// Nodes that have no covariate at all.
    pub fn nodes_without_attributes(&self) -> usize {
        (0..self.attributes.len())
            .filter(|&i| self.attributes.row(i).is_all_missing())
            .count()
    }
}

fn normalize_edges(edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let set: BTreeSet<(usize, usize)> = edges
        .into_iter()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    set.into_iter().collect()
}

/// Orders ids numerically when both are integers, lexically otherwise,
/// with integers first.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

fn layer_name(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.strip_suffix(".csv")
        .or_else(|| name.strip_suffix(".txt"))
        .unwrap_or(&name)
        .to_owned()
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(path: &Path, reader: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?;
    let found: Vec<&str> = header.iter().collect();
    if found != expected {
        return Err(parse_error(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                found.join(",")
            ),
        ));
    }
    Ok(())
}

/// Reads a `source,target` edge CSV as id pairs.
pub fn read_edge_csv(path: &Path) -> Result<Vec<(String, String)>> {
    let text = read_to_string(path)?;
    let mut reader = csv_reader(&text);
    check_header(path, &mut reader, &EDGE_HEADER)?;
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(parse_error(
                path,
                line,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let (a, b) = (&record[0], &record[1]);
        if a.is_empty() || b.is_empty() {
            return Err(parse_error(path, line, "empty node id"));
        }
        pairs.push((a.to_owned(), b.to_owned()));
    }
    Ok(pairs)
}

/// Reads the covariate table as `(node_id, attributes)` rows in file order.
pub fn read_attribute_csv(path: &Path) -> Result<Vec<(String, NodeAttributes)>> {
    let text = read_to_string(path)?;
    let mut reader = csv_reader(&text);
    check_header(path, &mut reader, &ATTRIBUTE_HEADER)?;
    let mut rows = Vec::new();
    let mut seen = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != ATTRIBUTE_HEADER.len() {
            return Err(parse_error(
                path,
                line,
                format!(
                    "expected {} fields, found {}",
                    ATTRIBUTE_HEADER.len(),
                    record.len()
                ),
            ));
        }
        let id = record[0].to_owned();
        if id.is_empty() {
            return Err(parse_error(path, line, "empty node id"));
        }
        if seen.insert(id.clone(), line).is_some() {
            return Err(Error::DuplicateNode {
                id,
                path: path.to_owned(),
            });
        }
        let mut attrs = NodeAttributes::missing();
        for (attr, raw) in Attribute::ALL.into_iter().zip(record.iter().skip(1)) {
            let code = attr
                .parse_value(raw)
                .map_err(|e| parse_error(path, line, e.to_string()))?;
            attrs.set(attr, code);
        }
        rows.push((id, attrs));
    }
    Ok(rows)
}

/// Edge list of a dense 0/1 adjacency matrix (comma-separated entries, one
/// row per line). Entry `(i, j)` or `(j, i)` equal to 1 yields edge `(i, j)`
/// with `i < j`; the diagonal is ignored.
pub fn adapt_adjacency_matrix(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = read_to_string(path)?;
    parse_adjacency_matrix(&text, path)
}

pub(crate) fn parse_adjacency_matrix(text: &str, path: &Path) -> Result<Vec<(usize, usize)>> {
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| match cell.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(parse_error(
                    path,
                    lineno + 1,
                    format!("matrix entry `{other}` is not 0 or 1"),
                )),
            })
            .collect::<Result<Vec<bool>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NonSquareMatrix {
                row: i,
                found: row.len(),
                expected: n,
            });
        }
    }
    let mut edges = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for j in i + 1..n {
            if row[j] || rows[j][i] {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

fn read_layer(path: &Path, format: LayerFormat) -> Result<Vec<(String, String)>> {
    match format {
        LayerFormat::EdgeCsv => read_edge_csv(path),
        LayerFormat::AdjacencyMatrix => Ok(adapt_adjacency_matrix(path)?
            .into_iter()
            .map(|(i, j)| (i.to_string(), j.to_string()))
            .collect()),
    }
}

/// Loads one village from its relation-layer files and covariate table.
///
/// Nodes are every id appearing in a layer, plus (by default) every survey
/// respondent, sorted with [`natural_cmp`] so the result does not depend
/// on file order. Nodes absent from the attribute file have every field
/// missing.
pub fn load_village(
    edge_files: &[PathBuf],
    attribute_file: &Path,
    config: &IngestConfig,
) -> Result<VillageDataset> {
    let mut raw_layers: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for path in edge_files {
        let name = layer_name(path);
        let pairs = read_layer(path, config.layer_format)?;
        raw_layers.entry(name).or_default().extend(pairs);
    }
    let attribute_rows = read_attribute_csv(attribute_file)?;

    let mut ids: BTreeSet<&str> = raw_layers
        .values()
        .flatten()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect();
    let mut unmatched = Vec::new();
    for (id, _) in &attribute_rows {
        if config.respondents_as_nodes {
            ids.insert(id);
        } else if !ids.contains(id.as_str()) {
            unmatched.push(id.clone());
        }
    }
    let mut ordered: Vec<&str> = ids.into_iter().collect();
    ordered.sort_by(|a, b| natural_cmp(a, b));
    let node_ids = NodeIds::from_ids(ordered.iter().copied()).expect("ids are distinct");

    let mut attributes = AttributeTable::all_missing(node_ids.len());
    for (id, attrs) in &attribute_rows {
        if let Some(i) = node_ids.index_of(id) {
            *attributes.row_mut(i) = *attrs;
        }
    }

    let layers = raw_layers
        .into_iter()
        .map(|(name, pairs)| {
            let edges = pairs
                .iter()
                .map(|(a, b)| (node_ids.index_of(a).unwrap(), node_ids.index_of(b).unwrap()))
                .collect();
            (name, edges)
        })
        .collect();
    let mut dataset = VillageDataset::from_layers(&config.village_id, node_ids, attributes, layers);
    dataset.unmatched_attribute_rows = unmatched;
    Ok(dataset)
}

/// Loads a village directory containing `attributes.csv` and `layers/*`.
pub fn load_village_dir(dir: &Path, config: &IngestConfig) -> Result<VillageDataset> {
    let layer_dir = dir.join("layers");
    let mut files: Vec<PathBuf> = fs::read_dir(&layer_dir)
        .map_err(|e| Error::io(format!("listing {}", layer_dir.display()), e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    load_village(&files, &dir.join("attributes.csv"), config)
}

/// Writes a dataset in the canonical layout understood by
/// [`load_village_dir`].
pub fn write_village_dir(dataset: &VillageDataset, dir: &Path) -> Result<()> {
    let layer_dir = dir.join("layers");
    fs::create_dir_all(&layer_dir)
        .map_err(|e| Error::io(format!("creating {}", layer_dir.display()), e))?;
    for (name, edges) in &dataset.layers {
        let path = layer_dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(EDGE_HEADER)?;
        for &(a, b) in edges {
            w.write_record([dataset.node_ids.id(a), dataset.node_ids.id(b)])?;
        }
        w.flush()
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    let path = dir.join("attributes.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(ATTRIBUTE_HEADER)?;
    for i in 0..dataset.node_ids.len() {
        let row = dataset.attributes.row(i);
        let mut record = vec![dataset.node_ids.id(i).to_owned()];
        record.extend(
            Attribute::ALL
                .into_iter()
                .map(|a| row.get(a).map(|c| a.format_value(c)).unwrap_or_default()),
        );
        w.write_record(&record)?;
    }
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(())
}
