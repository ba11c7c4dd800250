use serde::{Deserialize, Serialize};

use crate::attributes::{complete_case_mask, Attribute, AttributeTable, Bins};
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

/// How an attribute enters the dyad model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// 1 when the two (optionally binned) values are equal.
    Match,
    /// `|v_i - v_j|` of the (optionally binned) values.
    AbsDifference,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureEncoding {
    pub attribute: Attribute,
    pub encoding: Encoding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<Bins>,
}

impl FeatureEncoding {
    pub fn matching(attribute: Attribute) -> Self {
        Self {
            attribute,
            encoding: Encoding::Match,
            bins: None,
        }
    }

    /// Match on the default bins for age and education, plain match otherwise.
    pub fn default_for(attribute: Attribute) -> Self {
        let bins = match attribute {
            Attribute::Age => Some(Bins::default_age()),
            Attribute::Education => Some(Bins::default_education()),
            _ => None,
        };
        Self {
            attribute,
            encoding: Encoding::Match,
            bins,
        }
    }

    fn validate(&self) -> Result<()> {
        let a = self.attribute;
        if self.encoding == Encoding::AbsDifference && !(a.is_numeric() || a.is_binary()) {
            return Err(Error::InvalidFeature(format!(
                "{a} is categorical; only match encoding applies"
            )));
        }
        if self.bins.is_some() && !a.is_numeric() {
            return Err(Error::InvalidFeature(format!("{a} cannot be binned")));
        }
        Ok(())
    }
}

/// Ordered list of model predictors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub features: Vec<FeatureEncoding>,
}

impl FeatureSpec {
    pub fn new(features: Vec<FeatureEncoding>) -> Result<Self> {
        let spec = Self { features };
        spec.validate()?;
        Ok(spec)
    }

    /// All seven attributes, match-encoded, age and education binned.
    pub fn default_joint() -> Self {
        Self {
            features: Attribute::ALL
                .into_iter()
                .map(FeatureEncoding::default_for)
                .collect(),
        }
    }

    pub fn single(feature: FeatureEncoding) -> Result<Self> {
        Self::new(vec![feature])
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::InvalidFeature("no features".into()));
        }
        for (k, f) in self.features.iter().enumerate() {
            f.validate()?;
            if self.features[..k]
                .iter()
                .any(|g| g.attribute == f.attribute)
            {
                return Err(Error::InvalidFeature(format!(
                    "{} listed twice",
                    f.attribute
                )));
            }
        }
        Ok(())
    }

    pub fn attributes(&self) -> Vec<Attribute> {
        self.features.iter().map(|f| f.attribute).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.features
            .iter()
            .map(|f| f.attribute.name().to_owned())
            .collect()
    }
}

/// Row-blocked access to a dyad design, so large designs can be streamed
/// and reduced block by block.
pub trait DyadSource: Sync {
    fn feature_names(&self) -> &[String];

    fn n_rows(&self) -> usize;

    fn n_blocks(&self) -> usize;

    /// Replaces `features` (row-major, one row per dyad) and `ties` with
    /// the contents of block `block`.
    fn fill_block(&self, block: usize, features: &mut Vec<f64>, ties: &mut Vec<bool>);

    fn n_features(&self) -> usize {
        self.feature_names().len()
    }
}

/// Default rows per block.
pub const BLOCK_ROWS: usize = 1 << 16;

/// All unordered pairs of complete-case nodes of a graph, with their
/// similarity features and tie status. Rows are generated on demand.
#[derive(Debug, Clone)]
pub struct DyadDesign<'g> {
    graph: &'g UndirectedGraph,
    nodes: Vec<usize>,
    /// `values[f][k]`: encoded value of feature `f` at `nodes[k]`.
    values: Vec<Vec<u32>>,
    encodings: Vec<Encoding>,
    names: Vec<String>,
    /// Anchor boundaries: block `b` holds the pairs `(k, l)`, `k < l`, with
    /// `k` in `block_starts[b]..block_starts[b + 1]`.
    block_starts: Vec<usize>,
}

/// Builds the design over every unordered pair of nodes that have all of
/// `spec`'s attributes.
pub fn build_dyad_design<'g>(
    graph: &'g UndirectedGraph,
    table: &AttributeTable,
    spec: &FeatureSpec,
) -> Result<DyadDesign<'g>> {
    build_dyad_design_with_block(graph, table, spec, BLOCK_ROWS)
}

pub fn build_dyad_design_with_block<'g>(
    graph: &'g UndirectedGraph,
    table: &AttributeTable,
    spec: &FeatureSpec,
    block_rows: usize,
) -> Result<DyadDesign<'g>> {
    spec.validate()?;
    assert_eq!(
        table.len(),
        graph.node_count(),
        "attribute table must match graph"
    );
    let mask = complete_case_mask(table, &spec.attributes())?;
    let nodes: Vec<usize> = (0..graph.node_count()).filter(|&i| mask[i]).collect();
    if nodes.len() < 2 {
        return Err(Error::TooFewNodes {
            needed: 2,
            found: nodes.len(),
        });
    }
    let values = spec
        .features
        .iter()
        .map(|f| {
            let labels = table.labels(f.attribute, f.bins.as_ref());
            nodes
                .iter()
                .map(|&i| labels[i].expect("complete case"))
                .collect()
        })
        .collect();

    let n = nodes.len();
    let mut block_starts = vec![0];
    let mut rows = 0;
    for k in 0..n {
        rows += n - 1 - k;
        if rows >= block_rows.max(1) {
            block_starts.push(k + 1);
            rows = 0;
        }
    }
    if *block_starts.last().unwrap() != n {
        block_starts.push(n);
    }
    Ok(DyadDesign {
        graph,
        nodes,
        values,
        encodings: spec.features.iter().map(|f| f.encoding).collect(),
        names: spec.names(),
        block_starts,
    })
}

/// One dyad, for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadRow {
    pub i: usize,
    pub j: usize,
    pub tie: bool,
    pub features: Vec<f64>,
}

impl DyadDesign<'_> {
    /// Graph indices of the complete-case nodes.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    fn feature(&self, f: usize, k: usize, l: usize) -> f64 {
        let (a, b) = (self.values[f][k], self.values[f][l]);
        match self.encodings[f] {
            Encoding::Match => f64::from(u8::from(a == b)),
            Encoding::AbsDifference => f64::from(a.abs_diff(b)),
        }
    }

    /// Every row, in anchor order.
    pub fn rows(&self) -> impl Iterator<Item = DyadRow> + '_ {
        let n = self.nodes.len();
        (0..n).flat_map(move |k| {
            (k + 1..n).map(move |l| DyadRow {
                i: self.nodes[k],
                j: self.nodes[l],
                tie: self.graph.has_edge(self.nodes[k], self.nodes[l]),
                features: (0..self.values.len())
                    .map(|f| self.feature(f, k, l))
                    .collect(),
            })
        })
    }

    /// Ties among complete-case pairs.
    pub fn n_ties(&self) -> usize {
        let mut member = vec![false; self.graph.node_count()];
        for &i in &self.nodes {
            member[i] = true;
        }
        self.graph
            .edges()
            .filter(|&(i, j)| member[i] && member[j])
            .count()
    }
}

impl DyadSource for DyadDesign<'_> {
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn n_rows(&self) -> usize {
        let n = self.nodes.len();
        n * (n - 1) / 2
    }

    fn n_blocks(&self) -> usize {
        self.block_starts.len() - 1
    }

    fn fill_block(&self, block: usize, features: &mut Vec<f64>, ties: &mut Vec<bool>) {
        features.clear();
        ties.clear();
        let n = self.nodes.len();
        let n_features = self.values.len();
        for k in self.block_starts[block]..self.block_starts[block + 1] {
            let nbrs = self.graph.neighbors(self.nodes[k]);
            for l in k + 1..n {
                ties.push(nbrs.binary_search(&self.nodes[l]).is_ok());
                for f in 0..n_features {
                    features.push(self.feature(f, k, l));
                }
            }
        }
    }
}

/// A fully materialized design, for data that does not come from a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadTable {
    names: Vec<String>,
    features: Vec<f64>,
    ties: Vec<bool>,
}

impl DyadTable {
    pub fn new(names: Vec<String>) -> Self {
        Self {
            names,
            features: Vec::new(),
            ties: Vec::new(),
        }
    }

    pub fn push(&mut self, features: &[f64], tie: bool) {
        assert_eq!(features.len(), self.names.len());
        self.features.extend_from_slice(features);
        self.ties.push(tie);
    }

    /// Copies every row of another source.
    pub fn collect_from(source: &dyn DyadSource) -> Self {
        let mut table = Self::new(source.feature_names().to_vec());
        let (mut f, mut t) = (Vec::new(), Vec::new());
        for b in 0..source.n_blocks() {
            source.fill_block(b, &mut f, &mut t);
            table.features.extend_from_slice(&f);
            table.ties.extend_from_slice(&t);
        }
        table
    }
}

impl DyadSource for DyadTable {
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn n_rows(&self) -> usize {
        self.ties.len()
    }

    fn n_blocks(&self) -> usize {
        self.ties.len().div_ceil(BLOCK_ROWS)
    }

    fn fill_block(&self, block: usize, features: &mut Vec<f64>, ties: &mut Vec<bool>) {
        let p = self.names.len();
        let start = block * BLOCK_ROWS;
        let end = (start + BLOCK_ROWS).min(self.ties.len());
        features.clear();
        features.extend_from_slice(&self.features[start * p..end * p]);
        ties.clear();
        ties.extend_from_slice(&self.ties[start..end]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::NodeAttributes;

    fn table(rows: &[(u32, u32)]) -> AttributeTable {
        AttributeTable::new(
            rows.iter()
                .map(|&(caste, age)| {
                    NodeAttributes::missing()
                        .with(Attribute::Caste, caste)
                        .with(Attribute::Age, age)
                })
                .collect(),
        )
    }

    #[test]
    fn match_and_difference_features() {
        let g = UndirectedGraph::from_edges(2, [(0, 1)]);
        let t = table(&[(2, 30), (2, 42)]);
        let spec = FeatureSpec::new(vec![
            FeatureEncoding::matching(Attribute::Caste),
            FeatureEncoding {
                attribute: Attribute::Age,
                encoding: Encoding::AbsDifference,
                bins: None,
            },
        ])
        .unwrap();
        let d = build_dyad_design(&g, &t, &spec).unwrap();
        let rows: Vec<DyadRow> = d.rows().collect();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].features, vec![1.0, 12.0]);
        assert!(rows[0].tie);
    }

    #[test]
    fn pair_count_ignores_ties() {
        let g = UndirectedGraph::from_edges(6, [(0, 1)]);
        let mut t = table(&[(0, 20), (1, 20), (2, 20), (3, 20), (0, 20), (0, 20)]);
        t.row_mut(5).set(Attribute::Caste, None);
        let spec = FeatureSpec::single(FeatureEncoding::matching(Attribute::Caste)).unwrap();
        let d = build_dyad_design(&g, &t, &spec).unwrap();
        assert_eq!(d.n_rows(), 10);
        assert_eq!(d.rows().count(), 10);
        assert_eq!(d.n_ties(), 1);
    }

    #[test]
    fn blocks_cover_every_row_once() {
        let n = 40;
        let edges = (0..n).map(|i| (i, (i * 7 + 3) % n));
        let g = UndirectedGraph::from_edges(n, edges);
        let t = table(&(0..n as u32).map(|i| (i % 4, 18 + i)).collect::<Vec<_>>());
        let spec = FeatureSpec::new(vec![
            FeatureEncoding::matching(Attribute::Caste),
            FeatureEncoding::default_for(Attribute::Age),
        ])
        .unwrap();
        let streamed = build_dyad_design_with_block(&g, &t, &spec, 37).unwrap();
        assert!(streamed.n_blocks() > 5);
        let whole = build_dyad_design_with_block(&g, &t, &spec, usize::MAX).unwrap();
        assert_eq!(whole.n_blocks(), 1);
        assert_eq!(
            DyadTable::collect_from(&streamed),
            DyadTable::collect_from(&whole)
        );
        let direct: Vec<bool> = whole.rows().map(|r| r.tie).collect();
        assert_eq!(direct.iter().filter(|&&t| t).count(), g.edge_count());
    }

    #[test]
    fn rejects_bad_specs_and_inputs() {
        assert!(FeatureSpec::single(FeatureEncoding {
            attribute: Attribute::Caste,
            encoding: Encoding::AbsDifference,
            bins: None,
        })
        .is_err());
        assert!(FeatureSpec::new(vec![
            FeatureEncoding::matching(Attribute::Sex),
            FeatureEncoding::matching(Attribute::Sex)
        ])
        .is_err());
        let g = UndirectedGraph::from_edges(2, [(0, 1)]);
        let mut t = table(&[(0, 1), (0, 1)]);
        t.row_mut(1).set(Attribute::Caste, None);
        let spec = FeatureSpec::single(FeatureEncoding::matching(Attribute::Caste)).unwrap();
        assert!(matches!(
            build_dyad_design(&g, &t, &spec),
            Err(Error::TooFewNodes { found: 1, .. })
        ));
    }
}
