//! Attribute modularity and its decomposition into within- and
//! between-community parts, plus the thresholded network of communities.
//!
//! All attribute-dependent quantities are evaluated on the subgraph induced
//! by the nodes whose label is present; degrees and edge counts are
//! recounted there. The community partition itself comes from the full
//! graph and is only restricted.
//!
//! Null-model terms are evaluated from per-(community, label) degree sums,
//! `Σ_ij k_i k_j δ(x_i,x_j) δ(h_i,h_j) = Σ_{c,a} (Σ_{i∈c,a} k_i)²`, so every
//! sum is an exact integer until the final division.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::community::Partition;
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

/// Graph restricted to labeled nodes.
struct Labeled {
    graph: UndirectedGraph,
    nodes: Vec<usize>,
    labels: Vec<u32>,
}

fn labeled(g: &UndirectedGraph, labels: &[Option<u32>]) -> Labeled {
    assert_eq!(labels.len(), g.node_count(), "one label slot per node");
    let nodes: Vec<usize> = (0..g.node_count())
        .filter(|&i| labels[i].is_some())
        .collect();
    Labeled {
        graph: g.induced_subgraph(&nodes),
        labels: nodes.iter().map(|&i| labels[i].unwrap()).collect(),
        nodes,
    }
}

fn sum_of_squares<K>(sums: &HashMap<K, u64>) -> f64 {
    // u64 squares stay exact for any realistic degree total
    sums.values().map(|&s| (s * s) as f64).sum()
}

/// Modularity of an attribute labeling (assortativity coefficient form),
/// over the subgraph of labeled nodes.
pub fn attribute_modularity(g: &UndirectedGraph, labels: &[Option<u32>]) -> Result<f64> {
    let s = labeled(g, labels);
    let m = s.graph.edge_count();
    if m == 0 {
        return Err(Error::NoLabeledEdges);
    }
    let same = s
        .graph
        .edges()
        .filter(|&(i, j)| s.labels[i] == s.labels[j])
        .count();
    let mut sums: HashMap<u32, u64> = HashMap::new();
    for i in 0..s.graph.node_count() {
        *sums.entry(s.labels[i]).or_insert(0) += s.graph.degree(i) as u64;
    }
    let two_m = 2.0 * m as f64;
    let null = sum_of_squares(&sums) / two_m;
    Ok((2.0 * same as f64 - null) / two_m)
}

/// One half of the decomposition: the raw value, its maximum for a
/// perfectly assortative arrangement, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentModularity {
    pub q: f64,
    pub q_max: f64,
    /// `q / q_max`; `None` when `q_max` is 0.
    pub q_norm: Option<f64>,
    /// Edges of this kind (within or between) among labeled nodes.
    pub edges: usize,
}

impl ComponentModularity {
    fn from_terms(edge_term: f64, null_term: f64, m_part: usize) -> Self {
        let two_m = 2.0 * m_part as f64;
        let q = (edge_term - null_term) / two_m;
        let q_max = (two_m - null_term) / two_m;
        let q_norm = (q_max != 0.0).then(|| q / q_max);
        Self {
            q,
            q_max,
            q_norm,
            edges: m_part,
        }
    }
}

/// `Q^w = (1/2m^w) Σ_ij [A_ij − k^w_i k^w_j / 2m^w] δ(x_i,x_j) δ(h_i,h_j)`
/// with its normalization.
pub fn within_community_modularity(
    g: &UndirectedGraph,
    labels: &[Option<u32>],
    partition: &Partition,
) -> Result<ComponentModularity> {
    assert_eq!(partition.node_count(), g.node_count());
    let s = labeled(g, labels);
    let p = partition.restrict(&s.graph, &s.nodes);
    if p.m_within() == 0 {
        return Err(Error::NoWithinEdges);
    }
    let same = s
        .graph
        .edges()
        .filter(|&(i, j)| p.community(i) == p.community(j) && s.labels[i] == s.labels[j])
        .count();
    let mut sums: HashMap<(usize, u32), u64> = HashMap::new();
    for i in 0..s.graph.node_count() {
        *sums.entry((p.community(i), s.labels[i])).or_insert(0) += p.within_degrees()[i] as u64;
    }
    let null = sum_of_squares(&sums) / (2.0 * p.m_within() as f64);
    Ok(ComponentModularity::from_terms(
        2.0 * same as f64,
        null,
        p.m_within(),
    ))
}

/// `Q^b = (1/2m^b) Σ_ij [A_ij − k^b_i k^b_j / 2m^b] δ(x_i,x_j) (1 − δ(h_i,h_j))`
/// with its normalization.
pub fn between_community_modularity(
    g: &UndirectedGraph,
    labels: &[Option<u32>],
    partition: &Partition,
) -> Result<ComponentModularity> {
    assert_eq!(partition.node_count(), g.node_count());
    let s = labeled(g, labels);
    let p = partition.restrict(&s.graph, &s.nodes);
    if p.m_between() == 0 {
        return Err(Error::NoBetweenEdges);
    }
    let same = s
        .graph
        .edges()
        .filter(|&(i, j)| p.community(i) != p.community(j) && s.labels[i] == s.labels[j])
        .count();
    let mut by_label: HashMap<u32, u64> = HashMap::new();
    let mut by_group: HashMap<(usize, u32), u64> = HashMap::new();
    for i in 0..s.graph.node_count() {
        let k = p.between_degrees()[i] as u64;
        *by_label.entry(s.labels[i]).or_insert(0) += k;
        *by_group.entry((p.community(i), s.labels[i])).or_insert(0) += k;
    }
    // same label, any community, minus same label and same community
    let null =
        (sum_of_squares(&by_label) - sum_of_squares(&by_group)) / (2.0 * p.m_between() as f64);
    Ok(ComponentModularity::from_terms(
        2.0 * same as f64,
        null,
        p.m_between(),
    ))
}

/// Segregation measures for one attribute in one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegregationReport {
    pub attribute: String,
    pub q_attr: f64,
    /// `None` when no within-community edge joins labeled nodes.
    pub within: Option<ComponentModularity>,
    /// `None` when no between-community edge joins labeled nodes.
    pub between: Option<ComponentModularity>,
    pub n_used: usize,
}

impl SegregationReport {
    pub fn q_within(&self) -> Option<f64> {
        self.within.map(|w| w.q)
    }

    pub fn q_between(&self) -> Option<f64> {
        self.between.map(|b| b.q)
    }

    pub fn q_within_norm(&self) -> Option<f64> {
        self.within.and_then(|w| w.q_norm)
    }

    pub fn q_between_norm(&self) -> Option<f64> {
        self.between.and_then(|b| b.q_norm)
    }

    /// Communities connect preferentially to same-label communities:
    /// normalized between-community modularity above `cutoff`.
    pub fn segregated_between(&self, cutoff: f64) -> bool {
        self.q_between_norm().is_some_and(|q| q > cutoff)
    }
}

pub fn segregation_report(
    g: &UndirectedGraph,
    labels: &[Option<u32>],
    partition: &Partition,
    attribute: &str,
) -> Result<SegregationReport> {
    let q_attr = attribute_modularity(g, labels)?;
    let optional = |r: Result<ComponentModularity>| match r {
        Ok(c) => Ok(Some(c)),
        Err(Error::NoWithinEdges | Error::NoBetweenEdges) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(SegregationReport {
        attribute: attribute.to_owned(),
        q_attr,
        within: optional(within_community_modularity(g, labels, partition))?,
        between: optional(between_community_modularity(g, labels, partition))?,
        n_used: labels.iter().filter(|l| l.is_some()).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryShare {
    pub category: String,
    pub count: usize,
    /// Share among members whose label is present.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityNode {
    /// 1-based community label.
    pub community: usize,
    pub size: usize,
    pub composition: Vec<CategoryShare>,
    pub missing_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityEdge {
    pub source: usize,
    pub target: usize,
    pub ties: usize,
    /// `|C_a| · |C_b|`.
    pub possible: usize,
}

impl CommunityEdge {
    pub fn density(&self) -> f64 {
        self.ties as f64 / self.possible as f64
    }
}

/// Network whose nodes are large communities and whose edges are dense
/// inter-community tie blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityNetwork {
    pub attribute: String,
    pub node_min_fraction: f64,
    pub edge_min_fraction: f64,
    pub nodes: Vec<CommunityNode>,
    pub edges: Vec<CommunityEdge>,
    /// Share of the graph's nodes inside retained communities.
    pub retained_node_fraction: f64,
    /// Share of the graph's edges inside retained communities or on
    /// retained community edges.
    pub retained_tie_fraction: f64,
    /// Share of the graph's edges on retained community edges only.
    pub retained_between_tie_fraction: f64,
}

/// Builds the community network. A community is kept when it holds at
/// least `node_min` of all nodes; an edge between kept communities `a` and
/// `b` is kept when it carries at least one tie and at least
/// `edge_min · |C_a| · |C_b|` ties.
pub fn build_community_network(
    g: &UndirectedGraph,
    partition: &Partition,
    labels: &[Option<u32>],
    attribute: &str,
    category_name: impl Fn(u32) -> String,
    node_min: f64,
    edge_min: f64,
) -> Result<CommunityNetwork> {
    for (name, v) in [("node_min", node_min), ("edge_min", edge_min)] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::Config(format!("{name} must lie in [0, 1), got {v}")));
        }
    }
    assert_eq!(partition.node_count(), g.node_count());
    assert_eq!(labels.len(), g.node_count());
    let n = g.node_count();
    let sizes = partition.sizes();
    let kept: Vec<bool> = sizes
        .iter()
        .map(|&s| s as f64 >= node_min * n as f64)
        .collect();
    if !kept.iter().any(|&k| k) {
        return Err(Error::NoCommunityRetained(node_min));
    }

    let mut compositions: Vec<BTreeMap<u32, usize>> = vec![BTreeMap::new(); sizes.len()];
    for (i, label) in labels.iter().enumerate() {
        if let Some(l) = label {
            *compositions[partition.community(i)].entry(*l).or_insert(0) += 1;
        }
    }
    let mut internal = vec![0usize; sizes.len()];
    let mut cross: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (i, j) in g.edges() {
        let (a, b) = (partition.community(i), partition.community(j));
        if a == b {
            internal[a] += 1;
        } else {
            *cross.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }

    let nodes: Vec<CommunityNode> = (0..sizes.len())
        .filter(|&c| kept[c])
        .map(|c| {
            let observed: usize = compositions[c].values().sum();
            CommunityNode {
                community: c + 1,
                size: sizes[c],
                composition: compositions[c]
                    .iter()
                    .map(|(&code, &count)| CategoryShare {
                        category: category_name(code),
                        count,
                        fraction: count as f64 / observed as f64,
                    })
                    .collect(),
                missing_fraction: 1.0 - observed as f64 / sizes[c] as f64,
            }
        })
        .collect();
    let edges: Vec<CommunityEdge> = cross
        .iter()
        .filter(|(&(a, b), _)| kept[a] && kept[b])
        .map(|(&(a, b), &ties)| CommunityEdge {
            source: a + 1,
            target: b + 1,
            ties,
            possible: sizes[a] * sizes[b],
        })
        .filter(|e| e.ties as f64 >= edge_min * e.possible as f64)
        .collect();

    let m = g.edge_count().max(1) as f64;
    let kept_nodes: usize = nodes.iter().map(|c| c.size).sum();
    let kept_internal: usize = (0..sizes.len())
        .filter(|&c| kept[c])
        .map(|c| internal[c])
        .sum();
    let kept_between: usize = edges.iter().map(|e| e.ties).sum();
    Ok(CommunityNetwork {
        attribute: attribute.to_owned(),
        node_min_fraction: node_min,
        edge_min_fraction: edge_min,
        nodes,
        edges,
        retained_node_fraction: kept_nodes as f64 / n as f64,
        retained_tie_fraction: (kept_internal + kept_between) as f64 / m,
        retained_between_tie_fraction: kept_between as f64 / m,
    })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl CommunityNetwork {
    /// Graphviz rendering. Each node carries its size and composition
    /// (`category:fraction` pairs) both in the label and as attributes.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph \"{}\" {{", dot_escape(name));
        let _ = writeln!(out, "  node [shape=circle];");
        for node in &self.nodes {
            let composition: Vec<String> = node
                .composition
                .iter()
                .map(|s| format!("{}:{:.3}", s.category, s.fraction))
                .collect();
            let composition = composition.join(";");
            let _ = writeln!(
                out,
                "  c{id} [label=\"C{id}\\nn={size}\\n{comp}\", size={size}, {attr}=\"{comp}\", missing=\"{missing:.3}\"];",
                id = node.community,
                size = node.size,
                attr = dot_escape(&self.attribute),
                comp = dot_escape(&composition),
                missing = node.missing_fraction,
            );
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  c{} -- c{} [weight={}, label=\"{}\", density=\"{:.4}\"];",
                e.source,
                e.target,
                e.ties,
                e.ties,
                e.density()
            );
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bridged_triangles() -> UndirectedGraph {
        UndirectedGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    }

    fn sides() -> Vec<Option<u32>> {
        vec![Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)]
    }

    #[test]
    fn uniform_attribute_has_zero_modularity() {
        let g = bridged_triangles();
        assert_eq!(attribute_modularity(&g, &[Some(3); 6]).unwrap(), 0.0);
    }

    #[test]
    fn uniform_attribute_within_communities() {
        // with one label the within part reduces to the partition's own
        // modularity on within edges: (12 - (36 + 36) / 12) / 12
        let g = bridged_triangles();
        let p = Partition::new(&g, &[0, 0, 0, 1, 1, 1]);
        let w = within_community_modularity(&g, &[Some(3); 6], &p).unwrap();
        assert_eq!(w.q, 0.5);
        assert_eq!(w.q_norm, Some(1.0));
    }

    #[test]
    fn bridged_triangle_values() {
        let g = bridged_triangles();
        let p = Partition::new(&g, &[0, 0, 0, 1, 1, 1]);
        assert!((attribute_modularity(&g, &sides()).unwrap() - 5.0 / 14.0).abs() < 1e-12);
        let w = within_community_modularity(&g, &sides(), &p).unwrap();
        assert!((w.q - 0.5).abs() < 1e-12);
        assert!((w.q_norm.unwrap() - 1.0).abs() < 1e-12);
        let b = between_community_modularity(&g, &sides(), &p).unwrap();
        assert_eq!(b.q, 0.0);
    }

    #[test]
    fn complete_bipartite_cross_labels() {
        let edges = (0..3).flat_map(|i| (3..6).map(move |j| (i, j)));
        let g = UndirectedGraph::from_edges(6, edges);
        assert!((attribute_modularity(&g, &sides()).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn missing_labels_restrict_the_graph() {
        let g = bridged_triangles();
        let mut labels = sides();
        labels[5] = None;
        // triangle 0-1-2 plus path 3-4 and the bridge 2-3
        let sub = g.induced_subgraph(&[0, 1, 2, 3, 4]);
        let full = attribute_modularity(&sub, &labels[..5]).unwrap();
        assert_eq!(attribute_modularity(&g, &labels).unwrap(), full);
        assert!(matches!(
            attribute_modularity(&g, &[Some(0), None, None, None, None, Some(0)]),
            Err(Error::NoLabeledEdges)
        ));
    }

    #[test]
    fn single_community_has_no_between_part() {
        let g = bridged_triangles();
        let p = Partition::whole(&g);
        assert!(matches!(
            between_community_modularity(&g, &sides(), &p),
            Err(Error::NoBetweenEdges)
        ));
        let r = segregation_report(&g, &sides(), &p, "caste").unwrap();
        assert!(r.between.is_none());
        assert!(r.within.is_some());
        assert!(!r.segregated_between(0.2));
    }

    #[test]
    fn community_network_thresholds() {
        // two K4 blocks fully joined, plus a pendant pair hanging off node 0
        let mut edges = Vec::new();
        for i in 0..8 {
            for j in i + 1..8 {
                edges.push((i, j));
            }
        }
        edges.push((0, 8));
        edges.push((8, 9));
        let g = UndirectedGraph::from_edges(10, edges);
        let p = Partition::new(&g, &[0, 0, 0, 0, 1, 1, 1, 1, 2, 2]);
        let labels: Vec<Option<u32>> = (0..10)
            .map(|i| if i < 6 { Some((i % 2) as u32) } else { None })
            .collect();
        let name = |c: u32| format!("cat{c}");
        let net = build_community_network(&g, &p, &labels, "caste", name, 0.05, 0.99).unwrap();
        assert_eq!(net.nodes.len(), 3);
        let e = net
            .edges
            .iter()
            .find(|e| (e.source, e.target) == (1, 2))
            .unwrap();
        assert_eq!((e.ties, e.possible), (16, 16));
        assert_eq!(net.edges.len(), 1);
        let second = &net.nodes[1];
        assert_eq!(second.missing_fraction, 0.5);
        assert_eq!(second.composition.len(), 2);

        let net = build_community_network(&g, &p, &labels, "caste", name, 0.25, 0.05).unwrap();
        assert_eq!(net.nodes.len(), 2);
        assert_eq!(net.retained_node_fraction, 0.8);
        assert!(matches!(
            build_community_network(&g, &p, &labels, "caste", name, 0.5, 0.05),
            Err(Error::NoCommunityRetained(_))
        ));
        let dot = net.to_dot("v1");
        assert!(dot.starts_with("graph \"v1\" {"));
        assert!(dot.contains("c1 -- c2"));
    }
}
