//! Undirected simple graphs, connected components and descriptive statistics.
//!
//! Nodes carry dense indices `0..n`; the external string ids live in a
//! [`NodeIds`] table returned alongside the graph by [`build_graph`].

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Immutable undirected simple graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    adjacency: Vec<Vec<usize>>,
    n_edges: usize,
}

impl UndirectedGraph {
    /// Builds a simple graph on `n` nodes. Self-loops are dropped and
    /// repeated or reversed pairs collapse into one edge.
    ///
    /// Panics if an endpoint is `>= n`.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut twice_m = 0;
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
            nbrs.dedup();
            twice_m += nbrs.len();
        }
        Self {
            adjacency,
            n_edges: twice_m / 2,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
            n_edges: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Sorted neighbors of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Each edge once, as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, nbrs)| {
            let start = nbrs.partition_point(|&j| j <= i);
            nbrs[start..].iter().map(move |&j| (i, j))
        })
    }

    /// Subgraph induced by `nodes`; node `nodes[k]` becomes node `k`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> UndirectedGraph {
        let mut old_to_new = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            old_to_new[old] = new;
        }
        let adjacency: Vec<Vec<usize>> = nodes
            .iter()
            .map(|&old| {
                let mut nbrs: Vec<usize> = self.adjacency[old]
                    .iter()
                    .filter_map(|&j| match old_to_new[j] {
                        usize::MAX => None,
                        new => Some(new),
                    })
                    .collect();
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        let n_edges = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        UndirectedGraph { adjacency, n_edges }
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut members = Vec::new();
            while let Some(v) = queue.pop_front() {
                members.push(v);
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    /// Number of triangles through each node.
    pub fn triangles(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.node_count()];
        for (i, j) in self.edges() {
            let common = sorted_intersection_count(&self.adjacency[i], &self.adjacency[j]);
            counts[i] += common;
            counts[j] += common;
        }
        // every triangle at i is seen from both of its edges incident to i
        counts.iter_mut().for_each(|c| *c /= 2);
        counts
    }

    /// Local clustering coefficient per node; nodes of degree < 2 get 0.
    pub fn local_clustering(&self) -> Vec<f64> {
        self.triangles()
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let k = self.degree(i);
                if k < 2 {
                    0.0
                } else {
                    t as f64 / (k * (k - 1) / 2) as f64
                }
            })
            .collect()
    }
}

fn sorted_intersection_count(a: &[usize], b: &[usize]) -> usize {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

/// Bidirectional mapping between external node ids and dense indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeIds {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeIds {
    /// Fails on a repeated id.
    pub fn from_ids<I, S>(ids: I) -> std::result::Result<Self, String>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = NodeIds::default();
        for id in ids {
            let id = id.into();
            if table.index.contains_key(&id) {
                return Err(id);
            }
            table.push(id);
        }
        Ok(table)
    }

    fn push(&mut self, id: String) -> usize {
        let idx = self.ids.len();
        self.index.insert(id.clone(), idx);
        self.ids.push(id);
        idx
    }

    fn get_or_insert(&mut self, id: &str) -> usize {
        match self.index.get(id) {
            Some(&i) => i,
            None => self.push(id.to_owned()),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Ids of the given indices, in order.
    pub fn select(&self, indices: &[usize]) -> NodeIds {
        NodeIds::from_ids(indices.iter().map(|&i| self.ids[i].clone()))
            .expect("indices are distinct")
    }
}

/// Builds a simple graph from id pairs.
///
/// With `node_ids` supplied, the node order is taken from it and any edge
/// endpoint outside it is rejected. Without it, nodes are numbered in order
/// of first appearance in `edges`.
pub fn build_graph<S: AsRef<str>>(
    edges: &[(S, S)],
    node_ids: Option<&[S]>,
) -> Result<(UndirectedGraph, NodeIds)> {
    let mut ids = match node_ids {
        Some(list) => {
            NodeIds::from_ids(list.iter().map(|s| s.as_ref().to_owned())).map_err(|id| {
                Error::DuplicateNode {
                    id,
                    path: "<node list>".into(),
                }
            })?
        }
        None => NodeIds::default(),
    };
    let fixed = node_ids.is_some();
    let mut pairs = Vec::with_capacity(edges.len());
    for (a, b) in edges {
        let (a, b) = (a.as_ref(), b.as_ref());
        let ia = resolve(&mut ids, a, fixed)?;
        let ib = resolve(&mut ids, b, fixed)?;
        pairs.push((ia, ib));
    }
    Ok((UndirectedGraph::from_edges(ids.len(), pairs), ids))
}

fn resolve(ids: &mut NodeIds, id: &str, fixed: bool) -> Result<usize> {
    if fixed {
        ids.index_of(id)
            .ok_or_else(|| Error::UnknownNode(id.to_owned()))
    } else {
        Ok(ids.get_or_insert(id))
    }
}

/// An induced subgraph together with its index maps.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: UndirectedGraph,
    /// Original index of each subgraph node (ascending).
    pub new_to_old: Vec<usize>,
    pub old_to_new: Vec<Option<usize>>,
}

impl Subgraph {
    pub fn node_fraction(&self) -> f64 {
        self.new_to_old.len() as f64 / self.old_to_new.len() as f64
    }

    /// Restricts a per-node vector of the parent graph to the subgraph.
    pub fn restrict<T: Clone>(&self, values: &[T]) -> Vec<T> {
        self.new_to_old.iter().map(|&i| values[i].clone()).collect()
    }
}

/// Induced subgraph on the largest connected component. Equal-sized
/// components are ranked by their smallest original index.
pub fn largest_connected_component(g: &UndirectedGraph) -> Result<Subgraph> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    // components come ordered by smallest member, so the first maximum wins ties
    let components = g.connected_components();
    let mut best = &components[0];
    for c in &components[1..] {
        if c.len() > best.len() {
            best = c;
        }
    }
    let mut old_to_new = vec![None; g.node_count()];
    for (new, &old) in best.iter().enumerate() {
        old_to_new[old] = Some(new);
    }
    Ok(Subgraph {
        graph: g.induced_subgraph(best),
        new_to_old: best.clone(),
        old_to_new,
    })
}

/// Descriptive statistics of a network and its largest connected component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub density: f64,
    pub mean_degree: f64,
    pub mean_clustering: f64,
    pub n_components: usize,
    pub lcc_nodes: usize,
    pub lcc_edges: usize,
    pub lcc_node_fraction: f64,
    pub lcc_edge_fraction: f64,
    pub lcc_mean_degree: f64,
    pub lcc_mean_clustering: f64,
}

pub fn density(g: &UndirectedGraph) -> f64 {
    let n = g.node_count() as f64;
    if n < 2.0 {
        0.0
    } else {
        2.0 * g.edge_count() as f64 / (n * (n - 1.0))
    }
}

pub fn mean_degree(g: &UndirectedGraph) -> f64 {
    if g.is_empty() {
        0.0
    } else {
        2.0 * g.edge_count() as f64 / g.node_count() as f64
    }
}

pub fn mean_clustering(g: &UndirectedGraph) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    g.local_clustering().iter().sum::<f64>() / g.node_count() as f64
}

/// `lcc` must be derived from `g`.
pub fn network_stats(g: &UndirectedGraph, lcc: &UndirectedGraph) -> NetworkStats {
    let lcc_edge_fraction = if g.edge_count() == 0 {
        1.0
    } else {
        lcc.edge_count() as f64 / g.edge_count() as f64
    };
    NetworkStats {
        n_nodes: g.node_count(),
        n_edges: g.edge_count(),
        density: density(g),
        mean_degree: mean_degree(g),
        mean_clustering: mean_clustering(g),
        n_components: g.connected_components().len(),
        lcc_nodes: lcc.node_count(),
        lcc_edges: lcc.edge_count(),
        lcc_node_fraction: lcc.node_count() as f64 / g.node_count() as f64,
        lcc_edge_fraction,
        lcc_mean_degree: mean_degree(lcc),
        lcc_mean_clustering: mean_clustering(lcc),
    }
}
