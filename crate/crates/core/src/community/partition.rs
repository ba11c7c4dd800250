use serde::{Deserialize, Serialize};

use crate::graph::UndirectedGraph;

/// Node-to-community assignment with within/between edge bookkeeping.
///
/// Community ids are contiguous from 0 internally, numbered by first
/// appearance; [`Partition::label`] gives the 1-based label used in output
/// files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    sizes: Vec<usize>,
    m_within: usize,
    m_between: usize,
    within_degrees: Vec<usize>,
    between_degrees: Vec<usize>,
}

impl Partition {
    /// `communities[i]` is any community key for node `i`; keys are
    /// renumbered contiguously.
    pub fn new(graph: &UndirectedGraph, communities: &[usize]) -> Self {
        assert_eq!(
            communities.len(),
            graph.node_count(),
            "assignment must cover every node"
        );
        let mut remap = std::collections::HashMap::new();
        let assignment: Vec<usize> = communities
            .iter()
            .map(|&c| {
                let next = remap.len();
                *remap.entry(c).or_insert(next)
            })
            .collect();
        let mut sizes = vec![0; remap.len()];
        for &c in &assignment {
            sizes[c] += 1;
        }
        let n = graph.node_count();
        let mut within_degrees = vec![0; n];
        let mut between_degrees = vec![0; n];
        for i in 0..n {
            for &j in graph.neighbors(i) {
                if assignment[i] == assignment[j] {
                    within_degrees[i] += 1;
                } else {
                    between_degrees[i] += 1;
                }
            }
        }
        let m_within = within_degrees.iter().sum::<usize>() / 2;
        let m_between = between_degrees.iter().sum::<usize>() / 2;
        Self {
            assignment,
            sizes,
            m_within,
            m_between,
            within_degrees,
            between_degrees,
        }
    }

    pub fn singletons(graph: &UndirectedGraph) -> Self {
        let ids: Vec<usize> = (0..graph.node_count()).collect();
        Self::new(graph, &ids)
    }

    pub fn whole(graph: &UndirectedGraph) -> Self {
        Self::new(graph, &vec![0; graph.node_count()])
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    /// 0-based community of every node.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community(&self, i: usize) -> usize {
        self.assignment[i]
    }

    /// 1-based label of node `i`'s community.
    pub fn label(&self, i: usize) -> usize {
        self.assignment[i] + 1
    }

    pub fn n_communities(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn m_within(&self) -> usize {
        self.m_within
    }

    pub fn m_between(&self) -> usize {
        self.m_between
    }

    pub fn within_degrees(&self) -> &[usize] {
        &self.within_degrees
    }

    pub fn between_degrees(&self) -> &[usize] {
        &self.between_degrees
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.n_communities()];
        for (i, &c) in self.assignment.iter().enumerate() {
            members[c].push(i);
        }
        members
    }

    /// The same communities on an induced subgraph of `nodes`, with
    /// within/between degrees recounted there.
    pub fn restrict(&self, subgraph: &UndirectedGraph, nodes: &[usize]) -> Partition {
        let communities: Vec<usize> = nodes.iter().map(|&i| self.assignment[i]).collect();
        Partition::new(subgraph, &communities)
    }
}

/// Modularity of a community assignment, summing over all ordered node
/// pairs including `i = j`:
/// `Q = (1/2m) Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j)`.
///
/// Returns 0 for a graph without edges.
pub fn modularity(graph: &UndirectedGraph, communities: &[usize]) -> f64 {
    assert_eq!(communities.len(), graph.node_count());
    let m = graph.edge_count();
    if m == 0 {
        return 0.0;
    }
    let n_comm = communities.iter().max().map_or(0, |&c| c + 1);
    let mut internal = vec![0usize; n_comm];
    let mut degree_sum = vec![0usize; n_comm];
    for i in 0..graph.node_count() {
        degree_sum[communities[i]] += graph.degree(i);
    }
    for (i, j) in graph.edges() {
        if communities[i] == communities[j] {
            internal[communities[i]] += 1;
        }
    }
    let two_m = 2.0 * m as f64;
    let edge_term: f64 = 2.0 * internal.iter().sum::<usize>() as f64;
    let null_term: f64 = degree_sum
        .iter()
        .map(|&d| (d as f64) * (d as f64))
        .sum::<f64>()
        / two_m;
    (edge_term - null_term) / two_m
}

pub fn modularity_of_partition(graph: &UndirectedGraph, partition: &Partition) -> f64 {
    modularity(graph, partition.assignment())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two triangles {0,1,2} and {3,4,5} joined by edge 2–3.
    fn bridged_triangles() -> UndirectedGraph {
        UndirectedGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    }

    fn naive_modularity(g: &UndirectedGraph, c: &[usize]) -> f64 {
        let n = g.node_count();
        let two_m = 2.0 * g.edge_count() as f64;
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                if c[i] == c[j] {
                    let a = if g.has_edge(i, j) { 1.0 } else { 0.0 };
                    q += a - (g.degree(i) * g.degree(j)) as f64 / two_m;
                }
            }
        }
        q / two_m
    }

    #[test]
    fn single_community_is_zero() {
        let g = bridged_triangles();
        assert_eq!(modularity_of_partition(&g, &Partition::whole(&g)), 0.0);
    }

    #[test]
    fn triangle_split() {
        let g = bridged_triangles();
        let p = Partition::new(&g, &[0, 0, 0, 1, 1, 1]);
        let expected = naive_modularity(&g, p.assignment());
        assert!((expected - 5.0 / 14.0).abs() < 1e-15);
        assert!((modularity_of_partition(&g, &p) - 5.0 / 14.0).abs() < 1e-12);
        assert_eq!((p.m_within(), p.m_between()), (6, 1));
        assert_eq!(p.between_degrees(), &[0, 0, 1, 1, 0, 0]);
    }

    #[test]
    fn singletons_are_negative() {
        let g = bridged_triangles();
        assert!(modularity_of_partition(&g, &Partition::singletons(&g)) < 0.0);
    }

    #[test]
    fn labels_are_contiguous_from_one() {
        let g = bridged_triangles();
        let p = Partition::new(&g, &[7, 7, 3, 3, 9, 9]);
        assert_eq!(p.assignment(), &[0, 0, 1, 1, 2, 2]);
        assert_eq!(
            (0..6).map(|i| p.label(i)).collect::<Vec<_>>(),
            vec![1, 1, 2, 2, 3, 3]
        );
    }

    fn arb_graph_partition() -> impl Strategy<Value = (UndirectedGraph, Vec<usize>)> {
        (2usize..25)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    prop::collection::vec((0..n, 0..n), 1..80),
                    prop::collection::vec(0usize..5, n),
                )
            })
            .prop_map(|(n, e, c)| (UndirectedGraph::from_edges(n, e), c))
    }

    proptest! {
        #[test]
        fn bookkeeping_and_bounds((g, c) in arb_graph_partition()) {
            let p = Partition::new(&g, &c);
            prop_assert_eq!(p.m_within() + p.m_between(), g.edge_count());
            prop_assert_eq!(p.sizes().iter().sum::<usize>(), g.node_count());
            for i in 0..g.node_count() {
                prop_assert_eq!(p.within_degrees()[i] + p.between_degrees()[i], g.degree(i));
            }
            if g.edge_count() > 0 {
                let q = modularity_of_partition(&g, &p);
                prop_assert!((-1.0..=1.0).contains(&q));
                prop_assert!((q - naive_modularity(&g, p.assignment())).abs() < 1e-12);
            }
        }
    }
}
