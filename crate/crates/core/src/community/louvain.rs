//! Multi-level Louvain modularity maximization at resolution 1.
//!
//! Each level runs local moving (every node is offered to the neighbouring
//! community with the largest positive gain) until a sweep improves
//! modularity by no more than [`MIN_GAIN`], then collapses communities into
//! weighted super-nodes. Levels stop when one no longer improves modularity.
//! Node visit order within a level is shuffled from the seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::partition::{modularity_of_partition, Partition};
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

pub const MIN_GAIN: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LouvainResult {
    pub seed: u64,
    pub partition: Partition,
    /// Modularity of `partition` on the input graph.
    pub modularity: f64,
    /// Modularity after each level, starting from the singleton partition.
    pub level_modularities: Vec<f64>,
}

/// Weighted graph with self-loops used between aggregation levels.
struct Level {
    /// Neighbour lists without self-loops.
    adjacency: Vec<Vec<(usize, f64)>>,
    /// Weight of each node's self-loop (counted once).
    self_loops: Vec<f64>,
    degrees: Vec<f64>,
    two_m: f64,
}

impl Level {
    fn from_graph(g: &UndirectedGraph) -> Self {
        let adjacency: Vec<Vec<(usize, f64)>> = (0..g.node_count())
            .map(|i| g.neighbors(i).iter().map(|&j| (j, 1.0)).collect())
            .collect();
        let degrees: Vec<f64> = (0..g.node_count()).map(|i| g.degree(i) as f64).collect();
        Self {
            self_loops: vec![0.0; g.node_count()],
            two_m: 2.0 * g.edge_count() as f64,
            adjacency,
            degrees,
        }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }

    fn modularity(&self, community: &[usize]) -> f64 {
        let k = community.iter().max().map_or(0, |&c| c + 1);
        let mut internal = vec![0.0; k];
        let mut totals = vec![0.0; k];
        for i in 0..self.len() {
            let c = community[i];
            totals[c] += self.degrees[i];
            internal[c] += 2.0 * self.self_loops[i];
            for &(j, w) in &self.adjacency[i] {
                if community[j] == c {
                    internal[c] += w;
                }
            }
        }
        internal
            .iter()
            .zip(&totals)
            .map(|(&inside, &tot)| inside / self.two_m - (tot / self.two_m).powi(2))
            .sum()
    }

    /// Local moving; returns the contiguous community of every node.
    fn local_moving(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let n = self.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut totals = self.degrees.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut weight_to = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut q = self.modularity(&community);
        loop {
            for &i in &order {
                let own = community[i];
                let k_i = self.degrees[i];
                for &(j, w) in &self.adjacency[i] {
                    let c = community[j];
                    if weight_to[c] == 0.0 {
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                totals[own] -= k_i;
                let gain = |c: usize, w: f64| w - totals[c] * k_i / self.two_m;
                let mut best = own;
                let mut best_gain = gain(own, weight_to[own]);
                for &c in &touched {
                    let g = gain(c, weight_to[c]);
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                totals[best] += k_i;
                community[i] = best;
                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                touched.clear();
            }
            let next_q = self.modularity(&community);
            let improved = next_q - q;
            q = next_q;
            if improved <= MIN_GAIN {
                break;
            }
        }
        renumber(&mut community);
        community
    }

    fn aggregate(&self, community: &[usize]) -> Level {
        let k = community.iter().max().map_or(0, |&c| c + 1);
        let mut degrees = vec![0.0; k];
        let mut self_loops = vec![0.0; k];
        let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        for i in 0..self.len() {
            let ci = community[i];
            degrees[ci] += self.degrees[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adjacency[i] {
                let cj = community[j];
                if ci == cj {
                    // each internal edge is seen from both ends
                    self_loops[ci] += w / 2.0;
                } else {
                    *weights[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        Level {
            adjacency: weights
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
            self_loops,
            degrees,
            two_m: self.two_m,
        }
    }
}

fn renumber(community: &mut [usize]) {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    for c in community.iter_mut() {
        if map[*c] == usize::MAX {
            map[*c] = next;
            next += 1;
        }
        *c = map[*c];
    }
}

/// Runs Louvain on a graph with at least one edge.
pub fn louvain(graph: &UndirectedGraph, seed: u64) -> Result<LouvainResult> {
    if graph.is_empty() || graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::from_graph(graph);
    let mut node_community: Vec<usize> = (0..graph.node_count()).collect();
    let mut level_modularities = vec![level.modularity(&node_community)];

    loop {
        let community = level.local_moving(&mut rng);
        let q = level.modularity(&community);
        let previous = *level_modularities.last().unwrap();
        if q - previous <= MIN_GAIN {
            break;
        }
        for c in node_community.iter_mut() {
            *c = community[*c];
        }
        level_modularities.push(q);
        let n_communities = community.iter().max().map_or(0, |&c| c + 1);
        if n_communities == level.len() {
            break;
        }
        level = level.aggregate(&community);
    }

    let partition = Partition::new(graph, &node_community);
    let modularity = modularity_of_partition(graph, &partition);
    Ok(LouvainResult {
        seed,
        partition,
        modularity,
        level_modularities,
    })
}

/// Independent runs for several seeds, in seed order.
pub fn louvain_runs(graph: &UndirectedGraph, seeds: &[u64]) -> Result<Vec<LouvainResult>> {
    seeds.par_iter().map(|&s| louvain(graph, s)).collect()
}
