//! Slow, direct reference implementations used as test oracles.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use segnet::graph::UndirectedGraph;

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> UndirectedGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    UndirectedGraph::from_edges(n, edges)
}

pub fn adjacency(g: &UndirectedGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (i, j) in g.edges() {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    a
}

/// Nodes with a label, the labels, and the adjacency matrix among them.
fn labeled(g: &UndirectedGraph, labels: &[Option<u32>]) -> (Vec<usize>, Vec<u32>, Vec<Vec<f64>>) {
    let full = adjacency(g);
    let keep: Vec<usize> = (0..g.node_count())
        .filter(|&i| labels[i].is_some())
        .collect();
    let a = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| full[i][j]).collect())
        .collect();
    let x = keep.iter().map(|&i| labels[i].unwrap()).collect();
    (keep, x, a)
}

/// `(1/2m) Σ_ij [A_ij − k_i k_j / 2m] δ(x_i, x_j)` over labeled nodes.
pub fn naive_q(g: &UndirectedGraph, labels: &[Option<u32>]) -> f64 {
    let (_, x, a) = labeled(g, labels);
    let n = x.len();
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if x[i] == x[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Within (`between = false`) or between community modularity over labeled
/// nodes, with its maximum: `(q, q_max)`.
pub fn naive_component(
    g: &UndirectedGraph,
    labels: &[Option<u32>],
    communities: &[usize],
    between: bool,
) -> (f64, f64) {
    let (keep, x, a) = labeled(g, labels);
    let h: Vec<usize> = keep.iter().map(|&i| communities[i]).collect();
    let n = x.len();
    let kind = |i: usize, j: usize| (h[i] != h[j]) == between;
    let k: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| kind(i, j)).map(|j| a[i][j]).sum())
        .collect();
    let two_m: f64 = k.iter().sum();
    let (mut edge, mut null) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if x[i] == x[j] && kind(i, j) {
                edge += a[i][j];
                null += k[i] * k[j] / two_m;
            }
        }
    }
    ((edge - null) / two_m, (two_m - null) / two_m)
}

/// Two triangles {0,1,2} and {3,4,5} joined by the edge 2–3.
pub fn bridged_triangles() -> UndirectedGraph {
    UndirectedGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
}

/// Exact null distribution of (MM, MF, FF) tie counts over all ways of
/// choosing `n_males` of the nodes as male, restricted to the choices whose
/// male and female mean degrees lie within `tolerance` of `observed_males`.
pub fn enumerate_sex_assignments(
    g: &UndirectedGraph,
    observed_males: &[usize],
    tolerance: f64,
) -> Vec<[usize; 3]> {
    let n = g.node_count();
    let deg = g.degrees();
    let total: usize = deg.iter().sum();
    let male_sum: usize = observed_males.iter().map(|&i| deg[i]).sum();
    let female_sum = total - male_sum;
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != observed_males.len() {
            continue;
        }
        let is_male = |i: usize| mask >> i & 1 == 1;
        let m: usize = (0..n).filter(|&i| is_male(i)).map(|i| deg[i]).sum();
        let f = total - m;
        let ok = |v: usize, t: usize| (v as f64 - t as f64).abs() <= tolerance * t as f64;
        if !(ok(m, male_sum) && ok(f, female_sum)) {
            continue;
        }
        let mut c = [0; 3];
        for (i, j) in g.edges() {
            let males = usize::from(is_male(i)) + usize::from(is_male(j));
            c[2 - males] += 1;
        }
        out.push(c);
    }
    out
}

/// Counts of the 2×2 table of (match, tie) over all unordered pairs:
/// `[[no match & no tie, no match & tie], [match & no tie, match & tie]]`.
pub fn match_tie_table(g: &UndirectedGraph, x: &[u32]) -> [[f64; 2]; 2] {
    let mut t = [[0.0; 2]; 2];
    for i in 0..g.node_count() {
        for j in i + 1..g.node_count() {
            t[usize::from(x[i] == x[j])][usize::from(g.has_edge(i, j))] += 1.0;
        }
    }
    t
}
