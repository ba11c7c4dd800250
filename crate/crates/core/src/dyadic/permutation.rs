//! Mean-degree-constrained permutation null model for sex mixing.
//!
//! Sex labels are permuted among the sex-observed nodes while the graph
//! stays fixed. A permutation counts as a valid replicate only when the
//! permuted mean degree of males and of females each stays within a
//! relative `tolerance` of the observed value. Male–male, male–female and
//! female–female tie counts over the valid replicates form the null
//! distribution.
//!
//! Attempt `a` draws its permutation from a ChaCha stream keyed by
//! `(seed, a)`, and valid replicates are taken in attempt order, so results
//! do not depend on how attempts are spread over threads.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributes::{Attribute, AttributeTable};
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

/// Attempts after which the acceptance rate is checked.
pub const ACCEPTANCE_CHECK_ATTEMPTS: usize = 1_000_000;
/// Minimum acceptable share of valid permutations.
pub const MIN_ACCEPTANCE_RATE: f64 = 0.001;
pub const SIGNIFICANCE: f64 = 0.05;

const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieType {
    MaleMale,
    MaleFemale,
    FemaleFemale,
}

impl TieType {
    pub const ALL: [TieType; 3] = [
        TieType::MaleMale,
        TieType::MaleFemale,
        TieType::FemaleFemale,
    ];

    pub fn short(self) -> &'static str {
        match self {
            TieType::MaleMale => "MM",
            TieType::MaleFemale => "MF",
            TieType::FemaleFemale => "FF",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// More ties of this type than expected (p below 0.05).
    Assortative,
    /// Fewer ties of this type than expected (p below 0.05).
    Dissortative,
    NotSignificant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TieTypeResult {
    pub tie_type: TieType,
    pub observed: usize,
    pub expected: f64,
    /// `observed / expected`; `None` when nothing is expected.
    pub ratio: Option<f64>,
    /// Add-one Monte Carlo estimate of `P(T* >= observed)`.
    pub p_upper: f64,
    /// Add-one Monte Carlo estimate of `P(T* <= observed)`.
    pub p_lower: f64,
    /// `min(1, 2 min(p_upper, p_lower))`.
    pub p_value: f64,
    pub verdict: Verdict,
}

/// One valid permutation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub attempt: usize,
    /// MM, MF, FF tie counts.
    pub counts: [usize; 3],
    pub male_mean_degree: f64,
    pub female_mean_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SexPermutationResult {
    pub tolerance: f64,
    pub n_replicates: usize,
    pub n_attempts: usize,
    pub n_males: usize,
    pub n_females: usize,
    pub male_mean_degree: f64,
    pub female_mean_degree: f64,
    /// Accepted range of the permuted male mean degree.
    pub male_bounds: (f64, f64),
    pub female_bounds: (f64, f64),
    /// MM, MF and FF, in that order.
    pub results: Vec<TieTypeResult>,
    #[serde(skip)]
    pub replicates: Vec<Replicate>,
}

impl SexPermutationResult {
    pub fn get(&self, tie_type: TieType) -> &TieTypeResult {
        self.results
            .iter()
            .find(|r| r.tie_type == tie_type)
            .expect("all tie types present")
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.n_replicates as f64 / self.n_attempts as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationOptions {
    pub tolerance: f64,
    pub target_replicates: usize,
    pub seed: u64,
}

/// Sex-observed nodes and the ties among them.
struct SexNetwork {
    degrees: Vec<u64>,
    is_male: Vec<bool>,
    edges: Vec<(u32, u32)>,
}

impl SexNetwork {
    fn new(graph: &UndirectedGraph, table: &AttributeTable) -> Self {
        let n = graph.node_count();
        let mut position = vec![u32::MAX; n];
        let mut degrees = Vec::new();
        let mut is_male = Vec::new();
        for (i, pos) in position.iter_mut().enumerate() {
            if let Some(code) = table.get(i, Attribute::Sex) {
                *pos = degrees.len() as u32;
                degrees.push(graph.degree(i) as u64);
                is_male.push(code == 0);
            }
        }
        let edges = graph
            .edges()
            .filter_map(|(i, j)| {
                let (a, b) = (position[i], position[j]);
                (a != u32::MAX && b != u32::MAX).then_some((a, b))
            })
            .collect();
        Self {
            degrees,
            is_male,
            edges,
        }
    }

    fn counts(&self, is_male: &[bool]) -> [usize; 3] {
        let mut c = [0; 3];
        for &(a, b) in &self.edges {
            let males = usize::from(is_male[a as usize]) + usize::from(is_male[b as usize]);
            c[2 - males] += 1;
        }
        c
    }

    fn male_degree_sum(&self, is_male: &[bool]) -> u64 {
        self.degrees
            .iter()
            .zip(is_male)
            .filter(|(_, &m)| m)
            .map(|(k, _)| k)
            .sum()
    }
}

fn within(value: u64, target: u64, tolerance: f64) -> bool {
    (value as f64 - target as f64).abs() <= tolerance * target as f64 + 1e-9
}

/// Runs the constrained permutation test on a graph whose attribute table
/// is indexed like its nodes. Only sex-observed nodes take part.
pub fn sex_permutation_test(
    graph: &UndirectedGraph,
    table: &AttributeTable,
    opts: &PermutationOptions,
) -> Result<SexPermutationResult> {
    run(graph, table, opts, ACCEPTANCE_CHECK_ATTEMPTS)
}

fn run(
    graph: &UndirectedGraph,
    table: &AttributeTable,
    opts: &PermutationOptions,
    check_attempts: usize,
) -> Result<SexPermutationResult> {
    assert_eq!(graph.node_count(), table.len());
    if opts.tolerance.is_nan() || opts.tolerance <= 0.0 {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {}",
            opts.tolerance
        )));
    }
    if opts.target_replicates == 0 {
        return Err(Error::Config("need at least one replicate".into()));
    }
    let net = SexNetwork::new(graph, table);
    let n_males = net.is_male.iter().filter(|&&m| m).count();
    let n_females = net.is_male.len() - n_males;
    if n_males == 0 || n_females == 0 {
        return Err(Error::SingleSex);
    }
    let total_degree: u64 = net.degrees.iter().sum();
    let male_sum = net.male_degree_sum(&net.is_male);
    let female_sum = total_degree - male_sum;
    let observed = net.counts(&net.is_male);

    let mut replicates: Vec<Replicate> = Vec::with_capacity(opts.target_replicates);
    let mut attempts = 0;
    while replicates.len() < opts.target_replicates {
        let start = attempts;
        let chunk: Vec<Option<Replicate>> = (start..start + CHUNK)
            .into_par_iter()
            .map(|attempt| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(attempt as u64);
                let mut labels = net.is_male.clone();
                labels.shuffle(&mut rng);
                let m = net.male_degree_sum(&labels);
                let f = total_degree - m;
                if !(within(m, male_sum, opts.tolerance) && within(f, female_sum, opts.tolerance)) {
                    return None;
                }
                Some(Replicate {
                    attempt,
                    counts: net.counts(&labels),
                    male_mean_degree: m as f64 / n_males as f64,
                    female_mean_degree: f as f64 / n_females as f64,
                })
            })
            .collect();
        for (offset, r) in chunk.into_iter().enumerate() {
            if replicates.len() == opts.target_replicates {
                break;
            }
            attempts = start + offset + 1;
            replicates.extend(r);
        }
        if attempts >= check_attempts
            && (replicates.len() as f64) < MIN_ACCEPTANCE_RATE * attempts as f64
        {
            return Err(Error::LowAcceptance {
                valid: replicates.len(),
                attempts,
                tolerance: opts.tolerance,
            });
        }
    }

    let r = replicates.len() as f64;
    let results = TieType::ALL
        .iter()
        .enumerate()
        .map(|(k, &tie_type)| {
            let t_obs = observed[k];
            let ge = replicates.iter().filter(|x| x.counts[k] >= t_obs).count();
            let le = replicates.iter().filter(|x| x.counts[k] <= t_obs).count();
            let expected = replicates.iter().map(|x| x.counts[k] as f64).sum::<f64>() / r;
            let p_upper = (ge + 1) as f64 / (r + 1.0);
            let p_lower = (le + 1) as f64 / (r + 1.0);
            let p_value = (2.0 * p_upper.min(p_lower)).min(1.0);
            let verdict = if p_value < SIGNIFICANCE && t_obs as f64 > expected {
                Verdict::Assortative
            } else if p_value < SIGNIFICANCE && (t_obs as f64) < expected {
                Verdict::Dissortative
            } else {
                Verdict::NotSignificant
            };
            TieTypeResult {
                tie_type,
                observed: t_obs,
                expected,
                ratio: (expected > 0.0).then(|| t_obs as f64 / expected),
                p_upper,
                p_lower,
                p_value,
                verdict,
            }
        })
        .collect();

    let tol = opts.tolerance;
    let male_mean = male_sum as f64 / n_males as f64;
    let female_mean = female_sum as f64 / n_females as f64;
    Ok(SexPermutationResult {
        tolerance: tol,
        n_replicates: replicates.len(),
        n_attempts: attempts,
        n_males,
        n_females,
        male_mean_degree: male_mean,
        female_mean_degree: female_mean,
        male_bounds: (male_mean * (1.0 - tol), male_mean * (1.0 + tol)),
        female_bounds: (female_mean * (1.0 - tol), female_mean * (1.0 + tol)),
        results,
        replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::NodeAttributes;

    fn sexes(codes: &[Option<u32>]) -> AttributeTable {
        AttributeTable::new(
            codes
                .iter()
                .map(|c| {
                    let mut row = NodeAttributes::missing();
                    row.set(Attribute::Sex, *c);
                    row
                })
                .collect(),
        )
    }

    fn opts(tolerance: f64, n: usize, seed: u64) -> PermutationOptions {
        PermutationOptions {
            tolerance,
            target_replicates: n,
            seed,
        }
    }

    #[test]
    fn single_sex_is_rejected() {
        let g = UndirectedGraph::from_edges(3, [(0, 1), (1, 2)]);
        let t = sexes(&[Some(0), Some(0), None]);
        assert!(matches!(
            sex_permutation_test(&g, &t, &opts(0.05, 10, 0)),
            Err(Error::SingleSex)
        ));
    }

    #[test]
    fn replicates_respect_tolerance() {
        let g = UndirectedGraph::from_edges(
            8,
            [
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 0),
                (0, 4),
                (2, 6),
            ],
        );
        let t = sexes(&[
            Some(0),
            Some(1),
            Some(0),
            Some(1),
            Some(0),
            Some(1),
            Some(0),
            None,
        ]);
        for tol in [0.05, 0.2] {
            let r = sex_permutation_test(&g, &t, &opts(tol, 200, 3)).unwrap();
            assert_eq!(r.n_replicates, 200);
            for rep in &r.replicates {
                assert!((rep.male_mean_degree / r.male_mean_degree - 1.0).abs() <= tol + 1e-12);
                assert!((rep.female_mean_degree / r.female_mean_degree - 1.0).abs() <= tol + 1e-12);
                assert_eq!(rep.counts.iter().sum::<usize>(), 8);
            }
            let total: usize = r.results.iter().map(|x| x.observed).sum();
            assert_eq!(total, 8);
            assert!(r
                .results
                .iter()
                .all(|x| x.p_value > 0.0 && x.p_value <= 1.0));
        }
    }

    #[test]
    fn reproducible_and_attempt_ordered() {
        let g = UndirectedGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5)]);
        let t = sexes(&[Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)]);
        let a = sex_permutation_test(&g, &t, &opts(0.05, 500, 11)).unwrap();
        let b = sex_permutation_test(&g, &t, &opts(0.05, 500, 11)).unwrap();
        assert_eq!(a, b);
        assert!(a.replicates.windows(2).all(|w| w[0].attempt < w[1].attempt));
        assert!(a.n_attempts > a.replicates.last().unwrap().attempt);
    }

    #[test]
    fn swapping_sexes_swaps_roles() {
        let g = UndirectedGraph::from_edges(
            7,
            [
                (0, 1),
                (1, 2),
                (0, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 3),
                (1, 5),
            ],
        );
        let codes = [
            Some(0),
            Some(0),
            Some(0),
            Some(1),
            Some(1),
            Some(0),
            Some(1),
        ];
        let swapped: Vec<Option<u32>> = codes.iter().map(|c| c.map(|v| 1 - v)).collect();
        let a = sex_permutation_test(&g, &sexes(&codes), &opts(0.2, 300, 5)).unwrap();
        let b = sex_permutation_test(&g, &sexes(&swapped), &opts(0.2, 300, 5)).unwrap();
        assert_eq!(
            a.get(TieType::MaleMale).observed,
            b.get(TieType::FemaleFemale).observed
        );
        assert_eq!(
            a.get(TieType::FemaleFemale).observed,
            b.get(TieType::MaleMale).observed
        );
        assert_eq!(
            a.get(TieType::MaleFemale).observed,
            b.get(TieType::MaleFemale).observed
        );
        // same permutations with roles exchanged
        assert_eq!(
            a.get(TieType::MaleMale).expected,
            b.get(TieType::FemaleFemale).expected
        );
        assert_eq!(
            a.get(TieType::MaleFemale).p_value,
            b.get(TieType::MaleFemale).p_value
        );
    }

    #[test]
    fn low_acceptance_errors() {
        // only permutations that put the male back at the hub are valid
        let edges: Vec<(usize, usize)> = (1..=2000).map(|j| (0, j)).collect();
        let g = UndirectedGraph::from_edges(2001, edges);
        let mut codes = vec![Some(1); 2001];
        codes[0] = Some(0);
        match run(&g, &sexes(&codes), &opts(0.01, 1000, 1), 8192) {
            Err(Error::LowAcceptance {
                attempts, valid, ..
            }) => {
                assert!(attempts >= 8192);
                assert!((valid as f64) < 0.001 * attempts as f64);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
