//! Per-village result bundle and its flat record types. Non-finite numbers
//! are stored as `None` so every bundle survives a JSON round trip.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::community::NmiResult;
use crate::dyadic::{LogisticFit, SexPermutationResult, TieType, Verdict, WelchTest};
use crate::graph::NetworkStats;
use crate::segregation::{CommunityNetwork, SegregationReport};

pub(crate) fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Something that went wrong for one analysis of one village without
/// stopping the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub stage: String,
    pub attribute: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub village_id: String,
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
    pub nodes_without_attributes: usize,
}

impl StatsRecord {
    pub fn new(village_id: &str, s: &NetworkStats, nodes_without_attributes: usize) -> Self {
        Self {
            village_id: village_id.to_owned(),
            n_nodes: s.n_nodes,
            n_edges: s.n_edges,
            density: s.density,
            mean_degree: s.mean_degree,
            mean_clustering: s.mean_clustering,
            n_components: s.n_components,
            lcc_nodes: s.lcc_nodes,
            lcc_edges: s.lcc_edges,
            lcc_node_fraction: s.lcc_node_fraction,
            lcc_edge_fraction: s.lcc_edge_fraction,
            lcc_mean_degree: s.lcc_mean_degree,
            lcc_mean_clustering: s.lcc_mean_clustering,
            nodes_without_attributes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestRecord {
    pub village_id: String,
    pub attribute: String,
    pub n_observed: usize,
    pub n_missing: usize,
    pub mean_degree_observed: f64,
    pub mean_degree_missing: f64,
    pub t: Option<f64>,
    pub df: f64,
    pub p_value: f64,
}

impl TTestRecord {
    pub fn new(village_id: &str, attribute: &str, w: &WelchTest) -> Self {
        Self {
            village_id: village_id.to_owned(),
            attribute: attribute.to_owned(),
            n_observed: w.n_a,
            n_missing: w.n_b,
            mean_degree_observed: w.mean_a,
            mean_degree_missing: w.mean_b,
            t: finite(w.t),
            df: w.df,
            p_value: w.p_value,
        }
    }
}

/// One coefficient of one logistic model. The intercept appears with
/// attribute `(intercept)` and no odds ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub village_id: String,
    /// `joint` or `single`.
    pub model: String,
    pub attribute: String,
    pub beta: Option<f64>,
    pub std_error: Option<f64>,
    pub odds_ratio: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub p_value: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub n_dyads: usize,
    pub n_ties: usize,
}

pub const INTERCEPT: &str = "(intercept)";

impl FitRecord {
    pub fn from_fit(village_id: &str, model: &str, fit: &LogisticFit) -> Vec<FitRecord> {
        let base = |attribute: &str| FitRecord {
            village_id: village_id.to_owned(),
            model: model.to_owned(),
            attribute: attribute.to_owned(),
            beta: None,
            std_error: None,
            odds_ratio: None,
            ci_low: None,
            ci_high: None,
            p_value: None,
            converged: fit.converged,
            iterations: fit.iterations,
            n_dyads: fit.n_dyads,
            n_ties: fit.n_ties,
        };
        let mut rows = vec![FitRecord {
            beta: finite(fit.beta0),
            std_error: finite(fit.beta0_std_error),
            ..base(INTERCEPT)
        }];
        for (k, name) in fit.feature_names.iter().enumerate() {
            rows.push(FitRecord {
                beta: finite(fit.beta[k]),
                std_error: finite(fit.std_errors[k]),
                odds_ratio: finite(fit.odds_ratios[k]),
                ci_low: finite(fit.ci95[k].0),
                ci_high: finite(fit.ci95[k].1),
                p_value: finite(fit.p_values[k]),
                ..base(name)
            });
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationRecord {
    pub village_id: String,
    pub tolerance: f64,
    pub tie_type: TieType,
    pub observed: usize,
    pub expected: f64,
    pub ratio: Option<f64>,
    pub p_value: f64,
    pub p_upper: f64,
    pub p_lower: f64,
    pub verdict: Verdict,
    pub n_replicates: usize,
    pub n_attempts: usize,
}

impl PermutationRecord {
    pub fn from_result(village_id: &str, r: &SexPermutationResult) -> Vec<PermutationRecord> {
        r.results
            .iter()
            .map(|t| PermutationRecord {
                village_id: village_id.to_owned(),
                tolerance: r.tolerance,
                tie_type: t.tie_type,
                observed: t.observed,
                expected: t.expected,
                ratio: t.ratio,
                p_value: t.p_value,
                p_upper: t.p_upper,
                p_lower: t.p_lower,
                verdict: t.verdict,
                n_replicates: r.n_replicates,
                n_attempts: r.n_attempts,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmiRecord {
    pub village_id: String,
    pub attribute: String,
    pub value: f64,
    pub mutual_information: f64,
    pub entropy_communities: f64,
    pub entropy_attribute: f64,
    pub n_used: usize,
    pub degenerate: bool,
    /// Spread of the value over all Louvain seeds.
    pub seed_mean: f64,
    pub seed_min: f64,
    pub seed_max: f64,
}

impl NmiRecord {
    pub fn new(village_id: &str, attribute: &str, r: &NmiResult, over_seeds: &[f64]) -> Self {
        let n = over_seeds.len() as f64;
        Self {
            village_id: village_id.to_owned(),
            attribute: attribute.to_owned(),
            value: r.value,
            mutual_information: r.mutual_information,
            entropy_communities: r.entropy_a,
            entropy_attribute: r.entropy_b,
            n_used: r.n_used,
            degenerate: r.degenerate,
            seed_mean: over_seeds.iter().sum::<f64>() / n,
            seed_min: over_seeds.iter().copied().fold(f64::INFINITY, f64::min),
            seed_max: over_seeds.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegregationRecord {
    pub village_id: String,
    pub attribute: String,
    pub n_used: usize,
    pub q: f64,
    pub q_within: Option<f64>,
    pub q_between: Option<f64>,
    pub q_within_norm: Option<f64>,
    pub q_between_norm: Option<f64>,
    pub within_edges: usize,
    pub between_edges: usize,
}

impl SegregationRecord {
    pub fn new(village_id: &str, r: &SegregationReport) -> Self {
        Self {
            village_id: village_id.to_owned(),
            attribute: r.attribute.clone(),
            n_used: r.n_used,
            q: r.q_attr,
            q_within: r.q_within(),
            q_between: r.q_between(),
            q_within_norm: r.q_within_norm(),
            q_between_norm: r.q_between_norm(),
            within_edges: r.within.map_or(0, |c| c.edges),
            between_edges: r.between.map_or(0, |c| c.edges),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainRun {
    pub seed: u64,
    pub modularity: f64,
    pub n_communities: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainSummary {
    /// Seed of the reported partition.
    pub seed: u64,
    pub modularity: f64,
    pub n_communities: usize,
    pub level_modularities: Vec<f64>,
    pub runs: Vec<LouvainRun>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionEntry {
    pub node_id: String,
    /// 1-based community label.
    pub community: usize,
}

/// Everything computed for one village. Dyadic, community and segregation
/// analyses use the largest connected component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VillageBundle {
    pub schema_version: u32,
    pub config_hash: String,
    pub village_id: String,
    pub relation_layers: BTreeMap<String, usize>,
    pub unmatched_attribute_rows: usize,
    pub stats: StatsRecord,
    pub missingness_ttests: Vec<TTestRecord>,
    /// Features left out of the joint model: never observed or constant.
    pub dropped_features: Vec<String>,
    pub fits: Vec<FitRecord>,
    pub sex_permutation: Vec<PermutationRecord>,
    pub louvain: LouvainSummary,
    pub partition: Vec<PartitionEntry>,
    pub nmi: Vec<NmiRecord>,
    pub segregation: Vec<SegregationRecord>,
    pub community_networks: Vec<CommunityNetwork>,
    pub issues: Vec<Issue>,
}
