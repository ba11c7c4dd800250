use crate::attributes::{Attribute, AttributeTable, Bins};
use crate::community::{louvain_runs, nmi, Partition};
use crate::dyadic::{
    build_dyad_design, degree_missingness_ttest, fit_logistic, sex_permutation_test,
    FeatureEncoding, FeatureSpec, FitOptions, PermutationOptions,
};
use crate::error::{Error, Result};
use crate::graph::{largest_connected_component, network_stats, UndirectedGraph};
use crate::ingest::VillageDataset;
use crate::segregation::{build_community_network, segregation_report, CommunityNetwork};

use super::bundle::*;
use super::config::{MissingMode, RunConfig, SCHEMA_VERSION};

/// Label used for the extra category when missing values are kept.
pub const MISSING_LABEL: &str = "missing";

/// Bins used for an attribute in NMI, segregation and community networks:
/// the feature's bins when configured, the default bins for age and
/// education otherwise.
pub fn grouping_bins(cfg: &RunConfig, attr: Attribute) -> Option<Bins> {
    let configured = cfg
        .features
        .features
        .iter()
        .find(|f| f.attribute == attr)
        .and_then(|f| f.bins.clone());
    configured.or_else(|| match attr {
        Attribute::Age => Some(Bins::default_age()),
        Attribute::Education => Some(Bins::default_education()),
        _ => None,
    })
}

/// Group labels of one attribute plus a namer for each label.
pub struct Grouping {
    pub labels: Vec<Option<u32>>,
    attr: Attribute,
    bins: Option<Bins>,
    missing_code: Option<u32>,
}

impl Grouping {
    pub fn new(table: &AttributeTable, attr: Attribute, cfg: &RunConfig) -> Self {
        let bins = grouping_bins(cfg, attr);
        let mut labels = table.labels(attr, bins.as_ref());
        let mut missing_code = None;
        if cfg.missing == MissingMode::Category {
            let code = match &bins {
                Some(b) => b.bin_count() as u32,
                None if attr.is_numeric() => labels.iter().flatten().max().map_or(0, |m| m + 1),
                None => attr.category_count() as u32,
            };
            for l in &mut labels {
                l.get_or_insert(code);
            }
            missing_code = Some(code);
        }
        Self {
            labels,
            attr,
            bins,
            missing_code,
        }
    }

    pub fn name(&self, code: u32) -> String {
        if Some(code) == self.missing_code {
            return MISSING_LABEL.to_owned();
        }
        match &self.bins {
            Some(b) => b.label(code),
            None => self.attr.format_value(code),
        }
    }
}

/// Joint model. Features never observed in the network are left out, and
/// constant features are dropped and the model refitted.
fn fit_joint_dropping_constants(
    graph: &UndirectedGraph,
    table: &AttributeTable,
    features: &[FeatureEncoding],
    dropped: &mut Vec<String>,
) -> Result<crate::dyadic::LogisticFit> {
    let (mut features, unobserved): (Vec<FeatureEncoding>, Vec<FeatureEncoding>) = features
        .iter()
        .cloned()
        .partition(|f| table.observed_count(f.attribute) > 0);
    dropped.extend(unobserved.iter().map(|f| f.attribute.name().to_owned()));
    loop {
        let spec = FeatureSpec::new(features.clone())?;
        let design = build_dyad_design(graph, table, &spec)?;
        match fit_logistic(&design, &FitOptions::default()) {
            Err(Error::ConstantColumn(name)) => {
                features.retain(|f| f.attribute.name() != name);
                dropped.push(name);
            }
            other => return other,
        }
    }
}

/// Runs every analysis on one village. Failures of individual analyses are
/// recorded as issues; only an empty graph or an edgeless largest
/// component fails the village.
pub fn analyze_village(
    dataset: &VillageDataset,
    cfg: &RunConfig,
    config_hash: &str,
) -> Result<VillageBundle> {
    let id = dataset.village_id.as_str();
    let mut issues = Vec::new();
    let mut issue = |stage: &str, attribute: Option<&str>, e: &Error| {
        issues.push(Issue {
            stage: stage.to_owned(),
            attribute: attribute.map(str::to_owned),
            message: e.to_string(),
        })
    };

    let lcc = largest_connected_component(&dataset.graph)?;
    let g = &lcc.graph;
    let table = dataset.attributes.select(&lcc.new_to_old);
    let stats = network_stats(&dataset.graph, g);

    let mut missingness_ttests = Vec::new();
    for attr in Attribute::ALL {
        match degree_missingness_ttest(&dataset.graph, &dataset.attributes, attr) {
            Ok(w) => missingness_ttests.push(TTestRecord::new(id, attr.name(), &w)),
            Err(e) => issue("missingness_ttest", Some(attr.name()), &e),
        }
    }

    let mut fits = Vec::new();
    let mut dropped_features = Vec::new();
    if cfg.fit_mode.joint() {
        match fit_joint_dropping_constants(g, &table, &cfg.features.features, &mut dropped_features)
        {
            Ok(fit) => fits.extend(FitRecord::from_fit(id, "joint", &fit)),
            Err(e) => issue("joint_fit", None, &e),
        }
    }
    if cfg.fit_mode.per_attribute() {
        for f in &cfg.features.features {
            let fit = FeatureSpec::single(f.clone())
                .and_then(|spec| build_dyad_design(g, &table, &spec))
                .and_then(|design| fit_logistic(&design, &FitOptions::default()));
            match fit {
                Ok(fit) => fits.extend(FitRecord::from_fit(id, "single", &fit)),
                Err(e) => issue("single_fit", Some(f.attribute.name()), &e),
            }
        }
    }

    let mut sex_permutation = Vec::new();
    for &tolerance in &cfg.permutation.tolerances {
        let opts = PermutationOptions {
            tolerance,
            target_replicates: cfg.permutation.replicates,
            seed: cfg.permutation.seed,
        };
        match sex_permutation_test(g, &table, &opts) {
            Ok(r) => sex_permutation.extend(PermutationRecord::from_result(id, &r)),
            Err(e) => issue(
                "sex_permutation",
                Some(&format!("tolerance {tolerance}")),
                &e,
            ),
        }
    }

    let runs = louvain_runs(g, &cfg.louvain_seeds)?;
    let best = &runs[0];
    let partition: &Partition = &best.partition;
    let louvain = LouvainSummary {
        seed: best.seed,
        modularity: best.modularity,
        n_communities: partition.n_communities(),
        level_modularities: best.level_modularities.clone(),
        runs: runs
            .iter()
            .map(|r| LouvainRun {
                seed: r.seed,
                modularity: r.modularity,
                n_communities: r.partition.n_communities(),
            })
            .collect(),
    };
    let partition_entries = lcc
        .new_to_old
        .iter()
        .enumerate()
        .map(|(new, &old)| PartitionEntry {
            node_id: dataset.node_ids.id(old).to_owned(),
            community: partition.label(new),
        })
        .collect();

    let community_labels = |p: &Partition| -> Vec<Option<usize>> {
        (0..p.node_count()).map(|i| Some(p.community(i))).collect()
    };
    let mut nmi_records = Vec::new();
    let mut segregation = Vec::new();
    let mut community_networks: Vec<CommunityNetwork> = Vec::new();
    for attr in Attribute::ALL {
        let name = attr.name();
        if table.observed_count(attr) == 0 {
            issue("grouping", Some(name), &Error::NoCommonLabels);
            continue;
        }
        let grouping = Grouping::new(&table, attr, cfg);
        let over_seeds: Result<Vec<f64>> = runs
            .iter()
            .map(|r| nmi(&community_labels(&r.partition), &grouping.labels).map(|x| x.value))
            .collect();
        match nmi(&community_labels(partition), &grouping.labels).and_then(|r| Ok((r, over_seeds?)))
        {
            Ok((r, spread)) => nmi_records.push(NmiRecord::new(id, name, &r, &spread)),
            Err(e) => issue("nmi", Some(name), &e),
        }
        match segregation_report(g, &grouping.labels, partition, name) {
            Ok(r) => segregation.push(SegregationRecord::new(id, &r)),
            Err(e) => issue("segregation", Some(name), &e),
        }
        match build_community_network(
            g,
            partition,
            &grouping.labels,
            name,
            |c| grouping.name(c),
            cfg.node_min,
            cfg.edge_min,
        ) {
            Ok(net) => community_networks.push(net),
            Err(e) => issue("community_network", Some(name), &e),
        }
    }

    Ok(VillageBundle {
        schema_version: SCHEMA_VERSION,
        config_hash: config_hash.to_owned(),
        village_id: id.to_owned(),
        relation_layers: dataset.relation_layers(),
        unmatched_attribute_rows: dataset.unmatched_attribute_rows.len(),
        stats: StatsRecord::new(id, &stats, dataset.nodes_without_attributes()),
        missingness_ttests,
        dropped_features,
        fits,
        sex_permutation,
        louvain,
        partition: partition_entries,
        nmi: nmi_records,
        segregation,
        community_networks,
        issues,
    })
}
