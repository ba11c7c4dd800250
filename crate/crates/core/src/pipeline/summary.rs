use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attributes::Attribute;
use crate::dyadic::{TieType, Verdict, SIGNIFICANCE};
use crate::error::{Error, Result};
use crate::ingest::natural_cmp;

use super::bundle::{VillageBundle, INTERCEPT};
use super::config::SCHEMA_VERSION;
use super::run::{csv_text, write_json, write_text, VILLAGES_DIR};

pub const NETWORK_STATS_FILE: &str = "network_stats.csv";
pub const FITS_FILE: &str = "dyadic_fits.csv";
pub const PERMUTATION_FILE: &str = "sex_permutation.csv";
pub const NMI_FILE: &str = "nmi.csv";
pub const SEGREGATION_FILE: &str = "segregation.csv";
pub const TTEST_FILE: &str = "missingness_ttest.csv";
pub const TABLE_NETWORK_FILE: &str = "summary_network.csv";
pub const TABLE_DYADIC_FILE: &str = "summary_dyadic.csv";
pub const TABLE_SEX_FILE: &str = "summary_sex_mixing.csv";
pub const TABLE_COMMUNITY_FILE: &str = "summary_community.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRow {
    pub statistic: String,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicRow {
    pub model: String,
    pub attribute: String,
    /// Villages with a converged fit for this coefficient.
    pub n_villages: usize,
    pub or_min: Option<f64>,
    pub or_median: Option<f64>,
    pub or_max: Option<f64>,
    /// Share of those villages with Wald p below 0.05, in percent.
    pub pct_significant: Option<f64>,
    /// Share with p below 0.05 and odds ratio above 1, in percent.
    pub pct_assortative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SexMixingRow {
    pub tolerance: f64,
    pub tie_type: TieType,
    pub n_villages: usize,
    pub pct_assortative: f64,
    pub pct_dissortative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityRow {
    pub attribute: String,
    pub n_villages: usize,
    pub nmi_mean: Option<f64>,
    pub nmi_min: Option<f64>,
    pub nmi_median: Option<f64>,
    pub nmi_max: Option<f64>,
    pub q_within_norm_mean: Option<f64>,
    pub q_between_norm_mean: Option<f64>,
    /// Villages where the normalized between-community modularity exists.
    pub n_between: usize,
    /// Share of those with it positive, in percent.
    pub pct_between_positive: Option<f64>,
}

/// Cross-village tables. Every field is a function of the bundles alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub schema_version: u32,
    pub config_hash: String,
    pub villages: Vec<String>,
    pub network: Vec<NetworkRow>,
    pub dyadic: Vec<DyadicRow>,
    pub sex_mixing: Vec<SexMixingRow>,
    pub community: Vec<CommunityRow>,
}

impl CorpusSummary {
    pub fn network_row(&self, statistic: &str) -> Option<&NetworkRow> {
        self.network.iter().find(|r| r.statistic == statistic)
    }

    pub fn dyadic_row(&self, model: &str, attribute: &str) -> Option<&DyadicRow> {
        self.dyadic
            .iter()
            .find(|r| r.model == model && r.attribute == attribute)
    }

    pub fn sex_row(&self, tolerance: f64, tie_type: TieType) -> Option<&SexMixingRow> {
        self.sex_mixing
            .iter()
            .find(|r| r.tolerance == tolerance && r.tie_type == tie_type)
    }

    pub fn community_row(&self, attribute: &str) -> Option<&CommunityRow> {
        self.community.iter().find(|r| r.attribute == attribute)
    }
}

/// Median of a nonempty sample; the mean of the middle pair for even sizes.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn pct(count: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| 100.0 * count as f64 / total as f64)
}

fn min_max(values: &[f64]) -> Option<(f64, f64)> {
    (!values.is_empty()).then(|| {
        (
            values.iter().copied().fold(f64::INFINITY, f64::min),
            values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    })
}

/// Builds the cross-village tables from bundles.
pub fn summarize_corpus(bundles: &[VillageBundle]) -> Result<CorpusSummary> {
    let first = bundles
        .first()
        .ok_or_else(|| Error::InconsistentBundles("no bundles".into()))?;
    if let Some(b) = bundles.iter().find(|b| b.config_hash != first.config_hash) {
        return Err(Error::InconsistentBundles(format!(
            "{} and {} come from different configurations",
            first.village_id, b.village_id
        )));
    }

    let stat = |name: &str, f: &dyn Fn(&VillageBundle) -> f64| {
        let v: Vec<f64> = bundles.iter().map(f).collect();
        let (min, max) = min_max(&v).expect("nonempty");
        NetworkRow {
            statistic: name.to_owned(),
            min,
            median: median(&v),
            max,
        }
    };
    let network = vec![
        stat("n_nodes", &|b| b.stats.n_nodes as f64),
        stat("n_edges", &|b| b.stats.n_edges as f64),
        stat("density", &|b| b.stats.density),
        stat("mean_degree", &|b| b.stats.mean_degree),
        stat("mean_clustering", &|b| b.stats.mean_clustering),
        stat("n_components", &|b| b.stats.n_components as f64),
        stat("lcc_nodes", &|b| b.stats.lcc_nodes as f64),
        stat("lcc_edges", &|b| b.stats.lcc_edges as f64),
        stat("lcc_node_fraction", &|b| b.stats.lcc_node_fraction),
        stat("lcc_edge_fraction", &|b| b.stats.lcc_edge_fraction),
        stat("lcc_mean_degree", &|b| b.stats.lcc_mean_degree),
        stat("lcc_mean_clustering", &|b| b.stats.lcc_mean_clustering),
        stat("louvain_modularity", &|b| b.louvain.modularity),
        stat("n_communities", &|b| b.louvain.n_communities as f64),
    ];

    let mut by_coefficient: BTreeMap<(String, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for b in bundles {
        for r in &b.fits {
            if r.attribute == INTERCEPT {
                continue;
            }
            let order = Attribute::ALL
                .iter()
                .position(|a| a.name() == r.attribute)
                .unwrap_or(usize::MAX);
            let entry = by_coefficient.entry((r.model.clone(), order)).or_default();
            if let (true, Some(or), Some(p)) = (r.converged, r.odds_ratio, r.p_value) {
                entry.push((or, p));
            }
        }
    }
    let attribute_name = |order: usize| Attribute::ALL.get(order).map_or("other", |a| a.name());
    let dyadic = by_coefficient
        .into_iter()
        .map(|((model, order), fits)| {
            let ors: Vec<f64> = fits.iter().map(|f| f.0).collect();
            let significant = fits.iter().filter(|f| f.1 < SIGNIFICANCE).count();
            let assortative = fits
                .iter()
                .filter(|f| f.1 < SIGNIFICANCE && f.0 > 1.0)
                .count();
            let mm = min_max(&ors);
            DyadicRow {
                model,
                attribute: attribute_name(order).to_owned(),
                n_villages: fits.len(),
                or_min: mm.map(|m| m.0),
                or_median: (!ors.is_empty()).then(|| median(&ors)),
                or_max: mm.map(|m| m.1),
                pct_significant: pct(significant, fits.len()),
                pct_assortative: pct(assortative, fits.len()),
            }
        })
        .collect();

    let mut tolerances: Vec<f64> = bundles
        .iter()
        .flat_map(|b| b.sex_permutation.iter().map(|r| r.tolerance))
        .collect();
    tolerances.sort_by(f64::total_cmp);
    tolerances.dedup();
    let mut sex_mixing = Vec::new();
    for &tolerance in &tolerances {
        for tie_type in TieType::ALL {
            let verdicts: Vec<Verdict> = bundles
                .iter()
                .flat_map(|b| &b.sex_permutation)
                .filter(|r| r.tolerance == tolerance && r.tie_type == tie_type)
                .map(|r| r.verdict)
                .collect();
            let count = |v: Verdict| verdicts.iter().filter(|&&x| x == v).count();
            sex_mixing.push(SexMixingRow {
                tolerance,
                tie_type,
                n_villages: verdicts.len(),
                pct_assortative: pct(count(Verdict::Assortative), verdicts.len()).unwrap_or(0.0),
                pct_dissortative: pct(count(Verdict::Dissortative), verdicts.len()).unwrap_or(0.0),
            });
        }
    }

    let community = Attribute::ALL
        .iter()
        .map(|attr| {
            let name = attr.name();
            let nmis: Vec<f64> = bundles
                .iter()
                .flat_map(|b| &b.nmi)
                .filter(|r| r.attribute == name)
                .map(|r| r.value)
                .collect();
            let seg = || {
                bundles
                    .iter()
                    .flat_map(|b| &b.segregation)
                    .filter(|r| r.attribute == name)
            };
            let qw: Vec<f64> = seg().filter_map(|r| r.q_within_norm).collect();
            let qb: Vec<f64> = seg().filter_map(|r| r.q_between_norm).collect();
            let mm = min_max(&nmis);
            CommunityRow {
                attribute: name.to_owned(),
                n_villages: nmis.len(),
                nmi_mean: mean(&nmis),
                nmi_min: mm.map(|m| m.0),
                nmi_median: (!nmis.is_empty()).then(|| median(&nmis)),
                nmi_max: mm.map(|m| m.1),
                q_within_norm_mean: mean(&qw),
                q_between_norm_mean: mean(&qb),
                n_between: qb.len(),
                pct_between_positive: pct(qb.iter().filter(|&&q| q > 0.0).count(), qb.len()),
            }
        })
        .collect();

    Ok(CorpusSummary {
        schema_version: SCHEMA_VERSION,
        config_hash: first.config_hash.clone(),
        villages: bundles.iter().map(|b| b.village_id.clone()).collect(),
        network,
        dyadic,
        sex_mixing,
        community,
    })
}

/// Reads every bundle under `dir/villages`, in natural village order.
pub fn read_bundles(dir: &Path) -> Result<Vec<VillageBundle>> {
    let vdir = dir.join(VILLAGES_DIR);
    let entries =
        fs::read_dir(&vdir).map_err(|e| Error::io(format!("listing {}", vdir.display()), e))?;
    let mut bundles = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Error::io(format!("listing {}", vdir.display()), e))?
            .path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(&path)
                .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            bundles.push(serde_json::from_str::<VillageBundle>(&text)?);
        }
    }
    bundles.sort_by(|a, b| natural_cmp(&a.village_id, &b.village_id));
    if bundles.is_empty() {
        return Err(Error::NoVillages(vdir));
    }
    Ok(bundles)
}

fn nmi_matrix(hash: &str, bundles: &[VillageBundle]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["village_id"];
    header.extend(Attribute::ALL.iter().map(|a| a.name()));
    w.write_record(&header)?;
    for b in bundles {
        let mut row = vec![b.village_id.clone()];
        for attr in Attribute::ALL {
            let v = b.nmi.iter().find(|r| r.attribute == attr.name());
            row.push(v.map(|r| r.value.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| Error::io("buffering csv", e.into_error()))?;
    Ok(format!(
        "# config_hash={hash} schema_version={SCHEMA_VERSION}\n{}",
        String::from_utf8(body).expect("utf-8")
    ))
}

/// Recomputes the corpus tables from the bundles in `dir` and writes them
/// next to the bundles.
pub fn summarize_dir(dir: &Path) -> Result<CorpusSummary> {
    let bundles = read_bundles(dir)?;
    let summary = summarize_corpus(&bundles)?;
    let h = summary.config_hash.as_str();
    let gather =
        |f: &dyn Fn(&VillageBundle) -> Vec<_>| bundles.iter().flat_map(f).collect::<Vec<_>>();

    let stats: Vec<_> = bundles.iter().map(|b| b.stats.clone()).collect();
    write_text(&dir.join(NETWORK_STATS_FILE), &csv_text(h, &stats)?)?;
    write_text(
        &dir.join(FITS_FILE),
        &csv_text(h, &gather(&|b| b.fits.clone()))?,
    )?;
    write_text(
        &dir.join(PERMUTATION_FILE),
        &csv_text(
            h,
            &bundles
                .iter()
                .flat_map(|b| b.sex_permutation.clone())
                .collect::<Vec<_>>(),
        )?,
    )?;
    write_text(
        &dir.join(SEGREGATION_FILE),
        &csv_text(
            h,
            &bundles
                .iter()
                .flat_map(|b| b.segregation.clone())
                .collect::<Vec<_>>(),
        )?,
    )?;
    write_text(
        &dir.join(TTEST_FILE),
        &csv_text(
            h,
            &bundles
                .iter()
                .flat_map(|b| b.missingness_ttests.clone())
                .collect::<Vec<_>>(),
        )?,
    )?;
    write_text(&dir.join(NMI_FILE), &nmi_matrix(h, &bundles)?)?;
    write_text(
        &dir.join(TABLE_NETWORK_FILE),
        &csv_text(h, &summary.network)?,
    )?;
    write_text(&dir.join(TABLE_DYADIC_FILE), &csv_text(h, &summary.dyadic)?)?;
    write_text(
        &dir.join(TABLE_SEX_FILE),
        &csv_text(h, &summary.sex_mixing)?,
    )?;
    write_text(
        &dir.join(TABLE_COMMUNITY_FILE),
        &csv_text(h, &summary.community)?,
    )?;
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn empty_bundle_list_is_an_error() {
        assert!(summarize_corpus(&[]).is_err());
    }
}
