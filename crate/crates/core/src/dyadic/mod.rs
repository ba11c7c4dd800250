//! Dyad-level analyses: logistic models of tie formation on attribute
//! similarity, the constrained sex permutation test, and the Welch test
//! for degree differences by attribute missingness.

mod design;
mod logistic;
mod permutation;
mod ttest;

pub use design::{
    build_dyad_design, build_dyad_design_with_block, DyadDesign, DyadRow, DyadSource, DyadTable,
    Encoding, FeatureEncoding, FeatureSpec, BLOCK_ROWS,
};
pub use logistic::{fit_logistic, CoefficientSummary, FitOptions, LogisticFit, Z_95};
pub use permutation::{
    sex_permutation_test, PermutationOptions, Replicate, SexPermutationResult, TieType,
    TieTypeResult, Verdict, ACCEPTANCE_CHECK_ATTEMPTS, MIN_ACCEPTANCE_RATE, SIGNIFICANCE,
};
pub use ttest::{degree_missingness_ttest, welch_t_test, WelchTest};

use crate::attributes::AttributeTable;
use crate::error::Result;
use crate::graph::UndirectedGraph;

/// Fits all features of `spec` jointly.
pub fn fit_joint(
    graph: &UndirectedGraph,
    table: &AttributeTable,
    spec: &FeatureSpec,
    opts: &FitOptions,
) -> Result<LogisticFit> {
    let design = build_dyad_design(graph, table, spec)?;
    fit_logistic(&design, opts)
}

/// Fits one single-predictor model per feature, each on the complete cases
/// of that feature alone.
pub fn fit_per_attribute(
    graph: &UndirectedGraph,
    table: &AttributeTable,
    spec: &FeatureSpec,
    opts: &FitOptions,
) -> Vec<(FeatureEncoding, Result<LogisticFit>)> {
    spec.features
        .iter()
        .map(|f| {
            let fit =
                FeatureSpec::single(f.clone()).and_then(|s| fit_joint(graph, table, &s, opts));
            (f.clone(), fit)
        })
        .collect()
}
