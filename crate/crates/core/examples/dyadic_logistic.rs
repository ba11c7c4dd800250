//! Logistic model of tie formation on attribute similarity, fitted to dyads
//! simulated with known effects.

use segnet::attributes::Attribute;
use segnet::dyadic::{build_dyad_design, fit_logistic, FeatureEncoding, FeatureSpec, FitOptions};
use segnet::synth::{generate_dyad_sample, DyadSampleConfig, MatchEffect};

fn main() -> segnet::error::Result<()> {
    let truth = [
        (Attribute::Caste, 1.6),
        (Attribute::Sex, 0.4),
        (Attribute::Religion, 0.0),
    ];
    let village = generate_dyad_sample(&DyadSampleConfig {
        beta0: -3.0,
        effects: vec![
            MatchEffect {
                attribute: Attribute::Caste,
                beta: truth[0].1,
                weights: vec![2.0, 1.0, 3.0, 2.0],
            },
            MatchEffect {
                attribute: Attribute::Sex,
                beta: truth[1].1,
                weights: vec![1.0, 1.0],
            },
            MatchEffect {
                attribute: Attribute::Religion,
                beta: truth[2].1,
                weights: vec![8.0, 1.0, 1.0],
            },
        ],
        n_nodes: 400,
        seed: 11,
    })?;
    let spec = FeatureSpec::new(
        truth
            .iter()
            .map(|&(a, _)| FeatureEncoding::matching(a))
            .collect(),
    )?;
    let design = build_dyad_design(&village.graph, &village.attributes, &spec)?;
    let fit = fit_logistic(&design, &FitOptions::default())?;
    println!(
        "{} dyads, {} ties, converged after {} iterations",
        fit.n_dyads, fit.n_ties, fit.iterations
    );
    println!(
        "{:>10} {:>7} {:>7} {:>7} {:>17} {:>10}",
        "attribute", "true", "beta", "OR", "95% CI", "p"
    );
    for (k, name) in fit.feature_names.iter().enumerate() {
        println!(
            "{name:>10} {:>7.3} {:>7.3} {:>7.3} [{:>6.3}, {:>6.3}] {:>10.2e}",
            truth[k].1,
            fit.beta[k],
            fit.odds_ratios[k],
            fit.ci95[k].0,
            fit.ci95[k].1,
            fit.p_values[k]
        );
    }
    Ok(())
}
