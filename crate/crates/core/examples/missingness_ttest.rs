//! Welch test of whether nodes with a missing attribute differ in degree.

use segnet::attributes::Attribute;
use segnet::dyadic::degree_missingness_ttest;
use segnet::synth::{generate_dyad_sample, DyadSampleConfig, MatchEffect};

fn main() -> segnet::error::Result<()> {
    let mut village = generate_dyad_sample(&DyadSampleConfig {
        beta0: -2.5,
        effects: vec![MatchEffect {
            attribute: Attribute::Caste,
            beta: 1.0,
            weights: vec![1.0; 4],
        }],
        n_nodes: 200,
        seed: 2,
    })?;
    // hide caste for the 40 least connected nodes
    let mut order: Vec<usize> = (0..200).collect();
    order.sort_by_key(|&i| village.graph.degree(i));
    for &i in &order[..40] {
        village.attributes.row_mut(i).set(Attribute::Caste, None);
    }
    let w = degree_missingness_ttest(&village.graph, &village.attributes, Attribute::Caste)?;
    println!(
        "mean degree observed {:.2} (n = {}), missing {:.2} (n = {})",
        w.mean_a, w.n_a, w.mean_b, w.n_b
    );
    println!("t = {:.3}, df = {:.1}, p = {:.2e}", w.t, w.df, w.p_value);
    Ok(())
}
