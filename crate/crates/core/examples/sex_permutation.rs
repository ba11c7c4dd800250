//! Mean-degree-constrained permutation test for male–male, male–female and
//! female–female tie counts.

use segnet::attributes::Attribute;
use segnet::dyadic::{sex_permutation_test, PermutationOptions};
use segnet::graph::largest_connected_component;
use segnet::synth::{generate_dyad_sample, DyadSampleConfig, MatchEffect};

fn main() -> segnet::error::Result<()> {
    // same-sex ties are favoured
    let village = generate_dyad_sample(&DyadSampleConfig {
        beta0: -2.8,
        effects: vec![MatchEffect {
            attribute: Attribute::Sex,
            beta: 0.8,
            weights: vec![1.0, 1.0],
        }],
        n_nodes: 150,
        seed: 3,
    })?;
    let lcc = largest_connected_component(&village.graph)?;
    let table = village.attributes.select(&lcc.new_to_old);
    for tolerance in [0.05, 0.20] {
        let r = sex_permutation_test(
            &lcc.graph,
            &table,
            &PermutationOptions {
                tolerance,
                target_replicates: 1000,
                seed: 1,
            },
        )?;
        println!(
            "tolerance {tolerance}: {} valid of {} permutations ({} males, {} females)",
            r.n_replicates, r.n_attempts, r.n_males, r.n_females
        );
        for t in &r.results {
            println!(
                "  {}  observed {:>4}  expected {:>7.1}  ratio {:.3}  p {:.4}  {:?}",
                t.tie_type.short(),
                t.observed,
                t.expected,
                t.ratio.unwrap_or(f64::NAN),
                t.p_value,
                t.verdict
            );
        }
    }
    Ok(())
}
