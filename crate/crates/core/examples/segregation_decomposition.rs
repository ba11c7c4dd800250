//! Attribute modularity split into within- and between-community parts,
//! and the community network exported as DOT.

use segnet::attributes::Attribute;
use segnet::community::louvain;
use segnet::segregation::{build_community_network, segregation_report};
use segnet::synth::{
    generate_attribute_sbm, AttributeAssignment, AttributeRule, AttributedSbmConfig,
};

fn main() -> segnet::error::Result<()> {
    let castes = ["OBC", "General", "OBC", "Scheduled Caste", "General"];
    let village = generate_attribute_sbm(&AttributedSbmConfig {
        block_sizes: vec![40, 35, 30, 30, 25],
        p_in: 0.2,
        p_out: 0.01,
        attributes: vec![AttributeAssignment {
            attribute: Attribute::Caste,
            rule: AttributeRule::ByBlock(castes.iter().map(|c| c.to_string()).collect()),
        }],
        seed: 8,
    })?;
    let g = &village.dataset.graph;
    let labels = village.dataset.attributes.labels(Attribute::Caste, None);
    let communities = louvain(g, 1)?.partition;
    let r = segregation_report(g, &labels, &communities, "caste")?;
    println!("Q = {:.4}", r.q_attr);
    println!(
        "Q^w = {:.4}  Q*_w = {:?}",
        r.q_within().unwrap_or(f64::NAN),
        r.q_within_norm()
    );
    println!(
        "Q^b = {:.4}  Q*_b = {:?}",
        r.q_between().unwrap_or(f64::NAN),
        r.q_between_norm()
    );

    let net = build_community_network(
        g,
        &communities,
        &labels,
        "caste",
        |c| Attribute::Caste.format_value(c),
        0.05,
        0.005,
    )?;
    println!(
        "community network keeps {:.0}% of nodes and {:.0}% of ties",
        100.0 * net.retained_node_fraction,
        100.0 * net.retained_tie_fraction
    );
    print!("{}", net.to_dot("caste_communities"));
    Ok(())
}
