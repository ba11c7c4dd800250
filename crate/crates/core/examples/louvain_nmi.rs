//! Louvain communities on a planted block model, compared with the planted
//! blocks and with node attributes by normalized mutual information.

use segnet::attributes::Attribute;
use segnet::community::{louvain_runs, nmi, nmi_complete};
use segnet::synth::{
    generate_attribute_sbm, AttributeAssignment, AttributeRule, AttributedSbmConfig,
};

fn main() -> segnet::error::Result<()> {
    let village = generate_attribute_sbm(&AttributedSbmConfig {
        block_sizes: vec![60, 50, 40, 30],
        p_in: 0.25,
        p_out: 0.015,
        attributes: vec![
            AttributeAssignment {
                attribute: Attribute::Caste,
                rule: AttributeRule::ByBlock(vec![
                    "OBC".into(),
                    "OBC".into(),
                    "General".into(),
                    "Scheduled Tribe".into(),
                ]),
            },
            AttributeAssignment {
                attribute: Attribute::Sex,
                rule: AttributeRule::Distribution(vec![
                    ("male".into(), 1.0),
                    ("female".into(), 1.0),
                ]),
            },
        ],
        seed: 5,
    })?;
    let g = &village.dataset.graph;
    for run in louvain_runs(g, &[1, 2, 3])? {
        let found: Vec<Option<usize>> = run
            .partition
            .assignment()
            .iter()
            .map(|&c| Some(c))
            .collect();
        let planted = nmi_complete(run.partition.assignment(), village.planted.assignment())?;
        let caste = nmi(
            &found,
            &village.dataset.attributes.labels(Attribute::Caste, None),
        )?;
        let sex = nmi(
            &found,
            &village.dataset.attributes.labels(Attribute::Sex, None),
        )?;
        println!(
            "seed {}: {} communities, Q = {:.4}, NMI planted {:.3}, caste {:.3}, sex {:.3}",
            run.seed,
            run.partition.n_communities(),
            run.modularity,
            planted.value,
            caste.value,
            sex.value
        );
    }
    Ok(())
}
