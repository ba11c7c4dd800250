//! Loads a village from the canonical CSV layout.
//!
//! `cargo run --example ingest_village -- <village_dir>` reads
//! `<village_dir>/attributes.csv` and every file in `<village_dir>/layers/`.
//! Without an argument a small village is written to a temporary directory
//! first.

use std::fs;
use std::path::PathBuf;

use segnet::attributes::Attribute;
use segnet::ingest::{load_village_dir, IngestConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let dir = match std::env::args().nth(1) {
        Some(d) => PathBuf::from(d),
        None => {
            let d = tmp.path().to_path_buf();
            fs::create_dir_all(d.join("layers"))?;
            fs::write(d.join("layers/visit.csv"), "source,target\n1,2\n2,3\n3,1\n")?;
            fs::write(d.join("layers/borrow.csv"), "source,target\n3,4\n2,1\n")?;
            fs::write(
                d.join("attributes.csv"),
                "node_id,sex,age,religion,caste,education,workflag,savings\n\
                 1,male,34,Hinduism,OBC,7,1,0\n\
                 2,female,29,Hinduism,OBC,10,0,1\n\
                 3,female,,Islam,General,0,1,\n\
                 4,male,61,Hinduism,Scheduled Caste,,1,1\n\
                 5,male,45,Hinduism,OBC,4,1,0\n",
            )?;
            d
        }
    };
    let village = load_village_dir(&dir, &IngestConfig::new("example"))?;
    println!(
        "{} nodes, {} ties, layers {:?}",
        village.graph.node_count(),
        village.graph.edge_count(),
        village.relation_layers()
    );
    for attr in Attribute::ALL {
        println!(
            "{:>10}: observed for {} of {} nodes",
            attr.name(),
            village.attributes.observed_count(attr),
            village.attributes.len()
        );
    }
    let isolated: Vec<&str> = (0..village.graph.node_count())
        .filter(|&i| village.graph.degree(i) == 0)
        .map(|i| village.node_ids.id(i))
        .collect();
    println!("respondents without ties: {isolated:?}");
    Ok(())
}
