//! End-to-end batch run: generate a synthetic corpus, analyze every
//! village, and print the cross-village tables.
//!
//! `cargo run --example synthetic_pipeline -- <output_dir>` keeps the
//! artifacts; without an argument they go to a temporary directory.

use std::path::PathBuf;

use segnet::attributes::Attribute;
use segnet::pipeline::{run_pipeline, RunConfig};
use segnet::synth::{
    AttributeAssignment, AttributeRule, AttributedSbmConfig, SynthConfig, SyntheticSpec,
};

fn spread(values: &[&str]) -> AttributeRule {
    AttributeRule::Distribution(values.iter().map(|v| (v.to_string(), 1.0)).collect())
}

fn village(id: usize) -> SyntheticSpec {
    let blocks = 3 + id % 3;
    let castes = ["OBC", "General", "Scheduled Caste", "Scheduled Tribe"];
    SyntheticSpec::Sbm {
        id: id.to_string(),
        config: AttributedSbmConfig {
            block_sizes: vec![35; blocks],
            p_in: 0.2,
            p_out: 0.015,
            attributes: vec![
                AttributeAssignment {
                    attribute: Attribute::Caste,
                    rule: AttributeRule::ByBlock(
                        (0..blocks).map(|b| castes[b % 4].to_string()).collect(),
                    ),
                },
                AttributeAssignment {
                    attribute: Attribute::Sex,
                    rule: spread(&["male", "female"]),
                },
                AttributeAssignment {
                    attribute: Attribute::Age,
                    rule: spread(&["22", "38", "47", "58", "70"]),
                },
                AttributeAssignment {
                    attribute: Attribute::Education,
                    rule: spread(&["0", "8", "12", "15"]),
                },
                AttributeAssignment {
                    attribute: Attribute::Religion,
                    rule: spread(&["hinduism", "islam"]),
                },
                AttributeAssignment {
                    attribute: Attribute::Workflag,
                    rule: spread(&["0", "1"]),
                },
                AttributeAssignment {
                    attribute: Attribute::Savings,
                    rule: spread(&["0", "1"]),
                },
            ],
            seed: id as u64,
        },
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| tmp.path().to_path_buf());
    let corpus = root.join("corpus");
    SynthConfig {
        output_dir: None,
        villages: (1..=6).map(village).collect(),
    }
    .write_corpus(&corpus)?;

    let mut cfg = RunConfig::new(&corpus, root.join("out"));
    cfg.permutation.replicates = 200;
    let report = run_pipeline(&cfg)?;
    println!("config hash {}", cfg.hash());
    println!(
        "{} villages, {} failed",
        report.villages.len(),
        report.failures.len()
    );
    let summary = report.summary.expect("at least one village succeeded");
    for r in &summary.network {
        println!(
            "{:>20} {:>10.3} {:>10.3} {:>10.3}",
            r.statistic, r.min, r.median, r.max
        );
    }
    for r in &summary.dyadic {
        println!(
            "{:>10} OR median {:>7.3}  significant in {:>5.1}%",
            r.attribute,
            r.or_median.unwrap_or(f64::NAN),
            r.pct_significant.unwrap_or(0.0)
        );
    }
    for r in &summary.community {
        println!(
            "{:>10} NMI mean {:.3}  Q*_w mean {:.3}  Q*_b > 0 in {:.0}%",
            r.attribute,
            r.nmi_mean.unwrap_or(f64::NAN),
            r.q_within_norm_mean.unwrap_or(f64::NAN),
            r.pct_between_positive.unwrap_or(0.0)
        );
    }
    println!("artifacts in {}", report.output_dir.display());
    Ok(())
}
