//! Acceptance checks, one line per criterion. Criteria 6 to 10 need the
//! Karnataka corpus: point `SEGNET_KARNATAKA_CONFIG` at a run config for it,
//! otherwise they are reported as skipped.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

use common::*;
use segnet::attributes::{Attribute, AttributeTable, NodeAttributes};
use segnet::community::{louvain, nmi, nmi_complete, Partition};
use segnet::dyadic::{
    build_dyad_design, fit_logistic, sex_permutation_test, FeatureEncoding, FeatureSpec,
    FitOptions, PermutationOptions, TieType,
};
use segnet::graph::UndirectedGraph;
use segnet::pipeline::{run_pipeline, CorpusSummary, RunConfig};
use segnet::segregation::{
    attribute_modularity, between_community_modularity, within_community_modularity,
};
use segnet::synth::{
    generate_attribute_sbm, generate_dyad_sample, AttributedSbmConfig, DyadSampleConfig,
    MatchEffect,
};

const CORPUS_ENV: &str = "SEGNET_KARNATAKA_CONFIG";

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn modularity_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut compared, mut graphs) = (0.0f64, 0, 0);
    while graphs < 200 {
        let n = rng.gen_range(2..=60);
        let p = rng.gen_range(0.02..0.4);
        let g = random_graph(&mut rng, n, p);
        let k = rng.gen_range(1..=5);
        let labels: Vec<Option<u32>> = (0..n)
            .map(|_| (rng.gen::<f64>() > 0.1).then(|| rng.gen_range(0..k)))
            .collect();
        let c = rng.gen_range(1..=6);
        let comm: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let part = Partition::new(&g, &comm);
        let mut diffs = Vec::new();
        if let Ok(q) = attribute_modularity(&g, &labels) {
            diffs.push(q - naive_q(&g, &labels));
        }
        if let Ok(w) = within_community_modularity(&g, &labels, &part) {
            diffs.push(w.q - naive_component(&g, &labels, &comm, false).0);
        }
        if let Ok(b) = between_community_modularity(&g, &labels, &part) {
            diffs.push(b.q - naive_component(&g, &labels, &comm, true).0);
        }
        if diffs.len() == 3 {
            graphs += 1;
        }
        compared += diffs.len();
        worst = diffs.iter().fold(worst, |w, d| w.max(d.abs()));
    }
    check(
        worst <= 1e-12,
        format!("{graphs} graphs with Q, Q^w and Q^b defined, {compared} values, max |fast - naive| = {worst:.1e}"),
    )
}

fn analytic_fixtures() -> Outcome {
    let g = bridged_triangles();
    let uniform = vec![Some(0u32); 6];
    let side: Vec<Option<u32>> = [0, 0, 0, 1, 1, 1].map(Some).to_vec();
    let part = Partition::new(&g, &[0, 0, 0, 1, 1, 1]);
    let q_uniform = attribute_modularity(&g, &uniform).unwrap();
    let q_side = attribute_modularity(&g, &side).unwrap();
    let qw = within_community_modularity(&g, &side, &part)
        .unwrap()
        .q_norm
        .unwrap();
    let qb = between_community_modularity(&g, &side, &part).unwrap().q;
    check(
        q_uniform == 0.0
            && (q_side - 5.0 / 14.0).abs() <= 1e-12
            && (qw - 1.0).abs() <= 1e-12
            && qb == 0.0,
        format!("Q(uniform) = {q_uniform}, Q = {q_side:.15}, Q*_w = {qw:.15}, Q^b = {qb}"),
    )
}

fn logistic_recovery() -> Outcome {
    // p = 0.8 for matching dyads and 0.2 otherwise: odds ratio 16
    let beta0 = (0.2f64 / 0.8).ln();
    let beta1 = 16f64.ln();
    let n = 142; // 10011 dyads
    let (mut covered, mut worst_ratio_gap) = (0, 0.0f64);
    for seed in 0..100 {
        let d = generate_dyad_sample(&DyadSampleConfig {
            beta0,
            effects: vec![MatchEffect {
                attribute: Attribute::Caste,
                beta: beta1,
                weights: vec![1.0, 1.0],
            }],
            n_nodes: n,
            seed,
        })
        .unwrap();
        let spec = FeatureSpec::single(FeatureEncoding::matching(Attribute::Caste)).unwrap();
        let design = build_dyad_design(&d.graph, &d.attributes, &spec).unwrap();
        let fit = fit_logistic(&design, &FitOptions::default()).unwrap();
        if (fit.beta[0] - beta1).abs() <= 3.0 * fit.std_errors[0]
            && (fit.beta0 - beta0).abs() <= 3.0 * fit.beta0_std_error
        {
            covered += 1;
        }
        let x: Vec<u32> = (0..n)
            .map(|i| d.attributes.get(i, Attribute::Caste).unwrap())
            .collect();
        let t = match_tie_table(&d.graph, &x);
        let ratio = t[1][1] * t[0][0] / (t[1][0] * t[0][1]);
        worst_ratio_gap = worst_ratio_gap.max((fit.odds_ratios[0] - ratio).abs());
    }
    check(
        covered >= 99 && worst_ratio_gap <= 1e-6,
        format!("{covered}/100 seeds within 3 SE; max |OR - cross-product ratio| = {worst_ratio_gap:.1e}"),
    )
}

/// Smallest `x` with `P(X <= x) >= q`.
fn binomial_quantile(b: &Binomial, n: u64, q: f64) -> u64 {
    (0..=n).find(|&x| b.cdf(x) >= q).unwrap_or(n)
}

fn permutation_exactness() -> Outcome {
    // males {0,1,2} form a triangle, females {3,4,5} a path: only MM and FF ties
    let g = UndirectedGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5)]);
    let table = AttributeTable::new(
        (0..6)
            .map(|i| NodeAttributes::missing().with(Attribute::Sex, u32::from(i >= 3)))
            .collect(),
    );
    let tolerance = 0.05;
    let replicates = 1000u64;
    let exact = enumerate_sex_assignments(&g, &[0, 1, 2], tolerance);
    let observed = [3usize, 0, 2];
    let r1 = (replicates + 1) as f64;
    // 99% interval of the Monte Carlo two-sided p for each tie type
    let intervals: Vec<(f64, f64)> = (0..3)
        .map(|k| {
            let share = |f: &dyn Fn(usize) -> bool| {
                exact.iter().filter(|c| f(c[k])).count() as f64 / exact.len() as f64
            };
            let upper = share(&|v| v >= observed[k]);
            let lower = share(&|v| v <= observed[k]);
            let side = upper.min(lower);
            let b = Binomial::new(side, replicates).unwrap();
            let lo = binomial_quantile(&b, replicates, 0.005) as f64;
            let hi = binomial_quantile(&b, replicates, 0.995) as f64;
            (
                (2.0 * (1.0 + lo) / r1).min(1.0),
                (2.0 * (1.0 + hi) / r1).min(1.0),
            )
        })
        .collect();

    let (mut inside, mut tolerance_ok) = (0, true);
    for seed in 0..100 {
        let r = sex_permutation_test(
            &g,
            &table,
            &PermutationOptions {
                tolerance,
                target_replicates: replicates as usize,
                seed,
            },
        )
        .unwrap();
        for rep in &r.replicates {
            let dm = (rep.male_mean_degree / r.male_mean_degree - 1.0).abs();
            let df = (rep.female_mean_degree / r.female_mean_degree - 1.0).abs();
            tolerance_ok &= dm <= tolerance + 1e-12 && df <= tolerance + 1e-12;
        }
        tolerance_ok &= r.n_replicates == replicates as usize;
        let all_inside = TieType::ALL.iter().enumerate().all(|(k, &t)| {
            let p = r.get(t).p_value;
            p >= intervals[k].0 - 1e-12 && p <= intervals[k].1 + 1e-12
        });
        inside += usize::from(all_inside);
    }
    check(
        inside >= 95 && tolerance_ok,
        format!(
            "{inside}/100 seeds inside the 99% interval for MM, MF and FF; {} exact valid assignments; every replicate within tolerance: {tolerance_ok}",
            exact.len()
        ),
    )
}

fn louvain_recovery() -> Outcome {
    let mut good = 0;
    let mut worst = 1.0f64;
    for seed in 0..100 {
        let v = generate_attribute_sbm(&AttributedSbmConfig {
            block_sizes: vec![50; 4],
            p_in: 0.3,
            p_out: 0.01,
            attributes: Vec::new(),
            seed,
        })
        .unwrap();
        let found = louvain(&v.dataset.graph, seed).unwrap();
        let a: Vec<usize> = found.partition.assignment().to_vec();
        let b: Vec<usize> = v.planted.assignment().to_vec();
        let score = nmi_complete(&a, &b).unwrap().value;
        worst = worst.min(score);
        good += usize::from(score >= 0.95);
    }
    let identical = nmi_complete(&[0, 0, 1, 1, 2, 2], &[5, 5, 7, 7, 9, 9])
        .unwrap()
        .value;
    let independent = nmi(&[0, 0, 1, 1].map(Some), &[0, 1, 0, 1].map(Some))
        .unwrap()
        .value;
    check(
        good >= 95 && identical == 1.0 && independent == 0.0,
        format!("{good}/100 seeds with NMI >= 0.95 (min {worst:.3}); identical = {identical}, independent = {independent}"),
    )
}

fn corpus_summary() -> Option<Result<CorpusSummary, String>> {
    let path = std::env::var_os(CORPUS_ENV)?;
    let run = || -> Result<CorpusSummary, String> {
        let cfg = RunConfig::from_file(path.as_ref()).map_err(|e| e.to_string())?;
        let report = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        report
            .summary
            .ok_or_else(|| "every village failed".to_owned())
    };
    Some(run())
}

fn corpus_criteria(summary: &CorpusSummary) -> Vec<Outcome> {
    let net = |s: &str| summary.network_row(s).map(|r| r.median).unwrap_or(f64::NAN);
    let (n, m, k, lcc) = (
        net("n_nodes"),
        net("n_edges"),
        net("mean_degree"),
        net("lcc_node_fraction"),
    );
    let c6 = check(
        n == 869.0 && m == 3750.0 && (k - 8.4).abs() <= 0.2 && (lcc - 0.98).abs() <= 0.01,
        format!("median N = {n}, M = {m}, <k> = {k:.3}, LCC fraction = {lcc:.4}"),
    );

    let caste = summary
        .dyadic_row("joint", "caste")
        .or_else(|| summary.dyadic_row("single", "caste"));
    let c7 = match caste {
        Some(r) => {
            let or = r.or_median.unwrap_or(f64::NAN);
            let sig = r.pct_significant.unwrap_or(0.0);
            check(
                (or / 5.06 - 1.0).abs() <= 0.10 && sig >= 95.0,
                format!("caste OR median = {or:.3}, significant in {sig:.1}% of LCCs"),
            )
        }
        None => Outcome::Fail("no caste coefficient estimated".into()),
    };

    let mm = summary.sex_row(0.05, TieType::MaleMale);
    let mf = summary.sex_row(0.05, TieType::MaleFemale);
    let c8 = match (mm, mf) {
        (Some(mm), Some(mf)) => check(
            mm.pct_assortative >= 90.0 && mf.pct_dissortative >= 90.0,
            format!(
                "MM assortative in {:.1}%, MF dissortative in {:.1}% at 5% tolerance",
                mm.pct_assortative, mf.pct_dissortative
            ),
        ),
        _ => Outcome::Fail("no sex permutation results at tolerance 0.05".into()),
    };

    let nmi_mean = |a: &str| {
        summary
            .community_row(a)
            .and_then(|r| r.nmi_mean)
            .unwrap_or(f64::NAN)
    };
    let (nc, ns) = (nmi_mean("caste"), nmi_mean("sex"));
    let c9 = check(
        (nc - 0.39).abs() <= 0.05 && ns <= 0.05,
        format!("mean NMI caste = {nc:.3}, sex = {ns:.3}"),
    );

    let row = summary.community_row("caste");
    let qw = row.and_then(|r| r.q_within_norm_mean).unwrap_or(f64::NAN);
    let qb = row.and_then(|r| r.pct_between_positive).unwrap_or(0.0);
    let c10 = check(
        (qw - 0.37).abs() <= 0.05 && qb >= 90.0,
        format!("mean Q*_w caste = {qw:.3}, Q*_b positive in {qb:.1}%"),
    );
    vec![c6, c7, c8, c9, c10]
}

const NAMES: [&str; 10] = [
    "modularity oracle equivalence",
    "analytic modularity fixtures",
    "logistic recovery",
    "permutation exactness",
    "Louvain planted recovery",
    "corpus network medians",
    "corpus caste dyadic assortativity",
    "corpus sex mixing",
    "corpus NMI",
    "corpus within/between modularity",
];

fn main() -> ExitCode {
    let start = Instant::now();
    let mut outcomes: Vec<Outcome> = vec![
        modularity_oracle(),
        analytic_fixtures(),
        logistic_recovery(),
        permutation_exactness(),
        louvain_recovery(),
    ];
    match corpus_summary() {
        None => outcomes.extend(
            (6..=10).map(|_| Outcome::Skip(format!("corpus not available; set {CORPUS_ENV}"))),
        ),
        Some(Err(e)) => {
            outcomes.extend((6..=10).map(|_| Outcome::Fail(format!("pipeline failed: {e}"))))
        }
        Some(Ok(s)) => outcomes.extend(corpus_criteria(&s)),
    }
    let mut failed = false;
    for (k, (outcome, name)) in outcomes.iter().zip(NAMES).enumerate() {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed = true;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} criterion {:>2} {name}: {detail}", k + 1);
    }
    println!(
        "acceptance finished in {:.1}s",
        start.elapsed().as_secs_f64()
    );
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
