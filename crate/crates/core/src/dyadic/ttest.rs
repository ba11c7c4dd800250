use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::attributes::{Attribute, AttributeTable};
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

/// Welch two-sample t-test (unequal variances).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Both groups need at least two observations. With zero variance in both
/// groups the statistic is 0 for equal means and infinite otherwise.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    for (group, xs) in [("a", a), ("b", b)] {
        if xs.len() < 2 {
            return Err(Error::GroupTooSmall {
                group,
                size: xs.len(),
            });
        }
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    let (t, df, p_value) = if se2 == 0.0 {
        let df = (a.len() + b.len() - 2) as f64;
        if ma == mb {
            (0.0, df, 1.0)
        } else {
            ((ma - mb).signum() * f64::INFINITY, df, 0.0)
        }
    } else {
        let t = (ma - mb) / se2.sqrt();
        let df = se2 * se2 / (sa * sa / (a.len() - 1) as f64 + sb * sb / (b.len() - 1) as f64);
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (t, df, (2.0 * dist.sf(t.abs())).min(1.0))
    };
    Ok(WelchTest {
        t,
        df,
        p_value,
        mean_a: ma,
        mean_b: mb,
        n_a: a.len(),
        n_b: b.len(),
    })
}

/// Compares the degrees of nodes with `attr` observed (group a) against
/// nodes with it missing (group b).
pub fn degree_missingness_ttest(
    graph: &UndirectedGraph,
    table: &AttributeTable,
    attr: Attribute,
) -> Result<WelchTest> {
    assert_eq!(graph.node_count(), table.len());
    let (mut observed, mut missing) = (Vec::new(), Vec::new());
    for i in 0..graph.node_count() {
        let k = graph.degree(i) as f64;
        if table.get(i, attr).is_some() {
            observed.push(k);
        } else {
            missing.push(k);
        }
    }
    if observed.len() < 2 {
        return Err(Error::GroupTooSmall {
            group: "observed",
            size: observed.len(),
        });
    }
    if missing.len() < 2 {
        return Err(Error::GroupTooSmall {
            group: "missing",
            size: missing.len(),
        });
    }
    welch_t_test(&observed, &missing)
}
