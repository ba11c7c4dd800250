use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized mutual information between two labelings,
/// `I(a:b) / max(H(a), H(b))`, natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmiResult {
    pub value: f64,
    pub mutual_information: f64,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub n_used: usize,
    /// Both labelings were constant; `value` is reported as 0.
    pub degenerate: bool,
}

fn intern<T: Eq + Hash>(labels: impl Iterator<Item = T>) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let codes = labels
        .map(|l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect();
    (codes, ids.len())
}

/// `-Σ (c/n) ln(c/n)` written as `Σ (c/n) ln(n/c)`.
fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let c = c as f64;
            c / n * (n / c).ln()
        })
        .sum()
}

/// Compares two labelings over the nodes where both are present.
///
/// Panics if the slices differ in length.
pub fn nmi<A, B>(a: &[Option<A>], b: &[Option<B>]) -> Result<NmiResult>
where
    A: Eq + Hash,
    B: Eq + Hash,
{
    assert_eq!(a.len(), b.len(), "labelings must cover the same nodes");
    let pairs: Vec<(&A, &B)> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some((x.as_ref()?, y.as_ref()?)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoCommonLabels);
    }
    let (codes_a, ka) = intern(pairs.iter().map(|p| p.0));
    let (codes_b, kb) = intern(pairs.iter().map(|p| p.1));
    let mut count_a = vec![0usize; ka];
    let mut count_b = vec![0usize; kb];
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&x, &y) in codes_a.iter().zip(&codes_b) {
        count_a[x] += 1;
        count_b[y] += 1;
        *joint.entry((x, y)).or_insert(0) += 1;
    }
    let n = pairs.len() as f64;
    let entropy_a = entropy(&count_a, n);
    let entropy_b = entropy(&count_b, n);
    let mutual_information: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let c = c as f64;
            let ratio = (c * n) / (count_a[x] as f64 * count_b[y] as f64);
            c / n * ratio.ln()
        })
        .sum();
    let h_max = entropy_a.max(entropy_b);
    let degenerate = h_max == 0.0;
    let value = if degenerate {
        0.0
    } else {
        (mutual_information / h_max).clamp(0.0, 1.0)
    };
    Ok(NmiResult {
        value,
        mutual_information: mutual_information.max(0.0),
        entropy_a,
        entropy_b,
        n_used: pairs.len(),
        degenerate,
    })
}

/// NMI between two complete labelings.
pub fn nmi_complete<A: Eq + Hash + Clone, B: Eq + Hash + Clone>(
    a: &[A],
    b: &[B],
) -> Result<NmiResult> {
    let a: Vec<Option<A>> = a.iter().cloned().map(Some).collect();
    let b: Vec<Option<B>> = b.iter().cloned().map(Some).collect();
    nmi(&a, &b)
}
