//! Maximum-likelihood logistic regression of tie status on dyad features,
//! fitted by iteratively reweighted least squares (Newton–Raphson on the
//! log-likelihood) with step halving.
//!
//! The link is `P(tie) = 1 / (1 + exp(-(β0 + Σ_d β_d x_d)))`, so `exp(β_d)`
//! is the odds ratio for a unit change in feature `d`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::design::DyadSource;
use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Converged once every coefficient moves by less than this.
    pub tolerance: f64,
    /// A coefficient beyond this magnitude is taken as divergence.
    pub divergence_bound: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tolerance: 1e-8,
            divergence_bound: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub feature_names: Vec<String>,
    pub beta0: f64,
    pub beta0_std_error: f64,
    pub beta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub odds_ratios: Vec<f64>,
    pub ci95: Vec<(f64, f64)>,
    /// Two-sided Wald p-values of `beta`.
    pub p_values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub n_dyads: usize,
    pub n_ties: usize,
    /// Set when the fit did not converge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// One coefficient's summary, looked up by feature name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSummary {
    pub beta: f64,
    pub std_error: f64,
    pub odds_ratio: f64,
    pub ci95: (f64, f64),
    pub p_value: f64,
}

impl LogisticFit {
    pub fn coefficient(&self, name: &str) -> Option<CoefficientSummary> {
        let k = self.feature_names.iter().position(|n| n == name)?;
        Some(CoefficientSummary {
            beta: self.beta[k],
            std_error: self.std_errors[k],
            odds_ratio: self.odds_ratios[k],
            ci95: self.ci95[k],
            p_value: self.p_values[k],
        })
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Log-likelihood, score and information at `theta` (intercept first).
struct Evaluation {
    log_likelihood: f64,
    score: DVector<f64>,
    information: DMatrix<f64>,
}

fn evaluate(source: &dyn DyadSource, theta: &[f64]) -> Evaluation {
    let p = theta.len();
    let partials: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..source.n_blocks())
        .into_par_iter()
        .map(|b| {
            let (mut x, mut y) = (Vec::new(), Vec::new());
            source.fill_block(b, &mut x, &mut y);
            let mut ll = 0.0;
            let mut score = vec![0.0; p];
            let mut info = vec![0.0; p * p];
            let mut row = vec![0.0; p];
            row[0] = 1.0;
            for (r, &tie) in y.iter().enumerate() {
                row[1..].copy_from_slice(&x[r * (p - 1)..(r + 1) * (p - 1)]);
                let eta: f64 = row.iter().zip(theta).map(|(a, b)| a * b).sum();
                let mu = sigmoid(eta);
                let yv = f64::from(u8::from(tie));
                ll += yv * eta - softplus(eta);
                let w = mu * (1.0 - mu);
                let resid = yv - mu;
                for a in 0..p {
                    score[a] += row[a] * resid;
                    let wa = w * row[a];
                    for c in a..p {
                        info[a * p + c] += wa * row[c];
                    }
                }
            }
            (ll, score, info)
        })
        .collect();
    // summed in block order so the result does not depend on scheduling
    let mut log_likelihood = 0.0;
    let mut score = DVector::zeros(p);
    let mut information = DMatrix::zeros(p, p);
    for (ll, s, info) in partials {
        log_likelihood += ll;
        for a in 0..p {
            score[a] += s[a];
            for c in a..p {
                information[(a, c)] += info[a * p + c];
            }
        }
    }
    for a in 0..p {
        for c in 0..a {
            information[(a, c)] = information[(c, a)];
        }
    }
    Evaluation {
        log_likelihood,
        score,
        information,
    }
}

/// Row count, tie count and per-column range in one pass.
fn scan(source: &dyn DyadSource) -> (usize, usize, Vec<(f64, f64)>) {
    let p = source.n_features();
    let mut rows = 0;
    let mut ties = 0;
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); p];
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for b in 0..source.n_blocks() {
        source.fill_block(b, &mut x, &mut y);
        rows += y.len();
        ties += y.iter().filter(|&&t| t).count();
        for r in 0..y.len() {
            for (f, range) in ranges.iter_mut().enumerate() {
                let v = x[r * p + f];
                range.0 = range.0.min(v);
                range.1 = range.1.max(v);
            }
        }
    }
    (rows, ties, ranges)
}

/// Fits the model. Non-convergence (iteration cap or a diverging
/// coefficient, typically from separation) is reported through
/// `converged = false` and `diagnostic`.
pub fn fit_logistic(source: &dyn DyadSource, opts: &FitOptions) -> Result<LogisticFit> {
    let names = source.feature_names().to_vec();
    let (n_dyads, n_ties, ranges) = scan(source);
    if n_ties == 0 || n_ties == n_dyads {
        return Err(Error::NoResponseVariation {
            ties: n_ties,
            dyads: n_dyads,
        });
    }
    if let Some(k) = ranges.iter().position(|(lo, hi)| lo == hi) {
        return Err(Error::ConstantColumn(names[k].clone()));
    }

    let p = names.len() + 1;
    let mut theta = vec![0.0; p];
    let rate = n_ties as f64 / n_dyads as f64;
    theta[0] = (rate / (1.0 - rate)).ln();

    let mut current = evaluate(source, &theta);
    let mut converged = false;
    let mut diagnostic = None;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let step = current
            .information
            .clone()
            .cholesky()
            .ok_or(Error::SingularInformation)?
            .solve(&current.score);
        let mut scale = 1.0;
        let (candidate, evaluated) = loop {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + scale * s)
                .collect();
            let evaluated = evaluate(source, &candidate);
            if evaluated.log_likelihood
                >= current.log_likelihood - 1e-10 * current.log_likelihood.abs()
                || scale < 1e-3
            {
                break (candidate, evaluated);
            }
            scale /= 2.0;
        };
        let max_change = theta
            .iter()
            .zip(&candidate)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        theta = candidate;
        current = evaluated;
        if let Some(k) = theta.iter().position(|t| t.abs() > opts.divergence_bound) {
            let name = if k == 0 {
                "intercept"
            } else {
                names[k - 1].as_str()
            };
            diagnostic = Some(format!(
                "coefficient for {name} reached {:.3e}; the data look separated",
                theta[k]
            ));
            break;
        }
        if max_change < opts.tolerance {
            converged = true;
            break;
        }
    }
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!(
            "no convergence within {} iterations",
            opts.max_iter
        ));
    }

    let covariance = current
        .information
        .clone()
        .cholesky()
        .ok_or(Error::SingularInformation)?
        .inverse();
    let se: Vec<f64> = (0..p).map(|k| covariance[(k, k)].sqrt()).collect();
    let beta = theta[1..].to_vec();
    let std_errors = se[1..].to_vec();
    let odds_ratios = beta.iter().map(|b| b.exp()).collect();
    let ci95 = beta
        .iter()
        .zip(&std_errors)
        .map(|(b, s)| ((b - Z_95 * s).exp(), (b + Z_95 * s).exp()))
        .collect();
    let p_values = beta
        .iter()
        .zip(&std_errors)
        .map(|(b, s)| erfc((b / s).abs() / std::f64::consts::SQRT_2).min(1.0))
        .collect();
    Ok(LogisticFit {
        feature_names: names,
        beta0: theta[0],
        beta0_std_error: se[0],
        beta,
        std_errors,
        odds_ratios,
        ci95,
        p_values,
        converged,
        iterations,
        log_likelihood: current.log_likelihood,
        n_dyads,
        n_ties,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::design::DyadTable;

    fn two_by_two(a: usize, b: usize, c: usize, d: usize) -> DyadTable {
        // a: tie & match, b: no tie & match, c: tie & no match, d: neither
        let mut t = DyadTable::new(vec!["x".into()]);
        for (n, x, y) in [
            (a, 1.0, true),
            (b, 1.0, false),
            (c, 0.0, true),
            (d, 0.0, false),
        ] {
            for _ in 0..n {
                t.push(&[x], y);
            }
        }
        t
    }

    #[test]
    fn saturated_model_matches_cross_product_ratio() {
        let fit = fit_logistic(&two_by_two(40, 10, 25, 75), &FitOptions::default()).unwrap();
        assert!(fit.converged);
        let cross = (40.0 * 75.0) / (10.0 * 25.0);
        assert!((fit.odds_ratios[0] - cross).abs() < 1e-6);
        assert!((fit.beta0 - (25.0f64 / 75.0).ln()).abs() < 1e-9);
        // Woolf standard error of the log odds ratio
        let woolf = (1.0 / 40.0 + 1.0 / 10.0 + 1.0 / 25.0 + 1.0 / 75.0f64).sqrt();
        assert!((fit.std_errors[0] - woolf).abs() < 1e-8);
        let (lo, hi) = fit.ci95[0];
        assert!((lo - (cross.ln() - 1.96 * woolf).exp()).abs() < 1e-6);
        assert!((hi - (cross.ln() + 1.96 * woolf).exp()).abs() < 1e-6);
    }

    #[test]
    fn null_effect_covers_one() {
        let fit = fit_logistic(&two_by_two(20, 80, 20, 80), &FitOptions::default()).unwrap();
        assert!(fit.beta[0].abs() < 1e-10);
        assert!(fit.ci95[0].0 < 1.0 && fit.ci95[0].1 > 1.0);
        assert!((fit.p_values[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn separation_is_flagged() {
        let fit = fit_logistic(&two_by_two(30, 0, 0, 30), &FitOptions::default()).unwrap();
        assert!(!fit.converged);
        assert!(fit.diagnostic.unwrap().contains("separated"));
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let mut t = DyadTable::new(vec!["x".into(), "c".into()]);
        t.push(&[0.0, 1.0], true);
        t.push(&[1.0, 1.0], false);
        t.push(&[1.0, 1.0], true);
        assert!(matches!(
            fit_logistic(&t, &FitOptions::default()),
            Err(Error::ConstantColumn(name)) if name == "c"
        ));
        let all_ties = two_by_two(3, 0, 3, 0);
        assert!(matches!(
            fit_logistic(&all_ties, &FitOptions::default()),
            Err(Error::NoResponseVariation { .. })
        ));
    }
}
