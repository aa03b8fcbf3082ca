//! Goodness-of-fit metrics for a fixed bivariate model.

use serde::Serialize;

use super::{aic, bic, empirical_kendall_tau};
use crate::copula::BivariateModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLikelihoods {
    pub marginal1: f64,
    pub marginal2: f64,
    pub copula: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InformationCriteria {
    pub df: usize,
    pub aic: f64,
    pub bic: f64,
}

impl InformationCriteria {
    pub fn new(log_likelihood: f64, df: usize, n: usize) -> Self {
        Self {
            df,
            aic: aic(log_likelihood, df),
            bic: bic(log_likelihood, df, n as f64),
        }
    }
}

/// Metrics of a bivariate model on paired data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub n: usize,
    pub log_likelihood: LogLikelihoods,
    /// Every free parameter counted: both marginals including their
    /// thresholds, plus `phi`.
    pub criteria: InformationCriteria,
    /// Thresholds left out of the count: `(df1 - 1) + (df2 - 1) + 1`, i.e.
    /// 9 for the W/P heads and 11 for Inverse Burr.
    pub reduced: InformationCriteria,
    pub model_kendall_tau: f64,
    pub empirical_kendall_tau: f64,
    /// Kolmogorov–Smirnov distance of each coordinate from its marginal.
    pub ks_statistic: [f64; 2],
}

/// Kolmogorov–Smirnov distance between the empirical cdf of `data` and `cdf`.
pub fn ks_statistic(data: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Evaluates a fixed model: joint log-likelihood split by component, AIC and
/// BIC under both parameter counts, Kendall's taus and marginal KS distances.
pub fn evaluate(model: &BivariateModel, pairs: &[(f64, f64)]) -> Result<Evaluation> {
    if pairs.len() < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            actual: pairs.len(),
        });
    }
    let (y1, y2): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let l1 = model.marginal1.log_likelihood(&y1)?;
    let l2 = model.marginal2.log_likelihood(&y2)?;
    let pseudo = model.pseudo_observations(pairs)?;
    let lc = model.copula.log_likelihood(&pseudo)?;
    let total = l1 + l2 + lc;

    let (df1, df2) = (
        model.marginal1.family().free_param_count(),
        model.marginal2.family().free_param_count(),
    );
    let n = pairs.len();
    Ok(Evaluation {
        n,
        log_likelihood: LogLikelihoods {
            marginal1: l1,
            marginal2: l2,
            copula: lc,
            total,
        },
        criteria: InformationCriteria::new(total, df1 + df2 + 1, n),
        reduced: InformationCriteria::new(total, df1 + df2 - 1, n),
        model_kendall_tau: model.copula.kendall_tau(),
        empirical_kendall_tau: empirical_kendall_tau(&y1, &y2)?,
        ks_statistic: [
            ks_statistic(&y1, |y| model.marginal1.cdf_raw(y)),
            ks_statistic(&y2, |y| model.marginal2.cdf_raw(y)),
        ],
    })
}
