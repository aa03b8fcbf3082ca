//! Two-stage (inference functions for margins) estimation.
//!
//! Stage one fits each composite marginal by maximum likelihood. Stage two
//! plugs the fitted marginal cdfs into the Gumbel copula likelihood and
//! maximizes over `phi`. Model selection uses AIC and BIC on the joint
//! log-likelihood `Σ ln f1 + Σ ln f2 + Σ ln c`.

mod dependence;
mod diagnostics;
mod joint;
mod kendall;
mod marginal;
pub(crate) mod nelder_mead;

use serde::{Deserialize, Serialize};

pub use dependence::{fit_copula, CopulaFit};
pub use diagnostics::{evaluate, ks_statistic, Evaluation, InformationCriteria, LogLikelihoods};
pub use joint::{refine_joint, JointFit};
pub use kendall::empirical_kendall_tau;
pub use marginal::{fit_marginal, MarginalFit, RestartRecord, THRESHOLD_START_QUANTILES};

use crate::composite::HeadFamily;
use crate::copula::BivariateModel;
use crate::error::{Error, Result};

/// Settings shared by the marginal and copula searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Iteration cap per restart.
    pub max_iterations: usize,
    /// Absolute spread of objective values across the simplex at which a
    /// search stops.
    pub tolerance: f64,
    pub restarts: usize,
    /// Initial simplex edge in the transformed (log / logit) space.
    pub simplex_scale: f64,
    pub seed: u64,
    /// Smallest sample a marginal fit accepts.
    pub min_observations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-8,
            restarts: 3,
            simplex_scale: 0.5,
            seed: 0,
            min_observations: 20,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64, constraint| {
            Err(Error::InvalidParameter {
                name,
                value,
                constraint,
            })
        };
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad("tolerance", self.tolerance, "must be finite and > 0");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations", 0.0, "must be >= 1");
        }
        if self.restarts == 0 {
            return bad("restarts", 0.0, "must be >= 1");
        }
        if !(self.simplex_scale.is_finite() && self.simplex_scale > 0.0) {
            return bad(
                "simplex_scale",
                self.simplex_scale,
                "must be finite and > 0",
            );
        }
        Ok(())
    }
}

/// `-2 l + 2 df`
pub fn aic(log_likelihood: f64, df: usize) -> f64 {
    -2.0 * log_likelihood + 2.0 * df as f64
}

/// `-2 l + ln(n) df`. `n` is a real so non-integer sizes can be checked.
pub fn bic(log_likelihood: f64, df: usize, n: f64) -> f64 {
    -2.0 * log_likelihood + n.ln() * df as f64
}

/// Everything produced by a two-stage fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub families: [HeadFamily; 2],
    pub marginal1: MarginalFit,
    pub marginal2: MarginalFit,
    pub copula: CopulaFit,
    pub metrics: Evaluation,
    /// Both marginal searches met the tolerance.
    pub converged: bool,
    /// Optional one-step joint refinement; `None` unless requested.
    pub joint: Option<JointFit>,
}

impl FitReport {
    pub fn model(&self) -> BivariateModel {
        BivariateModel::new(
            self.marginal1.model(),
            self.marginal2.model(),
            self.copula.copula(),
        )
    }
}

/// Runs both estimation stages on paired data.
///
/// The two marginal fits are independent and run in parallel; failures are
/// tagged with the stage that produced them (`marginal1`, `marginal2`,
/// `copula`).
pub fn fit_bivariate(
    pairs: &[(f64, f64)],
    families: [HeadFamily; 2],
    config: &OptimizerConfig,
) -> Result<FitReport> {
    config.validate()?;
    let (y1, y2): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let (m1, m2) = rayon::join(
        || fit_marginal(&y1, families[0], config).map_err(|e| e.in_stage("marginal1")),
        || fit_marginal(&y2, families[1], config).map_err(|e| e.in_stage("marginal2")),
    );
    let (m1, m2) = (m1?, m2?);

    let (model1, model2) = (m1.model(), m2.model());
    let pseudo: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(a, b)| (model1.cdf_raw(a), model2.cdf_raw(b)))
        .collect();
    let copula = fit_copula(&pseudo, config).map_err(|e| e.in_stage("copula"))?;

    let model = BivariateModel::new(model1, model2, copula.copula());
    let metrics = evaluate(&model, pairs).map_err(|e| e.in_stage("evaluation"))?;
    Ok(FitReport {
        families,
        converged: m1.converged && m2.converged,
        marginal1: m1,
        marginal2: m2,
        copula,
        metrics,
        joint: None,
    })
}
