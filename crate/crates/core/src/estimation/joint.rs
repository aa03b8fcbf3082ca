//! One-step joint maximum likelihood over marginals and copula together.
//!
//! This goes beyond the two-stage procedure and is off by default; it starts
//! from the stage-two estimates and can only improve the joint likelihood.

use serde::Serialize;

use super::marginal::{negative_log_likelihood, MarginalTransform};
use super::nelder_mead::NelderMead;
use super::{FitReport, InformationCriteria, OptimizerConfig};
use crate::composite::{CompositeModel, CompositeParams};
use crate::copula::{clamp_pseudo_observation, Gumbel};
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct JointFit {
    pub marginal1: CompositeParams,
    pub marginal2: CompositeParams,
    pub phi: f64,
    pub log_likelihood: f64,
    pub criteria: InformationCriteria,
    pub iterations: usize,
    pub converged: bool,
}

fn joint_negative_log_likelihood(
    t1: &MarginalTransform,
    t2: &MarginalTransform,
    z: &[f64],
    y1: &[f64],
    y2: &[f64],
) -> f64 {
    let d1 = t1.dim();
    let d2 = t2.dim();
    let (Ok(p1), Ok(p2)) = (t1.decode(&z[..d1]), t2.decode(&z[d1..d1 + d2])) else {
        return f64::INFINITY;
    };
    let marginal = negative_log_likelihood(Ok(p1), y1) + negative_log_likelihood(Ok(p2), y2);
    if !marginal.is_finite() {
        return f64::INFINITY;
    }
    let (Ok(m1), Ok(m2), Ok(g)) = (
        CompositeModel::new(p1),
        CompositeModel::new(p2),
        Gumbel::new(1.0 + z[d1 + d2].exp()),
    ) else {
        return f64::INFINITY;
    };
    let copula: f64 = y1
        .iter()
        .zip(y2)
        .map(|(&a, &b)| {
            g.ln_density_raw(
                clamp_pseudo_observation(m1.cdf_raw(a)),
                clamp_pseudo_observation(m2.cdf_raw(b)),
            )
        })
        .sum();
    marginal - copula
}

/// Refines a two-stage fit by maximizing the full joint likelihood.
pub fn refine_joint(
    pairs: &[(f64, f64)],
    report: &FitReport,
    config: &OptimizerConfig,
) -> Result<JointFit> {
    config.validate()?;
    let (y1, y2): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let t1 = MarginalTransform::new(report.families[0], &y1);
    let t2 = MarginalTransform::new(report.families[1], &y2);
    let mut z0 = t1.encode(&report.marginal1.params);
    z0.extend(t2.encode(&report.marginal2.params));
    z0.push((report.copula.phi - 1.0).max(1e-3).ln());

    let objective = |z: &[f64]| joint_negative_log_likelihood(&t1, &t2, z, &y1, &y2);
    let nm = NelderMead {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        // Small steps: the start is already near the optimum.
        initial_step: 0.1 * config.simplex_scale,
    };
    let start_value = objective(&z0);
    let result = nm.minimize(objective, &z0);
    let (z, value) = if result.value <= start_value {
        (result.x, result.value)
    } else {
        (z0, start_value)
    };
    let d1 = t1.dim();
    let d2 = t2.dim();
    let df = d1 + d2 + 1;
    Ok(JointFit {
        marginal1: t1.decode(&z[..d1])?,
        marginal2: t2.decode(&z[d1..d1 + d2])?,
        phi: 1.0 + z[d1 + d2].exp(),
        log_likelihood: -value,
        criteria: InformationCriteria::new(-value, df, pairs.len()),
        iterations: result.iterations,
        converged: result.converged,
    })
}
