//! Stage one: maximum likelihood for a single composite marginal.

use rand::Rng;
use serde::Serialize;

use super::nelder_mead::NelderMead;
use super::OptimizerConfig;
use crate::composite::{CompositeModel, CompositeParams, HeadFamily, HeadParams};
use crate::distributions::{Distribution, InverseWeibull};
use crate::error::{Error, Result};
use crate::random::seeded_rng;
use crate::special::{logistic, logit};

/// Threshold quantiles used to seed successive restarts.
pub const THRESHOLD_START_QUANTILES: [f64; 3] = [0.5, 0.7, 0.9];

/// Fresh-simplex reruns from the best point after a restart converges.
const POLISH_ROUNDS: usize = 3;

/// Outcome of one restart.
#[derive(Debug, Clone, Serialize)]
pub struct RestartRecord {
    pub threshold_quantile: f64,
    pub initial_log_likelihood: f64,
    pub final_log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximum-likelihood fit of one composite marginal.
#[derive(Debug, Clone, Serialize)]
pub struct MarginalFit {
    pub family: HeadFamily,
    pub params: CompositeParams,
    /// Continuity weight at the estimate.
    pub weight: f64,
    pub log_likelihood: f64,
    /// Free parameters: head, `alpha`, `gamma`, `theta`.
    pub df: usize,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: Vec<RestartRecord>,
}

impl MarginalFit {
    pub fn model(&self) -> CompositeModel {
        CompositeModel::new(self.params).expect("fitted parameters form a valid model")
    }
}

/// Maps between the natural parameters and the unconstrained search space.
///
/// Positive parameters live on the log scale; the threshold goes through a
/// logistic map onto `(min(data), max(data))`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MarginalTransform {
    pub family: HeadFamily,
    lo: f64,
    hi: f64,
}

impl MarginalTransform {
    pub fn new(family: HeadFamily, data: &[f64]) -> Self {
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { family, lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.family.free_param_count()
    }

    pub fn decode(&self, z: &[f64]) -> Result<CompositeParams> {
        let k = self.family.head_param_count();
        let head = head_from_coordinates(self.family, &z[..k])?;
        let tail = InverseWeibull::new(z[k].exp(), z[k + 1].exp())?;
        let theta = self.lo + (self.hi - self.lo) * logistic(z[k + 2]);
        CompositeParams::new(head, tail, theta)
    }

    pub fn encode(&self, p: &CompositeParams) -> Vec<f64> {
        let mut z = head_coordinates(&p.head);
        z.push(p.tail.alpha().ln());
        z.push(p.tail.gamma().ln());
        let frac = ((p.theta - self.lo) / (self.hi - self.lo)).clamp(1e-12, 1.0 - 1e-12);
        z.push(logit(frac));
        z
    }
}

/// Log head parameters, except that the Inverse Burr rate is replaced by
/// the log median. As `mu, tau -> inf` together the Inverse Burr tends to an
/// Inverse Weibull, and on the raw scale that ridge stalls the simplex.
fn head_coordinates(head: &HeadParams) -> Vec<f64> {
    match head.tau() {
        Some(tau) => vec![
            head.mu().ln(),
            head.sigma().ln(),
            inverse_burr_ln_median(head.mu(), head.sigma(), tau),
        ],
        None => vec![head.mu().ln(), head.sigma().ln()],
    }
}

fn head_from_coordinates(family: HeadFamily, z: &[f64]) -> Result<HeadParams> {
    let (mu, sigma) = (z[0].exp(), z[1].exp());
    let tau = (z.len() == 3).then(|| (inverse_burr_ln_median(mu, sigma, 1.0) - z[2]).exp());
    HeadParams::from_parts(family, mu, sigma, tau)
}

/// `ln` of the Inverse Burr median, `(2^(1/mu) - 1)^(-1/sigma) / tau`.
fn inverse_burr_ln_median(mu: f64, sigma: f64, tau: f64) -> f64 {
    -(std::f64::consts::LN_2 / mu).exp_m1().ln() / sigma - tau.ln()
}

pub(crate) fn negative_log_likelihood(params: Result<CompositeParams>, data: &[f64]) -> f64 {
    match params.and_then(CompositeModel::new) {
        Ok(model) => {
            let ll = model.log_likelihood_raw(data);
            if ll.is_finite() {
                -ll
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// Linear-interpolation quantile of sorted data.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

fn mean_sd(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Rough starting values with the threshold at the `q` data quantile.
pub(crate) fn starting_params(
    family: HeadFamily,
    sorted: &[f64],
    q: f64,
) -> Result<CompositeParams> {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let theta = sorted_quantile(sorted, q);
    let median = sorted_quantile(sorted, 0.5);
    let (mean_log, sd_log) = mean_sd(sorted.iter().map(|y| y.ln()));
    let sd_log = sd_log.max(1e-3);
    let shape = (std::f64::consts::PI / (sd_log * 6f64.sqrt())).clamp(0.2, 10.0);

    let head = match family {
        HeadFamily::Weibull => {
            HeadParams::from_parts(family, shape, (mean_log + EULER / shape).exp(), None)?
        }
        HeadFamily::Paralogistic => {
            let mu = shape.max(0.5);
            let scale = (2f64.powf(1.0 / mu) - 1.0).powf(1.0 / mu);
            HeadParams::from_parts(family, mu, scale / median, None)?
        }
        HeadFamily::InverseBurr => HeadParams::from_parts(
            family,
            1.0,
            (std::f64::consts::PI / (sd_log * 3f64.sqrt())).clamp(0.2, 10.0),
            Some(1.0 / median),
        )?,
    };

    // Hill-type index from the exceedances of theta.
    let excess: Vec<f64> = sorted
        .iter()
        .filter(|&&y| y > theta)
        .map(|&y| (y / theta).ln())
        .collect();
    let mean_excess = if excess.is_empty() {
        1.0
    } else {
        excess.iter().sum::<f64>() / excess.len() as f64
    };
    let alpha = (1.0 / mean_excess.max(1e-6)).clamp(0.2, 20.0);
    let gamma = median * std::f64::consts::LN_2.powf(1.0 / alpha);
    let tail = InverseWeibull::new(alpha, gamma)?;

    let split = sorted.partition_point(|&y| y <= theta);
    let (below, above) = sorted.split_at(split);
    CompositeParams::new(
        refine_head(head, below, theta),
        refine_tail(tail, above, theta),
        theta,
    )
}

/// Scans thresholds over the 0.05..0.95 data quantiles: at each, head and
/// tail are pre-fitted and a short simplex run polishes the full composite
/// likelihood. Returns the quantile and point of the best scan entry, or
/// `None` if no entry is finite. Raw start points are too crude to rank
/// (a truncated Inverse Burr pre-fit often sits far out on its ridge).
fn profile_start(
    family: HeadFamily,
    sorted: &[f64],
    objective: &impl Fn(&[f64]) -> f64,
    transform: &MarginalTransform,
    initial_step: f64,
) -> Option<(f64, Vec<f64>)> {
    let scout = NelderMead {
        max_iterations: PROFILE_ITERATIONS,
        tolerance: 1e-3,
        initial_step,
    };
    (1..PROFILE_STEPS)
        .map(|k| k as f64 / PROFILE_STEPS as f64)
        .filter_map(|q| {
            let p = starting_params(family, sorted, q).ok()?;
            let run = scout.minimize(objective, &transform.encode(&p));
            run.value.is_finite().then_some((q, run.x, run.value))
        })
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .map(|(q, z, _)| (q, z))
}

const PROFILE_ITERATIONS: usize = 100;
const PROFILE_STEPS: usize = 20;

/// Short search used only to seed the full fit.
const PREFIT: NelderMead = NelderMead {
    max_iterations: 300,
    tolerance: 1e-4,
    initial_step: 0.5,
};

/// Right-truncated head likelihood on `y <= theta`, maximized from `start`.
fn refine_head(start: HeadParams, below: &[f64], theta: f64) -> HeadParams {
    if below.len() < 10 {
        return start;
    }
    let family = start.family();
    let z0 = head_coordinates(&start);
    let build = |z: &[f64]| head_from_coordinates(family, z);
    let objective = |z: &[f64]| match build(z) {
        Ok(h) => {
            let norm = h.ln_cdf_raw(theta);
            -below.iter().map(|&y| h.ln_pdf_raw(y) - norm).sum::<f64>()
        }
        Err(_) => f64::INFINITY,
    };
    let best = PREFIT.minimize(objective, &z0);
    if best.value < objective(&z0) {
        build(&best.x).unwrap_or(start)
    } else {
        start
    }
}

/// Left-truncated tail likelihood on `y > theta`, maximized from `start`.
fn refine_tail(start: InverseWeibull, above: &[f64], theta: f64) -> InverseWeibull {
    if above.len() < 10 {
        return start;
    }
    let z0 = [start.alpha().ln(), start.gamma().ln()];
    let build = |z: &[f64]| InverseWeibull::new(z[0].exp(), z[1].exp());
    let objective = |z: &[f64]| match build(z) {
        Ok(t) => {
            let norm = t.ln_sf_raw(theta);
            -above.iter().map(|&y| t.ln_pdf_raw(y) - norm).sum::<f64>()
        }
        Err(_) => f64::INFINITY,
    };
    let best = PREFIT.minimize(objective, &z0);
    if best.value < objective(&z0) {
        build(&best.x).unwrap_or(start)
    } else {
        start
    }
}

pub(crate) fn validate_sample(data: &[f64], min_n: usize) -> Result<()> {
    if data.len() < min_n {
        return Err(Error::TooFewObservations {
            required: min_n,
            actual: data.len(),
        });
    }
    if let Some(&bad) = data.iter().find(|y| !(y.is_finite() && **y > 0.0)) {
        return Err(Error::domain("observation", bad, "(0, inf)"));
    }
    if data.iter().all(|&y| y == data[0]) {
        return Err(Error::Degenerate("all observations are equal".into()));
    }
    Ok(())
}

/// Maximizes the composite log-likelihood of `data` for one head family.
///
/// Each restart starts the threshold at the next of the 0.5, 0.7 and 0.9
/// data quantiles (cycling, with a seeded jitter beyond the third) and runs
/// a Nelder–Mead search on the transformed parameters. One further run
/// starts from the best threshold of a coarse quantile scan, which catches
/// optima far from those three quantiles. The best run wins. `converged` is
/// false when no run met the tolerance.
pub fn fit_marginal(
    data: &[f64],
    family: HeadFamily,
    config: &OptimizerConfig,
) -> Result<MarginalFit> {
    config.validate()?;
    validate_sample(data, config.min_observations)?;
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);

    let transform = MarginalTransform::new(family, data);
    let objective = |z: &[f64]| negative_log_likelihood(transform.decode(z), data);
    let nm = NelderMead {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        initial_step: config.simplex_scale,
    };
    let mut rng = seeded_rng(config.seed);

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut restarts = Vec::with_capacity(config.restarts + 1);
    let (mut iterations, mut evaluations) = (0, 0);
    let mut profile = profile_start(
        family,
        &sorted,
        &objective,
        &transform,
        config.simplex_scale,
    );
    for k in 0..=config.restarts {
        // the last run starts from the best point of the threshold scan
        let (q, mut z0) = if k == config.restarts {
            match profile.take() {
                Some(start) => start,
                None => break,
            }
        } else {
            let q = THRESHOLD_START_QUANTILES[k % THRESHOLD_START_QUANTILES.len()];
            (q, transform.encode(&starting_params(family, &sorted, q)?))
        };
        if k >= THRESHOLD_START_QUANTILES.len() && k < config.restarts {
            for zi in z0.iter_mut() {
                *zi += config.simplex_scale * (rng.random::<f64>() - 0.5);
            }
        }
        let initial = objective(&z0);

        let mut run = nm.minimize(objective, &z0);
        let mut run_iterations = run.iterations;
        evaluations += run.evaluations;
        for _ in 0..POLISH_ROUNDS {
            if run_iterations >= config.max_iterations {
                break;
            }
            let again = NelderMead {
                max_iterations: config.max_iterations - run_iterations,
                ..nm
            }
            .minimize(objective, &run.x);
            run_iterations += again.iterations;
            evaluations += again.evaluations;
            let gain = run.value - again.value;
            let converged = again.converged;
            if again.value <= run.value {
                run = again;
            }
            run.converged = converged;
            if gain.abs() < config.tolerance {
                break;
            }
        }
        iterations += run_iterations;
        restarts.push(RestartRecord {
            threshold_quantile: q,
            initial_log_likelihood: -initial,
            final_log_likelihood: -run.value,
            iterations: run_iterations,
            converged: run.converged,
        });
        if best.as_ref().is_none_or(|(_, v)| run.value < *v) {
            best = Some((run.x, run.value));
        }
    }

    let (z, value) = best.expect("at least one restart");
    if !value.is_finite() {
        return Err(Error::Degenerate(format!(
            "no finite likelihood found for the {} model",
            family.tag()
        )));
    }
    let params = transform.decode(&z)?;
    let model = CompositeModel::new(params)?;
    Ok(MarginalFit {
        family,
        params,
        weight: model.weight(),
        log_likelihood: -value,
        df: family.free_param_count(),
        n: data.len(),
        converged: restarts.iter().any(|r| r.converged),
        iterations,
        evaluations,
        restarts,
    })
}
