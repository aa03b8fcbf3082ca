//! Stage two: maximum likelihood for the Gumbel parameter given
//! pseudo-observations.

use serde::Serialize;

use super::OptimizerConfig;
use crate::copula::{clamp_pseudo_observation, Gumbel};
use crate::error::{Error, Result};

/// Search range for `eta = ln(phi - 1)`; the upper end is phi ≈ 149.
const ETA_MIN: f64 = -12.0;
const ETA_MAX: f64 = 5.0;
const ETA_GRID_STEP: f64 = 0.5;
/// Estimates closer than this to independence are reported as `phi = 1`.
const BOUNDARY_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CopulaFit {
    pub phi: f64,
    pub log_likelihood: f64,
    /// The likelihood was maximized at independence, `phi = 1`.
    pub at_boundary: bool,
    pub evaluations: usize,
}

impl CopulaFit {
    pub fn copula(&self) -> Gumbel {
        Gumbel::new(self.phi).expect("fitted phi is admissible")
    }
}

fn prepare(pairs: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if pairs.is_empty() {
        return Err(Error::TooFewObservations {
            required: 1,
            actual: 0,
        });
    }
    pairs
        .iter()
        .map(|&(u, v)| {
            for (what, x) in [("u", u), ("v", v)] {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::domain(what, x, "[0, 1]"));
                }
            }
            Ok((clamp_pseudo_observation(u), clamp_pseudo_observation(v)))
        })
        .collect()
}

/// Maximizes `Σ ln c(u_i, v_i; φ)` over `φ ≥ 1`.
///
/// The search runs on `eta = ln(φ - 1)`: a coarse grid locates the peak,
/// then golden-section search refines it. Values are clamped into
/// `[1e-10, 1 - 1e-10]` first; values outside `[0, 1]` are an error.
pub fn fit_copula(pairs: &[(f64, f64)], config: &OptimizerConfig) -> Result<CopulaFit> {
    config.validate()?;
    let pairs = prepare(pairs)?;
    let mut evaluations = 0;
    let mut ll = |eta: f64| {
        evaluations += 1;
        let value = Gumbel::new(1.0 + eta.exp())
            .map(|g| g.log_likelihood_raw(&pairs))
            .unwrap_or(f64::NEG_INFINITY);
        if value.is_nan() {
            f64::NEG_INFINITY
        } else {
            value
        }
    };

    let steps = ((ETA_MAX - ETA_MIN) / ETA_GRID_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| ETA_MIN + k as f64 * ETA_GRID_STEP)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&eta| ll(eta)).collect();
    let k_best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);

    let (mut a, mut b) = (
        grid[k_best.saturating_sub(1)],
        grid[(k_best + 1).min(steps)],
    );
    let inv_golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_golden * (b - a);
    let mut d = a + inv_golden * (b - a);
    let (mut fc, mut fd) = (ll(c), ll(d));
    let mut iterations = 0;
    while b - a > 1e-10 && iterations < config.max_iterations {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_golden * (b - a);
            fc = ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_golden * (b - a);
            fd = ll(d);
        }
    }
    let (mut eta, mut best) = if fc >= fd { (c, fc) } else { (d, fd) };
    if values[k_best] > best {
        eta = grid[k_best];
        best = values[k_best];
    }

    let phi = 1.0 + eta.exp();
    if best <= 0.0 || phi - 1.0 < BOUNDARY_GAP {
        return Ok(CopulaFit {
            phi: 1.0,
            log_likelihood: 0.0,
            at_boundary: true,
            evaluations,
        });
    }
    Ok(CopulaFit {
        phi,
        log_likelihood: best,
        at_boundary: false,
        evaluations,
    })
}
