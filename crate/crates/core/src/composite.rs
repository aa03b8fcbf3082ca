//! Spliced head/tail severity model.
//!
//! Below the threshold `theta` the density is the head density truncated to
//! `(0, theta]` and scaled by `r`; above it, the Inverse Weibull density
//! truncated to `(theta, inf)` and scaled by `1 - r`. The weight `r` is not a
//! free parameter: it is the unique value making the density continuous at
//! `theta`,
//!
//! ```text
//! r = f_IW(θ) F_H(θ) / (f_IW(θ) F_H(θ) + f_H(θ) (1 - F_IW(θ)))
//! ```
//!
//! An observation equal to `theta` belongs to the head branch.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    check_probability, check_support, Distribution, InverseBurr, InverseWeibull, Paralogistic,
    Weibull,
};
use crate::error::{check_positive, Error, Result};
use crate::random::{open_unit, seeded_rng};
use crate::special::{ln_one_minus_exp, softplus};

/// Head family of a composite model. The tail is always Inverse Weibull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HeadFamily {
    #[serde(rename = "wiw")]
    Weibull,
    #[serde(rename = "pariw")]
    Paralogistic,
    #[serde(rename = "ibiw")]
    InverseBurr,
}

impl HeadFamily {
    pub const ALL: [HeadFamily; 3] = [
        HeadFamily::Weibull,
        HeadFamily::Paralogistic,
        HeadFamily::InverseBurr,
    ];

    /// Command-line tag: `wiw`, `pariw` or `ibiw`.
    pub fn tag(self) -> &'static str {
        match self {
            HeadFamily::Weibull => "wiw",
            HeadFamily::Paralogistic => "pariw",
            HeadFamily::InverseBurr => "ibiw",
        }
    }

    pub fn head_name(self) -> &'static str {
        match self {
            HeadFamily::Weibull => "Weibull",
            HeadFamily::Paralogistic => "Paralogistic",
            HeadFamily::InverseBurr => "Inverse Burr",
        }
    }

    pub fn head_param_count(self) -> usize {
        match self {
            HeadFamily::InverseBurr => 3,
            _ => 2,
        }
    }

    /// Free parameters of the marginal: head parameters, `alpha`, `gamma`
    /// and `theta`. The weight is derived and not counted.
    pub fn free_param_count(self) -> usize {
        self.head_param_count() + 3
    }
}

impl fmt::Display for HeadFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for HeadFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wiw" | "w-iw" => Ok(HeadFamily::Weibull),
            "pariw" | "p-iw" => Ok(HeadFamily::Paralogistic),
            "ibiw" | "ib-iw" => Ok(HeadFamily::InverseBurr),
            other => Err(format!(
                "unknown family `{other}` (expected wiw, pariw or ibiw)"
            )),
        }
    }
}

/// Head distribution with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeadParams {
    Weibull(Weibull),
    Paralogistic(Paralogistic),
    InverseBurr(InverseBurr),
}

impl HeadParams {
    pub fn family(&self) -> HeadFamily {
        match self {
            HeadParams::Weibull(_) => HeadFamily::Weibull,
            HeadParams::Paralogistic(_) => HeadFamily::Paralogistic,
            HeadParams::InverseBurr(_) => HeadFamily::InverseBurr,
        }
    }

    /// Builds head parameters from the `(mu, sigma, tau)` layout; `tau` is
    /// required for Inverse Burr and rejected otherwise.
    pub fn from_parts(family: HeadFamily, mu: f64, sigma: f64, tau: Option<f64>) -> Result<Self> {
        match (family, tau) {
            (HeadFamily::Weibull, None) => Ok(HeadParams::Weibull(Weibull::new(mu, sigma)?)),
            (HeadFamily::Paralogistic, None) => {
                Ok(HeadParams::Paralogistic(Paralogistic::new(mu, sigma)?))
            }
            (HeadFamily::InverseBurr, Some(tau)) => {
                Ok(HeadParams::InverseBurr(InverseBurr::new(mu, sigma, tau)?))
            }
            (HeadFamily::InverseBurr, None) => Err(Error::InvalidParameter {
                name: "tau",
                value: f64::NAN,
                constraint: "required for the Inverse Burr head",
            }),
            (_, Some(t)) => Err(Error::InvalidParameter {
                name: "tau",
                value: t,
                constraint: "only the Inverse Burr head has tau",
            }),
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            HeadParams::Weibull(d) => d.mu(),
            HeadParams::Paralogistic(d) => d.mu(),
            HeadParams::InverseBurr(d) => d.mu(),
        }
    }

    pub fn sigma(&self) -> f64 {
        match self {
            HeadParams::Weibull(d) => d.sigma(),
            HeadParams::Paralogistic(d) => d.sigma(),
            HeadParams::InverseBurr(d) => d.sigma(),
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self {
            HeadParams::InverseBurr(d) => Some(d.tau()),
            _ => None,
        }
    }

    fn dist(&self) -> &dyn Distribution {
        match self {
            HeadParams::Weibull(d) => d,
            HeadParams::Paralogistic(d) => d,
            HeadParams::InverseBurr(d) => d,
        }
    }
}

impl Distribution for HeadParams {
    fn ln_pdf_raw(&self, y: f64) -> f64 {
        // Matched directly so the likelihood loop avoids dynamic dispatch.
        match self {
            HeadParams::Weibull(d) => d.ln_pdf_raw(y),
            HeadParams::Paralogistic(d) => d.ln_pdf_raw(y),
            HeadParams::InverseBurr(d) => d.ln_pdf_raw(y),
        }
    }

    fn ln_cdf_raw(&self, y: f64) -> f64 {
        self.dist().ln_cdf_raw(y)
    }

    fn ln_sf_raw(&self, y: f64) -> f64 {
        self.dist().ln_sf_raw(y)
    }

    fn quantile_raw(&self, u: f64) -> f64 {
        self.dist().quantile_raw(u)
    }

    fn d_ln_pdf_raw(&self, y: f64) -> f64 {
        self.dist().d_ln_pdf_raw(y)
    }
}

/// Parameters of one composite marginal: head, Inverse Weibull tail and
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamRecord", into = "ParamRecord")]
pub struct CompositeParams {
    pub head: HeadParams,
    pub tail: InverseWeibull,
    pub theta: f64,
}

impl CompositeParams {
    pub fn new(head: HeadParams, tail: InverseWeibull, theta: f64) -> Result<Self> {
        check_positive("theta", theta)?;
        Ok(Self { head, tail, theta })
    }

    pub fn family(&self) -> HeadFamily {
        self.head.family()
    }
}

/// Flat serialized layout. Every field is always present; `tau` is `null`
/// for two-parameter heads.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ParamRecord {
    family: HeadFamily,
    mu: f64,
    sigma: f64,
    tau: Option<f64>,
    alpha: f64,
    gamma: f64,
    theta: f64,
}

impl TryFrom<ParamRecord> for CompositeParams {
    type Error = Error;

    fn try_from(r: ParamRecord) -> Result<Self> {
        let head = HeadParams::from_parts(r.family, r.mu, r.sigma, r.tau)?;
        CompositeParams::new(head, InverseWeibull::new(r.alpha, r.gamma)?, r.theta)
    }
}

impl From<CompositeParams> for ParamRecord {
    fn from(p: CompositeParams) -> Self {
        ParamRecord {
            family: p.family(),
            mu: p.head.mu(),
            sigma: p.head.sigma(),
            tau: p.head.tau(),
            alpha: p.tail.alpha(),
            gamma: p.tail.gamma(),
            theta: p.theta,
        }
    }
}

/// `ln r` and `ln(1 - r)` from `ln A` and `ln B`, where `r = A / (A + B)`.
fn weight_from_terms(ln_a: f64, ln_b: f64) -> Result<(f64, f64)> {
    if ln_a.is_nan() || ln_b.is_nan() || (ln_a == f64::NEG_INFINITY && ln_b == f64::NEG_INFINITY) {
        return Err(Error::Degenerate(
            "continuity weight undefined: both weight terms vanish at the threshold".into(),
        ));
    }
    let d = ln_b - ln_a;
    Ok((-softplus(d), -softplus(-d)))
}

/// `ln A`, `ln B` of the continuity weight through the generic kernels:
/// `A = f_IW(θ) F_H(θ)`, `B = f_H(θ) (1 - F_IW(θ))`.
fn generic_weight_terms(params: &CompositeParams) -> (f64, f64) {
    let t = params.theta;
    let ln_a = params.tail.ln_pdf_raw(t) + params.head.ln_cdf_raw(t);
    let ln_b = params.head.ln_pdf_raw(t) + params.tail.ln_sf_raw(t);
    (ln_a, ln_b)
}

/// Continuity weight `r` in `[0, 1]`.
pub fn mixing_weight(params: &CompositeParams) -> Result<f64> {
    let (ln_a, ln_b) = generic_weight_terms(params);
    weight_from_terms(ln_a, ln_b).map(|(ln_r, _)| ln_r.exp())
}

/// The same weight from the per-family closed forms of `A` and `B`, written
/// out term by term instead of going through the [`Distribution`] kernels.
pub fn mixing_weight_closed_form(params: &CompositeParams) -> Result<f64> {
    let t = params.theta;
    let (alpha, gamma) = (params.tail.alpha(), params.tail.gamma());
    let ln_t = t.ln();
    // (γ/θ)^α
    let z = (alpha * (gamma.ln() - ln_t)).exp();
    let ln_tail_density = alpha.ln() - ln_t + alpha * (gamma.ln() - ln_t) - z;
    let ln_tail_survival = ln_one_minus_exp(-z);

    let (ln_head_cdf, ln_head_density) = match params.head {
        HeadParams::Weibull(w) => {
            let (mu, sigma) = (w.mu(), w.sigma());
            let ln_ratio = ln_t - sigma.ln();
            let x = (mu * ln_ratio).exp();
            (
                ln_one_minus_exp(-x),
                mu.ln() - sigma.ln() - x + (mu - 1.0) * ln_ratio,
            )
        }
        HeadParams::Paralogistic(p) => {
            let (mu, sigma) = (p.mu(), p.sigma());
            let ln_x = mu * (sigma.ln() + ln_t);
            let ln_1px = softplus(ln_x);
            (
                ln_one_minus_exp(-mu * ln_1px),
                2.0 * mu.ln() + ln_x - ln_t - (mu + 1.0) * ln_1px,
            )
        }
        HeadParams::InverseBurr(b) => {
            let (mu, sigma, tau) = (b.mu(), b.sigma(), b.tau());
            let ln_tt = tau.ln() + ln_t;
            let ln_1px = softplus(sigma * ln_tt);
            (
                -mu * ln_1px + mu * sigma * ln_tt,
                mu.ln() + sigma.ln() + mu * sigma * ln_tt - ln_t - (mu + 1.0) * ln_1px,
            )
        }
    };
    let ln_a = ln_tail_density + ln_head_cdf;
    let ln_b = ln_head_density + ln_tail_survival;
    weight_from_terms(ln_a, ln_b).map(|(ln_r, _)| ln_r.exp())
}

/// Left and right derivatives of the composite density at the threshold.
/// The model only enforces continuity, so these generally differ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothnessDiagnostic {
    pub left_derivative: f64,
    pub right_derivative: f64,
    /// `|left - right| / max(|left|, |right|)`, zero when both vanish.
    pub relative_mismatch: f64,
}

/// A composite model with its weight and normalizing constants cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeModel {
    params: CompositeParams,
    weight: f64,
    ln_weight: f64,
    ln_one_minus_weight: f64,
    ln_head_cdf_theta: f64,
    ln_tail_sf_theta: f64,
}

impl CompositeModel {
    pub fn new(params: CompositeParams) -> Result<Self> {
        let (ln_a, ln_b) = generic_weight_terms(&params);
        let (ln_weight, ln_one_minus_weight) = weight_from_terms(ln_a, ln_b)?;
        let ln_head_cdf_theta = params.head.ln_cdf_raw(params.theta);
        let ln_tail_sf_theta = params.tail.ln_sf_raw(params.theta);
        if !ln_head_cdf_theta.is_finite() || !ln_tail_sf_theta.is_finite() {
            return Err(Error::Degenerate(format!(
                "threshold {} leaves no mass in the head or tail segment",
                params.theta
            )));
        }
        Ok(Self {
            params,
            weight: ln_weight.exp(),
            ln_weight,
            ln_one_minus_weight,
            ln_head_cdf_theta,
            ln_tail_sf_theta,
        })
    }

    pub fn params(&self) -> &CompositeParams {
        &self.params
    }

    pub fn family(&self) -> HeadFamily {
        self.params.family()
    }

    pub fn theta(&self) -> f64 {
        self.params.theta
    }

    /// Mixing weight `r`, equal to the cdf at the threshold.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Cached `F_H(θ)`.
    pub fn head_mass_at_threshold(&self) -> f64 {
        self.ln_head_cdf_theta.exp()
    }

    /// Cached `1 - F_IW(θ)`.
    pub fn tail_mass_above_threshold(&self) -> f64 {
        self.ln_tail_sf_theta.exp()
    }

    /// Log-density without a domain check.
    #[inline]
    pub fn ln_pdf_raw(&self, y: f64) -> f64 {
        if y <= self.params.theta {
            self.ln_weight + self.params.head.ln_pdf_raw(y) - self.ln_head_cdf_theta
        } else {
            self.ln_one_minus_weight + self.params.tail.ln_pdf_raw(y) - self.ln_tail_sf_theta
        }
    }

    pub fn ln_pdf(&self, y: f64) -> Result<f64> {
        check_support(y)?;
        Ok(self.ln_pdf_raw(y))
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        self.ln_pdf(y).map(f64::exp)
    }

    pub fn cdf_raw(&self, y: f64) -> f64 {
        if y <= self.params.theta {
            (self.ln_weight + (self.params.head.ln_cdf_raw(y) - self.ln_head_cdf_theta)).exp()
        } else {
            // r + (1 - r)(F(y) - F(θ))/(1 - F(θ)) rewritten through survival
            // functions so the far tail does not cancel.
            -(self.ln_one_minus_weight + (self.params.tail.ln_sf_raw(y) - self.ln_tail_sf_theta))
                .exp_m1()
        }
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        check_support(y)?;
        Ok(self.cdf_raw(y))
    }

    pub fn quantile_raw(&self, u: f64) -> f64 {
        let theta = self.params.theta;
        if u <= self.weight {
            let p = (u.ln() + self.ln_head_cdf_theta - self.ln_weight).exp();
            if p >= 1.0 {
                return theta;
            }
            self.params.head.quantile_raw(p).min(theta)
        } else {
            let ln_s = (-u).ln_1p() + self.ln_tail_sf_theta - self.ln_one_minus_weight;
            self.params.tail.inverse_sf_raw(ln_s.exp()).max(theta)
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_probability(u)?;
        Ok(self.quantile_raw(u))
    }

    /// Inverse-cdf draws from an explicit random stream.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.quantile_raw(open_unit(rng))).collect()
    }

    /// `n` draws from a stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::TooFewObservations {
                required: 1,
                actual: 0,
            });
        }
        Ok(self.sample_with(&mut seeded_rng(seed), n))
    }

    /// Log-likelihood of positive observations. Unchecked inner loop.
    pub fn log_likelihood_raw(&self, data: &[f64]) -> f64 {
        data.iter().map(|&y| self.ln_pdf_raw(y)).sum()
    }

    pub fn log_likelihood(&self, data: &[f64]) -> Result<f64> {
        for &y in data {
            check_support(y)?;
        }
        Ok(self.log_likelihood_raw(data))
    }

    pub fn smoothness(&self) -> SmoothnessDiagnostic {
        let t = self.params.theta;
        // Continuity makes f(θ⁻) = f(θ⁺), so f' = f · d ln f / dy on both sides.
        let density = self.ln_pdf_raw(t).exp();
        let left = density * self.params.head.d_ln_pdf_raw(t);
        let right = density * self.params.tail.d_ln_pdf_raw(t);
        let scale = left.abs().max(right.abs());
        SmoothnessDiagnostic {
            left_derivative: left,
            right_derivative: right,
            relative_mismatch: if scale > 0.0 {
                (left - right).abs() / scale
            } else {
                0.0
            },
        }
    }
}
