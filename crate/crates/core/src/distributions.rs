//! Univariate kernels for the head and tail families.
//!
//! Every family is evaluated in log space; `pdf`/`cdf` exponentiate at the
//! very end. Paralogistic and Inverse Burr use the *rate* convention: the
//! argument enters as `(y * sigma)` and `(y * tau)`, so their third
//! parameter has units of 1/currency. A fitted Paralogistic rate of `0.0008`
//! corresponds to a scale of about 1250 currency units.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::special::{ln_one_minus_exp, softplus};

/// Common interface of the four continuous families on `(0, inf)`.
///
/// The `*_raw` methods assume `y > 0` (or `0 < u < 1`) and skip validation;
/// the checked wrappers return [`Error::Domain`] otherwise.
pub trait Distribution: std::fmt::Debug {
    fn ln_pdf_raw(&self, y: f64) -> f64;
    fn ln_cdf_raw(&self, y: f64) -> f64;
    /// Log of the survival function `1 - F(y)`.
    fn ln_sf_raw(&self, y: f64) -> f64;
    fn quantile_raw(&self, u: f64) -> f64;
    /// Derivative of `ln f` with respect to `y`.
    fn d_ln_pdf_raw(&self, y: f64) -> f64;

    fn ln_pdf(&self, y: f64) -> Result<f64> {
        check_support(y)?;
        Ok(self.ln_pdf_raw(y))
    }

    fn pdf(&self, y: f64) -> Result<f64> {
        self.ln_pdf(y).map(f64::exp)
    }

    fn ln_cdf(&self, y: f64) -> Result<f64> {
        check_support(y)?;
        Ok(self.ln_cdf_raw(y))
    }

    fn cdf(&self, y: f64) -> Result<f64> {
        self.ln_cdf(y).map(f64::exp)
    }

    fn ln_sf(&self, y: f64) -> Result<f64> {
        check_support(y)?;
        Ok(self.ln_sf_raw(y))
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_probability(u)?;
        Ok(self.quantile_raw(u))
    }
}

pub(crate) fn check_support(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("y", y, "(0, inf)"))
    }
}

pub(crate) fn check_probability(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("u", u, "(0, 1)"))
    }
}

/// Weibull with shape `mu` and scale `sigma`:
/// `F(y) = 1 - exp(-(y / sigma)^mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weibull {
    mu: f64,
    sigma: f64,
}

impl Weibull {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        check_positive("mu", mu)?;
        check_positive("sigma", sigma)?;
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `ln((y / sigma)^mu)`
    fn ln_z(&self, y: f64) -> f64 {
        self.mu * (y.ln() - self.sigma.ln())
    }
}

impl Distribution for Weibull {
    fn ln_pdf_raw(&self, y: f64) -> f64 {
        let ln_ratio = y.ln() - self.sigma.ln();
        self.mu.ln() - self.sigma.ln() + (self.mu - 1.0) * ln_ratio - (self.mu * ln_ratio).exp()
    }

    fn ln_cdf_raw(&self, y: f64) -> f64 {
        ln_one_minus_exp(-self.ln_z(y).exp())
    }

    fn ln_sf_raw(&self, y: f64) -> f64 {
        -self.ln_z(y).exp()
    }

    fn quantile_raw(&self, u: f64) -> f64 {
        self.sigma * (-(-u).ln_1p()).powf(1.0 / self.mu)
    }

    fn d_ln_pdf_raw(&self, y: f64) -> f64 {
        (self.mu - 1.0 - self.mu * self.ln_z(y).exp()) / y
    }
}

/// Paralogistic with shape `mu` and rate `sigma`:
/// `F(y) = 1 - (1 + (y sigma)^mu)^(-mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Paralogistic {
    mu: f64,
    sigma: f64,
}

impl Paralogistic {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        check_positive("mu", mu)?;
        check_positive("sigma", sigma)?;
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `ln((y sigma)^mu)`
    fn ln_x(&self, y: f64) -> f64 {
        self.mu * (y.ln() + self.sigma.ln())
    }
}

impl Distribution for Paralogistic {
    fn ln_pdf_raw(&self, y: f64) -> f64 {
        let lx = self.ln_x(y);
        2.0 * self.mu.ln() + lx - y.ln() - (self.mu + 1.0) * softplus(lx)
    }

    fn ln_cdf_raw(&self, y: f64) -> f64 {
        ln_one_minus_exp(self.ln_sf_raw(y))
    }

    fn ln_sf_raw(&self, y: f64) -> f64 {
        -self.mu * softplus(self.ln_x(y))
    }

    fn quantile_raw(&self, u: f64) -> f64 {
        // (1 + x)^(-mu) = 1 - u
        let x = (-(-u).ln_1p() / self.mu).exp_m1();
        x.powf(1.0 / self.mu) / self.sigma
    }

    fn d_ln_pdf_raw(&self, y: f64) -> f64 {
        let lx = self.ln_x(y);
        // x / (1 + x) = exp(lx - softplus(lx))
        let frac = (lx - softplus(lx)).exp();
        (self.mu - 1.0 - (self.mu + 1.0) * self.mu * frac) / y
    }
}

/// Inverse Burr with outer shape `mu`, inner shape `sigma` and rate `tau`:
/// `F(y) = ((y tau)^sigma / (1 + (y tau)^sigma))^mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseBurr {
    mu: f64,
    sigma: f64,
    tau: f64,
}

impl InverseBurr {
    pub fn new(mu: f64, sigma: f64, tau: f64) -> Result<Self> {
        check_positive("mu", mu)?;
        check_positive("sigma", sigma)?;
        check_positive("tau", tau)?;
        Ok(Self { mu, sigma, tau })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `ln((y tau)^sigma)`
    fn ln_x(&self, y: f64) -> f64 {
        self.sigma * (y.ln() + self.tau.ln())
    }
}

impl Distribution for InverseBurr {
    fn ln_pdf_raw(&self, y: f64) -> f64 {
        let lx = self.ln_x(y);
        self.mu.ln() + self.sigma.ln() + self.mu * lx - y.ln() - (self.mu + 1.0) * softplus(lx)
    }

    fn ln_cdf_raw(&self, y: f64) -> f64 {
        -self.mu * softplus(-self.ln_x(y))
    }

    fn ln_sf_raw(&self, y: f64) -> f64 {
        ln_one_minus_exp(self.ln_cdf_raw(y))
    }

    fn quantile_raw(&self, u: f64) -> f64 {
        // x / (1 + x) = w with ln w = ln(u) / mu
        let ln_w = u.ln() / self.mu;
        let ln_x = ln_w - ln_one_minus_exp(ln_w);
        (ln_x / self.sigma).exp() / self.tau
    }

    fn d_ln_pdf_raw(&self, y: f64) -> f64 {
        let lx = self.ln_x(y);
        let frac = (lx - softplus(lx)).exp();
        (self.mu * self.sigma - 1.0 - (self.mu + 1.0) * self.sigma * frac) / y
    }
}

/// Inverse Weibull with shape `alpha` and scale `gamma`:
/// `F(y) = exp(-(gamma / y)^alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseWeibull {
    alpha: f64,
    gamma: f64,
}

impl InverseWeibull {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("gamma", gamma)?;
        Ok(Self { alpha, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `ln((gamma / y)^alpha)`
    fn ln_z(&self, y: f64) -> f64 {
        self.alpha * (self.gamma.ln() - y.ln())
    }

    /// Inverse of the survival function: the `y` with `1 - F(y) = s`.
    /// Accurate for survival probabilities far below machine epsilon.
    pub fn inverse_sf_raw(&self, s: f64) -> f64 {
        let z = -(-s).ln_1p();
        self.gamma * z.powf(-1.0 / self.alpha)
    }
}

impl Distribution for InverseWeibull {
    fn ln_pdf_raw(&self, y: f64) -> f64 {
        let ln_z = self.ln_z(y);
        self.alpha.ln() - y.ln() + ln_z - ln_z.exp()
    }

    fn ln_cdf_raw(&self, y: f64) -> f64 {
        -self.ln_z(y).exp()
    }

    fn ln_sf_raw(&self, y: f64) -> f64 {
        ln_one_minus_exp(self.ln_cdf_raw(y))
    }

    fn quantile_raw(&self, u: f64) -> f64 {
        self.gamma * (-u.ln()).powf(-1.0 / self.alpha)
    }

    fn d_ln_pdf_raw(&self, y: f64) -> f64 {
        (self.alpha * self.ln_z(y).exp() - self.alpha - 1.0) / y
    }
}
