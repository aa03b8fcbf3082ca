//! Bivariate composite claim-severity models.
//!
//! A composite (spliced) severity distribution glues a right-truncated
//! "head" density below a threshold `theta` to a left-truncated Inverse
//! Weibull tail above it. The mixing weight is not free: it is pinned by
//! requiring the density to be continuous at the threshold. Two such
//! marginals are joined with a Gumbel copula and fitted by the two-stage
//! inference-functions-for-margins procedure.
//!
//! Module map:
//!
//! - [`distributions`]: Weibull, Paralogistic, Inverse Burr and Inverse
//!   Weibull kernels, all evaluated in log space.
//! - [`composite`]: the spliced head/tail model with its continuity weight.
//! - [`copula`]: Gumbel copula cdf, density, Kendall's tau and sampling.
//! - [`estimation`]: Nelder-Mead marginal fits, copula fit, AIC/BIC and the
//!   empirical Kendall tau.
//! - [`ingest`]: CSV loading, summary statistics and histograms.

pub mod composite;
pub mod copula;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod ingest;
pub mod random;
mod special;

pub use composite::{CompositeModel, CompositeParams, HeadFamily, HeadParams};
pub use copula::{BivariateModel, Gumbel};
pub use distributions::{Distribution, InverseBurr, InverseWeibull, Paralogistic, Weibull};
pub use error::{Error, Result};
pub use estimation::{
    aic, bic, empirical_kendall_tau, fit_bivariate, fit_copula, fit_marginal, CopulaFit, FitReport,
    MarginalFit, OptimizerConfig,
};
pub use ingest::{ClaimPairSample, SummaryStats};
