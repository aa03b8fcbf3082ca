//! Gumbel copula and the bivariate composite model built on it.
//!
//! `C(u, v) = exp(-((-ln u)^φ + (-ln v)^φ)^(1/φ))` with `φ ≥ 1`; `φ = 1` is
//! independence, and Kendall's tau is `1 - 1/φ`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::composite::{CompositeModel, CompositeParams};
use crate::error::{Error, Result};
use crate::random::{open_unit, seeded_rng, unit_exponential};
use crate::special::log_add_exp;

/// Pseudo-observations are clamped into `[PSEUDO_OBS_EPS, 1 - PSEUDO_OBS_EPS]`
/// before they reach the copula.
pub const PSEUDO_OBS_EPS: f64 = 1e-10;

pub fn clamp_pseudo_observation(u: f64) -> f64 {
    u.clamp(PSEUDO_OBS_EPS, 1.0 - PSEUDO_OBS_EPS)
}

fn check_unit(what: &'static str, u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(what, u, "(0, 1)"))
    }
}

/// Gumbel dependence parameter, `phi >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gumbel {
    phi: f64,
}

impl TryFrom<f64> for Gumbel {
    type Error = Error;

    fn try_from(phi: f64) -> Result<Self> {
        Gumbel::new(phi)
    }
}

impl From<Gumbel> for f64 {
    fn from(g: Gumbel) -> f64 {
        g.phi
    }
}

impl Gumbel {
    pub fn new(phi: f64) -> Result<Self> {
        if phi.is_finite() && phi >= 1.0 {
            Ok(Self { phi })
        } else {
            Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                constraint: "Gumbel dependence parameter must be finite and >= 1",
            })
        }
    }

    pub fn independence() -> Self {
        Self { phi: 1.0 }
    }

    /// Parameter with Kendall's tau equal to `tau`, for `0 <= tau < 1`.
    pub fn from_kendall_tau(tau: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::domain("tau", tau, "[0, 1)"));
        }
        Gumbel::new(1.0 / (1.0 - tau))
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn kendall_tau(&self) -> f64 {
        1.0 - 1.0 / self.phi
    }

    /// `ln((-ln u)^φ + (-ln v)^φ)`
    fn ln_s(&self, a: f64, b: f64) -> f64 {
        log_add_exp(self.phi * a.ln(), self.phi * b.ln())
    }

    pub fn cdf_raw(&self, u: f64, v: f64) -> f64 {
        let (a, b) = (-u.ln(), -v.ln());
        (-(self.ln_s(a, b) / self.phi).exp()).exp()
    }

    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.cdf_raw(u, v))
    }

    /// Log copula density. With `a = -ln u`, `b = -ln v`, `s = a^φ + b^φ`:
    ///
    /// ```text
    /// c = C(u,v) (ab)^(φ-1) / (uv) · s^(1/φ - 2) · (s^(1/φ) + φ - 1)
    /// ```
    pub fn ln_density_raw(&self, u: f64, v: f64) -> f64 {
        let phi = self.phi;
        let (a, b) = (-u.ln(), -v.ln());
        let ln_s = self.ln_s(a, b);
        let big_a = (ln_s / phi).exp();
        -big_a
            + a
            + b
            + (phi - 1.0) * (a.ln() + b.ln())
            + (1.0 / phi - 2.0) * ln_s
            + (big_a + phi - 1.0).ln()
    }

    pub fn ln_density(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.ln_density_raw(u, v))
    }

    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        self.ln_density(u, v).map(f64::exp)
    }

    /// `Σ ln c(u_i, v_i)`. Values must lie strictly inside `(0, 1)`; clamp
    /// with [`clamp_pseudo_observation`] first.
    pub fn log_likelihood(&self, pairs: &[(f64, f64)]) -> Result<f64> {
        for &(u, v) in pairs {
            check_unit("u", u)?;
            check_unit("v", v)?;
        }
        Ok(self.log_likelihood_raw(pairs))
    }

    pub fn log_likelihood_raw(&self, pairs: &[(f64, f64)]) -> f64 {
        if self.phi == 1.0 {
            return 0.0;
        }
        pairs.iter().map(|&(u, v)| self.ln_density_raw(u, v)).sum()
    }

    /// Positive stable variate with Laplace transform `exp(-t^(1/φ))`
    /// (Chambers–Mallows–Stuck / Kanter representation).
    fn positive_stable<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.phi == 1.0 {
            return 1.0;
        }
        let alpha = 1.0 / self.phi;
        let angle = PI * open_unit(rng);
        let w = unit_exponential(rng);
        let ln_s = (alpha * angle).sin().ln() - angle.sin().ln() / alpha
            + (1.0 - alpha) / alpha * (((1.0 - alpha) * angle).sin().ln() - w.ln());
        ln_s.exp()
    }

    /// One draw of `(U, V)` by the Marshall–Olkin construction:
    /// `U_i = exp(-(E_i / S)^(1/φ))`.
    pub fn sample_uv<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let s = self.positive_stable(rng);
        let inv_phi = 1.0 / self.phi;
        let mut draw = || {
            let e = unit_exponential(rng);
            let u = (-(e / s).powf(inv_phi)).exp();
            clamp_pseudo_observation(u)
        };
        let u = draw();
        let v = draw();
        (u, v)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = seeded_rng(seed);
        (0..n).map(|_| self.sample_uv(&mut rng)).collect()
    }
}

/// Serialized form of a [`BivariateModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateParams {
    pub marginal1: CompositeParams,
    pub marginal2: CompositeParams,
    pub phi: Gumbel,
}

/// Two composite marginals joined by a Gumbel copula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateModel {
    pub marginal1: CompositeModel,
    pub marginal2: CompositeModel,
    pub copula: Gumbel,
}

impl BivariateModel {
    pub fn new(marginal1: CompositeModel, marginal2: CompositeModel, copula: Gumbel) -> Self {
        Self {
            marginal1,
            marginal2,
            copula,
        }
    }

    pub fn from_params(p: &BivariateParams) -> Result<Self> {
        Ok(Self::new(
            CompositeModel::new(p.marginal1).map_err(|e| e.in_stage("marginal1"))?,
            CompositeModel::new(p.marginal2).map_err(|e| e.in_stage("marginal2"))?,
            p.phi,
        ))
    }

    pub fn params(&self) -> BivariateParams {
        BivariateParams {
            marginal1: *self.marginal1.params(),
            marginal2: *self.marginal2.params(),
            phi: self.copula,
        }
    }

    /// Joint cdf `C(F1(y1), F2(y2))`.
    pub fn cdf(&self, y1: f64, y2: f64) -> Result<f64> {
        let u = clamp_pseudo_observation(self.marginal1.cdf(y1)?);
        let v = clamp_pseudo_observation(self.marginal2.cdf(y2)?);
        Ok(self.copula.cdf_raw(u, v))
    }

    /// Clamped pseudo-observations `(F1(y1), F2(y2))`.
    pub fn pseudo_observations(&self, pairs: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
        pairs
            .iter()
            .map(|&(y1, y2)| {
                Ok((
                    clamp_pseudo_observation(self.marginal1.cdf(y1)?),
                    clamp_pseudo_observation(self.marginal2.cdf(y2)?),
                ))
            })
            .collect()
    }

    pub fn sample_pairs_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|_| {
                let (u, v) = self.copula.sample_uv(rng);
                (
                    self.marginal1.quantile_raw(u),
                    self.marginal2.quantile_raw(v),
                )
            })
            .collect()
    }

    pub fn sample_pairs(&self, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
        if n == 0 {
            return Err(Error::TooFewObservations {
                required: 1,
                actual: 0,
            });
        }
        Ok(self.sample_pairs_with(&mut seeded_rng(seed), n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::HeadParams;
    use crate::distributions::{InverseWeibull, Weibull};
    use crate::estimation::empirical_kendall_tau;
    use proptest::prelude::*;

    /// Central mixed difference of the cdf.
    fn fd_density(g: &Gumbel, u: f64, v: f64, h: f64) -> f64 {
        (g.cdf_raw(u + h, v + h) - g.cdf_raw(u + h, v - h) - g.cdf_raw(u - h, v + h)
            + g.cdf_raw(u - h, v - h))
            / (4.0 * h * h)
    }

    #[test]
    fn cdf_examples() {
        let ind = Gumbel::new(1.0).unwrap();
        assert!((ind.cdf(0.3, 0.7).unwrap() - 0.21).abs() < 1e-14);
        let comon = Gumbel::new(200.0).unwrap();
        assert!((comon.cdf(0.3, 0.7).unwrap() - 0.3).abs() < 1e-3);
        let g2 = Gumbel::new(2.0).unwrap();
        let expected = (-(2f64.ln()) * 2f64.sqrt()).exp();
        assert!((g2.cdf(0.5, 0.5).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.3752).abs() < 1e-4);
    }

    #[test]
    fn domain_checks() {
        assert!(Gumbel::new(0.99).is_err());
        assert!(Gumbel::new(f64::NAN).is_err());
        let g = Gumbel::new(1.5).unwrap();
        assert!(g.cdf(0.0, 0.5).is_err());
        assert!(g.density(0.5, 1.0).is_err());
        assert!(g.log_likelihood(&[(0.2, 0.3), (1.0, 0.3)]).is_err());
        assert!(Gumbel::from_kendall_tau(1.0).is_err());
        assert!(Gumbel::from_kendall_tau(-0.1).is_err());
    }

    #[test]
    fn independence_density_is_one() {
        let g = Gumbel::independence();
        for i in 1..=5 {
            for j in 1..=5 {
                let (u, v) = (i as f64 / 6.0, j as f64 / 6.0);
                assert!((g.density(u, v).unwrap() - 1.0).abs() < 1e-10);
            }
        }
        assert_eq!(g.log_likelihood(&[(0.1, 0.9), (0.4, 0.2)]).unwrap(), 0.0);
    }

    #[test]
    fn density_matches_mixed_partial() {
        let g = Gumbel::new(1.5).unwrap();
        let fd = fd_density(&g, 0.4, 0.6, 1e-5);
        let c = g.density(0.4, 0.6).unwrap();
        assert!((c - fd).abs() < 1e-4 * c, "{c} vs {fd}");
    }

    #[test]
    fn density_integrates_to_one() {
        // Gauss–Legendre on (0,1)^2 after u = t^4, which tames the corner spike.
        let g = Gumbel::new(2.0).unwrap();
        let (nodes, weights) = gauss_legendre(64);
        let mut total = 0.0;
        for (i, &ti) in nodes.iter().enumerate() {
            for (j, &tj) in nodes.iter().enumerate() {
                let (s, t) = (0.5 * (ti + 1.0), 0.5 * (tj + 1.0));
                let (u, v) = (1.0 - (1.0 - s).powi(4), 1.0 - (1.0 - t).powi(4));
                let jac = 4.0 * (1.0 - s).powi(3) * 4.0 * (1.0 - t).powi(3);
                total += 0.25 * weights[i] * weights[j] * g.density(u, v).unwrap() * jac;
            }
        }
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        (x, w)
    }

    #[test]
    fn boundary_behaviour() {
        for &phi in &[1.0, 1.5, 2.0, 5.0, 20.0] {
            let g = Gumbel::new(phi).unwrap();
            for i in 1..50 {
                let u = i as f64 / 50.0;
                assert!((g.cdf(u, 1.0 - 1e-9).unwrap() - u).abs() < 1e-6);
                assert!(g.cdf(u, 1e-12).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn kendall_tau_identity() {
        assert_eq!(Gumbel::new(1.0).unwrap().kendall_tau(), 0.0);
        assert_eq!(Gumbel::new(2.0).unwrap().kendall_tau(), 0.5);
        let g = Gumbel::from_kendall_tau(0.0663).unwrap();
        assert!((g.phi() - 1.0710).abs() < 1e-4);
    }

    #[test]
    fn sampled_tau_at_two() {
        let pairs = Gumbel::new(2.0).unwrap().sample(100_000, 42);
        let (u, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let tau = empirical_kendall_tau(&u, &v).unwrap();
        assert!((tau - 0.5).abs() < 0.02, "{tau}");
    }

    #[test]
    fn independent_samples_are_uncorrelated() {
        let n = 20_000;
        let pairs = Gumbel::independence().sample(n, 5);
        let mean_u = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let mean_v = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
        let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
        for &(u, v) in &pairs {
            suv += (u - mean_u) * (v - mean_v);
            suu += (u - mean_u).powi(2);
            svv += (v - mean_v).powi(2);
        }
        let rho = suv / (suu * svv).sqrt();
        assert!(rho.abs() < 3.0 / (n as f64).sqrt(), "{rho}");
    }

    #[test]
    fn likelihood_peaks_near_truth() {
        let pairs = Gumbel::new(2.0).unwrap().sample(100, 9);
        let ll = |phi: f64| Gumbel::new(phi).unwrap().log_likelihood(&pairs).unwrap();
        assert!(ll(2.0) > ll(1.0));
        assert!(ll(2.0) > ll(4.0));
        let single = Gumbel::new(2.0).unwrap();
        assert!(
            (single.log_likelihood(&pairs[..1]).unwrap()
                - single.ln_density(pairs[0].0, pairs[0].1).unwrap())
            .abs()
                < 1e-14
        );
    }

    fn marginal(mu: f64, sigma: f64, alpha: f64, gamma: f64, theta: f64) -> CompositeModel {
        CompositeModel::new(
            CompositeParams::new(
                HeadParams::Weibull(Weibull::new(mu, sigma).unwrap()),
                InverseWeibull::new(alpha, gamma).unwrap(),
                theta,
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn ks(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = cdf(x);
                (c - i as f64 / n).max((i + 1) as f64 / n - c)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn pair_marginals_pass_ks_and_are_deterministic() {
        let model = BivariateModel::new(
            marginal(1.5, 2000.0, 1.2, 8000.0, 5000.0),
            marginal(0.8, 900.0, 2.0, 1500.0, 1200.0),
            Gumbel::new(1.7).unwrap(),
        );
        let n = 20_000;
        let pairs = model.sample_pairs(n, 1).unwrap();
        assert_eq!(pairs, model.sample_pairs(n, 1).unwrap());
        let (mut a, mut b): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let bound = 1.63 / (n as f64).sqrt();
        assert!(ks(&mut a, |y| model.marginal1.cdf(y).unwrap()) < bound);
        assert!(ks(&mut b, |y| model.marginal2.cdf(y).unwrap()) < bound);
        assert!(model.sample_pairs(0, 1).is_err());
    }

    #[test]
    fn bivariate_params_round_trip_and_reject_low_phi() {
        let model = BivariateModel::new(
            marginal(1.5, 2000.0, 1.2, 8000.0, 5000.0),
            marginal(0.8, 900.0, 2.0, 1500.0, 1200.0),
            Gumbel::new(1.7).unwrap(),
        );
        let json = serde_json::to_string(&model.params()).unwrap();
        let back: BivariateParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model.params());
        let bad = json.replace("\"phi\":1.7", "\"phi\":0.5");
        let err = serde_json::from_str::<BivariateParams>(&bad).unwrap_err();
        assert!(err.to_string().contains("phi"), "{err}");
    }

    proptest! {
        #[test]
        fn frechet_bounds(i in 1usize..50, j in 1usize..50, k in 0usize..5) {
            let phi = [1.0, 1.5, 2.0, 5.0, 20.0][k];
            let (u, v) = (i as f64 / 50.0, j as f64 / 50.0);
            let c = Gumbel::new(phi).unwrap().cdf(u, v).unwrap();
            prop_assert!(c >= (u + v - 1.0).max(0.0) - 1e-15);
            prop_assert!(c <= u.min(v) + 1e-15);
        }

        #[test]
        fn rectangle_inequality(
            u1 in 0.001..0.999f64, du in 0.0..0.5f64,
            v1 in 0.001..0.999f64, dv in 0.0..0.5f64,
            phi in 1.0..20.0f64,
        ) {
            let g = Gumbel::new(phi).unwrap();
            let (u2, v2) = ((u1 + du).min(0.9999), (v1 + dv).min(0.9999));
            let vol = g.cdf_raw(u2, v2) - g.cdf_raw(u2, v1) - g.cdf_raw(u1, v2) + g.cdf_raw(u1, v1);
            prop_assert!(vol >= -1e-12);
        }

        #[test]
        fn density_matches_mixed_partial_everywhere(
            u in 0.05..0.95f64, v in 0.05..0.95f64, phi in 1.0..6.0f64,
        ) {
            let g = Gumbel::new(phi).unwrap();
            let c = g.density(u, v).unwrap();
            let fd = fd_density(&g, u, v, 1e-4);
            prop_assert!((c - fd).abs() < 1e-4 * c.max(1e-3), "{} vs {}", c, fd);
        }
    }
}
