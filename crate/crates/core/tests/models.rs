mod common;

use bicomp::copula::BivariateParams;
use bicomp::estimation::evaluate;
use bicomp::random::seeded_rng;
use bicomp::{
    fit_bivariate, fit_copula, fit_marginal, BivariateModel, CompositeModel, CompositeParams,
    Gumbel, HeadFamily, HeadParams, InverseWeibull, OptimizerConfig,
};
use common::quadrature::{integrate, integrate_halves};

fn model(p: CompositeParams) -> CompositeModel {
    CompositeModel::new(p).unwrap()
}

#[test]
fn density_pieces_integrate_to_weight_and_complement() {
    let mut rng = seeded_rng(2024);
    for family in HeadFamily::ALL {
        for _ in 0..20 {
            let m = model(common::random_params(&mut rng, family));
            let (head, tail) = integrate_halves(|y| m.pdf(y).unwrap(), m.theta(), 1e-12);
            assert!(
                (head - m.weight()).abs() < 1e-8,
                "{family} head {head} vs {}",
                m.weight()
            );
            assert!(
                (head + tail - 1.0).abs() < 1e-6,
                "{family} total {}",
                head + tail
            );
        }
    }
}

#[test]
fn cdf_matches_integrated_density() {
    let mut rng = seeded_rng(7);
    for family in HeadFamily::ALL {
        let m = model(common::random_params(&mut rng, family));
        let (head, _) = integrate_halves(|y| m.pdf(y).unwrap(), m.theta(), 1e-13);
        for k in 1..=20 {
            let y = m.quantile(k as f64 / 21.0).unwrap();
            // ∫_0^y = ∫_0^θ ± ∫ between y and θ
            let (lo, hi) = if y < m.theta() {
                (y, m.theta())
            } else {
                (m.theta(), y)
            };
            let between = integrate(|t| m.pdf(t).unwrap(), lo, hi, 1e-13);
            let expected = if y < m.theta() {
                head - between
            } else {
                head + between
            };
            assert!(
                (m.cdf(y).unwrap() - expected).abs() < 1e-8,
                "{family} at {y}: {} vs {expected}",
                m.cdf(y).unwrap()
            );
        }
    }
}

fn wiw_truth() -> CompositeParams {
    CompositeParams::new(
        HeadParams::from_parts(HeadFamily::Weibull, 2.0, 1000.0, None).unwrap(),
        InverseWeibull::new(1.5, 3000.0).unwrap(),
        1500.0,
    )
    .unwrap()
}

#[test]
fn rescaling_data_rescales_the_density() {
    let m = model(wiw_truth());
    let c = 7.5;
    let p = *m.params();
    let scaled = model(
        CompositeParams::new(
            HeadParams::from_parts(HeadFamily::Weibull, p.head.mu(), c * p.head.sigma(), None)
                .unwrap(),
            InverseWeibull::new(p.tail.alpha(), c * p.tail.gamma()).unwrap(),
            c * p.theta,
        )
        .unwrap(),
    );
    assert!((scaled.weight() - m.weight()).abs() < 1e-12);
    for y in [10.0, 900.0, 1499.0, 1500.0, 1501.0, 2e5] {
        let lhs = scaled.ln_pdf(c * y).unwrap();
        let rhs = m.ln_pdf(y).unwrap() - c.ln();
        assert!((lhs - rhs).abs() < 1e-10, "{y}: {lhs} vs {rhs}");
    }
}

#[test]
fn marginal_fit_is_scale_equivariant() {
    let data = model(wiw_truth()).sample(1500, 3).unwrap();
    let c = 0.01;
    let scaled: Vec<f64> = data.iter().map(|y| c * y).collect();
    let config = OptimizerConfig::default();
    let a = fit_marginal(&data, HeadFamily::Weibull, &config).unwrap();
    let b = fit_marginal(&scaled, HeadFamily::Weibull, &config).unwrap();
    let shift = data.len() as f64 * c.ln();
    assert!(
        (b.log_likelihood + shift - a.log_likelihood).abs() < 1e-3,
        "{} vs {}",
        b.log_likelihood + shift,
        a.log_likelihood
    );
    assert!((b.weight - a.weight).abs() < 1e-3);
    assert!((b.params.theta / c / a.params.theta - 1.0).abs() < 1e-3);
}

#[test]
fn two_stage_fit_recovers_a_wiw_pair() {
    let truth = BivariateModel::new(
        model(wiw_truth()),
        model(wiw_truth()),
        Gumbel::new(1.8).unwrap(),
    );
    let pairs = truth.sample_pairs(3000, 11).unwrap();
    let report = fit_bivariate(
        &pairs,
        [HeadFamily::Weibull, HeadFamily::Weibull],
        &OptimizerConfig::default(),
    )
    .unwrap();
    assert!(report.converged);
    assert!(
        (report.copula.phi - 1.8).abs() < 0.15,
        "phi {}",
        report.copula.phi
    );
    for fit in [&report.marginal1, &report.marginal2] {
        let p = fit.params;
        assert!((p.head.mu() / 2.0 - 1.0).abs() < 0.15, "{p:?}");
        assert!((p.tail.alpha() / 1.5 - 1.0).abs() < 0.15, "{p:?}");
        assert!((fit.weight - truth.marginal1.weight()).abs() < 0.05);
    }
    // dominance over the generating parameters on the same data
    let (y1, _): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    assert!(report.marginal1.log_likelihood >= truth.marginal1.log_likelihood(&y1).unwrap() - 1e-6);
    // the report's metrics are what evaluate gives for the fitted model
    let again = evaluate(&report.model(), &pairs).unwrap();
    assert_eq!(again, report.metrics);
}

#[test]
fn copula_stage_is_reproducible_from_pseudo_observations() {
    let truth = BivariateModel::new(
        model(wiw_truth()),
        model(wiw_truth()),
        Gumbel::new(2.5).unwrap(),
    );
    let pairs = truth.sample_pairs(2000, 5).unwrap();
    let config = OptimizerConfig::default();
    let report = fit_bivariate(&pairs, [HeadFamily::Weibull; 2], &config).unwrap();
    let pseudo = report.model().pseudo_observations(&pairs).unwrap();
    let direct = fit_copula(&pseudo, &config).unwrap();
    assert_eq!(direct.phi, report.copula.phi);
    assert_eq!(direct.log_likelihood, report.copula.log_likelihood);
}

#[test]
fn bivariate_params_survive_json() {
    let p = BivariateParams {
        marginal1: wiw_truth(),
        marginal2: wiw_truth(),
        phi: Gumbel::new(1.25).unwrap(),
    };
    let text = serde_json::to_string(&p).unwrap();
    let back: BivariateParams = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}
