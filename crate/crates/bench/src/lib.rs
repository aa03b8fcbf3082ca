//! Fixtures shared by the benchmarks.

use bicomp::{
    BivariateModel, CompositeModel, CompositeParams, Gumbel, HeadFamily, HeadParams, InverseWeibull,
};

/// A Weibull-headed composite with its mass split roughly one third / two
/// thirds around the threshold.
pub fn weibull_composite() -> CompositeModel {
    let head = HeadParams::from_parts(HeadFamily::Weibull, 2.0, 1000.0, None).unwrap();
    let tail = InverseWeibull::new(1.5, 3000.0).unwrap();
    CompositeModel::new(CompositeParams::new(head, tail, 1500.0).unwrap()).unwrap()
}

pub fn inverse_burr_composite() -> CompositeModel {
    let head = HeadParams::from_parts(HeadFamily::InverseBurr, 0.5, 4.0, Some(0.001)).unwrap();
    let tail = InverseWeibull::new(2.5, 3000.0).unwrap();
    CompositeModel::new(CompositeParams::new(head, tail, 1800.0).unwrap()).unwrap()
}

pub fn bivariate(phi: f64) -> BivariateModel {
    let m = weibull_composite();
    BivariateModel::new(m, m, Gumbel::new(phi).unwrap())
}

/// `n` claim pairs drawn from [`bivariate`].
pub fn pairs(n: usize, seed: u64) -> Vec<(f64, f64)> {
    bivariate(1.5).sample_pairs(n, seed).unwrap()
}
