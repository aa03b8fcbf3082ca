#![allow(dead_code)]

pub mod quadrature;

use bicomp::{CompositeParams, HeadFamily, HeadParams, InverseWeibull};
use rand::Rng;

/// Random admissible parameters: shapes in [0.5, 3], the threshold between
/// 0.3 and 3 head scales, and the tail scale within a factor 5 of it.
pub fn random_params<R: Rng>(rng: &mut R, family: HeadFamily) -> CompositeParams {
    let shape = |rng: &mut R| rng.random_range(0.5..3.0);
    let scale = rng.random_range(100.0..5e4);
    let theta = scale * rng.random_range(0.3..3.0);
    let head = match family {
        HeadFamily::Weibull => HeadParams::from_parts(family, shape(rng), scale, None),
        HeadFamily::Paralogistic => HeadParams::from_parts(family, shape(rng), 1.0 / scale, None),
        HeadFamily::InverseBurr => {
            HeadParams::from_parts(family, shape(rng), shape(rng), Some(1.0 / scale))
        }
    }
    .unwrap();
    let tail = InverseWeibull::new(shape(rng), theta * rng.random_range(0.2..5.0)).unwrap();
    CompositeParams::new(head, tail, theta).unwrap()
}
