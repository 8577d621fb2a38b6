//! Shared generators for unit tests.

use rand::Rng;

use crate::math::{self, Mat3};

/// Random rotation built from three axis rotations; independent of the 6D
/// code path so it can serve as an oracle input.
pub(crate) fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let rot_x = |a: f64| -> Mat3 {
        let (s, c) = a.sin_cos();
        [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
    };
    let rot_y = |a: f64| -> Mat3 {
        let (s, c) = a.sin_cos();
        [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
    };
    let rot_z = |a: f64| -> Mat3 {
        let (s, c) = a.sin_cos();
        [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    };
    let tau = std::f64::consts::TAU;
    let m = math::mat_mul(&rot_z(rng.random::<f64>() * tau), &rot_y(rng.random::<f64>() * tau));
    math::mat_mul(&m, &rot_x(rng.random::<f64>() * tau))
}
