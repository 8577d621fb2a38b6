//! Continuous 6D rotation representation.
//!
//! A rotation is stored as the first two columns of its matrix, column-major:
//! `[m00, m10, m20, m01, m11, m21]`. Recovery Gram-Schmidt-orthonormalizes the
//! pair and completes the third column by cross product, so any finite,
//! non-degenerate six-tuple maps to a proper rotation.

use crate::error::{Error, Result};
use crate::math::{self, Mat3, Vec3};

/// Degeneracy tolerance for zero-norm or parallel columns.
pub const DEGENERACY_EPS: f64 = 1e-8;

/// Orthonormality tolerance accepted by [`matrix_to_rot6d`].
pub const ORTHONORMALITY_EPS: f64 = 1e-6;

/// First two rotation-matrix columns, column-major pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation6D(pub [f64; 6]);

impl Rotation6D {
    pub const IDENTITY: Rotation6D = Rotation6D([1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 6 {
            return Err(Error::DimensionMismatch {
                context: "rotation 6d features",
                expected: 6,
                actual: v.len(),
            });
        }
        let mut out = [0.0; 6];
        out.copy_from_slice(v);
        Ok(Rotation6D(out))
    }
}

/// Recover a proper rotation matrix from 6D features.
///
/// The first column is the normalized first triple, the second is the
/// Gram-Schmidt remainder of the second triple, and the third is their cross
/// product, so the result is orthonormal with determinant +1.
pub fn rot6d_to_matrix(r: &Rotation6D) -> Result<Mat3> {
    let v = &r.0;
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("rotation 6d features"));
    }
    let a: Vec3 = [v[0], v[1], v[2]];
    let b: Vec3 = [v[3], v[4], v[5]];

    let a_norm = math::norm(&a);
    if a_norm < DEGENERACY_EPS {
        return Err(Error::DegenerateRotation("first column norm below 1e-8"));
    }
    let c0 = math::scale(&a, 1.0 / a_norm);

    let b_orth = math::sub(&b, &math::scale(&c0, math::dot(&b, &c0)));
    let b_norm = math::norm(&b_orth);
    if b_norm < DEGENERACY_EPS {
        return Err(Error::DegenerateRotation("columns parallel within 1e-8"));
    }
    let c1 = math::scale(&b_orth, 1.0 / b_norm);
    let c2 = math::cross(&c0, &c1);

    Ok([
        [c0[0], c1[0], c2[0]],
        [c0[1], c1[1], c2[1]],
        [c0[2], c1[2], c2[2]],
    ])
}

/// Extract the first two columns of a rotation matrix.
///
/// Fails with [`Error::NotARotation`] when `m` deviates from orthonormality
/// by more than 1e-6 or has negative determinant.
pub fn matrix_to_rot6d(m: &Mat3) -> Result<Rotation6D> {
    let deviation = math::orthonormality_deviation(m);
    if deviation > ORTHONORMALITY_EPS || math::det(m) < 0.0 {
        return Err(Error::NotARotation { deviation });
    }
    Ok(Rotation6D([
        m[0][0], m[1][0], m[2][0], m[0][1], m[1][1], m[2][1],
    ]))
}

/// Project possibly drifted 6D features back onto a valid rotation.
pub fn reproject_6d(features: &[f64]) -> Result<[f64; 6]> {
    let m = rot6d_to_matrix(&Rotation6D::from_slice(features)?)?;
    Ok(matrix_to_rot6d(&m)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::random_rotation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Rotation about z by `angle` radians, row-major.
    fn rot_z(angle: f64) -> Mat3 {
        let (s, c) = angle.sin_cos();
        [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    }

    #[test]
    fn identity_features_give_identity_matrix() {
        let m = rot6d_to_matrix(&Rotation6D::IDENTITY).unwrap();
        assert_eq!(m, math::IDENTITY);
    }

    #[test]
    fn matrix_columns_round_trip_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let m = random_rotation(&mut rng);
            let r = matrix_to_rot6d(&m).unwrap();
            let back = rot6d_to_matrix(&r).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((back[i][j] - m[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn scaled_and_sheared_features_orthonormalize() {
        // [2,0,0, 1,1,0]: normalization plus Gram-Schmidt recovers identity.
        let m = rot6d_to_matrix(&Rotation6D([2.0, 0.0, 0.0, 1.0, 1.0, 0.0])).unwrap();
        for (row, want) in m.iter().zip(&math::IDENTITY) {
            for (a, b) in row.iter().zip(want) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ninety_degrees_about_z() {
        let r = matrix_to_rot6d(&rot_z(std::f64::consts::FRAC_PI_2)).unwrap();
        let expected = [0.0, 1.0, 0.0, -1.0, 0.0, 0.0];
        for (a, b) in r.0.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(
            rot6d_to_matrix(&Rotation6D([0.0, 0.0, 0.0, 0.0, 1.0, 0.0])),
            Err(Error::DegenerateRotation(_))
        ));
        assert!(matches!(
            rot6d_to_matrix(&Rotation6D([1.0, 0.0, 0.0, 2.0, 0.0, 0.0])),
            Err(Error::DegenerateRotation(_))
        ));
    }

    #[test]
    fn non_rotation_matrix_is_rejected() {
        let m = [[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(matrix_to_rot6d(&m), Err(Error::NotARotation { .. })));
        // Reflection: orthonormal but determinant -1.
        let refl = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(matrix_to_rot6d(&refl), Err(Error::NotARotation { .. })));
    }
}
