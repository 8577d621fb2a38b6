//! Forward kinematics over 6D-rotation poses.

use crate::error::{Error, Result};
use crate::math::{self, Mat3};
use crate::motion::{MotionSequence, Representation, Skeleton};
use crate::parallel;
use crate::rotation::{rot6d_to_matrix, Rotation6D};

/// World positions of every joint for one 6D pose with root translation.
///
/// The root sits at the pose's translation; each child sits at its parent's
/// position plus the parent's global rotation applied to the child's rest
/// offset. Local rotations compose down the hierarchy, so bone lengths are
/// preserved exactly.
pub fn forward_kinematics(skeleton: &Skeleton, pose: &[f64]) -> Result<Vec<[f64; 3]>> {
    let j = skeleton.joint_count();
    let expected = 6 * j + 3;
    if pose.len() != expected {
        return Err(Error::DimensionMismatch {
            context: "fk pose",
            expected,
            actual: pose.len(),
        });
    }

    let mut globals: Vec<Mat3> = Vec::with_capacity(j);
    let mut positions: Vec<[f64; 3]> = Vec::with_capacity(j);
    for joint in 0..j {
        let local = rot6d_to_matrix(&Rotation6D::from_slice(&pose[6 * joint..6 * joint + 6])?)?;
        match skeleton.parents[joint] {
            -1 => {
                globals.push(local);
                positions.push([pose[6 * j], pose[6 * j + 1], pose[6 * j + 2]]);
            }
            parent => {
                let p = parent as usize;
                let rotated = math::mat_vec(&globals[p], &skeleton.offsets[joint]);
                positions.push(math::add(&positions[p], &rotated));
                globals.push(math::mat_mul(&globals[p], &local));
            }
        }
    }
    Ok(positions)
}

/// Convert a whole 6D sequence to Cartesian joint positions frame by frame.
pub fn fk_motion(motion: &MotionSequence, skeleton: &Skeleton) -> Result<MotionSequence> {
    if motion.representation() != Representation::Rot6D {
        return Err(Error::WrongRepresentation {
            context: "fk_motion",
            expected: "Rot6D",
        });
    }
    if motion.joint_count() != skeleton.joint_count() {
        return Err(Error::DimensionMismatch {
            context: "fk_motion joint count",
            expected: skeleton.joint_count(),
            actual: motion.joint_count(),
        });
    }
    let frames = parallel::map_indexed(motion.num_frames(), |t| {
        forward_kinematics(skeleton, motion.frame(t))
    });
    let mut data = Vec::with_capacity(motion.num_frames() * 3 * skeleton.joint_count());
    for frame in frames {
        for p in frame? {
            data.extend_from_slice(&p);
        }
    }
    MotionSequence::new(
        Representation::Cartesian3D,
        skeleton.joint_count(),
        motion.fps(),
        data,
    )
}
