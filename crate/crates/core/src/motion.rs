//! Motion data model: framewise sequences, skeletons, velocity fields, and
//! exact-length resampling.
//!
//! A sequence stores N frames of D features row-major. Cartesian data packs
//! joints as `[x0,y0,z0, x1,y1,z1, ...]` (D = 3J, meters). 6D-rotation data
//! packs per-joint rotation features first and the root translation last
//! (D = 6J + 3). All in-memory arithmetic is f64.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::rotation;

/// Coordinate representation of a motion sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// Per-joint 3D positions in meters; D = 3J.
    Cartesian3D,
    /// Per-joint 6D rotation features plus root translation; D = 6J + 3.
    Rot6D,
}

impl Representation {
    /// Per-frame feature dimension for `joint_count` joints.
    pub fn feature_dim(&self, joint_count: usize) -> usize {
        match self {
            Representation::Cartesian3D => 3 * joint_count,
            Representation::Rot6D => 6 * joint_count + 3,
        }
    }
}

/// N frames x D features of generalized joint coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    data: Vec<f64>,
    num_frames: usize,
    feature_dim: usize,
    representation: Representation,
    joint_count: usize,
    fps: f64,
}

impl MotionSequence {
    /// Build a sequence from row-major frame data, validating every invariant.
    pub fn new(
        representation: Representation,
        joint_count: usize,
        fps: f64,
        frames: Vec<f64>,
    ) -> Result<Self> {
        if joint_count == 0 {
            return Err(Error::InvalidSkeleton("joint count must be positive".into()));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidFps(fps));
        }
        let dim = representation.feature_dim(joint_count);
        if frames.is_empty() {
            return Err(Error::EmptyMotion);
        }
        if !frames.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                context: "motion frame data",
                expected: dim,
                actual: frames.len() % dim,
            });
        }
        if !frames.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("motion frames"));
        }
        let num_frames = frames.len() / dim;
        Ok(MotionSequence {
            data: frames,
            num_frames,
            feature_dim: dim,
            representation,
            joint_count,
            fps,
        })
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn joint_count(&self) -> usize {
        self.joint_count
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// One frame as a feature slice.
    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.feature_dim..(t + 1) * self.feature_dim]
    }

    /// Iterate frames in time order.
    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.feature_dim)
    }

    /// Flat row-major frame data.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Cartesian position of joint `j` at frame `t`.
    pub fn joint_position(&self, t: usize, j: usize) -> Result<[f64; 3]> {
        if self.representation != Representation::Cartesian3D {
            return Err(Error::WrongRepresentation {
                context: "joint_position",
                expected: "Cartesian3D",
            });
        }
        let f = self.frame(t);
        Ok([f[3 * j], f[3 * j + 1], f[3 * j + 2]])
    }
}

/// Joint hierarchy with rest offsets, topologically sorted (parent index < child).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    /// Parent index per joint; -1 marks the single root at index 0.
    pub parents: Vec<i32>,
    /// Rest-pose bone offsets in meters.
    pub offsets: Vec<[f64; 3]>,
    /// Joints treated as feet by contact metrics.
    pub foot_joint_indices: Vec<usize>,
}

impl Skeleton {
    pub fn new(
        parents: Vec<i32>,
        offsets: Vec<[f64; 3]>,
        foot_joint_indices: Vec<usize>,
    ) -> Result<Self> {
        let skeleton = Skeleton {
            parents,
            offsets,
            foot_joint_indices,
        };
        skeleton.validate()?;
        Ok(skeleton)
    }

    pub fn joint_count(&self) -> usize {
        self.parents.len()
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.parents.len();
        if j == 0 {
            return Err(Error::InvalidSkeleton("no joints".into()));
        }
        if self.offsets.len() != j {
            return Err(Error::InvalidSkeleton(format!(
                "{} offsets for {} joints",
                self.offsets.len(),
                j
            )));
        }
        let roots = self.parents.iter().filter(|&&p| p == -1).count();
        if roots != 1 || self.parents[0] != -1 {
            return Err(Error::InvalidSkeleton(
                "exactly one root at index 0 required".into(),
            ));
        }
        for (child, &parent) in self.parents.iter().enumerate().skip(1) {
            if parent < 0 || parent as usize >= child {
                return Err(Error::InvalidSkeleton(format!(
                    "joint {child} has parent {parent}; parents must precede children"
                )));
            }
        }
        if !self.offsets.iter().flatten().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("skeleton offsets"));
        }
        if let Some(&bad) = self.foot_joint_indices.iter().find(|&&f| f >= j) {
            return Err(Error::InvalidSkeleton(format!(
                "foot joint {bad} out of range for {j} joints"
            )));
        }
        Ok(())
    }
}

/// Per-frame, per-feature forward differences: the discrete velocity field.
///
/// Row `t` holds `frames[t+1] - frames[t]`; the final row replicates its
/// predecessor (zero for a single-frame sequence), so the field has the same
/// shape as its source.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    data: Vec<f64>,
    num_frames: usize,
    feature_dim: usize,
}

impl VelocityField {
    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.feature_dim..(t + 1) * self.feature_dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.feature_dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Assemble a field from row-major data; used by tests and corpus tooling.
    pub fn from_raw(num_frames: usize, feature_dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != num_frames * feature_dim {
            return Err(Error::DimensionMismatch {
                context: "velocity field data",
                expected: num_frames * feature_dim,
                actual: data.len(),
            });
        }
        Ok(VelocityField {
            data,
            num_frames,
            feature_dim,
        })
    }
}

/// Forward-difference velocity field of a motion sequence.
pub fn compute_velocity_field(motion: &MotionSequence) -> VelocityField {
    let n = motion.num_frames();
    let d = motion.feature_dim();
    let mut data = vec![0.0; n * d];
    if n >= 2 {
        parallel::fill_rows(&mut data[..(n - 1) * d], d, |t, row| {
            let cur = motion.frame(t);
            let next = motion.frame(t + 1);
            for ((out, a), b) in row.iter_mut().zip(next).zip(cur) {
                *out = a - b;
            }
        });
        let (head, tail) = data.split_at_mut((n - 1) * d);
        tail.copy_from_slice(&head[(n - 2) * d..]);
    }
    VelocityField {
        data,
        num_frames: n,
        feature_dim: d,
    }
}

/// Resample a sequence to exactly `target_len` frames.
///
/// Equal length copies the input; shorter targets keep frames at indices
/// `round(i * (N-1) / (target_len-1))`; longer targets linearly interpolate at
/// uniform fractional indices. Frames hit exactly are copied verbatim, so the
/// endpoints are always preserved bit-for-bit. Interpolated 6D-rotation
/// features are re-orthonormalized per joint; the root translation is
/// interpolated as-is.
pub fn resample_to_length(motion: &MotionSequence, target_len: usize) -> Result<MotionSequence> {
    if target_len == 0 {
        return Err(Error::EmptyMotion);
    }
    let n = motion.num_frames();
    let d = motion.feature_dim();
    if target_len == n {
        return Ok(motion.clone());
    }

    let mut data = Vec::with_capacity(target_len * d);
    if target_len == 1 {
        data.extend_from_slice(motion.frame(0));
    } else if target_len < n {
        let step = (n - 1) as f64 / (target_len - 1) as f64;
        for i in 0..target_len {
            // The last output index maps to n-1 exactly; rounding the
            // product may not.
            let src = if i == target_len - 1 {
                n - 1
            } else {
                (i as f64 * step).round() as usize
            };
            data.extend_from_slice(motion.frame(src.min(n - 1)));
        }
    } else {
        let step = (n - 1) as f64 / (target_len - 1) as f64;
        for i in 0..target_len {
            if i == target_len - 1 {
                data.extend_from_slice(motion.frame(n - 1));
                continue;
            }
            let pos = i as f64 * step;
            let lo = pos.floor() as usize;
            let frac = pos - lo as f64;
            if frac == 0.0 || lo + 1 >= n {
                data.extend_from_slice(motion.frame(lo.min(n - 1)));
                continue;
            }
            let a = motion.frame(lo);
            let b = motion.frame(lo + 1);
            let mut frame: Vec<f64> = a
                .iter()
                .zip(b)
                .map(|(x, y)| (1.0 - frac) * x + frac * y)
                .collect();
            if motion.representation() == Representation::Rot6D {
                for j in 0..motion.joint_count() {
                    let fixed = rotation::reproject_6d(&frame[6 * j..6 * j + 6])?;
                    frame[6 * j..6 * j + 6].copy_from_slice(&fixed);
                }
            }
            data.extend_from_slice(&frame);
        }
    }

    MotionSequence::new(
        motion.representation(),
        motion.joint_count(),
        motion.fps(),
        data,
    )
}

/// Re-orthonormalize every joint rotation of a 6D sequence.
pub fn reorthonormalize(motion: &MotionSequence) -> Result<MotionSequence> {
    if motion.representation() != Representation::Rot6D {
        return Err(Error::WrongRepresentation {
            context: "reorthonormalize",
            expected: "Rot6D",
        });
    }
    let j = motion.joint_count();
    let frames = parallel::map_indexed(motion.num_frames(), |t| {
        let mut frame = motion.frame(t).to_vec();
        for joint in 0..j {
            match rotation::reproject_6d(&frame[6 * joint..6 * joint + 6]) {
                Ok(fixed) => frame[6 * joint..6 * joint + 6].copy_from_slice(&fixed),
                Err(e) => return Err(e),
            }
        }
        Ok(frame)
    });
    let mut data = Vec::with_capacity(motion.num_frames() * motion.feature_dim());
    for frame in frames {
        data.extend_from_slice(&frame?);
    }
    MotionSequence::new(
        Representation::Rot6D,
        motion.joint_count(),
        motion.fps(),
        data,
    )
}
