//! Pairwise evaluation metrics over supermotion sequences and decoded
//! motion: reconstruction, joint-space, velocity, contact, and coherence
//! terms, plus contact detection, the foot-skating ratio, and MPJPE.

use serde::{Deserialize, Serialize};

use crate::codec::{coherence_residual, decode, SuperMotionSequence};
use crate::error::{Error, Result};
use crate::kinematics::forward_kinematics;
use crate::motion::{compute_velocity_field, MotionSequence, Representation, Skeleton};

/// Weights balancing the metric terms. The reconstruction term always enters
/// the total with unit weight; `w_recon` is carried for completeness and
/// serialization but not applied by [`total_metric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricWeights {
    pub w_recon: f64,
    pub w_joint: f64,
    pub w_vel: f64,
    pub w_contact: f64,
    pub w_coherent: f64,
}

impl Default for MetricWeights {
    fn default() -> Self {
        MetricWeights {
            w_recon: 1.0,
            w_joint: 0.0,
            w_vel: 0.0,
            w_contact: 0.0,
            w_coherent: 0.0,
        }
    }
}

impl MetricWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_recon, self.w_joint, self.w_vel, self.w_contact, self.w_coherent];
        if !all.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return Err(Error::NonFinite("metric weights"));
        }
        Ok(())
    }
}

/// Individual metric values feeding [`total_metric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricComponents {
    pub recon: f64,
    pub joint: f64,
    pub vel: f64,
    pub contact: f64,
    pub coherent: f64,
}

/// Thresholds for heuristic contact labeling. A foot counts as grounded when
/// its height is at most `max_height` meters and its horizontal speed at most
/// `max_speed` meters per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactThresholds {
    pub max_height: f64,
    pub max_speed: f64,
}

impl Default for ContactThresholds {
    fn default() -> Self {
        ContactThresholds {
            max_height: 0.05,
            max_speed: 0.01,
        }
    }
}

/// Thresholds for the foot-skating ratio: a frame skates when some foot is
/// at most `max_height` high yet moves horizontally faster than
/// `skate_speed` meters per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FsrThresholds {
    pub max_height: f64,
    pub skate_speed: f64,
}

impl Default for FsrThresholds {
    fn default() -> Self {
        FsrThresholds {
            max_height: 0.05,
            skate_speed: 0.025,
        }
    }
}

/// Binary per-frame, per-foot contact labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactLabels {
    labels: Vec<u8>,
    num_frames: usize,
    num_feet: usize,
    pub thresholds: ContactThresholds,
}

impl ContactLabels {
    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_feet(&self) -> usize {
        self.num_feet
    }

    pub fn label(&self, t: usize, foot: usize) -> u8 {
        self.labels[t * self.num_feet + foot]
    }
}

fn feature_dims(a: &SuperMotionSequence, b: &SuperMotionSequence) -> Result<usize> {
    if a.num_segments() != b.num_segments() {
        return Err(Error::ShapeMismatch {
            context: "segment counts",
            left: a.num_segments().to_string(),
            right: b.num_segments().to_string(),
        });
    }
    if a.feature_dim() != b.feature_dim() {
        return Err(Error::ShapeMismatch {
            context: "feature dims",
            left: a.feature_dim().to_string(),
            right: b.feature_dim().to_string(),
        });
    }
    Ok(a.feature_dim())
}

/// Mean squared norm of per-segment supermotion differences, each segment
/// flattened as `[start pose, velocity, duration]`. `duration_scale` weighs
/// the duration entry; the plain metric uses 1.
pub fn recon_metric_scaled(
    a: &SuperMotionSequence,
    b: &SuperMotionSequence,
    duration_scale: f64,
) -> Result<f64> {
    feature_dims(a, b)?;
    let m = a.num_segments();
    let mut acc = 0.0;
    for (sa, sb) in a.segments().iter().zip(b.segments()) {
        let mut sq = 0.0;
        for (x, y) in sa.start_pose.iter().zip(&sb.start_pose) {
            sq += (x - y) * (x - y);
        }
        for (x, y) in sa.velocity.iter().zip(&sb.velocity) {
            sq += (x - y) * (x - y);
        }
        let dd = duration_scale * (sa.duration as f64 - sb.duration as f64);
        sq += dd * dd;
        acc += sq;
    }
    Ok(acc / m as f64)
}

/// Reconstruction metric with unit duration weight.
pub fn recon_metric(a: &SuperMotionSequence, b: &SuperMotionSequence) -> Result<f64> {
    recon_metric_scaled(a, b, 1.0)
}

/// Mean squared joint-position distance between per-segment start poses,
/// compared through forward kinematics. Requires 6D-rotation sequences;
/// Cartesian callers should use [`recon_metric`] instead.
pub fn joint_metric(
    a: &SuperMotionSequence,
    b: &SuperMotionSequence,
    skeleton: &Skeleton,
) -> Result<f64> {
    if a.representation() != Representation::Rot6D || b.representation() != Representation::Rot6D {
        return Err(Error::WrongRepresentation {
            context: "joint_metric",
            expected: "Rot6D",
        });
    }
    feature_dims(a, b)?;
    if a.joint_count() != skeleton.joint_count() {
        return Err(Error::DimensionMismatch {
            context: "joint_metric skeleton",
            expected: skeleton.joint_count(),
            actual: a.joint_count(),
        });
    }
    let m = a.num_segments();
    let mut acc = 0.0;
    for (sa, sb) in a.segments().iter().zip(b.segments()) {
        let pa = forward_kinematics(skeleton, &sa.start_pose)?;
        let pb = forward_kinematics(skeleton, &sb.start_pose)?;
        for (ja, jb) in pa.iter().zip(&pb) {
            for c in 0..3 {
                let d = ja[c] - jb[c];
                acc += d * d;
            }
        }
    }
    Ok(acc / m as f64)
}

/// Mean squared difference between stored segment velocities.
pub fn velocity_metric(a: &SuperMotionSequence, b: &SuperMotionSequence) -> Result<f64> {
    feature_dims(a, b)?;
    let m = a.num_segments();
    let mut acc = 0.0;
    for (sa, sb) in a.segments().iter().zip(b.segments()) {
        for (x, y) in sa.velocity.iter().zip(&sb.velocity) {
            acc += (x - y) * (x - y);
        }
    }
    Ok(acc / m as f64)
}

/// Horizontal (x,z) speed and height (y) of one foot at one frame.
fn foot_frame(motion_row: &[f64], field_row: &[f64], joint: usize) -> (f64, f64, [f64; 3]) {
    let height = motion_row[3 * joint + 1];
    let v = [
        field_row[3 * joint],
        field_row[3 * joint + 1],
        field_row[3 * joint + 2],
    ];
    let horizontal = (v[0] * v[0] + v[2] * v[2]).sqrt();
    (height, horizontal, v)
}

/// Threshold-derived binary contact labels: grounded when low and slow.
///
/// Height is the y coordinate; speed is the forward-difference velocity with
/// the final frame replicated.
pub fn detect_contacts(
    motion: &MotionSequence,
    skeleton: &Skeleton,
    thresholds: ContactThresholds,
) -> Result<ContactLabels> {
    if motion.representation() != Representation::Cartesian3D {
        return Err(Error::WrongRepresentation {
            context: "detect_contacts",
            expected: "Cartesian3D",
        });
    }
    if skeleton.foot_joint_indices.is_empty() {
        return Err(Error::NoFootJoints);
    }
    let field = compute_velocity_field(motion);
    let feet = &skeleton.foot_joint_indices;
    let mut labels = Vec::with_capacity(motion.num_frames() * feet.len());
    for t in 0..motion.num_frames() {
        for &f in feet {
            let (height, speed, _) = foot_frame(motion.frame(t), field.row(t), f);
            labels.push(u8::from(height <= thresholds.max_height && speed <= thresholds.max_speed));
        }
    }
    Ok(ContactLabels {
        labels,
        num_frames: motion.num_frames(),
        num_feet: feet.len(),
        thresholds,
    })
}

/// Mean squared masked foot velocity at segment-start frames: nonzero foot
/// motion on frames labeled in-contact is penalized. The sequence is decoded
/// internally to obtain foot velocities.
pub fn contact_metric(
    sm: &SuperMotionSequence,
    skeleton: &Skeleton,
    contacts: &ContactLabels,
) -> Result<f64> {
    if sm.representation() != Representation::Cartesian3D {
        return Err(Error::WrongRepresentation {
            context: "contact_metric",
            expected: "Cartesian3D",
        });
    }
    if skeleton.foot_joint_indices.is_empty() {
        return Err(Error::NoFootJoints);
    }
    if contacts.num_feet != skeleton.foot_joint_indices.len() {
        return Err(Error::ShapeMismatch {
            context: "contact feet",
            left: contacts.num_feet.to_string(),
            right: skeleton.foot_joint_indices.len().to_string(),
        });
    }
    let decoded = decode(sm)?;
    if contacts.num_frames != decoded.num_frames() {
        return Err(Error::ShapeMismatch {
            context: "contact frames",
            left: contacts.num_frames.to_string(),
            right: decoded.num_frames().to_string(),
        });
    }
    let field = compute_velocity_field(&decoded);
    let m = sm.num_segments();
    let mut acc = 0.0;
    let mut start = 0usize;
    for seg in sm.segments() {
        for (fi, &joint) in skeleton.foot_joint_indices.iter().enumerate() {
            if contacts.label(start, fi) == 1 {
                let (_, _, v) = foot_frame(decoded.frame(start), field.row(start), joint);
                acc += v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            }
        }
        start += seg.duration as usize;
    }
    Ok(acc / m as f64)
}

/// Mean squared coherence residual across adjacent segments.
pub fn coherent_metric(sm: &SuperMotionSequence) -> Result<f64> {
    let residuals = coherence_residual(sm)?;
    let m1 = residuals.len();
    Ok(residuals.iter().map(|r| r * r).sum::<f64>() / m1 as f64)
}

/// Weighted sum of the metric terms; reconstruction enters unweighted.
pub fn total_metric(components: &MetricComponents, weights: &MetricWeights) -> Result<f64> {
    weights.validate()?;
    let vals = [
        components.recon,
        components.joint,
        components.vel,
        components.contact,
        components.coherent,
    ];
    if !vals.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("metric components"));
    }
    Ok(components.recon
        + weights.w_joint * components.joint
        + weights.w_vel * components.vel
        + weights.w_contact * components.contact
        + weights.w_coherent * components.coherent)
}

/// Fraction of frames where some foot is near the ground yet sliding
/// horizontally faster than the skate threshold.
///
/// For calibration: real dance capture scores around 6% under the default
/// thresholds, so generated motion in the low single digits is doing well.
pub fn foot_skating_ratio(
    motion: &MotionSequence,
    skeleton: &Skeleton,
    thresholds: FsrThresholds,
) -> Result<f64> {
    if motion.representation() != Representation::Cartesian3D {
        return Err(Error::WrongRepresentation {
            context: "foot_skating_ratio",
            expected: "Cartesian3D",
        });
    }
    if skeleton.foot_joint_indices.is_empty() {
        return Err(Error::NoFootJoints);
    }
    let field = compute_velocity_field(motion);
    let n = motion.num_frames();
    let mut skating = 0usize;
    for t in 0..n {
        let slides = skeleton.foot_joint_indices.iter().any(|&f| {
            let (height, speed, _) = foot_frame(motion.frame(t), field.row(t), f);
            height <= thresholds.max_height && speed > thresholds.skate_speed
        });
        if slides {
            skating += 1;
        }
    }
    Ok(skating as f64 / n as f64)
}

/// Mean per-joint position error: average Euclidean distance over all frames
/// and joints of two Cartesian sequences of identical shape.
pub fn mpjpe(a: &MotionSequence, b: &MotionSequence) -> Result<f64> {
    if a.representation() != Representation::Cartesian3D
        || b.representation() != Representation::Cartesian3D
    {
        return Err(Error::WrongRepresentation {
            context: "mpjpe",
            expected: "Cartesian3D",
        });
    }
    if a.num_frames() != b.num_frames() || a.feature_dim() != b.feature_dim() {
        return Err(Error::ShapeMismatch {
            context: "mpjpe",
            left: format!("{}x{}", a.num_frames(), a.feature_dim()),
            right: format!("{}x{}", b.num_frames(), b.feature_dim()),
        });
    }
    let joints = a.joint_count();
    let mut acc = 0.0;
    for (fa, fb) in a.frames().zip(b.frames()) {
        for j in 0..joints {
            let dx = fa[3 * j] - fb[3 * j];
            let dy = fa[3 * j + 1] - fb[3 * j + 1];
            let dz = fa[3 * j + 2] - fb[3 * j + 2];
            acc += (dx * dx + dy * dy + dz * dz).sqrt();
        }
    }
    Ok(acc / (a.num_frames() * joints) as f64)
}
