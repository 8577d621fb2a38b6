//! Supermotion codec: segment a sequence into uniform-velocity runs and
//! encode each run as `[start pose, velocity, duration]`.
//!
//! The encode pipeline is velocity field -> cluster labels -> label smoothing
//! -> run grouping -> per-run supermotion. Decoding replays each segment as
//! `start + offset * velocity`, so with secant velocities the segment
//! boundaries meet exactly and segment-start frames are reproduced verbatim.

use crate::cluster::{assign_labels, ClusterModel};
use crate::error::{Error, Result};
use crate::math::{slice_norm, sq_dist};
use crate::motion::{compute_velocity_field, MotionSequence, Representation};
use crate::parallel;

/// One uniform-velocity segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMotion {
    /// Pose at the segment's first frame, in the source representation.
    pub start_pose: Vec<f64>,
    /// Per-frame feature displacement over the segment.
    pub velocity: Vec<f64>,
    /// Length in frames, at least 1.
    pub duration: u32,
    /// Originating cluster label; provenance only.
    pub cluster_label: u32,
}

impl SuperMotion {
    fn validate(&self, dim: usize) -> Result<()> {
        if self.start_pose.len() != dim || self.velocity.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "supermotion segment",
                expected: dim,
                actual: self.start_pose.len().max(self.velocity.len()),
            });
        }
        if self.duration == 0 {
            return Err(Error::CorruptPayload("segment duration must be >= 1".into()));
        }
        if !self.start_pose.iter().chain(&self.velocity).all(|x| x.is_finite()) {
            return Err(Error::NonFinite("supermotion segment"));
        }
        Ok(())
    }

    /// Pose the segment extrapolates to one step past its last frame.
    pub fn endpoint(&self) -> Vec<f64> {
        self.start_pose
            .iter()
            .zip(&self.velocity)
            .map(|(x, v)| x + self.duration as f64 * v)
            .collect()
    }
}

/// Ordered supermotion segments plus sequence metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMotionSequence {
    segments: Vec<SuperMotion>,
    representation: Representation,
    joint_count: usize,
    fps: f64,
    /// Opaque control-signal tag carried through untouched.
    condition_tag: Option<Vec<u8>>,
}

impl SuperMotionSequence {
    pub fn new(
        representation: Representation,
        joint_count: usize,
        fps: f64,
        segments: Vec<SuperMotion>,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyMotion);
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidFps(fps));
        }
        let dim = representation.feature_dim(joint_count);
        for s in &segments {
            s.validate(dim)?;
        }
        Ok(SuperMotionSequence {
            segments,
            representation,
            joint_count,
            fps,
            condition_tag: None,
        })
    }

    pub fn segments(&self) -> &[SuperMotion] {
        &self.segments
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
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

    pub fn feature_dim(&self) -> usize {
        self.representation.feature_dim(self.joint_count)
    }

    pub fn total_frames(&self) -> usize {
        self.segments.iter().map(|s| s.duration as usize).sum()
    }

    /// Start frame of segment `s`: the sum of prior durations.
    pub fn segment_start(&self, s: usize) -> usize {
        self.segments[..s].iter().map(|x| x.duration as usize).sum()
    }

    pub fn condition_tag(&self) -> Option<&[u8]> {
        self.condition_tag.as_deref()
    }

    pub fn with_condition_tag(mut self, tag: Option<Vec<u8>>) -> Self {
        self.condition_tag = tag;
        self
    }

    /// Replace the segment list, revalidating; metadata is kept.
    pub fn with_segments(&self, segments: Vec<SuperMotion>) -> Result<Self> {
        let mut out = SuperMotionSequence::new(
            self.representation,
            self.joint_count,
            self.fps,
            segments,
        )?;
        out.condition_tag = self.condition_tag.clone();
        Ok(out)
    }
}

/// How a segment's velocity is derived at encode time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityMode {
    /// Endpoint displacement over duration; adjacent segments meet exactly.
    #[default]
    Secant,
    /// Mean of the velocity-field rows inside the segment.
    MeanField,
}

/// Encoder settings.
#[derive(Debug, Clone, Copy)]
pub struct EncodeConfig {
    /// Odd majority-vote window; 1 disables smoothing.
    pub smooth_window: usize,
    /// Runs shorter than this merge into the closer-centroid neighbor.
    pub min_duration: usize,
    pub velocity_mode: VelocityMode,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        EncodeConfig {
            smooth_window: 5,
            min_duration: 1,
            velocity_mode: VelocityMode::Secant,
        }
    }
}

/// Sliding-window majority vote with edge clamping.
///
/// Ties resolve to the previous output label when it is among the tied
/// candidates, otherwise to the lowest label value. A window of 1 is the
/// identity.
pub fn smooth_labels(labels: &[u32], window: usize) -> Result<Vec<u32>> {
    if window.is_multiple_of(2) {
        return Err(Error::EvenWindow(window));
    }
    if window == 1 || labels.len() <= 1 {
        return Ok(labels.to_vec());
    }
    let n = labels.len();
    let half = window / 2;
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let lo = t.saturating_sub(half);
        let hi = (t + half).min(n - 1);
        // Count within the clamped window, replicating edge frames so the
        // vote always covers `window` entries.
        let mut counts: Vec<(u32, usize)> = Vec::new();
        let mut tally = |label: u32, times: usize| {
            if let Some(e) = counts.iter_mut().find(|(l, _)| *l == label) {
                e.1 += times;
            } else {
                counts.push((label, times));
            }
        };
        tally(labels[lo], half.saturating_sub(t));
        for &l in &labels[lo..=hi] {
            tally(l, 1);
        }
        tally(labels[hi], (t + half).saturating_sub(n - 1));

        let max_count = counts.iter().map(|(_, c)| *c).max().unwrap_or(0);
        let mut tied: Vec<u32> = counts
            .iter()
            .filter(|(_, c)| *c == max_count)
            .map(|(l, _)| *l)
            .collect();
        tied.sort_unstable();
        let winner = match out.last() {
            Some(prev) if tied.contains(prev) => *prev,
            _ => tied[0],
        };
        out.push(winner);
    }
    Ok(out)
}

/// A maximal run of identical labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub label: u32,
    pub start: usize,
    pub duration: usize,
}

/// Group adjacent identical labels into runs; runs shorter than
/// `min_duration` merge into the neighbor whose centroid is closer (left on
/// tie). `model` is only consulted when merging is enabled; without it short
/// runs merge left.
pub fn group_segments(
    labels: &[u32],
    min_duration: usize,
    model: Option<&ClusterModel>,
) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for (t, &label) in labels.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.label == label => run.duration += 1,
            _ => runs.push(Run {
                label,
                start: t,
                duration: 1,
            }),
        }
    }

    if min_duration > 1 {
        loop {
            if runs.len() <= 1 {
                break;
            }
            let Some(short) = runs.iter().position(|r| r.duration < min_duration) else {
                break;
            };
            let merge_left = if short == 0 {
                false
            } else if short == runs.len() - 1 {
                true
            } else {
                match model {
                    Some(m) => {
                        let cur = m.centroid(runs[short].label as usize);
                        let left = sq_dist(cur, m.centroid(runs[short - 1].label as usize));
                        let right = sq_dist(cur, m.centroid(runs[short + 1].label as usize));
                        left <= right
                    }
                    None => true,
                }
            };
            if merge_left {
                runs[short - 1].duration += runs[short].duration;
                runs.remove(short);
            } else {
                runs[short + 1].start = runs[short].start;
                runs[short + 1].duration += runs[short].duration;
                runs.remove(short);
            }
        }
    }
    runs
}

/// Encode a motion into a supermotion sequence using a fitted cluster model.
pub fn encode(
    motion: &MotionSequence,
    model: &ClusterModel,
    config: &EncodeConfig,
) -> Result<SuperMotionSequence> {
    if motion.feature_dim() != model.feature_dim() {
        return Err(Error::DimensionMismatch {
            context: "encode",
            expected: model.feature_dim(),
            actual: motion.feature_dim(),
        });
    }
    let field = compute_velocity_field(motion);
    let labels = assign_labels(&field, model)?;
    let smoothed = smooth_labels(&labels, config.smooth_window)?;
    let runs = group_segments(&smoothed, config.min_duration, Some(model));

    let n = motion.num_frames();
    let last = runs.len() - 1;
    let segments = runs
        .iter()
        .enumerate()
        .map(|(s, run)| {
            let start_pose = motion.frame(run.start).to_vec();
            let velocity = match config.velocity_mode {
                VelocityMode::Secant => {
                    if s < last {
                        let next = motion.frame(run.start + run.duration);
                        next.iter()
                            .zip(&start_pose)
                            .map(|(b, a)| (b - a) / run.duration as f64)
                            .collect()
                    } else if run.duration >= 2 {
                        let end = motion.frame(n - 1);
                        end.iter()
                            .zip(&start_pose)
                            .map(|(b, a)| (b - a) / (run.duration - 1) as f64)
                            .collect()
                    } else {
                        vec![0.0; start_pose.len()]
                    }
                }
                VelocityMode::MeanField => {
                    let mut mean = vec![0.0; start_pose.len()];
                    for t in run.start..run.start + run.duration {
                        for (m, v) in mean.iter_mut().zip(field.row(t)) {
                            *m += v;
                        }
                    }
                    let inv = 1.0 / run.duration as f64;
                    mean.iter_mut().for_each(|m| *m *= inv);
                    mean
                }
            };
            SuperMotion {
                start_pose,
                velocity,
                duration: run.duration as u32,
                cluster_label: run.label,
            }
        })
        .collect();

    SuperMotionSequence::new(
        motion.representation(),
        motion.joint_count(),
        motion.fps(),
        segments,
    )
}

/// Reconstruct the full-resolution sequence: each segment replays as
/// `start_pose + offset * velocity`.
pub fn decode(sm: &SuperMotionSequence) -> Result<MotionSequence> {
    let dim = sm.feature_dim();
    let frames = parallel::map_indexed(sm.num_segments(), |s| {
        let seg = &sm.segments()[s];
        let mut rows = Vec::with_capacity(seg.duration as usize * dim);
        for o in 0..seg.duration as usize {
            let o = o as f64;
            rows.extend(
                seg.start_pose
                    .iter()
                    .zip(&seg.velocity)
                    .map(|(x, v)| x + o * v),
            );
        }
        rows
    });
    let mut data = Vec::with_capacity(sm.total_frames() * dim);
    for rows in frames {
        data.extend_from_slice(&rows);
    }
    MotionSequence::new(sm.representation(), sm.joint_count(), sm.fps(), data)
}

/// Gap between each segment's extrapolated endpoint and the next segment's
/// start pose; zero everywhere for secant-encoded sequences.
pub fn coherence_residual(sm: &SuperMotionSequence) -> Result<Vec<f64>> {
    let segs = sm.segments();
    if segs.len() < 2 {
        return Err(Error::SingleSegment);
    }
    Ok(segs
        .windows(2)
        .map(|w| {
            let end = w[0].endpoint();
            let gap: Vec<f64> = w[1]
                .start_pose
                .iter()
                .zip(&end)
                .map(|(x, e)| x - e)
                .collect();
            slice_norm(&gap)
        })
        .collect())
}

/// Size summary of an encoding: `ratio = N / M`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CompressionReport {
    pub ratio: f64,
    pub segments: usize,
    pub frames: usize,
    pub mean_duration: f64,
}

pub fn compression_report(
    original: &MotionSequence,
    sm: &SuperMotionSequence,
) -> Result<CompressionReport> {
    let n = original.num_frames();
    let total = sm.total_frames();
    if total != n {
        return Err(Error::FrameCountMismatch { left: n, right: total });
    }
    let m = sm.num_segments();
    Ok(CompressionReport {
        ratio: n as f64 / m as f64,
        segments: m,
        frames: n,
        mean_duration: n as f64 / m as f64,
    })
}
