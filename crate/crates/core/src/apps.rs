//! Deterministic supermotion-sequence applications: loop closure, seam
//! analysis, duration-controlled retiming, and music-length matching.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codec::{decode, SuperMotion, SuperMotionSequence};
use crate::error::{Error, Result};
use crate::math::slice_norm;
use crate::motion::{resample_to_length, MotionSequence};

/// Replace the final supermotion with a copy of the first so a decoded
/// sequence can wrap: the tail replays the opening segment, and playback
/// re-enters at the second segment's start frame.
///
/// All fields are copied, including the duration, so the total frame count
/// changes by `d_0 - d_{M-1}` when the two durations differ.
pub fn loop_close(sm: &SuperMotionSequence) -> Result<SuperMotionSequence> {
    if sm.num_segments() < 2 {
        return Err(Error::SingleSegment);
    }
    let mut segments = sm.segments().to_vec();
    let first = segments[0].clone();
    *segments.last_mut().expect("nonempty") = first;
    sm.with_segments(segments)
}

/// Seam quality of a supermotion sequence played as a loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopSeamReport {
    /// Gap between the loop re-entry frame and the final segment's
    /// one-step extrapolation.
    pub wrap_step: f64,
    /// Largest frame-to-frame step inside the decoded sequence.
    pub max_internal_step: f64,
    /// `wrap_step <= max_internal_step + 1e-9`.
    pub seamless: bool,
}

/// Measure how smoothly a decoded sequence wraps.
///
/// The loop treats the final segment as a replay of the first, so playback
/// jumps from the last frame to the frame after the opening segment
/// (`t_1 mod N`; frame 0 for a single-segment sequence). The wrap step is the
/// distance between that re-entry frame and the final frame advanced once
/// more by the last segment's velocity; the seam is seamless when this does
/// not exceed the largest internal step.
pub fn loop_seam_report(sm: &SuperMotionSequence) -> Result<LoopSeamReport> {
    let decoded = decode(sm)?;
    let n = decoded.num_frames();
    let reentry = if sm.num_segments() >= 2 {
        sm.segments()[0].duration as usize % n
    } else {
        0
    };

    let last_seg = &sm.segments()[sm.num_segments() - 1];
    let last = decoded.frame(n - 1);
    let target: Vec<f64> = last
        .iter()
        .zip(&last_seg.velocity)
        .map(|(x, v)| x + v)
        .collect();
    let gap: Vec<f64> = decoded
        .frame(reentry)
        .iter()
        .zip(&target)
        .map(|(x, y)| x - y)
        .collect();
    let wrap_step = slice_norm(&gap);

    let mut max_internal_step = 0.0f64;
    for t in 0..n.saturating_sub(1) {
        let step: Vec<f64> = decoded
            .frame(t + 1)
            .iter()
            .zip(decoded.frame(t))
            .map(|(a, b)| a - b)
            .collect();
        max_internal_step = max_internal_step.max(slice_norm(&step));
    }

    Ok(LoopSeamReport {
        wrap_step,
        max_internal_step,
        seamless: wrap_step <= max_internal_step + 1e-9,
    })
}

/// How a frame budget is split across segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecomposeMode {
    /// Near-equal split: the first `D mod M` segments get one extra frame.
    Even,
    /// Even split followed by seeded bounded +/-1 transfers.
    Seeded(u64),
}

/// Bounded per-segment durations summing to a fixed total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DurationPlan {
    pub durations: Vec<u32>,
    pub d_min: usize,
    pub d_max: usize,
}

impl DurationPlan {
    pub fn total(&self) -> usize {
        self.durations.iter().map(|&d| d as usize).sum()
    }
}

/// Split `total` frames into `segments` durations within `[d_min, d_max]`.
///
/// Even mode assigns `floor(D/M)` everywhere and one extra frame to the
/// first `D mod M` entries. Seeded mode then applies `M` attempted random
/// transfers of one frame between entry pairs, skipping any transfer that
/// would leave the bounds.
pub fn decompose_duration(
    total: usize,
    segments: usize,
    d_min: usize,
    d_max: usize,
    mode: DecomposeMode,
) -> Result<DurationPlan> {
    if segments == 0 || d_min == 0 || d_min > d_max {
        return Err(Error::Infeasible {
            total,
            segments,
            d_min,
            d_max,
        });
    }
    if segments * d_min > total || segments * d_max < total {
        return Err(Error::Infeasible {
            total,
            segments,
            d_min,
            d_max,
        });
    }

    let base = total / segments;
    let remainder = total % segments;
    let mut durations: Vec<u32> = (0..segments)
        .map(|i| if i < remainder { base as u32 + 1 } else { base as u32 })
        .collect();

    if let DecomposeMode::Seeded(seed) = mode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..segments {
            let gain = rng.random_range(0..segments);
            let lose = rng.random_range(0..segments);
            if gain == lose {
                continue;
            }
            let can_gain = (durations[gain] as usize) < d_max;
            let can_lose = (durations[lose] as usize) > d_min;
            if can_gain && can_lose {
                durations[gain] += 1;
                durations[lose] -= 1;
            }
        }
    }

    Ok(DurationPlan {
        durations,
        d_min,
        d_max,
    })
}

/// Give each segment a planned duration, rescaling its velocity so the
/// segment still extrapolates to the same endpoint:
/// `v' = v * (d / d')`.
pub fn retime_supermotions(
    sm: &SuperMotionSequence,
    plan: &DurationPlan,
) -> Result<SuperMotionSequence> {
    if plan.durations.len() != sm.num_segments() {
        return Err(Error::LengthMismatch {
            plan: plan.durations.len(),
            segments: sm.num_segments(),
        });
    }
    let segments: Vec<SuperMotion> = sm
        .segments()
        .iter()
        .zip(&plan.durations)
        .map(|(seg, &new_duration)| {
            let scale = seg.duration as f64 / new_duration as f64;
            SuperMotion {
                start_pose: seg.start_pose.clone(),
                velocity: seg.velocity.iter().map(|v| v * scale).collect(),
                duration: new_duration,
                cluster_label: seg.cluster_label,
            }
        })
        .collect();
    sm.with_segments(segments)
}

/// Clip or interpolate a decoded sequence to an exact frame count.
pub fn match_music_length(motion: &MotionSequence, target_frames: usize) -> Result<MotionSequence> {
    resample_to_length(motion, target_frames)
}
