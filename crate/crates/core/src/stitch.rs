//! Clip stitching: crossfade rotations over a transition window, accumulate
//! root-translation deltas, and compose multi-clip prompts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::motion::{MotionSequence, Representation};
use crate::parallel;
use crate::rotation::reproject_6d;

/// A short 6D-rotation motion with its text prompt.
#[derive(Debug, Clone)]
pub struct Clip {
    pub motion: MotionSequence,
    pub prompt: String,
}

/// Settings for long-sequence construction.
#[derive(Debug, Clone, Copy)]
pub struct StitchConfig {
    /// Crossfade window M in frames.
    pub transition_frames: usize,
    /// Clips folded into one sample.
    pub clip_count: usize,
    pub seed: u64,
    /// Accepted clip length bounds, inclusive.
    pub len_min: usize,
    pub len_max: usize,
}

impl Default for StitchConfig {
    fn default() -> Self {
        StitchConfig {
            transition_frames: 20,
            clip_count: 10,
            seed: 0,
            len_min: 40,
            len_max: 200,
        }
    }
}

fn check_compatible(a: &MotionSequence, b: &MotionSequence) -> Result<()> {
    if a.representation() != Representation::Rot6D || b.representation() != Representation::Rot6D {
        return Err(Error::RepresentationMismatch(
            "stitch requires Rot6D with root translation".into(),
        ));
    }
    if a.joint_count() != b.joint_count() {
        return Err(Error::RepresentationMismatch(format!(
            "joint counts differ: {} vs {}",
            a.joint_count(),
            b.joint_count()
        )));
    }
    if a.fps() != b.fps() {
        return Err(Error::RepresentationMismatch(format!(
            "frame rates differ: {} vs {}",
            a.fps(),
            b.fps()
        )));
    }
    Ok(())
}

/// Join two clips over an M-frame crossfade; output length is L1 + L2 - M.
///
/// Rotations: the head copies `a`, the overlap blends
/// `f_out(j) * a + f_in(j) * b` with `f_in(j) = j/M`, `f_out(j) = (M-j)/M`
/// and re-orthonormalizes each joint, and the tail copies `b` from frame M
/// on. Translation: the output starts at `a`'s first root position and
/// accumulates per-frame deltas, crossfading the M-1 overlap deltas with the
/// same weights, so every output step is a convex combination of input steps.
pub fn stitch(a: &MotionSequence, b: &MotionSequence, transition: usize) -> Result<MotionSequence> {
    check_compatible(a, b)?;
    let l1 = a.num_frames();
    let l2 = b.num_frames();
    let m = transition;
    if m == 0 || l1 <= m || l2 <= m {
        return Err(Error::TooShortForTransition {
            min_len: l1.min(l2),
            transition: m,
        });
    }

    let joints = a.joint_count();
    let rot_dim = 6 * joints;
    let out_len = l1 + l2 - m;
    let mut data = Vec::with_capacity(out_len * a.feature_dim());

    // Rotation features per output frame; translation filled afterwards.
    for i in 0..out_len {
        if i < l1 - m {
            data.extend_from_slice(&a.frame(i)[..rot_dim]);
        } else if i < l1 {
            let j = i - (l1 - m);
            let f_in = j as f64 / m as f64;
            let f_out = (m - j) as f64 / m as f64;
            let ra = &a.frame(l1 - m + j)[..rot_dim];
            let rb = &b.frame(j)[..rot_dim];
            let mut blended: Vec<f64> = ra
                .iter()
                .zip(rb)
                .map(|(x, y)| f_out * x + f_in * y)
                .collect();
            for joint in 0..joints {
                let fixed = reproject_6d(&blended[6 * joint..6 * joint + 6])?;
                blended[6 * joint..6 * joint + 6].copy_from_slice(&fixed);
            }
            data.extend_from_slice(&blended);
        } else {
            data.extend_from_slice(&b.frame(i - (l1 - m))[..rot_dim]);
        }
        data.extend_from_slice(&[0.0, 0.0, 0.0]);
    }

    // Root translation: prefix sums over concatenated deltas, with the
    // overlap's M-1 deltas crossfaded.
    let trans = |seq: &MotionSequence, t: usize| -> [f64; 3] {
        let f = seq.frame(t);
        [f[rot_dim], f[rot_dim + 1], f[rot_dim + 2]]
    };
    let delta = |seq: &MotionSequence, t: usize| -> [f64; 3] {
        let cur = trans(seq, t);
        let next = trans(seq, t + 1);
        [next[0] - cur[0], next[1] - cur[1], next[2] - cur[2]]
    };

    let mut current = trans(a, 0);
    let dim = a.feature_dim();
    data[rot_dim..rot_dim + 3].copy_from_slice(&current);
    for i in 0..out_len - 1 {
        let d = if i < l1 - m {
            delta(a, i)
        } else if i < l1 - 1 {
            let j = i - (l1 - m);
            let f_in = j as f64 / m as f64;
            let f_out = (m - j) as f64 / m as f64;
            let da = delta(a, l1 - m + j);
            let db = delta(b, j);
            [
                f_out * da[0] + f_in * db[0],
                f_out * da[1] + f_in * db[1],
                f_out * da[2] + f_in * db[2],
            ]
        } else {
            delta(b, i - (l1 - m))
        };
        current = [current[0] + d[0], current[1] + d[1], current[2] + d[2]];
        let at = (i + 1) * dim + rot_dim;
        data[at..at + 3].copy_from_slice(&current);
    }

    MotionSequence::new(Representation::Rot6D, joints, a.fps(), data)
}

/// Where a prompt sits in a composed sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubjectPosition {
    First,
    Subsequent,
}

const SUBJECT_PATTERNS: [&str; 7] = [
    "a person", "the person", "a man", "a woman", "someone", "he", "she",
];

/// Replace a leading subject phrase with a unified subject.
///
/// Matches the pattern list case-insensitively at a word boundary; prompts
/// with no recognizable subject are prefixed instead.
pub fn rewrite_subject(prompt: &str, position: SubjectPosition) -> Result<String> {
    if prompt.trim().is_empty() {
        return Err(Error::EmptyPrompt);
    }
    let replacement = match position {
        SubjectPosition::First => "The person",
        SubjectPosition::Subsequent => "And then this person",
    };
    let lower = prompt.to_lowercase();
    for pattern in SUBJECT_PATTERNS {
        if lower.starts_with(pattern) {
            let boundary_ok = match prompt.get(pattern.len()..) {
                Some(rest) => rest
                    .chars()
                    .next()
                    .is_none_or(|c| !c.is_alphanumeric()),
                None => true,
            };
            if boundary_ok {
                return Ok(format!("{replacement}{}", &prompt[pattern.len()..]));
            }
        }
    }
    Ok(format!("{replacement} {prompt}"))
}

/// Left-fold [`stitch`] over the clips and compose their prompts.
///
/// The total length is the clip-length sum minus `(clip_count - 1) * M`; the
/// first prompt's subject becomes "The person" and each later prompt's
/// becomes "And then this person", joined with ". ".
pub fn build_long_sequence(clips: &[Clip], config: &StitchConfig) -> Result<(MotionSequence, String)> {
    if clips.len() != config.clip_count || clips.len() < 2 {
        return Err(Error::BadClipLength(format!(
            "expected {} clips, got {}",
            config.clip_count,
            clips.len()
        )));
    }
    if config.transition_frames >= config.len_min {
        return Err(Error::TooShortForTransition {
            min_len: config.len_min,
            transition: config.transition_frames,
        });
    }
    for (i, clip) in clips.iter().enumerate() {
        let len = clip.motion.num_frames();
        if len < config.len_min || len > config.len_max {
            return Err(Error::BadClipLength(format!(
                "clip {i} has {len} frames, outside [{}, {}]",
                config.len_min, config.len_max
            )));
        }
    }

    let mut motion = clips[0].motion.clone();
    for clip in &clips[1..] {
        motion = stitch(&motion, &clip.motion, config.transition_frames)?;
    }

    let mut parts = Vec::with_capacity(clips.len());
    parts.push(rewrite_subject(&clips[0].prompt, SubjectPosition::First)?);
    for clip in &clips[1..] {
        parts.push(rewrite_subject(&clip.prompt, SubjectPosition::Subsequent)?);
    }
    Ok((motion, parts.join(". ")))
}

/// One stitched corpus sample.
#[derive(Debug, Clone)]
pub struct BuiltSample {
    pub index: usize,
    pub clip_indices: Vec<usize>,
    pub seed: u64,
    pub motion: MotionSequence,
    pub prompt: String,
}

/// Per-sample seed derived by counter so corpus builds are reproducible
/// regardless of worker count.
pub fn sample_seed(corpus_seed: u64, index: usize) -> u64 {
    corpus_seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Build `count` samples, each stitching `config.clip_count` clips sampled
/// without replacement from `clips`. Samples are independent and may build in
/// parallel; output depends only on the seed and inputs.
pub fn build_corpus(clips: &[Clip], count: usize, config: &StitchConfig) -> Result<Vec<BuiltSample>> {
    if clips.len() < config.clip_count {
        return Err(Error::BadClipLength(format!(
            "need at least {} clips, got {}",
            config.clip_count,
            clips.len()
        )));
    }
    let samples = parallel::map_indexed(count, |index| {
        let seed = sample_seed(config.seed, index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let clip_indices =
            rand::seq::index::sample(&mut rng, clips.len(), config.clip_count).into_vec();
        let chosen: Vec<Clip> = clip_indices.iter().map(|&i| clips[i].clone()).collect();
        let (motion, prompt) = build_long_sequence(&chosen, config)?;
        Ok(BuiltSample {
            index,
            clip_indices,
            seed,
            motion,
            prompt,
        })
    });
    samples.into_iter().collect()
}
