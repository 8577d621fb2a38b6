//! Supermotion toolkit: compress framewise 3D human motion into short
//! uniform-velocity segments and work with the compressed form directly.
//!
//! The pipeline treats each joint as a particle moving at a constant
//! velocity over short spans. A sequence's per-frame velocity field is
//! clustered (mini-batch K-means), adjacent frames with the same cluster
//! label form segments, and each segment is stored as a supermotion
//! `[start pose, velocity, duration]`. Decoding replays the segments
//! linearly. On top of the codec sit evaluation metrics, clip stitching for
//! long-sequence corpora, loop closure, and duration-controlled retiming.
//!
//! The `parallel` feature (default) runs the per-frame and per-sample inner
//! loops on rayon; disabling it yields a dependency-light sequential build
//! with identical outputs.

pub mod apps;
pub mod cluster;
pub mod codec;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod math;
pub mod metrics;
pub mod motion;
pub mod parallel;
pub mod rotation;
pub mod stitch;

#[cfg(test)]
pub(crate) mod test_util;

pub use apps::{
    decompose_duration, loop_close, loop_seam_report, match_music_length, retime_supermotions,
    DecomposeMode, DurationPlan, LoopSeamReport,
};
pub use cluster::{assign_labels, fit_clusters, ClusterModel, FitConfig};
pub use codec::{
    coherence_residual, compression_report, decode, encode, group_segments, smooth_labels,
    CompressionReport, EncodeConfig, Run, SuperMotion, SuperMotionSequence, VelocityMode,
};
pub use error::{Error, Result};
pub use kinematics::{fk_motion, forward_kinematics};
pub use metrics::{
    coherent_metric, contact_metric, detect_contacts, foot_skating_ratio, joint_metric, mpjpe,
    recon_metric, total_metric, velocity_metric, ContactLabels, ContactThresholds, FsrThresholds,
    MetricComponents, MetricWeights,
};
pub use motion::{
    compute_velocity_field, reorthonormalize, resample_to_length, MotionSequence, Representation,
    Skeleton, VelocityField,
};
pub use parallel::{execution_mode, run_with_threads};
pub use rotation::{matrix_to_rot6d, rot6d_to_matrix, Rotation6D};
pub use stitch::{
    build_corpus, build_long_sequence, rewrite_subject, sample_seed, stitch, BuiltSample, Clip,
    StitchConfig, SubjectPosition,
};
