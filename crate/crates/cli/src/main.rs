//! `lamof` command line: fit velocity clusters, encode/decode supermotion
//! files, evaluate metrics, stitch clips into long sequences, and run the
//! loop/retime applications.
//!
//! Exit codes: 0 success, 1 internal error, 2 bad input. Failures print a
//! machine-readable JSON object `{code, message, context}` on stderr. Output
//! files are only written after all inputs validate, via temp-file rename.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lamof_core::{
    apps, cluster, codec, io, metrics, motion, parallel, stitch, Error as CoreError,
};

mod report;

use report::CliError;

/// Seed resolution order: explicit flag, then LAMOF_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("LAMOF_SEED") {
        Ok(text) => text.parse::<u64>().map_err(|_| {
            CliError::bad_input(
                "BAD_SEED",
                format!("LAMOF_SEED must be an unsigned integer, got {text:?}"),
                json!({"value": text}),
            )
        }),
        Err(_) => Ok(0),
    }
}

#[derive(Parser)]
#[command(name = "lamof", version, about = "Supermotion codec and motion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VelocityModeArg {
    Secant,
    MeanField,
}

impl From<VelocityModeArg> for codec::VelocityMode {
    fn from(v: VelocityModeArg) -> Self {
        match v {
            VelocityModeArg::Secant => codec::VelocityMode::Secant,
            VelocityModeArg::MeanField => codec::VelocityMode::MeanField,
        }
    }
}

#[derive(Args)]
struct EncodeOpts {
    /// Odd label-smoothing window; 1 disables smoothing.
    #[arg(long, default_value_t = 5)]
    smooth_window: usize,
    /// Merge runs shorter than this into the closer neighbor.
    #[arg(long, default_value_t = 1)]
    min_duration: usize,
    #[arg(long, value_enum, default_value_t = VelocityModeArg::Secant)]
    velocity_mode: VelocityModeArg,
}

impl EncodeOpts {
    fn to_config(&self) -> codec::EncodeConfig {
        codec::EncodeConfig {
            smooth_window: self.smooth_window,
            min_duration: self.min_duration,
            velocity_mode: self.velocity_mode.into(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a K-means model to the velocity fields of motion files.
    FitClusters {
        /// Input motion files (.lmf binary or .json).
        #[arg(long, num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        k: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1024)]
        batch_size: usize,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a motion file into a supermotion file.
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        opts: EncodeOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a supermotion file back to full-resolution motion.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Re-orthonormalize joint rotations of 6D output.
        #[arg(long)]
        reorthonormalize: bool,
    },
    /// Encode + decode and report compression, MPJPE, and coherence as JSON.
    Roundtrip {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Skeleton sidecar; required for 6D inputs (MPJPE runs through FK).
        #[arg(long)]
        skeleton: Option<PathBuf>,
        #[command(flatten)]
        opts: EncodeOpts,
    },
    /// Evaluate the metric suite between two supermotion files.
    Metrics {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Metric weights JSON; defaults to unit reconstruction weight.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Skeleton sidecar enabling the joint and contact terms.
        #[arg(long)]
        skeleton: Option<PathBuf>,
    },
    /// Foot-skating ratio of a Cartesian motion file.
    Fsr {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        skeleton: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        max_height: f64,
        #[arg(long, default_value_t = 0.025)]
        skate_speed: f64,
    },
    /// Crossfade-stitch clips left to right.
    Stitch {
        #[arg(long, num_args = 2.., required = true)]
        clips: Vec<PathBuf>,
        #[arg(long, default_value_t = 20)]
        transition: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a stitched corpus from a clip manifest.
    BuildCorpus {
        /// JSONL manifest: one {id, motion, prompt} record per clip.
        #[arg(long)]
        manifest: PathBuf,
        /// Samples to build.
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        clips_per_sample: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 20)]
        transition: usize,
        #[arg(long, default_value_t = 40)]
        len_min: usize,
        #[arg(long, default_value_t = 200)]
        len_max: usize,
        /// Worker threads; output is identical for any count.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Close a supermotion sequence into a loop.
    Loop {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Print a seam report for the looped sequence.
        #[arg(long)]
        report: bool,
    },
    /// Re-plan segment durations to hit an exact total frame count.
    Retime {
        #[arg(long)]
        input: PathBuf,
        /// Target total frames.
        #[arg(long)]
        total: usize,
        #[arg(long)]
        d_min: usize,
        #[arg(long)]
        d_max: usize,
        #[arg(long, default_value = "even")]
        mode: RetimeMode,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resample a motion file to an exact frame count.
    Resample {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        frames: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RetimeMode {
    Even,
    Seeded,
}

fn load_motion(path: &Path) -> Result<motion::MotionSequence, CliError> {
    io::load_motion_auto(path).map_err(|e| CliError::from_core(e, path))
}

fn load_supermotion(path: &Path) -> Result<codec::SuperMotionSequence, CliError> {
    io::load_supermotion(path).map_err(|e| CliError::from_core(e, path))
}

fn load_model(path: &Path) -> Result<cluster::ClusterModel, CliError> {
    io::load_cluster_model(path).map_err(|e| CliError::from_core(e, path))
}

fn load_skeleton(path: &Path) -> Result<motion::Skeleton, CliError> {
    io::load_skeleton_json(path).map_err(|e| CliError::from_core(e, path))
}

/// Write through the core's atomic writer, mapping failures to exit 1.
fn write_output(path: &Path, write: impl FnOnce() -> Result<(), CoreError>) -> Result<(), CliError> {
    write().map_err(|e| CliError::internal(e, path))
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json output"));
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::FitClusters {
            input,
            k,
            seed,
            batch_size,
            max_iters,
            tol,
            out,
        } => {
            let seed = resolve_seed(seed)?;
            let mut fields = Vec::with_capacity(input.len());
            for path in &input {
                let m = load_motion(path)?;
                fields.push(motion::compute_velocity_field(&m));
            }
            let config = cluster::FitConfig {
                seed,
                batch_size,
                max_iters,
                tol,
            };
            let model = cluster::fit_clusters(&fields, k, &config)
                .map_err(CliError::bad_input_core)?;
            write_output(&out, || io::save_cluster_model(&out, &model))?;
            print_json(&json!({
                "k": model.k(),
                "feature_dim": model.feature_dim(),
                "inertia": model.inertia(),
                "iterations_run": model.iterations_run(),
                "out": out,
            }));
            Ok(())
        }

        Command::Encode {
            input,
            model,
            opts,
            out,
        } => {
            let m = load_motion(&input)?;
            let model = load_model(&model)?;
            let sm = codec::encode(&m, &model, &opts.to_config())
                .map_err(CliError::bad_input_core)?;
            write_output(&out, || io::save_supermotion(&out, &sm))?;
            let report =
                codec::compression_report(&m, &sm).map_err(CliError::bad_input_core)?;
            print_json(&serde_json::to_value(report).expect("report json"));
            Ok(())
        }

        Command::Decode {
            input,
            out,
            reorthonormalize,
        } => {
            let sm = load_supermotion(&input)?;
            let mut decoded = codec::decode(&sm).map_err(CliError::bad_input_core)?;
            if reorthonormalize {
                decoded =
                    motion::reorthonormalize(&decoded).map_err(CliError::bad_input_core)?;
            }
            write_output(&out, || io::save_motion(&out, &decoded))?;
            print_json(&json!({"frames": decoded.num_frames(), "out": out}));
            Ok(())
        }

        Command::Roundtrip {
            input,
            model,
            skeleton,
            opts,
        } => {
            let m = load_motion(&input)?;
            let model = load_model(&model)?;
            let sm = codec::encode(&m, &model, &opts.to_config())
                .map_err(CliError::bad_input_core)?;
            let decoded = codec::decode(&sm).map_err(CliError::bad_input_core)?;
            let report =
                codec::compression_report(&m, &sm).map_err(CliError::bad_input_core)?;

            let mpjpe = match m.representation() {
                motion::Representation::Cartesian3D => {
                    metrics::mpjpe(&m, &decoded).map_err(CliError::bad_input_core)?
                }
                motion::Representation::Rot6D => {
                    let Some(sk_path) = skeleton else {
                        return Err(CliError::bad_input(
                            "SKELETON_REQUIRED",
                            "6D roundtrip needs --skeleton to evaluate MPJPE through FK",
                            json!({"input": input}),
                        ));
                    };
                    let sk = load_skeleton(&sk_path)?;
                    let a = lamof_core::fk_motion(&m, &sk).map_err(CliError::bad_input_core)?;
                    let b = lamof_core::fk_motion(&decoded, &sk)
                        .map_err(CliError::bad_input_core)?;
                    metrics::mpjpe(&a, &b).map_err(CliError::bad_input_core)?
                }
            };
            let coherent = if sm.num_segments() >= 2 {
                Some(metrics::coherent_metric(&sm).map_err(CliError::bad_input_core)?)
            } else {
                None
            };
            print_json(&json!({
                "compression": report,
                "mpjpe": mpjpe,
                "coherent_metric": coherent,
            }));
            Ok(())
        }

        Command::Metrics {
            a,
            b,
            weights,
            skeleton,
        } => {
            let sa = load_supermotion(&a)?;
            let sb = load_supermotion(&b)?;
            let weights = match weights {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::from_core(e.into(), &path))?;
                    serde_json::from_str::<metrics::MetricWeights>(&text)
                        .map_err(|e| CliError::from_core(e.into(), &path))?
                }
                None => metrics::MetricWeights::default(),
            };
            let sk = skeleton.map(|p| load_skeleton(&p)).transpose()?;

            let recon = metrics::recon_metric(&sa, &sb).map_err(CliError::bad_input_core)?;
            let vel = metrics::velocity_metric(&sa, &sb).map_err(CliError::bad_input_core)?;
            let joint = match (&sk, sa.representation()) {
                (Some(sk), motion::Representation::Rot6D) => {
                    Some(metrics::joint_metric(&sa, &sb, sk).map_err(CliError::bad_input_core)?)
                }
                _ => None,
            };
            // Contact labels come from the reference sequence b.
            let contact = match (&sk, sa.representation()) {
                (Some(sk), motion::Representation::Cartesian3D)
                    if !sk.foot_joint_indices.is_empty() =>
                {
                    let reference = codec::decode(&sb).map_err(CliError::bad_input_core)?;
                    let contacts = metrics::detect_contacts(
                        &reference,
                        sk,
                        metrics::ContactThresholds::default(),
                    )
                    .map_err(CliError::bad_input_core)?;
                    Some(
                        metrics::contact_metric(&sa, sk, &contacts)
                            .map_err(CliError::bad_input_core)?,
                    )
                }
                _ => None,
            };
            let coherent = if sa.num_segments() >= 2 {
                Some(metrics::coherent_metric(&sa).map_err(CliError::bad_input_core)?)
            } else {
                None
            };
            let components = metrics::MetricComponents {
                recon,
                joint: joint.unwrap_or(0.0),
                vel,
                contact: contact.unwrap_or(0.0),
                coherent: coherent.unwrap_or(0.0),
            };
            let total =
                metrics::total_metric(&components, &weights).map_err(CliError::bad_input_core)?;
            print_json(&json!({
                "recon": recon,
                "joint": joint,
                "vel": vel,
                "contact": contact,
                "coherent": coherent,
                "total": total,
                "weights": weights,
            }));
            Ok(())
        }

        Command::Fsr {
            input,
            skeleton,
            max_height,
            skate_speed,
        } => {
            let m = load_motion(&input)?;
            let sk = load_skeleton(&skeleton)?;
            let fsr = metrics::foot_skating_ratio(
                &m,
                &sk,
                metrics::FsrThresholds {
                    max_height,
                    skate_speed,
                },
            )
            .map_err(CliError::bad_input_core)?;
            print_json(&json!({"fsr": fsr, "frames": m.num_frames()}));
            Ok(())
        }

        Command::Stitch {
            clips,
            transition,
            out,
        } => {
            let mut motions = Vec::with_capacity(clips.len());
            for path in &clips {
                motions.push(load_motion(path)?);
            }
            let mut acc = motions[0].clone();
            for m in &motions[1..] {
                acc = stitch::stitch(&acc, m, transition).map_err(CliError::bad_input_core)?;
            }
            write_output(&out, || io::save_motion(&out, &acc))?;
            print_json(&json!({"frames": acc.num_frames(), "out": out}));
            Ok(())
        }

        Command::BuildCorpus {
            manifest,
            count,
            clips_per_sample,
            seed,
            transition,
            len_min,
            len_max,
            workers,
            out_dir,
        } => {
            let seed = resolve_seed(seed)?;
            let entries: Vec<io::ClipManifestEntry> =
                io::read_jsonl(&manifest).map_err(|e| CliError::from_core(e, &manifest))?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let mut clips = Vec::with_capacity(entries.len());
            for entry in &entries {
                let m = load_motion(&base.join(&entry.motion))?;
                clips.push(stitch::Clip {
                    motion: m,
                    prompt: entry.prompt.clone(),
                });
            }
            let config = stitch::StitchConfig {
                transition_frames: transition,
                clip_count: clips_per_sample,
                seed,
                len_min,
                len_max,
            };
            let samples = parallel::run_with_threads(workers, || {
                stitch::build_corpus(&clips, count, &config)
            })
            .map_err(CliError::bad_input_core)?;

            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::internal(e.into(), &out_dir))?;
            let mut records = Vec::with_capacity(samples.len());
            for sample in &samples {
                let id = format!("sample_{:05}", sample.index);
                let path = out_dir.join(format!("{id}.lmf"));
                write_output(&path, || io::save_motion(&path, &sample.motion))?;
                records.push(io::CorpusSampleRecord {
                    id,
                    clip_ids: sample
                        .clip_indices
                        .iter()
                        .map(|&i| entries[i].id.clone())
                        .collect(),
                    seed: sample.seed,
                    total_frames: sample.motion.num_frames(),
                    prompt: sample.prompt.clone(),
                });
            }
            let manifest_out = out_dir.join("manifest.jsonl");
            write_output(&manifest_out, || io::write_jsonl(&manifest_out, &records))?;
            print_json(&json!({"samples": records.len(), "out_dir": out_dir}));
            Ok(())
        }

        Command::Loop { input, out, report } => {
            let sm = load_supermotion(&input)?;
            let looped = apps::loop_close(&sm).map_err(CliError::bad_input_core)?;
            write_output(&out, || io::save_supermotion(&out, &looped))?;
            if report {
                let seam = apps::loop_seam_report(&looped).map_err(CliError::bad_input_core)?;
                print_json(&serde_json::to_value(seam).expect("seam json"));
            } else {
                print_json(&json!({"segments": looped.num_segments(), "out": out}));
            }
            Ok(())
        }

        Command::Retime {
            input,
            total,
            d_min,
            d_max,
            mode,
            seed,
            out,
        } => {
            let sm = load_supermotion(&input)?;
            let mode = match mode {
                RetimeMode::Even => apps::DecomposeMode::Even,
                RetimeMode::Seeded => apps::DecomposeMode::Seeded(resolve_seed(seed)?),
            };
            let plan = apps::decompose_duration(total, sm.num_segments(), d_min, d_max, mode)
                .map_err(CliError::bad_input_core)?;
            let retimed =
                apps::retime_supermotions(&sm, &plan).map_err(CliError::bad_input_core)?;
            write_output(&out, || io::save_supermotion(&out, &retimed))?;
            print_json(&json!({
                "total_frames": retimed.total_frames(),
                "durations": plan.durations,
                "out": out,
            }));
            Ok(())
        }

        Command::Resample { input, frames, out } => {
            let m = load_motion(&input)?;
            let resampled =
                apps::match_music_length(&m, frames).map_err(CliError::bad_input_core)?;
            write_output(&out, || io::save_motion(&out, &resampled))?;
            print_json(&json!({"frames": resampled.num_frames(), "out": out}));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
