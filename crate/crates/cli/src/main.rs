//! `sav`: build and evaluate spatially aligned audio-video clip datasets.
//!
//! Exit codes: 0 on success, 1 on input or validation errors, 2 on
//! internal errors.

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sav_cli::commands::{convert, eval_align, eval_frechet, eval_seld, stats};
use sav_cli::config::{PipelineConfig, RecordingInput};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "sav",
    version,
    about = "Build and evaluate spatially aligned audio-video clip datasets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert recordings into curated stereo-audio/perspective-video clips
    Convert(ConvertArgs),
    /// Fréchet distance between reference and candidate embedding sets
    EvalFrechet {
        /// Reference embeddings (.csv or EMBF32 binary)
        reference: PathBuf,
        /// Candidate embeddings (.csv or EMBF32 binary)
        candidate: PathBuf,
    },
    /// Spatial AV-Align between detection and sound-event record files
    EvalAlign(EvalAlignCli),
    /// Frame-level F-score and masked MSE for localization predictions
    EvalSeld(EvalSeldCli),
    /// Summarize an existing manifest
    Stats {
        /// Path to a manifest.jsonl
        manifest: PathBuf,
    },
}

#[derive(Args)]
struct ConvertArgs {
    /// TOML config file; any flag below overrides its value
    #[arg(long)]
    config: Option<PathBuf>,
    /// 4-channel Ambisonics WAV of a single recording
    #[arg(long)]
    foa: Option<PathBuf>,
    /// Directory of extracted equirectangular frames (with frames.json)
    #[arg(long)]
    frames: Option<PathBuf>,
    /// Sound-event label CSV
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Recording id; defaults to the FOA file stem
    #[arg(long)]
    recording_id: Option<String>,
    /// Output directory
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Window start step in seconds
    #[arg(long)]
    time_step: Option<f64>,
    /// Viewing-angle step in degrees
    #[arg(long)]
    yaw_step: Option<f64>,
    /// Minimum active fraction of a clip
    #[arg(long)]
    activity_threshold: Option<f64>,
    /// Keep clips with simultaneously active sources
    #[arg(long)]
    allow_overlap: bool,
    /// Keep clips with offscreen target events
    #[arg(long)]
    allow_offscreen: bool,
    /// Gain applied to the stereo audio, in dB
    #[arg(long)]
    gain_db: Option<f64>,
    /// Skip the high-pass filter
    #[arg(long)]
    no_highpass: bool,
}

#[derive(Args)]
struct EvalAlignCli {
    /// Detection records (JSON lines)
    #[arg(long)]
    detections: PathBuf,
    /// Sound-event records (JSON lines)
    #[arg(long)]
    seld: PathBuf,
    /// TOML config file providing the [align] section
    #[arg(long)]
    config: Option<PathBuf>,
    /// Margin around the estimated position, fraction of canvas width
    #[arg(long)]
    margin: Option<f64>,
    /// Minimum activity for a sound event to count
    #[arg(long)]
    activity_threshold: Option<f64>,
    /// Video frames searched on each side of the nearest frame
    #[arg(long)]
    adjacency: Option<usize>,
    /// Minimum video frames per clip
    #[arg(long, default_value_t = 20)]
    video_frames: usize,
    /// Minimum audio frames per clip
    #[arg(long, default_value_t = 50)]
    audio_frames: usize,
    /// Canvas width in pixels
    #[arg(long, default_value_t = 256.0)]
    canvas_width: f64,
    /// Canvas height in pixels
    #[arg(long, default_value_t = 256.0)]
    canvas_height: f64,
    /// Corpus aggregation
    #[arg(long, value_enum, default_value_t = AggregateArg::Pooled)]
    aggregate: AggregateArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AggregateArg {
    Pooled,
    Mean,
}

#[derive(Args)]
struct EvalSeldCli {
    /// Predicted sound-event records (JSON lines)
    #[arg(long)]
    predictions: PathBuf,
    /// Reference sound-event records (JSON lines)
    #[arg(long)]
    labels: PathBuf,
    /// Activity threshold
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

fn resolve_convert_config(args: &ConvertArgs) -> Result<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::load_toml(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(output) = &args.output {
        config.output_root = output.clone();
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    if let Some(step) = args.time_step {
        config.curation.time_step_s = step;
    }
    if let Some(step) = args.yaw_step {
        config.curation.yaw_step_deg = step;
    }
    if let Some(threshold) = args.activity_threshold {
        config.curation.activity_threshold = threshold;
    }
    if args.allow_overlap {
        config.curation.allow_overlap = true;
    }
    if args.allow_offscreen {
        config.curation.require_onscreen = false;
    }
    if let Some(gain) = args.gain_db {
        config.dsp.gain_db = gain;
    }
    if args.no_highpass {
        config.dsp.highpass = false;
    }
    match (&args.foa, &args.frames, &args.labels) {
        (Some(foa), Some(frames), Some(labels)) => {
            let recording_id = match &args.recording_id {
                Some(id) => id.clone(),
                None => foa
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "recording".to_string()),
            };
            config.recordings.push(RecordingInput {
                recording_id,
                foa_wav: foa.clone(),
                frames_dir: frames.clone(),
                labels_csv: labels.clone(),
            });
        }
        (None, None, None) => {}
        _ => bail!("--foa, --frames, and --labels must be given together"),
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert(args) => {
            let config = resolve_convert_config(&args)?;
            let outcome = convert::run(&config)?;
            print!("{}", outcome.stats);
            println!("manifest: {}", outcome.manifest_path.display());
            if !outcome.failures.is_empty() {
                bail!(
                    "{} recording(s) failed: {}",
                    outcome.failures.len(),
                    outcome
                        .failures
                        .iter()
                        .map(|(id, _)| id.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
            Ok(())
        }
        Command::EvalFrechet {
            reference,
            candidate,
        } => {
            let distance = eval_frechet::run(&reference, &candidate)?;
            println!("{distance:.4}");
            Ok(())
        }
        Command::EvalAlign(args) => {
            let mut config = match &args.config {
                Some(path) => PipelineConfig::load_toml(path)?.align,
                None => Default::default(),
            };
            if let Some(margin) = args.margin {
                config.margin = margin;
            }
            if let Some(threshold) = args.activity_threshold {
                config.activity_threshold = threshold;
            }
            if let Some(adjacency) = args.adjacency {
                config.adjacency = adjacency;
            }
            let aggregate = match args.aggregate {
                AggregateArg::Pooled => eval_align::Aggregate::Pooled,
                AggregateArg::Mean => eval_align::Aggregate::Mean,
            };
            let report = eval_align::run(&eval_align::EvalAlignArgs {
                detections: args.detections,
                seld: args.seld,
                config,
                video_frames: args.video_frames,
                audio_frames: args.audio_frames,
                canvas_width: args.canvas_width,
                canvas_height: args.canvas_height,
                aggregate,
            })?;
            eval_align::print_report(&report, aggregate);
            Ok(())
        }
        Command::EvalSeld(args) => {
            let report = eval_seld::run(&eval_seld::EvalSeldArgs {
                predictions: args.predictions,
                labels: args.labels,
                threshold: args.threshold,
            })?;
            eval_seld::print_report(&report);
            Ok(())
        }
        Command::Stats { manifest } => {
            let (header, stats) = stats::run(&manifest)?;
            println!("tool_version: {}", header.tool_version);
            println!("config_hash: {}", header.config_hash);
            print!("{stats}");
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| run(cli));
    let code = match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            1
        }
        Err(_) => 2,
    };
    std::process::exit(code);
}
