//! The `mmrec` command line.
//!
//! ```text
//! mmrec gen-data --out DIR --seed N [--videos 386] [--audio] [--config FILE]
//! mmrec train --data DIR --out MODELDIR [--config FILE]
//! mmrec eval --data DIR --models MODELDIR
//! mmrec sweep-alpha --models MODELDIR [--grid 0:1:0.1]
//! mmrec report (--models MODELDIR | --results FILE) --format csv|md [--out DIR]
//! mmrec fuse-decide --image-prob P --voice-prob Q [--threshold 0.5]
//! ```
//!
//! Exit status is 0 on success, 2 on invalid input or configuration and 1
//! on I/O failures.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mmrec_core::fusion::{decision_fusion, detected, fusion_records_to_csv, FusionRecord};

use crate::cache::ProbabilityCache;
use crate::config::HarnessConfig;
use crate::dataset::{generate_dataset, Manifest, SyntheticDatasetSpec};
use crate::error::{io_err, read_json, read_text, write_json, write_text, HarnessError, Result};
use crate::experiment::{evaluate, load_videos, refused_probs, score, train_models, TrainedModels};
use crate::report::{ExperimentResult, ReportFormat};
use crate::sweep::{sweep_alpha, AlphaGrid};

pub const CONFIG_FILE: &str = "config.txt";
pub const MODELS_FILE: &str = "models.json";
pub const CACHE_FILE: &str = "cache.json";
pub const RESULTS_FILE: &str = "results.json";
pub const FUSION_FILE: &str = "fusion.csv";
pub const VERIFICATION_FILE: &str = "verification.csv";
pub const TABLE_CSV_FILE: &str = "table.csv";
pub const TABLE_MD_FILE: &str = "table.md";
pub const CURVE_FILE: &str = "alpha_curve.csv";

#[derive(Debug, Parser)]
#[command(name = "mmrec", version, about = "Multimodal action recognition benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the seeded synthetic dataset.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        videos: Option<usize>,
        /// Also render an audio track per video.
        #[arg(long)]
        audio: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train the RGB, skeleton, SVM (and audio) models.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score the held-out split and cache per-modality probabilities.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        models: PathBuf,
    },
    /// Re-fuse cached probabilities over a grid of alpha values.
    SweepAlpha {
        #[arg(long, default_value = ".")]
        models: PathBuf,
        /// `start:stop:step` or a comma list; defaults to the config grid.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Render the accuracy table (and alpha curve) as CSV or Markdown.
    Report {
        #[arg(long, conflicts_with = "results")]
        models: Option<PathBuf>,
        /// A results JSON file written by `eval` or `sweep-alpha`.
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long, default_value = "md")]
        format: String,
        /// Write files here instead of printing to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Image/voice mutual verification for one pedestrian.
    FuseDecide {
        #[arg(long)]
        image_prob: f64,
        #[arg(long)]
        voice_prob: f64,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
}

fn load_config(path: Option<&Path>) -> Result<HarnessConfig> {
    match path {
        Some(p) => HarnessConfig::from_text(&read_text(p)?),
        None => Ok(HarnessConfig::default()),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

fn probability(name: &str, p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(HarnessError::Config(format!("{name} must be in [0, 1], got {p}")))
    }
}

pub fn gen_data(out: &Path, seed: Option<u64>, videos: Option<usize>, audio: bool, config: Option<&Path>) -> Result<Manifest> {
    let cfg = load_config(config)?;
    let spec = SyntheticDatasetSpec {
        seed: seed.unwrap_or(cfg.seed),
        n_videos: videos.unwrap_or(cfg.videos),
        audio: audio || cfg.audio,
        ..SyntheticDatasetSpec::default()
    };
    spec.validate()?;
    create_dir(out)?;
    generate_dataset(&spec, out)
}

pub fn train(data: &Path, out: &Path, config: Option<&Path>) -> Result<TrainedModels> {
    let mut cfg = load_config(config)?;
    let manifest = Manifest::load(data)?;
    // The dataset decides whether audio is available.
    cfg.audio = manifest.spec.audio;
    cfg.seed = manifest.spec.seed;
    let videos = load_videos(data, &manifest)?;
    let models = train_models(&videos, &manifest, &cfg)?;
    create_dir(out)?;
    write_text(&out.join(CONFIG_FILE), &cfg.to_text())?;
    write_json(&out.join(MODELS_FILE), &models)?;
    Ok(models)
}

pub fn eval(data: &Path, models_dir: &Path) -> Result<ExperimentResult> {
    let cfg = HarnessConfig::from_text(&read_text(&models_dir.join(CONFIG_FILE))?)?;
    let models: TrainedModels = read_json(&models_dir.join(MODELS_FILE))?;
    if models.config_hash != cfg.hash() {
        return Err(HarnessError::Config(format!(
            "{} does not match the config the models were trained with",
            models_dir.join(CONFIG_FILE).display()
        )));
    }
    let manifest = Manifest::load(data)?;
    let videos = load_videos(data, &manifest)?;
    let cache = evaluate(&models, &videos, &cfg)?;
    let result = score(&cache, cfg.seed, &cfg.hash())?;
    write_json(&models_dir.join(CACHE_FILE), &cache)?;
    write_json(&models_dir.join(RESULTS_FILE), &result)?;

    let final_probs = refused_probs(&cache)?;
    let records: Vec<FusionRecord> = cache
        .ids
        .iter()
        .zip(&final_probs)
        .map(|(id, p)| FusionRecord {
            video_id: id.clone(),
            probs: p.clone(),
            decision: p.decision(),
        })
        .collect();
    write_text(&models_dir.join(FUSION_FILE), &fusion_records_to_csv(&records)?)?;

    if let Some(voice) = &cache.audio_special {
        let mut body = String::from("video_id,label,image_prob,voice_prob,outcome\n");
        for ((id, label), (p, &q)) in cache.ids.iter().zip(&cache.labels).zip(final_probs.iter().zip(voice)) {
            let image = p.get(cache.special_class);
            let d = decision_fusion(detected(image, 0.5), detected(q, 0.5));
            body.push_str(&format!("{id},{label},{image},{q},{}\n", d.outcome));
        }
        write_text(&models_dir.join(VERIFICATION_FILE), &body)?;
    }
    Ok(result)
}

pub fn sweep(models_dir: &Path, grid: Option<&str>) -> Result<ExperimentResult> {
    let grid = match grid {
        Some(g) => g.parse::<AlphaGrid>()?,
        None => HarnessConfig::from_text(&read_text(&models_dir.join(CONFIG_FILE))?)?.alpha_grid,
    };
    let cache: ProbabilityCache = read_json(&models_dir.join(CACHE_FILE))?;
    let mut result: ExperimentResult = read_json(&models_dir.join(RESULTS_FILE))?;
    result.curve = sweep_alpha(&cache, &grid)?;
    write_json(&models_dir.join(RESULTS_FILE), &result)?;
    let curve_path = models_dir.join(CURVE_FILE);
    match result.curve_csv()? {
        Some(text) => write_text(&curve_path, &text)?,
        None if curve_path.exists() => std::fs::remove_file(&curve_path).map_err(io_err(&curve_path))?,
        None => {}
    }
    Ok(result)
}

/// Rendered report files as `(file name, contents)`.
pub fn render_report(result: &ExperimentResult, format: ReportFormat) -> Result<Vec<(&'static str, String)>> {
    result.validate()?;
    let mut files = match format {
        ReportFormat::Markdown => vec![(TABLE_MD_FILE, result.to_markdown())],
        ReportFormat::Csv => vec![(TABLE_CSV_FILE, result.table_csv()?)],
    };
    if let Some(curve) = result.curve_csv()? {
        files.push((CURVE_FILE, curve));
    }
    Ok(files)
}

pub fn report(models: Option<&Path>, results: Option<&Path>, format: &str, out: Option<&Path>) -> Result<String> {
    let format: ReportFormat = format.parse()?;
    let path = match (models, results) {
        (_, Some(r)) => r.to_path_buf(),
        (Some(m), None) => m.join(RESULTS_FILE),
        (None, None) => return Err(HarnessError::Config("report needs --models or --results".into())),
    };
    let result: ExperimentResult = read_json(&path)?;
    let files = render_report(&result, format)?;
    match out {
        Some(dir) => {
            create_dir(dir)?;
            let mut written = String::new();
            for (name, text) in &files {
                let p = dir.join(name);
                write_text(&p, text)?;
                written.push_str(&format!("{}\n", p.display()));
            }
            Ok(written)
        }
        None => Ok(files[0].1.clone()),
    }
}

/// Runs one command and returns what it prints on stdout.
pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::GenData {
            out,
            seed,
            videos,
            audio,
            config,
        } => {
            let m = gen_data(&out, seed, videos, audio, config.as_deref())?;
            Ok(format!("wrote {} videos to {}\n", m.videos.len(), out.display()))
        }
        Command::Train { data, out, config } => {
            let m = train(&data, &out, config.as_deref())?;
            Ok(format!("trained models in {} (alpha = {}, config {})\n", out.display(), m.alpha, m.config_hash))
        }
        Command::Eval { data, models } => Ok(eval(&data, &models)?.to_markdown()),
        Command::SweepAlpha { models, grid } => {
            let r = sweep(&models, grid.as_deref())?;
            Ok(r.curve_csv()?.unwrap_or_default())
        }
        Command::Report {
            models,
            results,
            format,
            out,
        } => report(models.as_deref(), results.as_deref(), &format, out.as_deref()),
        Command::FuseDecide {
            image_prob,
            voice_prob,
            threshold,
        } => {
            let img = probability("--image-prob", image_prob)?;
            let voice = probability("--voice-prob", voice_prob)?;
            let th = probability("--threshold", threshold)?;
            Ok(format!("{}\n", decision_fusion(detected(img, th), detected(voice, th)).outcome))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
