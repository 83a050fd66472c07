//! Command-line front end: `analyze`, `serve`, `train`, `compare`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use super::http::{serve, ServeConfig};
use super::{error_body, run_analysis, to_record, AnalysisInput};
use crate::livewire::{contour_from_json, RegionMask};
use crate::quantify::{QuantParams, DEFAULT_SOFTNESS};
use crate::raster::{self, SliceMeta};
use crate::spine::{self, LinearSvmModel, SpineCenter};
use crate::store::{MuscleLabel, RecordStore, TrainingPhase};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "lumbarfat", version, about = "Lumbar muscle fat quantification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantify one muscle mask and append the record to a CSV.
    Analyze(AnalyzeArgs),
    /// Run the local HTTP service.
    Serve(ServeArgs),
    /// Train the spinal-column patch classifier from a manifest.
    Train(TrainArgs),
    /// Pre/post-training comparison for one patient.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Metadata sidecar; defaults to `<image>.meta.json`.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    /// Closed contour as a JSON list of `[x, y]` vertices.
    #[arg(long)]
    pub mask: PathBuf,
    /// Defaults to the whole-image Otsu level.
    #[arg(long)]
    pub threshold: Option<u8>,
    #[arg(long, default_value_t = DEFAULT_SOFTNESS)]
    pub softness: f64,
    /// Fragment an erector spinae mask into this many regions.
    #[arg(long)]
    pub regions: Option<usize>,
    /// Manual spine centre `x,y`, skipping detection.
    #[arg(long, value_parser = parse_point)]
    pub center: Option<(f64, f64)>,
    /// Classifier used when cord detection fails.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub label: MuscleLabel,
    #[arg(long, default_value = "unspecified")]
    pub phase: TrainingPhase,
    #[arg(long)]
    pub out_csv: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, env = "LUMBARFAT_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "LUMBARFAT_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    #[arg(long, env = "LUMBARFAT_MODEL")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Cross-validation folds; 0 skips cross-validation.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Skip adding horizontally flipped copies of every sample.
    #[arg(long)]
    pub no_flip: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub patient: String,
}

fn parse_point(s: &str) -> std::result::Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| e.to_string());
    Ok((p(x)?, p(y)?))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

/// Run `analyze`; returns the printed JSON (quantification, plus fragments
/// and the spine centre when fragmenting).
pub fn analyze(args: &AnalyzeArgs) -> Result<Value> {
    let sidecar = args
        .sidecar
        .clone()
        .unwrap_or_else(|| SliceMeta::sidecar_path(&args.image));
    let meta = SliceMeta::from_json(&read_text(&sidecar)?)?;
    let png = std::fs::read(&args.image)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", args.image.display())))?;
    let image = raster::load_image(&png, Some(&meta))?;
    let contour = contour_from_json(&read_text(&args.mask)?)?;
    if contour.len() < 3 {
        return Err(Error::validation(format!(
            "mask needs at least 3 vertices, has {}",
            contour.len()
        )));
    }
    let mask = RegionMask::from_polygon(&contour);
    mask.check_within(image.width(), image.height())?;
    let threshold = match args.threshold {
        Some(t) => t,
        None => raster::otsu_threshold(&raster::histogram(&image, None)?)?,
    };
    let model = args.model.as_deref().map(LinearSvmModel::load).transpose()?;
    let input = AnalysisInput {
        image: &image,
        meta: &meta,
        mask: &mask,
        params: QuantParams::new(threshold, args.softness)?,
        label: args.label,
        phase: args.phase,
        regions: args.regions,
        center: args.center.map(|(x, y)| SpineCenter::manual(x, y)),
        model: model.as_ref(),
    };
    let outcome = run_analysis(&input)?;
    let record = to_record(&input, &outcome, Utc::now())?;
    let mut store = RecordStore::open(&args.out_csv)?;
    let record_id = store.append(&record)?;

    let q = &outcome.quant;
    let mut out = serde_json::to_value(q)?;
    out["rounded"] = json!({
        "fat_percent": q.fat_percent_rounded(),
        "tcsa_mm2": q.tcsa_rounded(),
        "fcsa_mm2": q.fcsa_rounded(),
    });
    if let Some(f) = &outcome.fragments {
        out["fragments"] = f.to_json();
    }
    if let Some(c) = &outcome.spine_center {
        out["spine_center"] = serde_json::to_value(c)?;
    }
    out["record_id"] = json!(record_id);
    Ok(out)
}

pub fn train(args: &TrainArgs) -> Result<Value> {
    let mut samples = spine::load_training_manifest(&args.manifest)?;
    if !args.no_flip {
        samples = spine::augment_with_flips(&samples);
    }
    let cv = if args.folds > 0 {
        let r = spine::cross_validate(&samples, args.folds, args.c)?;
        json!({
            "fold_accuracies": r.fold_accuracies,
            "fold_sizes": r.fold_sizes,
            "mean_accuracy": r.mean_accuracy(),
        })
    } else {
        Value::Null
    };
    let model = spine::train_svm(&samples, args.c)?;
    model.save(&args.out)?;
    Ok(json!({
        "samples": samples.len(),
        "model": args.out,
        "cross_validation": cv,
    }))
}

pub fn compare(args: &CompareArgs) -> Result<Value> {
    let store = RecordStore::open(&args.csv)?;
    let report = store.compare_phases(&args.patient)?;
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).expect("serializable");
            v["total_delta"] = json!(r.total_delta());
            v["region_deltas"] = json!(r.region_deltas());
            v
        })
        .collect();
    Ok(json!({ "rows": rows, "warnings": report.warnings }))
}

fn emit(result: Result<Value>) -> ExitCode {
    match result {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", error_body(&e));
            ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Analyze(a) => emit(analyze(&a)),
        Command::Train(a) => emit(train(&a)),
        Command::Compare(a) => emit(compare(&a)),
        Command::Serve(a) => {
            let config = ServeConfig {
                port: a.port,
                data_dir: a.data_dir,
                model: a.model,
            };
            let served = tokio::runtime::Runtime::new()
                .map_err(Error::from)
                .and_then(|rt| rt.block_on(serve(config)));
            match served {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => emit(Err(e)),
            }
        }
    }
}

pub fn main() -> ExitCode {
    run(Cli::parse())
}
