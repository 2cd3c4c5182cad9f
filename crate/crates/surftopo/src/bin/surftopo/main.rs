//! Command-line interface: synthetic data generation, feature extraction,
//! training, prediction, evaluation, tuning, and rendering.
//!
//! Every data-producing command writes a `.conf` sidecar next to its main
//! output recording the invocation; `surftopo rerun --config <sidecar>`
//! replays it. Errors are reported as a single `error: ...` line on stderr
//! with a nonzero exit code.

mod sidecar;

use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use surftopo::clbp::{ClbpConfig, ClbpEncoding};
use surftopo::cubical::{build_filtration, Direction};
use surftopo::descriptors::{PiAxes, PiConfig};
use surftopo::eval::{dsc, fisher_scores, run_experiment, select_hyperparameters, ExperimentPlan};
use surftopo::ingest::{
    extract_patches, load_depth_map, load_label_mask, normalize_patch, DepthFormat, NormalizeMode,
};
use surftopo::pipeline::{
    extract_diagrams, extract_features, global_value_bounds, DescriptorConfig, DimSelection,
    FeatureConfig, FeatureTable, InputRep, MapSet,
};
use surftopo::render::{render_diagram, render_grid, render_mask_overlay, ColorMap};
use surftopo::rusboost::{train_rusboost, BoostedEnsemble, RusBoostConfig};
use surftopo::synth::{generate_set, SyntheticSpec};
use surftopo::wilcoxon::wilcoxon_signed_rank;
use surftopo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "surftopo",
    version,
    about = "Classify engraved surface regions by the persistent homology of depth patches"
)]
struct Cli {
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic benchmark surfaces with ground-truth masks.
    Generate(GenerateArgs),
    /// Extract descriptor features from depth maps into a CSV table.
    Extract(Box<ExtractArgs>),
    /// Train a boosted classifier on a feature table.
    Train(TrainArgs),
    /// Predict patch classes with a trained model.
    Predict(PredictArgs),
    /// Run the repeated subsampling protocol and report Dice scores.
    Evaluate(EvaluateArgs),
    /// Pick boosting hyperparameters by cross-validation.
    Tune(TuneArgs),
    /// Render diagrams, descriptor grids, score maps, or overlays as PNG.
    Render(RenderArgs),
    /// Replay a recorded invocation from a sidecar file.
    Rerun(RerunArgs),
}

// ---------------------------------------------------------------- shared

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    /// Grayscale PNG (8- or 16-bit).
    Png,
    /// Whitespace-separated text matrix.
    Text,
}

impl FormatArg {
    fn to_format(self) -> DepthFormat {
        match self {
            FormatArg::Png => DepthFormat::Png16,
            FormatArg::Text => DepthFormat::TextMatrix,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ColorArg {
    Gray,
    Viridis,
}

impl ColorArg {
    fn to_map(self) -> ColorMap {
        match self {
            ColorArg::Gray => ColorMap::Gray,
            ColorArg::Viridis => ColorMap::Viridis,
        }
    }
}

/// Majority:minority ratio, or `none` for plain AdaBoost.
#[derive(Clone, Debug)]
struct RatioArg(Option<f64>);

impl std::str::FromStr for RatioArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("none") {
            Ok(RatioArg(None))
        } else {
            s.parse::<f64>()
                .map(|v| RatioArg(Some(v)))
                .map_err(|e| format!("expected a number or 'none': {e}"))
        }
    }
}

#[derive(Args, Clone)]
struct BoostArgs {
    /// Boosting rounds.
    #[arg(long, default_value_t = 50)]
    rounds: usize,
    /// Maximum tree depth.
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    /// Majority:minority sample size ratio per round, or 'none' to train
    /// on the full set every round (plain AdaBoost).
    #[arg(long, default_value = "1.0")]
    undersample_ratio: RatioArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Redraws allowed per round when the fitted tree errs too much.
    #[arg(long, default_value_t = 10)]
    max_redraws: usize,
}

impl BoostArgs {
    fn config(&self) -> RusBoostConfig {
        RusBoostConfig {
            rounds: self.rounds,
            max_depth: self.max_depth,
            undersample_ratio: self.undersample_ratio.0,
            seed: self.seed,
            max_redraws: self.max_redraws,
        }
    }
}

// -------------------------------------------------------------- generate

#[derive(Args)]
struct GenerateArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    /// Number of surfaces (seeds step by one).
    #[arg(long, default_value_t = 4)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 512)]
    height: usize,
    #[arg(long, default_value_t = 512)]
    width: usize,
    /// Desired engraved pixel fraction.
    #[arg(long, default_value_t = 0.166)]
    target_fraction: f64,
    #[arg(long, default_value_t = 0.02)]
    fraction_tolerance: f64,
    #[arg(long, default_value_t = 48)]
    waves: usize,
    #[arg(long, default_value_t = 1.1)]
    roughness: f64,
    #[arg(long, default_value_t = 0.22)]
    base_amplitude: f64,
    #[arg(long, default_value_t = 0.004)]
    noise: f64,
    #[arg(long, default_value_t = 0.32)]
    groove_depth: f64,
    #[arg(long, default_value_t = 7.0)]
    groove_width: f64,
    /// Heading jitter per stroke segment; higher curls the grooves.
    #[arg(long, default_value_t = 0.55)]
    stroke_turn: f64,
    /// Natural pit count (confounding clutter).
    #[arg(long, default_value_t = 140)]
    pits: usize,
    #[arg(long, default_value_t = 0.26)]
    pit_depth: f64,
    #[arg(long, default_value_t = 7.0)]
    pit_radius: f64,
    /// Also write red-tinted mask overlays.
    #[arg(long)]
    overlay: bool,
}

fn run_generate(args: &GenerateArgs) -> Result<()> {
    let spec = SyntheticSpec {
        height: args.height,
        width: args.width,
        seed: args.seed,
        waves: args.waves,
        roughness: args.roughness,
        base_amplitude: args.base_amplitude,
        noise: args.noise,
        groove_depth: args.groove_depth,
        groove_width: args.groove_width,
        stroke_turn: args.stroke_turn,
        target_fraction: args.target_fraction,
        fraction_tolerance: args.fraction_tolerance,
        pits: args.pits,
        pit_depth: args.pit_depth,
        pit_radius: args.pit_radius,
        ..Default::default()
    };
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let samples = generate_set(&spec, args.count)?;
    for (i, sample) in samples.iter().enumerate() {
        let id = format!("map_{i:02}");
        let depth_path = args.out_dir.join(format!("{id}_depth.png"));
        let mask_path = args.out_dir.join(format!("{id}_mask.png"));
        sample.depth.save_png16(&depth_path)?;
        sample.mask.save_png(&mask_path)?;
        if args.overlay {
            let overlay_path = args.out_dir.join(format!("{id}_overlay.png"));
            render_mask_overlay(&sample.depth, &sample.mask, &overlay_path)?;
        }
        println!(
            "generated id={id} depth={} mask={} fraction={:.4}",
            depth_path.display(),
            mask_path.display(),
            sample.engraved_fraction
        );
    }
    Ok(())
}

// --------------------------------------------------------------- extract

#[derive(Clone, Copy, ValueEnum)]
enum InputArg {
    Depth,
    ClbpS,
    ClbpM,
    ClbpBoth,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    /// Rotation-invariant uniform codes.
    Riu2,
    /// Rotation-invariant (minimal rotation) codes.
    Ri,
}

#[derive(Clone, Copy, ValueEnum)]
enum DimsArg {
    Merged,
    H0,
    H1,
    PerDim,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    Minmax,
    None,
    /// Fixed range; see --global-min/--global-max.
    Global,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Sublevel,
    Superlevel,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxesArg {
    BirthDeath,
    BirthPersistence,
}

#[derive(Args)]
struct ExtractArgs {
    /// Depth map file; repeat for several maps.
    #[arg(long, required = true)]
    depth: Vec<PathBuf>,
    /// Ground-truth mask per depth map (same order); omit for unlabeled
    /// extraction.
    #[arg(long)]
    mask: Vec<PathBuf>,
    /// Output feature CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Png)]
    format: FormatArg,
    /// Representation the filtration runs over.
    #[arg(long, value_enum, default_value_t = InputArg::Depth)]
    input: InputArg,
    #[arg(long, default_value_t = 1)]
    clbp_radius: usize,
    #[arg(long, default_value_t = 8)]
    clbp_samples: usize,
    #[arg(long, value_enum, default_value_t = EncodingArg::Riu2)]
    clbp_encoding: EncodingArg,
    #[arg(long, default_value_t = 128)]
    patch_size: usize,
    #[arg(long, default_value_t = 16)]
    patch_step: usize,
    /// Engraved-fraction threshold labeling a patch as engraved.
    #[arg(long, default_value_t = 0.2)]
    label_threshold: f64,
    #[arg(long, value_enum, default_value_t = NormalizeArg::Minmax)]
    normalize: NormalizeArg,
    /// Lower bound for --normalize global (defaults to the data minimum).
    #[arg(long)]
    global_min: Option<f64>,
    /// Upper bound for --normalize global (defaults to the data maximum).
    #[arg(long)]
    global_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = DirectionArg::Sublevel)]
    direction: DirectionArg,
    /// Homology dimensions per descriptor block.
    #[arg(long, value_enum, default_value_t = DimsArg::Merged)]
    dims: DimsArg,
    /// Emit the twelve interval-length statistics.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pd_agg: bool,
    /// Emit a persistence image block.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pi: bool,
    #[arg(long, default_value_t = 16)]
    pi_resolution: usize,
    #[arg(long, default_value_t = 0.001)]
    pi_sigma: f64,
    /// Weight image mass by a persistence ramp.
    #[arg(long)]
    pi_weighted: bool,
    #[arg(long, default_value_t = 1.0)]
    pi_max_persistence: f64,
    #[arg(long, value_enum, default_value_t = AxesArg::BirthDeath)]
    pi_axes: AxesArg,
    /// Remove zero-persistence points before the descriptors.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    drop_zero_length: bool,
    /// Write one diagram CSV per patch and rep into this directory.
    #[arg(long)]
    dump_diagrams: Option<PathBuf>,
    /// Write one filtration-cell CSV per patch into this directory
    /// (always over the raw depth representation).
    #[arg(long)]
    dump_cells: Option<PathBuf>,
}

fn sanitize_source_id(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let cleaned: String = stem
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.') {
                c
            } else {
                '-'
            }
        })
        .collect();
    if cleaned.is_empty() {
        "map".to_string()
    } else {
        cleaned
    }
}

fn load_map_sets(
    depths: &[PathBuf],
    masks: &[PathBuf],
    format: DepthFormat,
) -> Result<Vec<MapSet>> {
    if !masks.is_empty() && masks.len() != depths.len() {
        return Err(Error::InvalidConfig(format!(
            "{} depth maps but {} masks",
            depths.len(),
            masks.len()
        )));
    }
    depths
        .iter()
        .enumerate()
        .map(|(i, depth_path)| {
            let depth = load_depth_map(depth_path, format)?;
            let mask = if masks.is_empty() {
                None
            } else {
                Some(load_label_mask(&masks[i])?)
            };
            MapSet::new(&sanitize_source_id(depth_path), depth, mask)
        })
        .collect()
}

impl ExtractArgs {
    fn feature_config(&self, maps: &[MapSet]) -> Result<FeatureConfig> {
        let normalize = match self.normalize {
            NormalizeArg::Minmax => NormalizeMode::MinMax,
            NormalizeArg::None => NormalizeMode::None,
            NormalizeArg::Global => {
                let (data_min, data_max) = global_value_bounds(maps)?;
                NormalizeMode::Global {
                    min: self.global_min.unwrap_or(data_min),
                    max: self.global_max.unwrap_or(data_max),
                }
            }
        };
        let descriptor = DescriptorConfig {
            name: "cli".into(),
            dims: match self.dims {
                DimsArg::Merged => DimSelection::Merged,
                DimsArg::H0 => DimSelection::H0,
                DimsArg::H1 => DimSelection::H1,
                DimsArg::PerDim => DimSelection::PerDim,
            },
            pd_agg: self.pd_agg,
            pi: self.pi.then(|| PiConfig {
                resolution: self.pi_resolution,
                sigma: self.pi_sigma,
                weighted: self.pi_weighted,
                max_persistence: self.pi_max_persistence,
                axes: match self.pi_axes {
                    AxesArg::BirthDeath => PiAxes::BirthDeath,
                    AxesArg::BirthPersistence => PiAxes::BirthPersistence,
                },
                ..Default::default()
            }),
            drop_zero_length: self.drop_zero_length,
        };
        Ok(FeatureConfig {
            input: match self.input {
                InputArg::Depth => InputRep::Depth,
                InputArg::ClbpS => InputRep::ClbpS,
                InputArg::ClbpM => InputRep::ClbpM,
                InputArg::ClbpBoth => InputRep::ClbpBoth,
            },
            clbp: Some(ClbpConfig {
                radius: self.clbp_radius,
                samples: self.clbp_samples,
                encoding: match self.clbp_encoding {
                    EncodingArg::Riu2 => ClbpEncoding::Riu2,
                    EncodingArg::Ri => ClbpEncoding::Ri,
                },
            }),
            patch_size: self.patch_size,
            patch_step: self.patch_step,
            label_threshold: self.label_threshold,
            normalize,
            direction: match self.direction {
                DirectionArg::Sublevel => Direction::Sublevel,
                DirectionArg::Superlevel => Direction::Superlevel,
            },
            descriptors: vec![descriptor],
        })
    }
}

fn run_extract(args: &ExtractArgs) -> Result<()> {
    let maps = load_map_sets(&args.depth, &args.mask, args.format.to_format())?;
    let config = args.feature_config(&maps)?;
    let table = extract_features(&maps, &config)?;
    table.write_csv(&args.out)?;
    if let Some(dir) = &args.dump_diagrams {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for record in extract_diagrams(&maps, &config)? {
            let name = format!(
                "{}_r{:05}_c{:05}_{}.csv",
                record.key.source_id, record.key.row, record.key.col, record.rep
            );
            record.diagram.write_csv(&dir.join(name))?;
        }
    }
    if let Some(dir) = &args.dump_cells {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for map in &maps {
            let patches = extract_patches(
                &map.depth,
                map.mask.as_ref(),
                config.patch_size,
                config.patch_step,
                config.label_threshold,
                &map.source_id,
            )?;
            for patch in &patches {
                let (normalized, _) = normalize_patch(patch, config.normalize)?;
                let filtration = build_filtration(&normalized, config.direction)?;
                let name = format!(
                    "{}_r{:05}_c{:05}_cells.csv",
                    map.source_id, patch.origin.0, patch.origin.1
                );
                filtration.write_cells_csv(&dir.join(name))?;
            }
        }
    }
    println!(
        "extracted rows={} features={} out={}",
        table.n_rows(),
        table.feature_names().len(),
        args.out.display()
    );
    Ok(())
}

// ----------------------------------------------------------------- train

#[derive(Args)]
struct TrainArgs {
    /// Feature CSV; repeat to concatenate several tables.
    #[arg(long, required = true)]
    features: Vec<PathBuf>,
    /// Output model JSON.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    boost: BoostArgs,
    /// Also write per-feature importances as CSV.
    #[arg(long)]
    importance_csv: Option<PathBuf>,
}

fn load_tables(paths: &[PathBuf]) -> Result<FeatureTable> {
    let tables = paths
        .iter()
        .map(|p| FeatureTable::read_csv(p))
        .collect::<Result<Vec<_>>>()?;
    FeatureTable::concat(tables)
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let table = load_tables(&args.features)?;
    let (matrix, _) = table.to_matrix()?;
    let ensemble = train_rusboost(&matrix, &args.boost.config())?;
    ensemble.save_json(&args.model)?;
    if let Some(path) = &args.importance_csv {
        let mut text = String::from("feature,importance\n");
        for (name, value) in matrix
            .feature_names()
            .iter()
            .zip(&ensemble.feature_importance)
        {
            text.push_str(&format!("{name},{value}\n"));
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    let engraved = matrix.labels().iter().filter(|&&l| l == 1).count();
    println!(
        "trained trees={} rows={} engraved={} natural={} degenerate={} model={}",
        ensemble.trees.len(),
        matrix.n_rows(),
        engraved,
        matrix.n_rows() - engraved,
        ensemble.degenerate,
        args.model.display()
    );
    Ok(())
}

// --------------------------------------------------------------- predict

#[derive(Args)]
struct PredictArgs {
    /// Feature CSV; repeat to concatenate several tables.
    #[arg(long, required = true)]
    features: Vec<PathBuf>,
    /// Trained model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Output prediction CSV.
    #[arg(long)]
    out: PathBuf,
}

fn run_predict(args: &PredictArgs) -> Result<()> {
    let table = load_tables(&args.features)?;
    let model = BoostedEnsemble::load_json(&args.model)?;
    let matrix = table.to_prediction_matrix()?;
    let (scores, predicted) = model.predict(&matrix)?;
    let mut text = String::from("source_id,row,col,label,score,predicted\n");
    for (i, key) in table.keys().iter().enumerate() {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            key.source_id, key.row, key.col, key.label, scores[i], predicted[i]
        ));
    }
    std::fs::write(&args.out, text).map_err(|e| Error::io(&args.out, e))?;
    let engraved = predicted.iter().filter(|&&l| l == 1).count();
    let mut line = format!(
        "predicted rows={} engraved={} natural={} out={}",
        table.n_rows(),
        engraved,
        table.n_rows() - engraved,
        args.out.display()
    );
    // Score against ground truth when any is present.
    let labeled: Vec<usize> = (0..table.n_rows())
        .filter(|&i| matches!(table.keys()[i].label, 1 | 2))
        .collect();
    if !labeled.is_empty() {
        let truth: Vec<u8> = labeled
            .iter()
            .map(|&i| table.keys()[i].label as u8)
            .collect();
        let pred: Vec<u8> = labeled.iter().map(|&i| predicted[i]).collect();
        line.push_str(&format!(" dsc={}", dsc(&pred, &truth)?));
    }
    println!("{line}");
    Ok(())
}

// -------------------------------------------------------------- evaluate

#[derive(Args)]
struct EvaluateArgs {
    /// Training feature CSV; repeat to concatenate.
    #[arg(long, required = true)]
    train_features: Vec<PathBuf>,
    /// Held-out feature CSV; repeat to concatenate.
    #[arg(long, required = true)]
    test_features: Vec<PathBuf>,
    /// Output CSV of per-repetition Dice scores.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Fraction of engraved training rows drawn per repetition.
    #[arg(long, default_value_t = 0.5)]
    engraved_fraction: f64,
    /// Fraction of natural training rows drawn per repetition.
    #[arg(long, default_value_t = 0.3)]
    natural_fraction: f64,
    #[command(flatten)]
    boost: BoostArgs,
    /// Compare against another evaluation CSV with a Wilcoxon
    /// signed-rank test over the paired per-repetition scores.
    #[arg(long)]
    compare_with: Option<PathBuf>,
}

fn write_results_csv(path: &Path, dscs: &[f64]) -> Result<()> {
    let mut text = String::from("rep,dsc\n");
    for (i, v) in dscs.iter().enumerate() {
        text.push_str(&format!("{i},{v}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_results_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "rep,dsc")) => {}
        _ => {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line: 1,
                reason: "expected header rep,dsc".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| Error::Csv {
            path: path.to_path_buf(),
            line: idx + 1,
            reason,
        };
        let (_, v) = line
            .split_once(',')
            .ok_or_else(|| bad("expected rep,dsc".into()))?;
        out.push(
            v.parse::<f64>()
                .map_err(|e| bad(format!("bad dsc value: {e}")))?,
        );
    }
    Ok(out)
}

fn run_evaluate(args: &EvaluateArgs) -> Result<()> {
    let (train, _) = load_tables(&args.train_features)?.to_matrix()?;
    let (test, _) = load_tables(&args.test_features)?.to_matrix()?;
    let plan = ExperimentPlan {
        reps: args.reps,
        engraved_fraction: args.engraved_fraction,
        natural_fraction: args.natural_fraction,
        seed: args.boost.seed,
    };
    let base = args.boost.config();
    let result = run_experiment(&train, &test, &plan, &|matrix, seed| {
        train_rusboost(matrix, &base.clone().with_seed(seed))
    })?;
    write_results_csv(&args.out, &result.dsc_values)?;
    println!(
        "evaluate reps={} median={} std={} out={}",
        args.reps,
        result.median,
        result.std_dev,
        args.out.display()
    );
    if let Some(other_path) = &args.compare_with {
        let other = read_results_csv(other_path)?;
        let test = wilcoxon_signed_rank(&result.dsc_values, &other)?;
        println!(
            "wilcoxon n={} statistic={} p={} exact={}",
            test.n_used, test.statistic, test.p_value, test.exact
        );
    }
    Ok(())
}

// ------------------------------------------------------------------ tune

#[derive(Args)]
struct TuneArgs {
    /// Feature CSV; repeat to concatenate.
    #[arg(long, required = true)]
    features: Vec<PathBuf>,
    /// Output CSV of the cross-validation grid.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Rounds grid, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200])]
    rounds_grid: Vec<usize>,
    /// Depth grid, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 3, 5])]
    depth_grid: Vec<usize>,
    #[command(flatten)]
    boost: BoostArgs,
}

fn run_tune(args: &TuneArgs) -> Result<()> {
    let (matrix, _) = load_tables(&args.features)?.to_matrix()?;
    let selection = select_hyperparameters(
        &matrix,
        &args.boost.config(),
        &args.rounds_grid,
        &args.depth_grid,
        args.folds,
        args.boost.seed,
    )?;
    let mut text = String::from("rounds,max_depth,mean_dsc");
    for f in 0..args.folds {
        text.push_str(&format!(",fold_{f}"));
    }
    text.push('\n');
    for cell in &selection.cells {
        text.push_str(&format!(
            "{},{},{}",
            cell.rounds, cell.max_depth, cell.mean_dsc
        ));
        for v in &cell.fold_dscs {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    std::fs::write(&args.out, text).map_err(|e| Error::io(&args.out, e))?;
    println!(
        "tuned rounds={} max_depth={} mean_dsc={} out={}",
        selection.rounds,
        selection.max_depth,
        selection.mean_dsc,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- render

#[derive(Args)]
struct RenderArgs {
    #[command(subcommand)]
    command: RenderCommand,
}

#[derive(Subcommand)]
enum RenderCommand {
    /// Scatter a dumped diagram CSV into a birth/death plot.
    Diagram {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 512)]
        size: u32,
    },
    /// Render a square feature block (e.g. a persistence image) of one
    /// table row.
    Grid {
        #[arg(long)]
        features: PathBuf,
        /// Table row index.
        #[arg(long, default_value_t = 0)]
        row: usize,
        /// Column-name prefix selecting the block.
        #[arg(long, default_value = "pi_")]
        prefix: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 16)]
        scale: u32,
        #[arg(long, value_enum, default_value_t = ColorArg::Viridis)]
        colormap: ColorArg,
    },
    /// Render a model's feature importances over a square block.
    Importance {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "pi_")]
        prefix: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 16)]
        scale: u32,
        #[arg(long, value_enum, default_value_t = ColorArg::Viridis)]
        colormap: ColorArg,
    },
    /// Render per-feature Fisher scores over a square block.
    Fisher {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value = "pi_")]
        prefix: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 16)]
        scale: u32,
        #[arg(long, value_enum, default_value_t = ColorArg::Viridis)]
        colormap: ColorArg,
    },
    /// Render a depth map with its mask tinted red.
    Overlay {
        #[arg(long)]
        depth: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Png)]
        format: FormatArg,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Pick the values of columns starting with `prefix`, in column order.
fn slice_prefix(names: &[String], values: &[f64], prefix: &str) -> Result<Vec<f64>> {
    let picked: Vec<f64> = names
        .iter()
        .zip(values)
        .filter(|(n, _)| n.starts_with(prefix))
        .map(|(_, &v)| v)
        .collect();
    if picked.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no feature columns start with {prefix:?}"
        )));
    }
    Ok(picked)
}

fn square_side(len: usize) -> Result<usize> {
    let side = (len as f64).sqrt().round() as usize;
    if side * side != len {
        return Err(Error::InvalidConfig(format!(
            "{len} selected columns do not form a square grid"
        )));
    }
    Ok(side)
}

fn run_render(args: &RenderArgs) -> Result<PathBuf> {
    let out = match &args.command {
        RenderCommand::Diagram { diagram, out, size } => {
            let d = surftopo::persistence::PersistenceDiagram::read_csv(diagram)?;
            render_diagram(&d, *size, out)?;
            out.clone()
        }
        RenderCommand::Grid {
            features,
            row,
            prefix,
            out,
            scale,
            colormap,
        } => {
            let table = FeatureTable::read_csv(features)?;
            if *row >= table.n_rows() {
                return Err(Error::InvalidConfig(format!(
                    "row {row} out of range; table has {} rows",
                    table.n_rows()
                )));
            }
            let values = slice_prefix(table.feature_names(), table.row(*row), prefix)?;
            let side = square_side(values.len())?;
            render_grid(&values, side, side, *scale, colormap.to_map(), true, out)?;
            out.clone()
        }
        RenderCommand::Importance {
            model,
            prefix,
            out,
            scale,
            colormap,
        } => {
            let ensemble = BoostedEnsemble::load_json(model)?;
            let importance = ensemble.gini_importance()?;
            let values = slice_prefix(&ensemble.feature_names, importance, prefix)?;
            let side = square_side(values.len())?;
            render_grid(&values, side, side, *scale, colormap.to_map(), true, out)?;
            out.clone()
        }
        RenderCommand::Fisher {
            features,
            prefix,
            out,
            scale,
            colormap,
        } => {
            let table = FeatureTable::read_csv(features)?;
            let (matrix, _) = table.to_matrix()?;
            let scores = fisher_scores(&matrix)?;
            let values = slice_prefix(matrix.feature_names(), &scores, prefix)?;
            let side = square_side(values.len())?;
            render_grid(&values, side, side, *scale, colormap.to_map(), true, out)?;
            out.clone()
        }
        RenderCommand::Overlay {
            depth,
            format,
            mask,
            out,
        } => {
            let depth_map = load_depth_map(depth, format.to_format())?;
            let mask_map = load_label_mask(mask)?;
            render_mask_overlay(&depth_map, &mask_map, out)?;
            out.clone()
        }
    };
    println!("rendered out={}", out.display());
    Ok(out)
}

// ----------------------------------------------------------------- rerun

#[derive(Args)]
struct RerunArgs {
    /// Sidecar file written by a previous invocation.
    #[arg(long)]
    config: PathBuf,
}

fn run_rerun(args: &RerunArgs) -> Result<()> {
    let recorded = sidecar::read(&args.config)?;
    let mut argv = vec!["surftopo".to_string()];
    argv.extend(recorded.iter().cloned());
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| Error::InvalidConfig(format!("recorded invocation does not parse: {e}")))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(Error::InvalidConfig(
            "refusing to replay a rerun invocation".into(),
        ));
    }
    run_command(cli.command, &recorded)
}

// ------------------------------------------------------------------ main

/// Execute a command and record its sidecar on success.
fn run_command(command: Command, argv: &[String]) -> Result<()> {
    match command {
        Command::Generate(args) => {
            run_generate(&args)?;
            sidecar::write(
                &sidecar::sidecar_path(&args.out_dir, "generate"),
                "generate",
                argv,
            )
        }
        Command::Extract(args) => {
            run_extract(&args)?;
            sidecar::write(
                &sidecar::sidecar_path(&args.out, "extract"),
                "extract",
                argv,
            )
        }
        Command::Train(args) => {
            run_train(&args)?;
            sidecar::write(&sidecar::sidecar_path(&args.model, "train"), "train", argv)
        }
        Command::Predict(args) => {
            run_predict(&args)?;
            sidecar::write(
                &sidecar::sidecar_path(&args.out, "predict"),
                "predict",
                argv,
            )
        }
        Command::Evaluate(args) => {
            run_evaluate(&args)?;
            sidecar::write(
                &sidecar::sidecar_path(&args.out, "evaluate"),
                "evaluate",
                argv,
            )
        }
        Command::Tune(args) => {
            run_tune(&args)?;
            sidecar::write(&sidecar::sidecar_path(&args.out, "tune"), "tune", argv)
        }
        Command::Render(args) => {
            let out = run_render(&args)?;
            sidecar::write(&sidecar::sidecar_path(&out, "render"), "render", argv)
        }
        Command::Rerun(args) => run_rerun(&args),
    }
}

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Replays may hit an already-initialized pool; that is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    if let Err(e) = run_command(cli.command, &argv) {
        eprintln!("error: {}", e.to_string().replace('\n', "; "));
        std::process::exit(1);
    }
}
