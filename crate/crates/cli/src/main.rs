//! `radcount`: generate synthetic rooms, preprocess, augment, train, evaluate
//! and run the comparison studies.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use radcount::augment::{augment_dataset, AugmentKind, AugmentSpec, ScaleMode};
use radcount::countnet::{fine_tune, load_model, save_model, train, FeatureExtractor, FeatureSet};
use radcount::cube::NUM_CLASSES;
use radcount::io::{read_dataset, write_cube, write_dataset};
use radcount::metrics::rmse_mae;
use radcount::preprocess::{Method, Preprocessor};
use radcount::rng::derive_seed;
use radcount::scene::{generate_cube, generate_room, Room, SceneConfig};
use radcount::split::stratified_split;
use radcount::study::{study_augment, study_preprocess, study_transfer, ExperimentConfig};
use radcount::{Dataset, Split};

#[derive(Debug, Parser)]
#[command(
    name = "radcount",
    version,
    about = "Radar people counting under spatial domain shift"
)]
struct Cli {
    /// Experiment configuration (JSON); unspecified fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed. For study commands it replaces the configured seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the three synthetic rooms (or one scene) as cube files plus manifests.
    Generate(GenerateArgs),
    /// Apply one preprocessing method to a dataset.
    Preprocess(PreprocessArgs),
    /// Expand the train split of a dataset with augmented copies.
    Augment(AugmentArgs),
    /// Train a count model (or fine-tune an existing one).
    Train(TrainArgs),
    /// Score a model on a dataset split.
    Evaluate(EvaluateArgs),
    /// Compare preprocessing methods across rooms.
    StudyPreprocess(StudyArgs),
    /// Compare augmentation variants on the rearranged room.
    StudyAugment(StudyArgs),
    /// Fine-tune on the unseen room with increasing target-set sizes.
    StudyTransfer(StudyArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Render a single scene from this config instead of the room suite.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Cubes per class and room (default: the config's room-A count).
    #[arg(long)]
    n_per_class: Option<usize>,
}

#[derive(Debug, Args)]
struct MethodArgs {
    /// none, threshold_zero, sigmoid_weight, butterworth_bandpass, two_stage_highpass or background_suppress.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Std threshold / sigmoid midpoint.
    #[arg(long)]
    tau: Option<f64>,
    /// Sigmoid steepness.
    #[arg(long)]
    s: Option<f64>,
    /// Background subspace rank.
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Debug, Args)]
struct AugmentFlags {
    /// none, flips, scale, framedrop or all.
    #[arg(long, value_parser = parse_augment)]
    augment: Option<AugmentKind>,
    /// Lower bound of the amplitude scale factor.
    #[arg(long)]
    scale_lo: Option<f64>,
    /// Upper bound of the amplitude scale factor.
    #[arg(long)]
    scale_hi: Option<f64>,
    /// Seed for augmentation draws (default: the config's aug_seed).
    #[arg(long)]
    aug_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    /// Input manifest.
    #[arg(long)]
    input: PathBuf,
    /// 0-person cubes for the background model (default: label-0 cubes of the input).
    #[arg(long)]
    background: Option<PathBuf>,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    /// Input manifest.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    aug: AugmentFlags,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Manifest with train and val splits.
    #[arg(long)]
    input: PathBuf,
    /// Start from this checkpoint and fine-tune at the reduced learning rate.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Fine-tuning: number of target train cubes to use (default: all).
    #[arg(long)]
    n_train: Option<usize>,
    #[command(flatten)]
    aug: AugmentFlags,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// RCM1 checkpoint.
    #[arg(long)]
    model: PathBuf,
    /// Input manifest.
    #[arg(long)]
    input: PathBuf,
    /// Split to score (train, val, test); all cubes when omitted.
    #[arg(long, value_parser = parse_split)]
    split: Option<Split>,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    aug: AugmentFlags,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: radcount::Error| e.to_string())
}

fn parse_augment(s: &str) -> Result<AugmentKind, String> {
    s.parse().map_err(|e: radcount::Error| e.to_string())
}

fn parse_split(s: &str) -> Result<Split, String> {
    [Split::Train, Split::Val, Split::Test]
        .into_iter()
        .find(|x| x.name() == s)
        .ok_or_else(|| format!("unknown split `{s}`"))
}

/// Exit-code classes.
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<radcount::Error> for Failure {
    fn from(e: radcount::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

struct Ctx {
    cfg: ExperimentConfig,
    seed: Option<u64>,
    out: PathBuf,
}

impl Ctx {
    fn base_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn out_file(&self, name: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out)
            .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(self.out.join(name))
    }

    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.out_file(name)?;
        fs::write(&path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn apply_method(&mut self, m: &MethodArgs) -> Option<Method> {
        let p = &mut self.cfg.preprocess;
        if let Some(t) = m.tau {
            p.tau = t;
        }
        if let Some(s) = m.s {
            p.s = s;
        }
        if let Some(r) = m.rank {
            p.rank = r;
        }
        m.method
    }

    fn apply_augment(&mut self, a: &AugmentFlags) -> CliResult<Option<AugmentKind>> {
        let (lo, hi) = self.cfg.scale_range;
        self.cfg.scale_range = (a.scale_lo.unwrap_or(lo), a.scale_hi.unwrap_or(hi));
        if let Some(s) = a.aug_seed {
            self.cfg.aug_seed = s;
        }
        let (lo, hi) = self.cfg.scale_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(config_err(format!(
                "scale range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            )));
        }
        Ok(a.augment)
    }
}

fn class_counts(ds: &Dataset) -> String {
    let c = ds.class_counts();
    (0..NUM_CLASSES)
        .map(|k| format!("{k}:{}", c[k]))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_generate(ctx: &Ctx, args: &GenerateArgs) -> CliResult<()> {
    if let Some(scene_path) = &args.scene {
        let mut scene: SceneConfig = read_json(scene_path)?;
        if let Some(s) = ctx.seed {
            scene.seed = s;
        }
        scene.validate().map_err(config_err)?;
        let cube = generate_cube(&scene)?;
        let path = ctx.out_file("scene.rdc")?;
        write_cube(&cube, &path)?;
        println!("wrote {} (label {})", path.display(), cube.meta.label);
        return Ok(());
    }
    let cfg = &ctx.cfg;
    let n = args.n_per_class.unwrap_or(cfg.n_per_class_a);
    if n == 0 {
        return Err(config_err("n_per_class must be >= 1"));
    }
    let seed = ctx.base_seed();
    for (room, name) in [(Room::A, "a"), (Room::B, "b"), (Room::C, "c")] {
        let ds = generate_room(&cfg.suite, room, n, seed)?;
        let ds = match room {
            Room::B => Dataset {
                splits: Some(vec![Split::Test; ds.len()]),
                ..ds
            },
            _ => stratified_split(&ds, cfg.fractions(), derive_seed(seed, room.env_id() as u64))?,
        };
        let manifest = write_dataset(&ds, ctx.out.join(name), name)?;
        println!("{}: {} cubes [{}]", manifest.display(), ds.len(), class_counts(&ds));
    }
    Ok(())
}

fn cmd_preprocess(ctx: &mut Ctx, args: &PreprocessArgs) -> CliResult<()> {
    let method = ctx.apply_method(&args.method).unwrap_or(Method::SigmoidWeight);
    let ds = read_dataset(&args.input)?;
    let background = match &args.background {
        Some(p) => read_dataset(p)?,
        None => {
            let idx: Vec<usize> = (0..ds.len()).filter(|&i| ds.cubes[i].meta.label == 0).collect();
            ds.select(&idx)
        }
    };
    let bg = (method == Method::BackgroundSuppress).then_some(&background);
    let pre =
        Preprocessor::build(method, &ctx.cfg.preprocess, bg, derive_seed(ctx.base_seed(), 0xB9)).map_err(config_err)?;
    let out = pre.apply_dataset(&ds)?;
    let manifest = write_dataset(&out, &ctx.out, method.name())?;
    println!(
        "{}: {} cubes preprocessed with {}",
        manifest.display(),
        out.len(),
        method.name()
    );
    Ok(())
}

fn cmd_augment(ctx: &mut Ctx, args: &AugmentArgs) -> CliResult<()> {
    let kind = ctx.apply_augment(&args.aug)?.unwrap_or(AugmentKind::All);
    let ds = read_dataset(&args.input)?;
    // Files hold concrete samples, so scaled copies are materialized once.
    let spec = AugmentSpec {
        scale_mode: ScaleMode::Once,
        ..kind.spec(ctx.cfg.scale_range, ctx.cfg.aug_seed)
    };
    let out = augment_dataset(&ds, &spec)?;
    let manifest = write_dataset(&out, &ctx.out, "aug")?;
    println!(
        "{}: {} cubes ({} added by {})",
        manifest.display(),
        out.len(),
        out.len() - ds.len(),
        kind.name()
    );
    Ok(())
}

fn cmd_train(ctx: &mut Ctx, args: &TrainArgs) -> CliResult<()> {
    let kind = ctx.apply_augment(&args.aug)?.unwrap_or(AugmentKind::None);
    let mut tc = ctx.cfg.train.clone();
    if let Some(s) = ctx.seed {
        tc.seed = s;
    }
    let ds = read_dataset(&args.input)?;
    let spec = kind.spec(ctx.cfg.scale_range, ctx.cfg.aug_seed);
    tc.epoch_scale = spec.epoch_scale();
    tc.validate().map_err(config_err)?;
    let ds = augment_dataset(&ds, &spec)?;
    let fx = FeatureExtractor::default();
    let (model, history) = match &args.init {
        Some(init) => {
            let base = load_model(init)?;
            let n = args.n_train.unwrap_or_else(|| ds.indices_of(Split::Train).len());
            fine_tune(&base, &ds, &fx, n, &tc.fine_tune())?
        }
        None => train(&ds, &fx, &tc)?,
    };
    let path = ctx.out_file("model.rcm")?;
    save_model(&model, &path)?;
    println!(
        "wrote {} (best epoch {}, val mse {:.6})",
        path.display(),
        history.best_epoch,
        history.best_val().unwrap_or(f64::NAN)
    );
    ctx.write("history.csv", &history.to_csv())
}

fn cmd_evaluate(ctx: &Ctx, args: &EvaluateArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let ds = read_dataset(&args.input)?;
    let ds = match args.split {
        Some(s) => ds.subset(s),
        None => ds,
    };
    let feats = FeatureSet::from_dataset(&ds, &FeatureExtractor::default())?;
    let r = rmse_mae(&model.predict_batch(&feats.x), &ds.labels())?;
    println!("n={} rmse={:.6} mae={:.6}", ds.len(), r.rmse, r.mae);
    ctx.write(
        "evaluation.csv",
        &format!("n,rmse,mae\n{},{:.6},{:.6}\n", ds.len(), r.rmse, r.mae),
    )
}

fn study_config(ctx: &mut Ctx, args: &StudyArgs) -> CliResult<(Option<Method>, Option<AugmentKind>)> {
    let method = ctx.apply_method(&args.method);
    let kind = ctx.apply_augment(&args.aug)?;
    if let Some(s) = ctx.seed {
        ctx.cfg.seeds = vec![s];
    }
    ctx.cfg.validate().map_err(config_err)?;
    Ok((method, kind))
}

fn hashes(h: &[String]) -> String {
    h.iter().map(|s| format!("{s}\n")).collect()
}

fn cmd_study_preprocess(ctx: &mut Ctx, args: &StudyArgs) -> CliResult<()> {
    study_config(ctx, args)?;
    let s = study_preprocess(&ctx.cfg)?;
    print!("{}", s.errors_csv());
    ctx.write("preprocess_errors.csv", &s.errors_csv())?;
    ctx.write("preprocess_separability.csv", &s.separability_csv())?;
    ctx.write("b_test_hashes.txt", &hashes(&s.b_test_hashes))
}

fn cmd_study_augment(ctx: &mut Ctx, args: &StudyArgs) -> CliResult<()> {
    let (method, kind) = study_config(ctx, args)?;
    if let Some(m) = method {
        ctx.cfg.augment_method = m;
    }
    if kind.is_some() {
        eprintln!("note: study-augment always compares every variant; --augment is ignored");
    }
    let s = study_augment(&ctx.cfg)?;
    print!("{}", s.to_csv());
    ctx.write("augment.csv", &s.to_csv())?;
    ctx.write("b_test_hashes.txt", &hashes(&s.b_test_hashes))
}

fn cmd_study_transfer(ctx: &mut Ctx, args: &StudyArgs) -> CliResult<()> {
    let (method, _) = study_config(ctx, args)?;
    if let Some(m) = method {
        ctx.cfg.transfer_method = m;
    }
    let s = study_transfer(&ctx.cfg)?;
    print!("{}", s.to_csv());
    if !s.monotone {
        eprintln!("warning: median target RMSE is not monotone in the fine-tuning set size");
    }
    ctx.write("transfer.csv", &s.to_csv())?;
    ctx.write("c_test_hashes.txt", &hashes(&s.c_test_hashes))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(config_err("--jobs must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let cfg = match &cli.config {
        Some(p) => read_json::<ExperimentConfig>(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.validate().map_err(config_err)?;
    let mut ctx = Ctx {
        cfg,
        seed: cli.seed,
        out: cli.out,
    };
    match &cli.cmd {
        Command::Generate(a) => cmd_generate(&ctx, a),
        Command::Preprocess(a) => cmd_preprocess(&mut ctx, a),
        Command::Augment(a) => cmd_augment(&mut ctx, a),
        Command::Train(a) => cmd_train(&mut ctx, a),
        Command::Evaluate(a) => cmd_evaluate(&ctx, a),
        Command::StudyPreprocess(a) => cmd_study_preprocess(&mut ctx, a),
        Command::StudyAugment(a) => cmd_study_augment(&mut ctx, a),
        Command::StudyTransfer(a) => cmd_study_transfer(&mut ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
