//! The `flownav` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 numeric
//! failure (solver non-convergence).

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::eval::{bench_full_cycle, bench_throughput, cross_validate, EvalError, DEFAULT_K};
use crate::features::{load_dataset, save_dataset, Dataset, FeatureError, DEFAULT_THRESHOLD_CM};
use crate::flow::{generate_pattern, lucas_kanade, FlowError, LkParams, SamplePattern, DEFAULT_PER_RING, DEFAULT_RINGS};
use crate::imaging::{build_pyramid, frame_file_name, load_pgm, read_frame_dir, save_pgm, GrayImage, ImageError};
use crate::learn::{load_model, save_model, LearnError, Model, DEFAULT_C, DEFAULT_MAX_EPOCHS, DEFAULT_SVR_EPSILON};
use crate::nav::{run_navigation, trace_to_csv, GroundTruthOracle, ModelDetector, NavConfig, NavError, ObstacleDetector};
use crate::registry::{LearnerOptions, LearnerRegistry};
use crate::sim::{
    default_script, generate_dataset, generate_run_frames, generate_world, parse_world, world_to_text, SimConfig,
    SimError, World, DEFAULT_FRAMES, DEFAULT_WORLDS,
};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::NonConvergence { .. } => CliError::Numeric(e.to_string()),
            LearnError::UnknownLearner(_) | LearnError::NonPositiveHyperparameter { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Learn(l) => l.into(),
            EvalError::InvalidK(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<NavError> for CliError {
    fn from(e: NavError) -> Self {
        match e {
            NavError::Learn(l) => l.into(),
            NavError::TooFewSteps(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}
data_error!(FeatureError, FlowError, ImageError, SimError);

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(name = "flownav", version, about = "Optical-flow obstacle detection and navigation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded navigation world description.
    GenWorld(GenWorldArgs),
    /// Render seeded recording runs and write the labeled feature CSV.
    GenDataset(GenDatasetArgs),
    /// Sparse flow between two PGM frames at the observation pattern.
    Flow(FlowArgs),
    /// Train a model on a dataset CSV.
    Train(TrainArgs),
    /// Stratified k-fold cross-validation.
    Cv(CvArgs),
    /// Classify every sample of a dataset with a saved model.
    Predict(PredictArgs),
    /// Closed-loop navigation in a world.
    Navigate(NavigateArgs),
    /// Processing throughput of the flow + classification chain.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Learner {
    Svm,
    Perceptron,
    Svr,
}

impl Learner {
    fn name(self) -> &'static str {
        match self {
            Learner::Svm => "svm",
            Learner::Perceptron => "perceptron",
            Learner::Svr => "svr",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// Seed for every random choice.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct LkArgs {
    /// Half size of the tracking window.
    #[arg(long, default_value_t = 10)]
    pub window_half: usize,
    #[arg(long, default_value_t = 3)]
    pub pyramid_levels: usize,
    #[arg(long, default_value_t = 30)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lk_epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub min_eig: f64,
}

impl LkArgs {
    fn params(&self) -> LkParams {
        LkParams {
            window_half: self.window_half,
            pyramid_levels: self.pyramid_levels,
            max_iters: self.max_iters,
            epsilon: self.lk_epsilon,
            min_eig: self.min_eig,
        }
    }

    fn describe(&self) -> String {
        format!(
            "window_half={},levels={},max_iters={},lk_epsilon={},min_eig={}",
            self.window_half, self.pyramid_levels, self.max_iters, self.lk_epsilon, self.min_eig
        )
    }
}

#[derive(Debug, Clone, Args)]
pub struct LearnerArgs {
    #[arg(long, value_enum)]
    pub model: Learner,
    #[arg(long, default_value_t = DEFAULT_C)]
    pub c: f64,
    /// RBF width; defaults to 1 / feature count.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// SVR tube half-width in centimetres.
    #[arg(long, default_value_t = DEFAULT_SVR_EPSILON)]
    pub epsilon: f64,
    /// Class-balanced weighting.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub balanced: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_EPOCHS)]
    pub max_epochs: usize,
    /// Pick SVM C and gamma by inner cross-validation on the training data.
    #[arg(long)]
    pub grid_search: bool,
}

impl LearnerArgs {
    fn options(&self) -> LearnerOptions {
        LearnerOptions {
            c: self.c,
            gamma: self.gamma,
            epsilon: self.epsilon,
            balanced: self.balanced,
            max_epochs: self.max_epochs,
            grid_search: self.grid_search,
            ..LearnerOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct GenWorldArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub obstacles: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    /// Dataset CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write every rendered frame as PGM under this directory.
    #[arg(long)]
    pub frames_dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WORLDS)]
    pub worlds: usize,
    #[arg(long, default_value_t = DEFAULT_FRAMES)]
    pub frames: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_CM)]
    pub threshold_cm: f64,
    #[command(flatten)]
    pub lk: LkArgs,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub prev: PathBuf,
    #[arg(long)]
    pub next: PathBuf,
    /// Write the flow table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub lk: LkArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[arg(long)]
    pub data: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Per-fold CSV report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Folds trained in parallel; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NavigateArgs {
    #[arg(long)]
    pub world: PathBuf,
    /// Trained model used as the obstacle detector.
    #[arg(long, conflicts_with = "oracle", required_unless_present = "oracle")]
    pub model_file: Option<PathBuf>,
    /// Use ground-truth range instead of a model.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 200)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 10.0)]
    pub collision_cm: f64,
    #[arg(long, default_value_t = 500.0)]
    pub arena_half_extent: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_CM)]
    pub threshold_cm: f64,
    /// Trace CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dump every rendered frame as PGM under this directory.
    #[arg(long)]
    pub frames_dir: Option<PathBuf>,
    #[command(flatten)]
    pub lk: LkArgs,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    /// Directory of `frame_NNNNNN.pgm` files; defaults to a rendered run.
    #[arg(long)]
    pub frames_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    /// Also time the full cycle with rendering in place of capture.
    #[arg(long)]
    pub full_cycle: bool,
    /// Timing CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub lk: LkArgs,
    #[command(flatten)]
    pub seed: SeedArg,
}

fn provenance(seed: Option<u64>, params: &str) -> String {
    match seed {
        Some(s) => format!("# flownav v1 seed={s} params={params}"),
        None => format!("# flownav v1 seed=- params={params}"),
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Data(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let f = fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(load_dataset(BufReader::new(f))?)
}

fn read_pgm(path: &Path) -> Result<GrayImage, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(load_pgm(&bytes)?)
}

fn default_pattern(cfg: &SimConfig) -> Result<SamplePattern, CliError> {
    Ok(generate_pattern(cfg.width, cfg.height, DEFAULT_RINGS, DEFAULT_PER_RING)?)
}

fn load_model_file(path: &Path) -> Result<Box<dyn Model>, CliError> {
    Ok(load_model(&read_text(path)?)?)
}

fn check_positive(name: &str, v: f64) -> CliResult {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive (got {v})")))
    }
}

fn gen_world(a: &GenWorldArgs) -> CliResult {
    let world = generate_world(a.seed.seed, a.obstacles);
    let header = provenance(Some(a.seed.seed), &format!("obstacles={}", a.obstacles));
    write_file(&a.out, world_to_text(&world, &[header]))?;
    println!("wrote {} ({} obstacles)", a.out.display(), world.obstacles.len());
    Ok(())
}

fn gen_dataset(a: &GenDatasetArgs) -> CliResult {
    check_positive("threshold-cm", a.threshold_cm)?;
    if a.worlds == 0 || a.frames < 2 {
        return Err(CliError::Usage("need at least one world and two frames per world".into()));
    }
    let cfg = SimConfig::default();
    let lk = a.lk.params();
    let pattern = default_pattern(&cfg)?;
    let script = default_script(a.seed.seed, a.worlds, a.frames);
    let frames_dir = a.frames_dir.clone();
    let mut sink = |run: usize, idx: usize, img: &GrayImage| -> Result<(), SimError> {
        if let Some(dir) = &frames_dir {
            let run_dir = dir.join(format!("run_{run:02}"));
            let path = run_dir.join(frame_file_name(idx));
            fs::create_dir_all(&run_dir)
                .and_then(|_| fs::write(&path, save_pgm(img)))
                .map_err(|e| SimError::Image(ImageError::FrameDir(format!("{}: {e}", path.display()))))?;
        }
        Ok(())
    };
    let ds = generate_dataset(&script, &cfg, &lk, &pattern, a.threshold_cm, a.seed.seed, &mut sink)?;
    let header = provenance(
        Some(a.seed.seed),
        &format!(
            "worlds={},frames={},threshold_cm={},{}",
            a.worlds,
            a.frames,
            a.threshold_cm,
            a.lk.describe()
        ),
    );
    let mut buf = Vec::new();
    save_dataset(&ds, &mut buf, &[header])?;
    write_file(&a.out, buf)?;
    println!(
        "wrote {} ({} samples, {} positive, {} features)",
        a.out.display(),
        ds.len(),
        ds.positives(),
        ds.dims()
    );
    Ok(())
}

fn flow(a: &FlowArgs) -> CliResult {
    let prev = read_pgm(&a.prev)?;
    let next = read_pgm(&a.next)?;
    let lk = a.lk.params();
    lk.validate()?;
    let pattern = generate_pattern(prev.width(), prev.height(), DEFAULT_RINGS, DEFAULT_PER_RING)?;
    let field = lucas_kanade(
        &build_pyramid(&prev, lk.pyramid_levels)?,
        &build_pyramid(&next, lk.pyramid_levels)?,
        &pattern,
        &lk,
    )?;
    let mut out = provenance(None, &a.lk.describe());
    out.push('\n');
    out.push_str("idx x y u1 u2 status\n");
    for (i, ((p, v), s)) in pattern
        .points()
        .iter()
        .zip(field.vectors())
        .zip(field.status())
        .enumerate()
    {
        out.push_str(&format!(
            "{i} {:.4} {:.4} {:.6} {:.6} {}\n",
            p[0],
            p[1],
            v[0],
            v[1],
            s.as_str()
        ));
    }
    match &a.out {
        Some(path) => write_file(path, out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn learner_params(l: &LearnerArgs) -> String {
    let gamma = l.gamma.map_or("1/dims".to_string(), |g| g.to_string());
    format!(
        "model={},C={},gamma={},epsilon={},balanced={},max_epochs={},grid_search={}",
        l.model.name(),
        l.c,
        gamma,
        l.epsilon,
        l.balanced,
        l.max_epochs,
        l.grid_search
    )
}

fn validate_learner_args(l: &LearnerArgs) -> CliResult {
    check_positive("c", l.c)?;
    check_positive("epsilon", l.epsilon)?;
    if let Some(g) = l.gamma {
        check_positive("gamma", g)?;
    }
    if l.max_epochs == 0 {
        return Err(CliError::Usage("--max-epochs must be at least 1".into()));
    }
    Ok(())
}

fn train(a: &TrainArgs) -> CliResult {
    validate_learner_args(&a.learner)?;
    let ds = read_dataset(&a.data)?;
    let learner = LearnerRegistry::builtin().create(a.learner.model.name(), &a.learner.options())?;
    let model = learner.fit(&ds, a.seed.seed)?;
    let header = provenance(Some(a.seed.seed), &learner_params(&a.learner));
    write_file(&a.out, save_model(model.as_ref(), &[header]))?;
    println!("trained {} on {} samples; wrote {}", learner.describe(), ds.len(), a.out.display());
    if let Some(d) = model.diagnostics() {
        println!(
            "solver: {} iterations, KKT gap {:.3e}, equality residual {:.3e}",
            d.iterations, d.kkt_violation, d.equality_residual
        );
    }
    Ok(())
}

fn cv(a: &CvArgs) -> CliResult {
    validate_learner_args(&a.learner)?;
    if a.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let ds = read_dataset(&a.data)?;
    let learner = LearnerRegistry::builtin().create(a.learner.model.name(), &a.learner.options())?;
    let report = cross_validate(&ds, learner.as_ref(), a.k, a.seed.seed, a.jobs)?;
    let params = format!("{},k={}", learner_params(&a.learner), a.k);
    println!("{}", provenance(Some(a.seed.seed), &params));
    print!("{}", report.to_table());
    if let Some(path) = &a.out {
        let mut text = provenance(Some(a.seed.seed), &params);
        text.push('\n');
        text.push_str(&report.to_csv());
        write_file(path, text)?;
    }
    Ok(())
}

fn predict(a: &PredictArgs) -> CliResult {
    let model = load_model_file(&a.model_file)?;
    let ds = read_dataset(&a.data)?;
    let mut out = provenance(None, &format!("model_file={}", a.model_file.display()));
    out.push_str("\nindex,truth,predicted,score\n");
    let mut correct = 0;
    for (i, s) in ds.samples().iter().enumerate() {
        let p = model.predict(&s.features)?;
        if p.label == s.label {
            correct += 1;
        }
        out.push_str(&format!("{i},{},{},{:.6e}\n", s.label, p.label, p.score));
    }
    match &a.out {
        Some(path) => {
            write_file(path, out)?;
            println!(
                "{} of {} predictions match the stored labels; wrote {}",
                correct,
                ds.len(),
                path.display()
            );
        }
        None => print!("{out}"),
    }
    Ok(())
}

fn navigate(a: &NavigateArgs) -> CliResult {
    check_positive("threshold-cm", a.threshold_cm)?;
    check_positive("collision-cm", a.collision_cm)?;
    check_positive("arena-half-extent", a.arena_half_extent)?;
    let world: World = parse_world(&read_text(&a.world)?)?;
    let cfg = SimConfig::default();
    let pattern = default_pattern(&cfg)?;
    let model = a.model_file.as_deref().map(load_model_file).transpose()?;
    let oracle = GroundTruthOracle {
        threshold_cm: a.threshold_cm,
    };
    let detector: Box<dyn ObstacleDetector + '_> = match &model {
        Some(m) => Box::new(ModelDetector(m.as_ref())),
        None => Box::new(oracle),
    };
    let nav = NavConfig {
        max_steps: a.max_steps,
        collision_cm: a.collision_cm,
        arena_half_extent: a.arena_half_extent,
        ..NavConfig::default()
    };
    let frames_dir = a.frames_dir.clone();
    let mut sink = |i: usize, img: &GrayImage| -> Result<(), NavError> {
        if let Some(dir) = &frames_dir {
            let path = dir.join(frame_file_name(i));
            fs::create_dir_all(dir)
                .and_then(|_| fs::write(&path, save_pgm(img)))
                .map_err(|e| NavError::Image(ImageError::FrameDir(format!("{}: {e}", path.display()))))?;
        }
        Ok(())
    };
    let run = run_navigation(&world, &cfg, &a.lk.params(), &pattern, detector.as_ref(), &nav, a.seed.seed, &mut sink)?;
    let detector_name = match &a.model_file {
        Some(p) => format!("model_file={}", p.display()),
        None => "oracle".to_string(),
    };
    let params = format!(
        "world={},detector={},max_steps={},collision_cm={},arena_half_extent={},threshold_cm={},{}",
        a.world.display(),
        detector_name,
        a.max_steps,
        a.collision_cm,
        a.arena_half_extent,
        a.threshold_cm,
        a.lk.describe()
    );
    if let Some(path) = &a.out {
        write_file(path, trace_to_csv(&run.trace, &[provenance(Some(a.seed.seed), &params)]))?;
    }
    let s = run.summary;
    println!(
        "steps={} deflections={} collisions={} left_arena={}",
        s.steps, s.deflections, s.collisions, s.left_arena
    );
    Ok(())
}

fn bench(a: &BenchArgs) -> CliResult {
    let model = load_model_file(&a.model_file)?;
    let lk = a.lk.params();
    let cfg = SimConfig::default();
    let frames = match &a.frames_dir {
        Some(dir) => read_frame_dir(dir)?,
        None => {
            let run = &default_script(a.seed.seed, 1, 30)[0];
            generate_run_frames(run, &cfg).into_iter().map(|(_, img)| img).collect()
        }
    };
    let first = frames.first().ok_or(CliError::Data("no frames".into()))?;
    let pattern = generate_pattern(first.width(), first.height(), DEFAULT_RINGS, DEFAULT_PER_RING)?;
    let report = bench_throughput(&frames, &pattern, &lk, model.as_ref(), a.repetitions)?;
    println!("processing only (no capture):");
    print!("{}", report.to_table());
    let params = format!("repetitions={},{}", a.repetitions, a.lk.describe());
    let mut csv = report.to_csv(&[provenance(Some(a.seed.seed), &params)]);
    if a.full_cycle {
        let world = default_script(a.seed.seed, 1, 30).remove(0).world;
        let full = bench_full_cycle(&world, &cfg, &default_pattern(&cfg)?, &lk, model.as_ref(), 60)?;
        println!("full cycle (rendering in place of capture):");
        print!("{}", full.to_table());
        for line in full.to_csv(&[]).lines().skip(1) {
            csv.push_str("cycle_");
            csv.push_str(line);
            csv.push('\n');
        }
    }
    if let Some(path) = &a.out {
        write_file(path, csv)?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::GenWorld(a) => gen_world(a),
        Command::GenDataset(a) => gen_dataset(a),
        Command::Flow(a) => flow(a),
        Command::Train(a) => train(a),
        Command::Cv(a) => cv(a),
        Command::Predict(a) => predict(a),
        Command::Navigate(a) => navigate(a),
        Command::Bench(a) => bench(a),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
