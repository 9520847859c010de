//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage or
//! configuration errors. Outputs are assembled in memory and written
//! atomically once a command has succeeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::correlation::{build_cost_volume, FeatureGrid};
use crate::error::{Error, Result};
use crate::io::{self, write_atomic};
use crate::loss::{evaluate, CloudTerms, LossReport, LossWeights};
use crate::mpn::{refine_traced, MpnConfig};
use crate::projection::{project_to_depth_image, rasterize_bev, BevConfig, CameraIntrinsics};
use crate::scenario::{load_scenario, ScenarioFile};
use crate::se3::RigidTransform;
use crate::sim::{run_scenario, FrameRecord, ScenarioRun};

pub const OUT_DIR_ENV: &str = "LOOPCAL_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "loopcal-out";

#[derive(Debug, Parser)]
#[command(name = "loopcal", version, about = "Loop-consistent extrinsic refinement and drift monitoring")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run drift scenarios through the online monitor.
    Simulate(SimulateArgs),
    /// Refine a calibration triple by loop-closure message passing.
    Refine(RefineArgs),
    /// Evaluate the loss terms for a prediction.
    Losses(LossesArgs),
    /// Project a point cloud to an inverse-depth image and a BEV raster.
    Project(ProjectArgs),
    /// Time cost-volume construction across displacement radii.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file, or a directory of `.toml` scenarios.
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
    /// Override the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Refine predictions with this many message-passing iterations (0 disables).
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    /// Triple file with `lc`, `rc` and optionally `rl` records.
    #[arg(long, visible_alias = "input")]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
    #[arg(long, default_value_t = 4)]
    pub iterations: usize,
    /// Blend weight on the current node.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct LossesArgs {
    /// Loss job file (TOML) naming the triple and cloud files.
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Point cloud: `.bin` binary or whitespace-separated text.
    #[arg(long, visible_alias = "input")]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
    /// Transform record applied before the camera projection.
    #[arg(long, allow_hyphen_values = true)]
    pub transform: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Largest displacement radius.
    #[arg(long, default_value_t = 6)]
    pub d: usize,
    #[arg(long, default_value_t = 7)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

/// A failed command with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Config(_) | Error::Parse { .. } => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

fn usage(msg: String) -> Failure {
    Failure {
        code: 2,
        error: Error::Config(msg),
    }
}

fn require_path(path: &Path) -> std::result::Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!("config path not found: {}", path.display())))
    }
}

fn out_dir(arg: &OutArg) -> PathBuf {
    arg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

pub fn run(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Refine(a) => cmd_refine(&a),
        Command::Losses(a) => cmd_losses(&a),
        Command::Project(a) => cmd_project(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

pub fn frame_log(records: &[FrameRecord]) -> String {
    let mut s = format!("{}\n{}\n", io::FRAME_LOG_VERSION, FrameRecord::CSV_HEADER);
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn event_log(run: &ScenarioRun) -> String {
    let mut s = format!("{}\n", io::EVENT_LOG_VERSION);
    for e in &run.events {
        s.push_str(&e.record());
        s.push('\n');
    }
    s
}

fn scenario_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!("no .toml scenarios in {}", path.display())));
    }
    Ok(files)
}

fn prepare(path: &Path, args: &SimulateArgs) -> Result<ScenarioFile> {
    let mut file = load_scenario(path)?;
    if let Some(seed) = args.seed {
        file.scenario.seed = seed;
    }
    if let Some(n) = args.iterations {
        let alpha = file.mpn.as_ref().and_then(|m| m.alphas().first().copied()).unwrap_or(0.5);
        file.mpn = if n == 0 { None } else { Some(MpnConfig::constant(n, alpha)?) };
    }
    Ok(file)
}

fn simulate_one(file: &ScenarioFile) -> Result<(ScenarioRun, [String; 3])> {
    let run = run_scenario(&file.scenario, &file.monitor, file.mpn.as_ref())?;
    let summary = format!("scenario={}\nseed={}\n{}", file.scenario.name, file.scenario.seed, run.summary.render());
    let outputs = [frame_log(&run.records), event_log(&run), summary];
    Ok((run, outputs))
}

pub fn cmd_simulate(args: &SimulateArgs) -> std::result::Result<(), Failure> {
    require_path(&args.config)?;
    let files = scenario_files(&args.config)?;
    let batch = files.len() > 1 || args.config.is_dir();
    let loaded = files.iter().map(|p| prepare(p, args)).collect::<Result<Vec<_>>>()?;

    // independent runs; outputs are partitioned per scenario
    let results: Vec<Result<(ScenarioRun, [String; 3])>> = std::thread::scope(|s| {
        let handles: Vec<_> = loaded.iter().map(|f| s.spawn(move || simulate_one(f))).collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });

    let root = out_dir(&args.out);
    let mut staged = Vec::with_capacity(results.len());
    for (file, res) in loaded.iter().zip(results) {
        let (_, outputs) = res?;
        let dir = if batch { root.join(&file.scenario.name) } else { root.clone() };
        staged.push((file, dir, outputs));
    }
    for (file, dir, [frames, events, summary]) in &staged {
        create_dir(dir)?;
        write_atomic(&dir.join("frames.csv"), frames.as_bytes())?;
        write_atomic(&dir.join("events.log"), events.as_bytes())?;
        write_atomic(&dir.join("summary.txt"), summary.as_bytes())?;
        info!("wrote {} outputs to {}", file.scenario.name, dir.display());
        emit(summary)?;
    }
    Ok(())
}

pub fn cmd_refine(args: &RefineArgs) -> std::result::Result<(), Failure> {
    require_path(&args.config)?;
    let input = io::read_triple(&args.config)?;
    let cfg = MpnConfig::constant(args.iterations, args.alpha)?;
    let (refined, trace) = refine_traced(&input, &cfg);
    let mut table = format!("{}\niteration,rot_deg,trans_m\n", io::RESIDUAL_LOG_VERSION);
    for (i, r) in trace.iter().enumerate() {
        table.push_str(&format!("{i},{:.9},{:.9}\n", r.rot_deg, r.trans_m));
    }
    let triple = io::format_triple(&refined);
    emit(&format!("{table}refined\n{triple}"))?;
    if let Some(dir) = &args.out.out {
        create_dir(dir)?;
        write_atomic(&dir.join("residuals.csv"), table.as_bytes())?;
        write_atomic(&dir.join("refined.txt"), triple.as_bytes())?;
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LossJob {
    pred: PathBuf,
    gt: PathBuf,
    intermediate: Option<PathBuf>,
    #[serde(default)]
    weights: LossWeights,
    clouds: Option<CloudJob>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CloudJob {
    extrinsics: PathBuf,
    lidar: PathBuf,
    radar: PathBuf,
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let at = e.span().map_or(0, |s| s.start).min(text.len());
        Error::Parse {
            path: path.to_path_buf(),
            line: text[..at].matches('\n').count() + 1,
            msg: e.message().trim().to_string(),
        }
    })
}

pub fn cmd_losses(args: &LossesArgs) -> std::result::Result<(), Failure> {
    require_path(&args.config)?;
    let job: LossJob = parse_toml(&io::read_text(&args.config)?, &args.config)?;
    job.weights.validate()?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let pred = io::read_triple(&base.join(&job.pred))?;
    let gt = io::read_triple(&base.join(&job.gt))?;
    let intermediate = match &job.intermediate {
        Some(p) => io::read_triple(&base.join(p))?,
        None => pred,
    };
    let report = match &job.clouds {
        None => evaluate(&pred, &intermediate, &gt, None, &job.weights),
        Some(c) => {
            let extrinsics = io::read_triple(&base.join(&c.extrinsics))?;
            let lidar = io::read_cloud(&base.join(&c.lidar))?;
            let radar = io::read_cloud(&base.join(&c.radar))?;
            let terms = CloudTerms {
                lidar: &lidar,
                radar: &radar,
                extrinsics_gt: &extrinsics,
            };
            evaluate(&pred, &intermediate, &gt, Some(&terms), &job.weights)
        }
    };
    if report.empty_cloud {
        log::warn!("an empty point cloud contributed 0 to l_c");
    }
    let csv = format!("{}\n{}\n{}\n", io::LOSS_REPORT_VERSION, LossReport::CSV_HEADER, report.csv_row(0));
    emit(&csv)?;
    if let Some(dir) = &args.out.out {
        create_dir(dir)?;
        write_atomic(&dir.join("losses.csv"), csv.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_project(args: &ProjectArgs) -> std::result::Result<(), Failure> {
    require_path(&args.config)?;
    let cloud = io::read_cloud(&args.config)?;
    let camera_cloud = match &args.transform {
        Some(rec) => cloud.transform(&RigidTransform::parse_record(rec).map_err(|e| usage(format!("--transform: {e}")))?),
        None => cloud.clone(),
    };
    let depth = project_to_depth_image(&camera_cloud, &CameraIntrinsics::default());
    let bev = rasterize_bev(&cloud, &BevConfig::default());
    let dir = out_dir(&args.out);
    let staged = [
        ("depth.pgm", io::depth_pgm(&depth)),
        ("depth.csv", io::depth_csv(&depth)),
        ("bev.pgm", io::bev_pgm(&bev)),
        ("bev.csv", io::bev_csv(&bev)),
    ];
    create_dir(&dir)?;
    for (name, body) in &staged {
        write_atomic(&dir.join(name), body.as_bytes())?;
    }
    emit(&format!(
        "points={}\ndepth {}x{} occupied={}\nbev {}x{} occupied={}\n",
        cloud.len(),
        depth.width,
        depth.height,
        depth.occupied(),
        bev.width,
        bev.height,
        bev.occupied()
    ))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub d: usize,
    pub channels: usize,
    /// Median over repetitions of the mean time per call.
    pub median_ns: f64,
}

pub const BENCH_HEIGHT: usize = 8;
pub const BENCH_WIDTH: usize = 16;
pub const BENCH_FEATURES: usize = 16;
const BENCH_CALLS_PER_REP: usize = 16;

/// Times [`build_cost_volume`] on random 8x16 grids for `d = 1..=max_d`.
pub fn bench_cost_volume(max_d: usize, reps: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if max_d == 0 || reps == 0 {
        return Err(Error::Config("bench needs d >= 1 and reps >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = BENCH_FEATURES * BENCH_HEIGHT * BENCH_WIDTH;
    let mut grid = || {
        let data = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        FeatureGrid::new(BENCH_FEATURES, BENCH_HEIGHT, BENCH_WIDTH, data)
    };
    let (a, b) = (grid()?, grid()?);
    let radii: Vec<usize> = (1..=max_d).collect();
    // warm-up so allocation effects do not land on the first rep
    let channels = radii
        .iter()
        .map(|&d| build_cost_volume(&a, &b, d).map(|v| v.channels()))
        .collect::<Result<Vec<_>>>()?;
    // radii are interleaved within each rep so background load hits all of them alike
    let mut samples = vec![Vec::with_capacity(reps); max_d];
    for _ in 0..reps {
        for (i, &d) in radii.iter().enumerate() {
            let start = Instant::now();
            for _ in 0..BENCH_CALLS_PER_REP {
                std::hint::black_box(build_cost_volume(std::hint::black_box(&a), &b, d)?);
            }
            samples[i].push(start.elapsed().as_nanos() as f64 / BENCH_CALLS_PER_REP as f64);
        }
    }
    let rows = radii
        .iter()
        .zip(channels)
        .zip(samples.iter_mut())
        .map(|((&d, channels), s)| {
            s.sort_by(f64::total_cmp);
            BenchRow {
                d,
                channels,
                median_ns: s[s.len() / 2],
            }
        })
        .collect();
    Ok(rows)
}

pub fn cmd_bench(args: &BenchArgs) -> std::result::Result<(), Failure> {
    let rows = bench_cost_volume(args.d, args.reps, args.seed)?;
    let mut csv = String::from("d,channels,median_ns\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{:.0}\n", r.d, r.channels, r.median_ns));
    }
    emit(&csv)?;
    if let Some(dir) = &args.out.out {
        create_dir(dir)?;
        write_atomic(&dir.join("bench.csv"), csv.as_bytes())?;
    }
    Ok(())
}
