//! The `rayfuse` command line.
//!
//! Exit codes: 0 on success, 2 for usage and file errors, 1 for errors in
//! the data itself (empty foreground, degenerate clouds, ...). Every command
//! writes identical outputs for any `--threads` value.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::alignment::{align_canonical, AlignmentConfig, ScaleFit};
use crate::augment::{augment_view, AugmentConfig};
use crate::bvh::Bvh;
use crate::error::Error;
use crate::fusion::FusionConfig;
use crate::io;
use crate::metrics::evaluate;
use crate::pipeline::{complete, PipelineConfig};
use crate::predictor::{
    save_prediction, FilePredictor, OraclePredictor, OraclePredictorConfig, Predictor,
};
use crate::render::render_depth;
use crate::view_sampling::ViewSamplingConfig;

#[derive(Debug, Parser)]
#[command(
    name = "rayfuse",
    version,
    about = "Shape completion by multi-view depth prediction and fusion"
)]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "RAYFUSE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ray-cast depth and mask of a scene from one camera.
    Render(RenderArgs),
    /// Complete the shape seen in an input view and write the fused cloud.
    Complete(CompleteArgs),
    /// Chamfer distance and F1 between two clouds.
    Eval(EvalArgs),
    /// Register a prediction in an arbitrary frame onto the ground truth.
    Align(AlignArgs),
    /// Apply seeded sensor-style corruption to input views.
    Augment(AugmentArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Scene file or single OBJ mesh.
    #[arg(long)]
    pub scene: PathBuf,
    /// Camera file; defaults to the camera line of the scene file.
    #[arg(long)]
    pub camera: Option<PathBuf>,
    #[arg(long)]
    pub out_depth: PathBuf,
    #[arg(long)]
    pub out_mask: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredictorKind {
    /// Ray cast the ground-truth scene.
    Oracle,
    /// Read `view_NNNN.*` files from `--pred-dir`.
    Files,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// λ_bb = 1.3, λ_cam = 0.7.
    Default,
    /// λ_bb = 2.5, λ_cam = 1.2.
    Octmae,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    /// Directory with depth.rdm, mask.pgm, camera.cam and optional rgb.ppm.
    #[arg(long)]
    pub input_view: PathBuf,
    #[arg(long, value_enum)]
    pub predictor: PredictorKind,
    /// Scene for the oracle predictor.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Prediction directory for the file predictor.
    #[arg(long)]
    pub pred_dir: Option<PathBuf>,
    /// Sampling preset; explicit --lambda-* flags override it.
    #[arg(long, value_enum, default_value = "default")]
    pub preset: Preset,
    #[arg(long)]
    pub lambda_bb: Option<f64>,
    #[arg(long)]
    pub lambda_cam: Option<f64>,
    /// Sampled views, not counting the input view.
    #[arg(long, default_value_t = 22)]
    pub views: usize,
    /// Threshold on the activated confidence.
    #[arg(long, default_value_t = 5.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.5)]
    pub mask_threshold: f64,
    /// Meters a point must lie behind the observed surface.
    #[arg(long, default_value_t = 0.0)]
    pub occlusion_eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest path; defaults to the output path with a `.manifest` extension.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub no_occ: bool,
    #[arg(long)]
    pub no_pred_mask: bool,
    #[arg(long)]
    pub no_conf: bool,
    #[arg(long)]
    pub no_input_query: bool,
    /// Oracle: standard deviation of the depth error on corrupted pixels (m).
    #[arg(long, default_value_t = 0.0)]
    pub oracle_noise: f64,
    /// Oracle: fraction of foreground pixels to corrupt.
    #[arg(long, default_value_t = 0.0)]
    pub oracle_corrupt: f64,
    /// Oracle: foreground bleeding into background, in pixels.
    #[arg(long, default_value_t = 0)]
    pub oracle_bleed: usize,
    /// Oracle: depth predicted on background pixels (m), 0 for none.
    #[arg(long, default_value_t = 0.0)]
    pub oracle_background: f64,
    /// Also write every prediction to this directory.
    #[arg(long)]
    pub save_predictions: Option<PathBuf>,
    /// Ground-truth cloud; adds metrics to the manifest.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    pub eta_mm: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    pub eta_mm: f64,
    /// Report file (`key=value` lines).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Grid values per Euler angle.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Also search scale multipliers 0.65..=1.35 in steps of 0.05.
    #[arg(long)]
    pub scale_grid: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points per cloud used to score grid candidates.
    #[arg(long, default_value_t = 2048)]
    pub subsample: usize,
    #[arg(long, default_value_t = 10.0)]
    pub eta_mm: f64,
    /// Transform and report file.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the aligned prediction.
    #[arg(long)]
    pub aligned: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// An input-view directory, or a directory of input-view directories.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    /// A scene file without meshes counts as a bad input file.
    fn from(e: Error) -> Self {
        let code = if e.is_io() || matches!(e, Error::EmptyScene) {
            2
        } else {
            1
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Ordered `key=value` record of a run. Lines starting with `timing.` are
/// the only ones that vary between identical runs.
#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn time(&mut self, stage: &str, since: Instant) {
        self.push(
            format!("timing.{stage}_ms"),
            format!("{:.3}", since.elapsed().as_secs_f64() * 1e3),
        );
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub fn run(cli: Cli) -> CliResult {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Render(a) => render_cmd(&a),
        Command::Complete(a) => complete_cmd(&a),
        Command::Eval(a) => eval_cmd(&a),
        Command::Align(a) => align_cmd(&a),
        Command::Augment(a) => augment_cmd(&a),
    })
}

fn render_cmd(a: &RenderArgs) -> CliResult {
    let file = io::load_scene_or_mesh(&a.scene)?;
    let (k, pose) = match &a.camera {
        Some(path) => io::load_camera(path)?,
        None => file
            .camera
            .ok_or_else(|| CliError::usage("no --camera given and the scene file has none"))?,
    };
    let bvh = Bvh::build(&file.scene)?;
    let (depth, mask) = render_depth(&bvh, &pose, &k);
    io::save_raster(&a.out_depth, &depth)?;
    io::save_mask(&a.out_mask, &mask)?;
    Ok(())
}

fn complete_cmd(a: &CompleteArgs) -> CliResult {
    let mut manifest = Manifest::default();
    let started = Instant::now();
    let input = io::load_input_view(&a.input_view)?;
    manifest.time("load", started);

    let predictor: Box<dyn Predictor> = match a.predictor {
        PredictorKind::Oracle => {
            let scene = a
                .scene
                .as_ref()
                .ok_or_else(|| CliError::usage("--predictor oracle needs --scene"))?;
            let cfg = OraclePredictorConfig {
                depth_noise_sigma: a.oracle_noise,
                corrupt_fraction: a.oracle_corrupt,
                edge_bleed_px: a.oracle_bleed,
                background_depth: a.oracle_background,
                seed: a.seed,
                ..Default::default()
            };
            let t = Instant::now();
            let oracle = OraclePredictor::new(&io::load_scene_or_mesh(scene)?.scene, cfg)?;
            manifest.time("oracle_build", t);
            Box::new(oracle)
        }
        PredictorKind::Files => {
            let dir = a
                .pred_dir
                .as_ref()
                .ok_or_else(|| CliError::usage("--predictor files needs --pred-dir"))?;
            Box::new(FilePredictor::new(dir))
        }
    };

    let preset = match a.preset {
        Preset::Default => ViewSamplingConfig::default(),
        Preset::Octmae => ViewSamplingConfig::octmae(),
    };
    let cfg = PipelineConfig {
        sampling: ViewSamplingConfig {
            lambda_bb: a.lambda_bb.unwrap_or(preset.lambda_bb),
            lambda_cam: a.lambda_cam.unwrap_or(preset.lambda_cam),
            n_views: a.views,
            query_intrinsics: None,
        },
        fusion: FusionConfig {
            confidence_threshold: a.tau,
            mask_threshold: a.mask_threshold,
            occlusion_epsilon: a.occlusion_eps,
            enable_occlusion: !a.no_occ,
            enable_pred_mask: !a.no_pred_mask,
            enable_confidence: !a.no_conf,
            enable_input_query: !a.no_input_query,
        },
    };
    cfg.sampling
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    cfg.fusion
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;

    let t = Instant::now();
    let out = complete(&input, predictor.as_ref(), &cfg)?;
    manifest.time("complete", t);
    let t = Instant::now();
    io::save_cloud(&a.out, &out.cloud)?;
    if let Some(dir) = &a.save_predictions {
        for (q, p) in out.queries.iter().zip(&out.predictions) {
            save_prediction(dir, q.index, p)?;
        }
    }
    manifest.time("write", t);

    manifest.push("command", "complete");
    manifest.push("input_view", a.input_view.display());
    manifest.push("predictor", format!("{:?}", a.predictor).to_lowercase());
    manifest.push("seed", a.seed);
    manifest.push("lambda_bb", cfg.sampling.lambda_bb);
    manifest.push("lambda_cam", cfg.sampling.lambda_cam);
    manifest.push("views", cfg.sampling.n_views);
    manifest.push("tau", cfg.fusion.confidence_threshold);
    manifest.push("mask_threshold", cfg.fusion.mask_threshold);
    manifest.push("occlusion_eps", cfg.fusion.occlusion_epsilon);
    manifest.push("gate.occlusion", cfg.fusion.enable_occlusion);
    manifest.push("gate.pred_mask", cfg.fusion.enable_pred_mask);
    manifest.push("gate.confidence", cfg.fusion.enable_confidence);
    manifest.push("gate.input_query", cfg.fusion.enable_input_query);
    if a.predictor == PredictorKind::Oracle {
        manifest.push("oracle.noise", a.oracle_noise);
        manifest.push("oracle.corrupt", a.oracle_corrupt);
        manifest.push("oracle.bleed", a.oracle_bleed);
        manifest.push("oracle.background", a.oracle_background);
    }
    for (q, n) in out.queries.iter().zip(&out.view_counts) {
        manifest.push(format!("view.{:04}.points", q.index), n);
    }
    manifest.push("points", out.cloud.len());
    if let Some(gt_path) = &a.gt {
        let gt = io::load_cloud(gt_path)?;
        let r = evaluate(&out.cloud, &gt, a.eta_mm)?;
        for line in r.to_key_values().lines() {
            if let Some((k, v)) = line.split_once('=') {
                manifest.push(format!("metrics.{k}"), v);
            }
        }
    }
    manifest.time("total", started);
    let manifest_path = a
        .manifest
        .clone()
        .unwrap_or_else(|| a.out.with_extension("manifest"));
    io::write_file(&manifest_path, manifest.render().as_bytes())?;
    Ok(())
}

fn eval_cmd(a: &EvalArgs) -> CliResult {
    let pred = io::load_cloud(&a.pred)?;
    let gt = io::load_cloud(&a.gt)?;
    let r = evaluate(&pred, &gt, a.eta_mm)?;
    if let Some(out) = &a.out {
        io::write_file(out, r.to_key_values().as_bytes())?;
    }
    println!("{}", serde_json::to_string(&r).expect("report serializes"));
    Ok(())
}

fn align_cmd(a: &AlignArgs) -> CliResult {
    let pred = io::load_cloud(&a.pred)?;
    let gt = io::load_cloud(&a.gt)?;
    let cfg = AlignmentConfig {
        rotation_steps: a.steps,
        use_scale_grid: a.scale_grid,
        seed: a.seed,
        eval_subsample: a.subsample,
        eta_mm: a.eta_mm,
        ..Default::default()
    };
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let r = align_canonical(&pred, &gt, &cfg)?;
    let mut text = String::from("# prediction-to-ground-truth affine map, rows of [A|t]\n");
    for row in r.alignment.affine() {
        text.push_str(&format!("{} {} {} {}\n", row[0], row[1], row[2], row[3]));
    }
    let scale = match r.scale {
        ScaleFit::PerAxis { factors, .. } => format!("{} {} {}", factors.x, factors.y, factors.z),
        ScaleFit::Uniform(s) => s.to_string(),
    };
    text.push_str(&format!("box_scale={scale}\n"));
    text.push_str(&format!("scale_multiplier={}\n", r.scale_multiplier));
    text.push_str(&format!(
        "grid_angles={} {} {}\n",
        r.grid.angles[0], r.grid.angles[1], r.grid.angles[2]
    ));
    text.push_str(&format!(
        "icp_iterations={}\nicp_converged={}\n",
        r.icp.iterations, r.icp.converged
    ));
    text.push_str(&r.report.to_key_values());
    io::write_file(&a.out, text.as_bytes())?;
    if let Some(path) = &a.aligned {
        io::save_cloud(path, &r.alignment.apply(&pred))?;
    }
    println!(
        "{}",
        serde_json::to_string(&r.report).expect("report serializes")
    );
    Ok(())
}

/// Input-view directories under `root`, in name order; `root` itself when it
/// is one.
fn view_dirs(root: &Path) -> CliResult<Vec<PathBuf>> {
    if root.join(io::INPUT_DEPTH).exists() {
        return Ok(vec![root.to_path_buf()]);
    }
    let entries = std::fs::read_dir(root).map_err(|e| CliError::from(Error::io(root, e)))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(io::INPUT_DEPTH).exists())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(CliError::usage(format!(
            "no input views under {}",
            root.display()
        )));
    }
    Ok(dirs)
}

fn augment_cmd(a: &AugmentArgs) -> CliResult {
    let mut cfg = match &a.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::from(Error::io(path, e)))?;
            toml::from_str::<AugmentConfig>(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        }
        None => AugmentConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let dirs = view_dirs(&a.input)?;
    let single = dirs.len() == 1 && dirs[0] == a.input;
    for (k, dir) in dirs.iter().enumerate() {
        let view = io::load_input_view(dir)?;
        let out_dir = if single {
            a.out.clone()
        } else {
            a.out.join(dir.file_name().expect("listed entry"))
        };
        let augmented = augment_view(&view, &cfg, k as u64)?;
        io::save_input_view(&out_dir, &augmented, dir.join(io::INPUT_RGB).exists())?;
    }
    Ok(())
}
