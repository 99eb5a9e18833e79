//! `goalpost` command-line front end.
//!
//! Every subcommand validates its flags before touching input files. Exit
//! status is 0 on success, 1 on runtime or partial failure and 2 on usage,
//! configuration or unreadable-input errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use goalpost::bench::{self, BenchConfig, BenchReport, FrameSource, Method, MethodSelection};
use goalpost::geometry::{Point2, Quad};
use goalpost::histdetect;
use goalpost::metrics::CameraModel;
use goalpost::pairing;
use goalpost::pnm;
use goalpost::ransac::RansacParams;
use goalpost::scanline::{self, EdgeSide};
use goalpost::synth::{self, SceneSpec, SweepGrid, REFERENCE_DISTANCES_CM, REFERENCE_TILTS_DEG};
use goalpost::{ClassImage, ColourLabel, DetectorConfig, Lut};

/// Label used for quad outlines in annotated output.
pub const ANNOTATION_LABEL: ColourLabel = ColourLabel(255);

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage(msg: impl Display) -> CliError {
    CliError::Usage(msg.to_string())
}

fn runtime(msg: impl Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "goalpost", version, about = "Goalpost detection on colour-segmented images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a PPM image through a colour look-up table into a label PGM.
    Segment(SegmentArgs),
    /// Detect posts in a label PGM and print one CSV line per quad.
    Detect(DetectArgs),
    /// Render a synthetic sweep of label PGMs plus manifest.csv.
    Synth(SynthArgs),
    /// Score the detectors on a synthetic sweep or a directory of frames.
    Bench(BenchArgs),
    /// Dump one intermediate pipeline stage as CSV.
    Inspect(InspectArgs),
}

/// Detector knobs. Unset flags keep the library defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct DetectorArgs {
    /// Scan-line spacing in pixels.
    #[arg(long)]
    pub spacing: Option<u32>,
    /// Consecutive field pixels that must be exceeded to mark the field border.
    #[arg(long)]
    pub green_threshold: Option<u32>,
    /// Standard-deviation multiplier of the segment length check.
    #[arg(long)]
    pub sigma_mult: Option<f64>,
    /// Runs shorter than this are treated as label noise (1 disables).
    #[arg(long)]
    pub min_segment_len: Option<u32>,
    /// Histogram bin count.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Histogram peak threshold (summed segment pixels).
    #[arg(long)]
    pub gamma: Option<u64>,
    /// RANSAC attempts per line.
    #[arg(long)]
    pub ransac_k: Option<usize>,
    /// RANSAC minimum consensus size.
    #[arg(long)]
    pub ransac_n: Option<usize>,
    /// RANSAC inlier distance in pixels.
    #[arg(long)]
    pub ransac_d: Option<f64>,
    /// RANSAC maximum lines per side.
    #[arg(long)]
    pub ransac_m: Option<usize>,
    /// Line-pairing permissiveness in [0, 1].
    #[arg(long)]
    pub rho: Option<f64>,
    /// Label of post pixels.
    #[arg(long)]
    pub post_label: Option<u8>,
    /// Label of field pixels.
    #[arg(long)]
    pub field_label: Option<u8>,
}

impl DetectorArgs {
    pub fn config(&self, seed: u64) -> CliResult<DetectorConfig> {
        let d = DetectorConfig::default();
        let cfg = DetectorConfig {
            post_label: self.post_label.map_or(d.post_label, ColourLabel),
            field_label: self.field_label.map_or(d.field_label, ColourLabel),
            spacing: self.spacing.unwrap_or(d.spacing),
            green_threshold: self.green_threshold.unwrap_or(d.green_threshold),
            sigma_mult: self.sigma_mult.unwrap_or(d.sigma_mult),
            min_segment_len: self.min_segment_len.unwrap_or(d.min_segment_len),
            bins: self.bins.unwrap_or(d.bins),
            gamma: self.gamma.unwrap_or(d.gamma),
            ransac: RansacParams {
                d_inlier: self.ransac_d.unwrap_or(d.ransac.d_inlier),
                k: self.ransac_k.unwrap_or(d.ransac.k),
                n_min: self.ransac_n.unwrap_or(d.ransac.n_min),
                m_max: self.ransac_m.unwrap_or(d.ransac.m_max),
                seed,
            },
            rho: self.rho.unwrap_or(d.rho),
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Histogram,
    Ransac,
    Both,
}

impl From<MethodArg> for MethodSelection {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Histogram => MethodSelection::Histogram,
            MethodArg::Ransac => MethodSelection::Ransac,
            MethodArg::Both => MethodSelection::Both,
        }
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Input PPM (P6).
    pub input: PathBuf,
    /// Colour look-up table file.
    #[arg(long)]
    pub lut: PathBuf,
    /// Output label PGM.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Input label PGM (P5).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Ransac)]
    pub method: MethodArg,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write a copy of the input with quad outlines drawn in label 255.
    #[arg(long)]
    pub annotate: Option<PathBuf>,
}

/// Synthetic scene and sweep grid.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Post distances in cm (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = REFERENCE_DISTANCES_CM.to_vec())]
    pub distances: Vec<f64>,
    /// Coronal tilts in degrees (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = REFERENCE_TILTS_DEG.to_vec())]
    pub tilts: Vec<f64>,
    /// Frames per (distance, tilt) cell.
    #[arg(long, default_value_t = 50)]
    pub frames: usize,
    /// Per-pixel label flip probability.
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
}

/// Camera and post geometry used for distance-by-width.
#[derive(Debug, Clone, Args)]
pub struct CameraArgs {
    /// Horizontal field of view in degrees.
    #[arg(long, default_value_t = 60.0)]
    pub fov_deg: f64,
    /// Physical post width in cm.
    #[arg(long, default_value_t = 11.0)]
    pub post_width_cm: f64,
}

impl CameraArgs {
    fn validate(&self, width: u32) -> CliResult<CameraModel> {
        if !(self.post_width_cm > 0.0) {
            return Err(usage(format!("--post-width-cm must be positive, got {}", self.post_width_cm)));
        }
        CameraModel::from_degrees(width, self.fov_deg).map_err(usage)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Output directory for report.csv, frames.csv and friends.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// Score PGM frames from this directory instead of rendering a sweep.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Segments,
    Candidates,
    Border,
    Histogram,
    Lines,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Input label PGM (P5).
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub stage: Stage,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Prefix the rows with a column header.
    #[arg(long)]
    pub header: bool,
}

/// Runs a parsed invocation, writing textual output to `out`. Returns the
/// process exit status.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<u8> {
    match cli.command {
        Command::Segment(a) => cmd_segment(&a).map(|_| 0),
        Command::Detect(a) => cmd_detect(&a, out).map(|_| 0),
        Command::Synth(a) => cmd_synth(&a).map(|_| 0),
        Command::Bench(a) => cmd_bench(&a),
        Command::Inspect(a) => cmd_inspect(&a, out).map(|_| 0),
    }
}

fn open_input(path: &Path, what: &str) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| usage(format!("cannot read {what} {}: {e}", path.display())))
}

fn create_output(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime(format!("cannot create {}: {e}", path.display())))
}

fn read_class_image(path: &Path) -> CliResult<ClassImage> {
    pnm::read_pgm(open_input(path, "image")?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_segment(a: &SegmentArgs) -> CliResult<()> {
    let lut = Lut::read_from(open_input(&a.lut, "LUT")?).map_err(|e| usage(format!("{}: {e}", a.lut.display())))?;
    let raw = pnm::read_ppm(open_input(&a.input, "image")?).map_err(|e| usage(format!("{}: {e}", a.input.display())))?;
    if raw.bits_per_channel() != lut.bits_per_channel() {
        return Err(usage(format!(
            "{} has {} bits per channel but LUT {} expects {}",
            a.input.display(),
            raw.bits_per_channel(),
            a.lut.display(),
            lut.bits_per_channel()
        )));
    }
    let classes = lut.classify_image(&raw).map_err(|e| {
        usage(format!("{} does not fit LUT {}: {e}", a.input.display(), a.lut.display()))
    })?;
    let mut w = create_output(&a.out)?;
    pnm::write_pgm(&classes, &mut w).map_err(runtime)?;
    finish(w, &a.out)
}

fn format_quad(method: Method, q: &Quad) -> String {
    let mut line = method.as_str().to_string();
    for c in &q.corners {
        line.push_str(&format!(",{},{}", c.x, c.y));
    }
    line.push_str(&format!(",{}", q.width_px));
    line
}

pub fn cmd_detect(a: &DetectArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = a.detector.config(a.seed)?;
    let img = read_class_image(&a.input)?;
    let mut all = Vec::new();
    for &method in MethodSelection::from(a.method).methods() {
        let quads = method.detect(&img, &cfg).map_err(usage)?;
        for q in &quads {
            writeln!(out, "{}", format_quad(method, q)).map_err(runtime)?;
        }
        all.extend(quads);
    }
    if let Some(path) = &a.annotate {
        let mut copy = img.clone();
        for q in &all {
            draw_quad(&mut copy, q, ANNOTATION_LABEL);
        }
        let mut w = create_output(path)?;
        pnm::write_pgm(&copy, &mut w).map_err(runtime)?;
        finish(w, path)?;
    }
    Ok(())
}

/// Draws the quad's outline, clipped to the image.
pub fn draw_quad(img: &mut ClassImage, q: &Quad, label: ColourLabel) {
    for i in 0..4 {
        draw_line(img, q.corners[i], q.corners[(i + 1) % 4], label);
    }
}

fn draw_line(img: &mut ClassImage, a: Point2, b: Point2, label: ColourLabel) {
    let steps = (b.x - a.x).abs().max((b.y - a.y).abs()).ceil().max(1.0) as usize;
    for s in 0..=steps {
        let p = a + (b - a) * (s as f64 / steps as f64);
        let (x, y) = (p.x.floor(), p.y.floor());
        if x >= 0.0 && y >= 0.0 && x < f64::from(img.width()) && y < f64::from(img.height()) {
            img.set(x as u32, y as u32, label);
        }
    }
}

fn sweep_grid(g: &GridArgs, camera: &CameraArgs, seed: u64) -> CliResult<SweepGrid> {
    let cam = camera.validate(g.width)?;
    let grid = SweepGrid {
        distances_cm: g.distances.clone(),
        tilts_deg: g.tilts.clone(),
        frames_per_cell: g.frames,
        template: SceneSpec {
            camera: cam,
            image_height: g.height,
            post_width_cm: camera.post_width_cm,
            noise_p: g.noise,
            ..SceneSpec::default()
        },
        base_seed: seed,
    };
    // surfaces bad distances, tilts and noise before any rendering
    grid.frames().map_err(usage)?;
    Ok(grid)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))
}

pub fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    let grid = sweep_grid(&a.grid, &a.camera, a.seed)?;
    ensure_dir(&a.out)?;
    let frames = synth::sweep(&grid).map_err(runtime)?;
    let manifest_path = a.out.join("manifest.csv");
    let mut manifest = create_output(&manifest_path)?;
    writeln!(manifest, "{}", synth::MANIFEST_HEADER).map_err(runtime)?;
    for (frame, img, truth) in &frames {
        let path = a.out.join(format!("{}.pgm", frame.frame_id));
        let mut w = create_output(&path)?;
        pnm::write_pgm(img, &mut w).map_err(runtime)?;
        finish(w, &path)?;
        synth::write_manifest_row(&mut manifest, &frame.frame_id, truth).map_err(runtime)?;
    }
    finish(manifest, &manifest_path)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> goalpost::Result<()>) -> CliResult<()> {
    let mut w = create_output(path)?;
    f(&mut w).map_err(runtime)?;
    finish(w, path)
}

pub fn bench_config(a: &BenchArgs) -> CliResult<BenchConfig> {
    let detector = a.detector.config(a.seed)?;
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let source = match &a.input {
        Some(dir) => {
            a.camera.validate(1)?;
            if !dir.is_dir() {
                return Err(usage(format!("input directory {} does not exist", dir.display())));
            }
            FrameSource::Directory(dir.clone())
        }
        None => FrameSource::Synthetic(sweep_grid(&a.grid, &a.camera, a.seed)?),
    };
    Ok(BenchConfig {
        methods: a.method.into(),
        detector,
        source,
        fov_deg: Some(a.camera.fov_deg),
        post_width_cm: a.camera.post_width_cm,
        jobs,
    })
}

/// Writes the report files and returns 1 when some frames failed.
pub fn cmd_bench(a: &BenchArgs) -> CliResult<u8> {
    let cfg = bench_config(a)?;
    ensure_dir(&a.out)?;
    let report = bench::run_benchmark(&cfg).map_err(|e| match e {
        goalpost::Error::Parameter(_) | goalpost::Error::Format(_) => usage(e),
        other => runtime(other),
    })?;
    write_bench_outputs(&cfg, &report, &a.out)?;
    for e in &report.errors {
        eprintln!("frame {}: {}", e.frame_id, e.message);
    }
    Ok(if report.errors.is_empty() { 0 } else { 1 })
}

fn write_bench_outputs(cfg: &BenchConfig, report: &BenchReport, dir: &Path) -> CliResult<()> {
    write_file(&dir.join("report.csv"), |w| report.write_cells_csv(w))?;
    write_file(&dir.join("frames.csv"), |w| report.write_frames_csv(w))?;
    if matches!(cfg.source, FrameSource::Synthetic(_)) {
        write_file(&dir.join("manifest.csv"), |w| bench::write_manifest(cfg, w))?;
    }
    if cfg.methods == MethodSelection::Both && report.cells.iter().any(|c| c.scored()) {
        let rows = bench::compare_reports(&report.for_method(Method::Histogram), &report.for_method(Method::Ransac))
            .map_err(runtime)?;
        write_file(&dir.join("comparison.csv"), |w| bench::write_comparison_csv(&rows, w))?;
    }
    if !report.errors.is_empty() {
        write_file(&dir.join("errors.csv"), |w| {
            writeln!(w, "frame_id,message")?;
            for e in &report.errors {
                writeln!(w, "{},{:?}", e.frame_id, e.message)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

pub fn cmd_inspect(a: &InspectArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = a.detector.config(a.seed)?;
    let img = read_class_image(&a.input)?;
    let mut rows: Vec<String> = Vec::new();
    let header = match a.stage {
        Stage::Segments => {
            let lines = scanline::generate_scanlines(img.width(), img.height(), cfg.spacing).map_err(usage)?;
            let raw = scanline::extract_segments(&img, &lines);
            for s in scanline::denoise_segments(&raw, cfg.post_label, cfg.min_segment_len) {
                rows.push(format!(
                    "{},{},{},{},{},{},{}",
                    s.orientation.as_str(),
                    s.start.x,
                    s.start.y,
                    s.end.x,
                    s.end.y,
                    s.label.0,
                    s.length
                ));
            }
            "orientation,x0,y0,x1,y1,label,length"
        }
        Stage::Candidates => {
            let det = pairing::run_ransac(&img, &cfg).map_err(usage)?;
            for c in &det.candidates {
                rows.push(format!("{},{},{},{},{}", c.side.as_str(), c.pixel.x, c.pixel.y, c.edge.x, c.edge.y));
            }
            "side,x,y,edge_x,edge_y"
        }
        Stage::Border => {
            let det = pairing::run_ransac(&img, &cfg).map_err(usage)?;
            for (x, y) in det.border.vertices() {
                rows.push(format!("{x},{y}"));
            }
            "x,y"
        }
        Stage::Histogram => {
            let det = histdetect::run_histogram(&img, &cfg).map_err(usage)?;
            for (n, b) in det.histogram.bins().enumerate() {
                let peak = det.peaks.contains(&n);
                rows.push(format!("{},{},{},{},{}", n, b.x_start, b.x_end, b.count, peak));
            }
            "bin,x_start,x_end,count,peak"
        }
        Stage::Lines => {
            let det = pairing::run_ransac(&img, &cfg).map_err(usage)?;
            let sides = [(EdgeSide::Left, &det.left_lines), (EdgeSide::Right, &det.right_lines)];
            for (side, lines) in sides {
                for l in lines.iter() {
                    rows.push(format!(
                        "{},{},{},{},{},{}",
                        side.as_str(),
                        l.start.x,
                        l.start.y,
                        l.end.x,
                        l.end.y,
                        l.consensus_count()
                    ));
                }
            }
            "side,x0,y0,x1,y1,consensus"
        }
    };
    if a.header {
        writeln!(out, "{header}").map_err(runtime)?;
    }
    for r in rows {
        writeln!(out, "{r}").map_err(runtime)?;
    }
    Ok(())
}
