//! Benchmark harness: runs the detectors over a frame set, scores them
//! against ground truth and aggregates per (distance, tilt, method) cell.
//!
//! A frame counts as detected when the quad nearest the image centre has its
//! centre inside the true post's bounding box. Frames without ground truth
//! count as detected whenever any quad is found.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::DetectorConfig;
use crate::error::{param, Error, Result};
use crate::geometry::{Point2, Quad};
use crate::histdetect;
use crate::metrics::{self, CameraModel, DetectionRecord};
use crate::pairing;
use crate::pnm;
use crate::segmentation::ClassImage;
use crate::splitmix64;
use crate::synth::{self, SceneTruth, SweepGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Histogram,
    Ransac,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Histogram => "histogram",
            Method::Ransac => "ransac",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "histogram" => Ok(Method::Histogram),
            "ransac" => Ok(Method::Ransac),
            other => param(format!("unknown method {other:?}")),
        }
    }

    pub fn detect(self, img: &ClassImage, cfg: &DetectorConfig) -> Result<Vec<Quad>> {
        match self {
            Method::Histogram => histdetect::detect_histogram(img, cfg),
            Method::Ransac => pairing::detect_ransac(img, cfg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSelection {
    Histogram,
    Ransac,
    Both,
}

impl MethodSelection {
    pub fn methods(self) -> &'static [Method] {
        match self {
            MethodSelection::Histogram => &[Method::Histogram],
            MethodSelection::Ransac => &[Method::Ransac],
            MethodSelection::Both => &[Method::Histogram, Method::Ransac],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrameSource {
    /// Render the grid in memory.
    Synthetic(SweepGrid),
    /// A directory of PGM class images, scored against `manifest.csv` when
    /// present.
    Directory(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub methods: MethodSelection,
    pub detector: DetectorConfig,
    pub source: FrameSource,
    /// Horizontal field of view for directory frames; synthetic frames use
    /// the scene camera.
    pub fov_deg: Option<f64>,
    /// Physical post width assumed by distance-by-width.
    pub post_width_cm: f64,
    pub jobs: usize,
}

/// Per-frame, per-method outcome. These rows are what gets persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_id: String,
    pub method: Method,
    pub truth: Option<(f64, f64)>,
    pub detected: bool,
    pub est_distance_cm: Option<f64>,
    pub width_px: Option<f64>,
    pub n_quads: usize,
}

impl FrameRecord {
    fn as_detection(&self) -> Option<DetectionRecord> {
        self.truth.map(|(d, t)| DetectionRecord {
            true_distance: d,
            tilt: t,
            estimated_distance: if self.detected { self.est_distance_cm } else { None },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameError {
    pub frame_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    /// `None` for frames scored without ground truth.
    pub distance_cm: Option<f64>,
    pub tilt_deg: Option<f64>,
    pub method: Method,
    pub frames: usize,
    pub detection_rate: f64,
    pub rmse_cm: Option<f64>,
    pub mean_estimated_distance: Option<f64>,
}

impl CellSummary {
    pub fn scored(&self) -> bool {
        self.distance_cm.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<FrameRecord>,
    pub cells: Vec<CellSummary>,
    pub errors: Vec<FrameError>,
}

impl BenchReport {
    pub fn from_records(records: Vec<FrameRecord>, errors: Vec<FrameError>) -> Self {
        let cells = aggregate(&records);
        Self { records, cells, errors }
    }

    pub fn for_method(&self, method: Method) -> BenchReport {
        let records = self.records.iter().filter(|r| r.method == method).cloned().collect();
        BenchReport::from_records(records, self.errors.clone())
    }

    pub fn cell(&self, distance_cm: f64, tilt_deg: f64, method: Method) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.distance_cm == Some(distance_cm) && c.tilt_deg == Some(tilt_deg))
    }

    /// RMSE pooled over every scored record of `method` at `tilt_deg`.
    pub fn pooled_rmse(&self, method: Method, tilt_deg: f64) -> Option<f64> {
        let recs: Vec<DetectionRecord> = self
            .records
            .iter()
            .filter(|r| r.method == method)
            .filter_map(FrameRecord::as_detection)
            .filter(|d| d.tilt == tilt_deg)
            .collect();
        metrics::distance_rmse(&recs).ok()
    }

    pub fn write_cells_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{REPORT_HEADER}")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                opt(c.distance_cm),
                opt(c.tilt_deg),
                c.method.as_str(),
                c.frames,
                c.detection_rate,
                opt(c.rmse_cm)
            )?;
        }
        Ok(())
    }

    pub fn write_frames_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{FRAMES_HEADER}")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.frame_id,
                r.method.as_str(),
                r.detected,
                opt(r.est_distance_cm),
                opt(r.width_px),
                r.n_quads
            )?;
        }
        Ok(())
    }
}

pub const REPORT_HEADER: &str = "true_distance_cm,tilt_deg,method,frames,detection_rate,rmse_cm";
pub const FRAMES_HEADER: &str = "frame_id,method,detected,est_distance_cm,width_px,n_quads";
pub const COMPARISON_HEADER: &str = "true_distance_cm,tilt_deg,method_a,method_b,rate_ratio,rmse_ratio";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Cell key ordering: scored cells by distance then tilt, unscored last.
type CellKey = (bool, u64, u64, Method);

fn cell_key(r: &FrameRecord) -> CellKey {
    match r.truth {
        Some((d, t)) => (false, d.to_bits(), t.to_bits(), r.method),
        None => (true, 0, 0, r.method),
    }
}

/// Per-cell summaries recomputed from per-frame records alone.
pub fn aggregate(records: &[FrameRecord]) -> Vec<CellSummary> {
    let mut groups: BTreeMap<CellKey, Vec<&FrameRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(cell_key(r)).or_default().push(r);
    }
    let mut cells: Vec<CellSummary> = groups
        .into_values()
        .map(|recs| {
            let first = recs[0];
            let frames = recs.len();
            let hits: Vec<f64> = recs
                .iter()
                .filter(|r| r.detected)
                .filter_map(|r| r.est_distance_cm)
                .collect();
            let detection_rate = recs.iter().filter(|r| r.detected).count() as f64 / frames as f64;
            let mean_estimated_distance = (!hits.is_empty()).then(|| hits.iter().sum::<f64>() / hits.len() as f64);
            let rmse_cm = match first.truth {
                Some(_) => {
                    let dets: Vec<DetectionRecord> = recs.iter().filter_map(|r| r.as_detection()).collect();
                    metrics::distance_rmse(&dets).ok()
                }
                None => None,
            };
            CellSummary {
                distance_cm: first.truth.map(|t| t.0),
                tilt_deg: first.truth.map(|t| t.1),
                method: first.method,
                frames,
                detection_rate,
                rmse_cm,
                mean_estimated_distance,
            }
        })
        .collect();
    // BTreeMap ordered distances by bit pattern; re-sort numerically
    cells.sort_by(|a, b| {
        (a.distance_cm.is_none(), a.distance_cm.unwrap_or(0.0), a.tilt_deg.unwrap_or(0.0), a.method)
            .partial_cmp(&(b.distance_cm.is_none(), b.distance_cm.unwrap_or(0.0), b.tilt_deg.unwrap_or(0.0), b.method))
            .expect("finite cell keys")
    });
    cells
}

/// Index of the quad whose centre is nearest `(cx, cy)`; ties keep the first.
pub fn nearest_to_centre(quads: &[Quad], centre: Point2) -> Option<usize> {
    quads
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.centre().distance(centre).total_cmp(&b.1.centre().distance(centre)))
        .map(|(i, _)| i)
}

enum FrameLoad {
    Render(synth::SceneSpec),
    File(PathBuf),
}

struct FrameJob {
    frame_id: String,
    truth: Option<SceneTruth>,
    seed: u64,
    load: FrameLoad,
}

fn collect_jobs(cfg: &BenchConfig) -> Result<Vec<FrameJob>> {
    match &cfg.source {
        FrameSource::Synthetic(grid) => Ok(grid
            .frames()?
            .into_iter()
            .map(|f| FrameJob {
                truth: Some(f.spec.truth()),
                seed: f.spec.seed,
                load: FrameLoad::Render(f.spec),
                frame_id: f.frame_id,
            })
            .collect()),
        FrameSource::Directory(dir) => directory_jobs(dir),
    }
}

fn directory_jobs(dir: &Path) -> Result<Vec<FrameJob>> {
    if !dir.is_dir() {
        return param(format!("input directory {} does not exist", dir.display()));
    }
    let manifest = dir.join("manifest.csv");
    let jobs: Vec<FrameJob> = if manifest.exists() {
        // frame size is patched per frame once the image is read
        let rows = synth::read_manifest(BufReader::new(fs::File::open(&manifest)?), 0, 0)?;
        rows.into_iter()
            .map(|(id, truth)| FrameJob {
                load: FrameLoad::File(dir.join(format!("{id}.pgm"))),
                seed: truth.seed,
                truth: Some(truth),
                frame_id: id,
            })
            .collect()
    } else {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "pgm"))
            .collect();
        files.sort();
        files
            .into_iter()
            .enumerate()
            .map(|(i, path)| FrameJob {
                frame_id: path.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                truth: None,
                seed: i as u64,
                load: FrameLoad::File(path),
            })
            .collect()
    };
    if jobs.is_empty() {
        return param(format!("no frames found in {}", dir.display()));
    }
    Ok(jobs)
}

fn run_frame(job: &FrameJob, cfg: &BenchConfig) -> std::result::Result<Vec<FrameRecord>, FrameError> {
    let fail = |e: Error| FrameError {
        frame_id: job.frame_id.clone(),
        message: e.to_string(),
    };
    let (img, camera, truth) = match &job.load {
        FrameLoad::Render(spec) => {
            let (img, truth) = synth::render_scene(spec).map_err(fail)?;
            (img, spec.camera, Some(truth))
        }
        FrameLoad::File(path) => {
            let file = fs::File::open(path)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
                .map_err(fail)?;
            let img = pnm::read_pgm(BufReader::new(file)).map_err(fail)?;
            let fov = cfg.fov_deg.ok_or_else(|| fail(Error::Parameter("directory frames need a field of view".into())))?;
            let camera = CameraModel::from_degrees(img.width(), fov).map_err(fail)?;
            let truth = job.truth.map(|t| SceneTruth {
                image_width: img.width(),
                image_height: img.height(),
                ..t
            });
            (img, camera, truth)
        }
    };
    let gamma = camera.pixel_angular_width();
    let centre = Point2::new(f64::from(img.width()) / 2.0, f64::from(img.height()) / 2.0);
    let mut detector = cfg.detector.clone();
    detector.ransac.seed = splitmix64(cfg.detector.ransac.seed ^ job.seed);

    let mut out = Vec::new();
    for &method in cfg.methods.methods() {
        let quads = method.detect(&img, &detector).map_err(fail)?;
        let chosen = nearest_to_centre(&quads, centre).map(|i| quads[i]);
        let detected = chosen.is_some_and(|q| truth.is_none_or(|t| t.box_contains(q.centre())));
        let est = match chosen {
            Some(q) if detected => Some(metrics::distance_by_width(cfg.post_width_cm, q.width_px, gamma).map_err(fail)?),
            _ => None,
        };
        out.push(FrameRecord {
            frame_id: job.frame_id.clone(),
            method,
            truth: truth.map(|t| (t.distance_cm, t.tilt_deg)),
            detected,
            est_distance_cm: est,
            width_px: chosen.map(|q| q.width_px),
            n_quads: quads.len(),
        });
    }
    Ok(out)
}

/// Runs the configured detectors over every frame. Frames that fail to load
/// or render are listed in `errors` and skipped.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.detector.validate()?;
    if !(cfg.post_width_cm > 0.0) {
        return param(format!("post width must be positive, got {}", cfg.post_width_cm));
    }
    if cfg.jobs == 0 {
        return param("need at least one worker");
    }
    let jobs = collect_jobs(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| jobs.par_iter().map(|j| run_frame(j, cfg)).collect());

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(recs) => records.extend(recs),
            Err(e) => errors.push(e),
        }
    }
    Ok(BenchReport::from_records(records, errors))
}

/// Writes `manifest.csv` for a synthetic source (for later recomputation).
pub fn write_manifest(cfg: &BenchConfig, mut w: impl Write) -> Result<()> {
    let FrameSource::Synthetic(grid) = &cfg.source else {
        return param("only synthetic sources have a generated manifest");
    };
    writeln!(w, "{}", synth::MANIFEST_HEADER)?;
    for f in grid.frames()? {
        synth::write_manifest_row(&mut w, &f.frame_id, &f.spec.truth())?;
    }
    Ok(())
}

/// Rebuilds frame records from a persisted per-frame CSV, joining ground
/// truth from the manifest by frame id.
pub fn read_frame_records(frames_csv: impl BufRead, manifest: Option<impl BufRead>) -> Result<Vec<FrameRecord>> {
    let truths: BTreeMap<String, (f64, f64)> = match manifest {
        Some(m) => synth::read_manifest(m, 0, 0)?
            .into_iter()
            .map(|(id, t)| (id, (t.distance_cm, t.tilt_deg)))
            .collect(),
        None => BTreeMap::new(),
    };
    let mut out = Vec::new();
    for (i, line) in frames_csv.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != FRAMES_HEADER {
                return Err(Error::Format(format!("unexpected per-frame header {line:?}")));
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Format(format!("per-frame row {i} has {} fields", f.len())));
        }
        let bad = |what: &str| Error::Format(format!("per-frame row {i}: bad {what}"));
        let opt_num = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(what))
            }
        };
        out.push(FrameRecord {
            frame_id: f[0].to_string(),
            method: Method::parse(f[1])?,
            truth: truths.get(f[0]).copied(),
            detected: f[2].parse().map_err(|_| bad("detected flag"))?,
            est_distance_cm: opt_num(f[3], "distance")?,
            width_px: opt_num(f[4], "width")?,
            n_quads: f[5].parse().map_err(|_| bad("quad count"))?,
        });
    }
    Ok(out)
}

/// Ratios `a / b` for one cell; `None` where either side lacks data or the
/// denominator is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CellComparison {
    pub distance_cm: f64,
    pub tilt_deg: f64,
    pub method_a: Method,
    pub method_b: Method,
    pub rate_ratio: Option<f64>,
    pub rmse_ratio: Option<f64>,
}

fn ratio(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if b != 0.0 => Some(a / b),
        _ => None,
    }
}

fn single_method_cells(r: &BenchReport) -> Result<BTreeMap<(u64, u64), &CellSummary>> {
    let mut map = BTreeMap::new();
    for c in r.cells.iter().filter(|c| c.scored()) {
        let key = (c.distance_cm.unwrap_or(0.0).to_bits(), c.tilt_deg.unwrap_or(0.0).to_bits());
        if map.insert(key, c).is_some() {
            return param("compare single-method reports (see BenchReport::for_method)");
        }
    }
    Ok(map)
}

/// Per-cell rate and RMSE ratios of two single-method reports over the same
/// grid.
pub fn compare_reports(a: &BenchReport, b: &BenchReport) -> Result<Vec<CellComparison>> {
    let ma = single_method_cells(a)?;
    let mb = single_method_cells(b)?;
    if ma.keys().ne(mb.keys()) {
        return param("reports cover different distance/tilt grids");
    }
    Ok(a.cells
        .iter()
        .filter(|c| c.scored())
        .map(|ca| {
            let key = (ca.distance_cm.unwrap_or(0.0).to_bits(), ca.tilt_deg.unwrap_or(0.0).to_bits());
            let cb = mb[&key];
            CellComparison {
                distance_cm: ca.distance_cm.unwrap_or(0.0),
                tilt_deg: ca.tilt_deg.unwrap_or(0.0),
                method_a: ca.method,
                method_b: cb.method,
                rate_ratio: ratio(Some(ca.detection_rate), Some(cb.detection_rate)),
                rmse_ratio: ratio(ca.rmse_cm, cb.rmse_cm),
            }
        })
        .collect())
}

pub fn write_comparison_csv(rows: &[CellComparison], mut w: impl Write) -> Result<()> {
    let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| x.to_string());
    writeln!(w, "{COMPARISON_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.distance_cm,
            r.tilt_deg,
            r.method_a.as_str(),
            r.method_b.as_str(),
            show(r.rate_ratio),
            show(r.rmse_ratio)
        )?;
    }
    Ok(())
}
