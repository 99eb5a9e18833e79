//! Synthetic labelled frames of a single goalpost with exact ground truth.
//!
//! The post is a `post_width × post_height` rectangle standing on the field
//! at `distance` in front of a level pinhole camera mounted
//! `camera_height` above the ground. Its projection is rotated about the
//! image centre by `tilt` to mimic a sideways body lean. A pixel belongs to
//! the post iff its centre lies inside the rotated rectangle.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::geometry::Point2;
use crate::metrics::CameraModel;
use crate::segmentation::{ClassImage, ColourLabel};
use crate::splitmix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SceneLabels {
    pub background: ColourLabel,
    pub field: ColourLabel,
    pub post: ColourLabel,
}

impl Default for SceneLabels {
    fn default() -> Self {
        Self {
            background: ColourLabel(0),
            field: ColourLabel(1),
            post: ColourLabel(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub distance_cm: f64,
    /// Image-plane rotation in degrees.
    pub tilt_deg: f64,
    pub post_width_cm: f64,
    pub post_height_cm: f64,
    pub camera: CameraModel,
    pub image_height: u32,
    pub camera_height_cm: f64,
    /// Rows whose centre lies below this line are field.
    pub horizon_y: f64,
    /// Per-pixel probability of flipping to another scene label.
    pub noise_p: f64,
    pub seed: u64,
    pub labels: SceneLabels,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            distance_cm: 300.0,
            tilt_deg: 0.0,
            post_width_cm: 11.0,
            post_height_cm: 180.0,
            camera: CameraModel::from_degrees(640, 60.0).expect("valid default camera"),
            image_height: 480,
            camera_height_cm: 45.0,
            horizon_y: 200.0,
            noise_p: 0.0,
            seed: 0,
            labels: SceneLabels::default(),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_cm > 0.0 && self.distance_cm.is_finite()) {
            return param(format!("distance must be positive, got {}", self.distance_cm));
        }
        if !(0.0..=45.0).contains(&self.tilt_deg) {
            return param(format!("tilt must lie in [0, 45] degrees, got {}", self.tilt_deg));
        }
        if !(0.0..0.5).contains(&self.noise_p) {
            return param(format!("noise probability must lie in [0, 0.5), got {}", self.noise_p));
        }
        if !(self.post_width_cm > 0.0 && self.post_height_cm > 0.0) {
            return param("post dimensions must be positive");
        }
        if self.image_height == 0 {
            return param("image height must be at least 1");
        }
        if self.camera_height_cm < 0.0 {
            return param("camera height must not be negative");
        }
        let l = self.labels;
        if l.background == l.field || l.background == l.post || l.field == l.post {
            return param("scene labels must be distinct");
        }
        Ok(())
    }

    pub fn width(&self) -> u32 {
        self.camera.width()
    }

    fn image_centre(&self) -> Point2 {
        Point2::new(f64::from(self.width()) / 2.0, f64::from(self.image_height) / 2.0)
    }

    /// Untilted post rectangle as `(left, top, right, bottom)`.
    fn upright_rect(&self) -> (f64, f64, f64, f64) {
        let gamma = self.camera.pixel_angular_width();
        let w = self.post_width_cm * gamma / self.distance_cm;
        let h = self.post_height_cm * gamma / self.distance_cm;
        let base = self.horizon_y + self.camera_height_cm * gamma / self.distance_cm;
        let cx = f64::from(self.width()) / 2.0;
        (cx - w / 2.0, base - h, cx + w / 2.0, base)
    }

    /// Exact projected geometry, before rasterisation.
    pub fn truth(&self) -> SceneTruth {
        let (l, t, r, b) = self.upright_rect();
        let centre = self.image_centre();
        let angle = self.tilt_deg.to_radians();
        let corners = [
            Point2::new(l, t),
            Point2::new(r, t),
            Point2::new(r, b),
            Point2::new(l, b),
        ]
        .map(|c| c.rotate_about(centre, angle));
        SceneTruth {
            corners,
            width_px: r - l,
            height_px: b - t,
            distance_cm: self.distance_cm,
            tilt_deg: self.tilt_deg,
            seed: self.seed,
            image_width: self.width(),
            image_height: self.image_height,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneTruth {
    /// Rotated post corners: top-left, top-right, bottom-right, bottom-left
    /// of the upright post.
    pub corners: [Point2; 4],
    pub width_px: f64,
    pub height_px: f64,
    pub distance_cm: f64,
    pub tilt_deg: f64,
    pub seed: u64,
    pub image_width: u32,
    pub image_height: u32,
}

impl SceneTruth {
    /// Axis-aligned box around the post, clipped to the frame:
    /// `(x0, y0, x1, y1)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let xs = self.corners.map(|c| c.x);
        let ys = self.corners.map(|c| c.y);
        let min = |v: [f64; 4]| v.into_iter().fold(f64::INFINITY, f64::min);
        let max = |v: [f64; 4]| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
        let (w, h) = (f64::from(self.image_width), f64::from(self.image_height));
        (
            min(xs).clamp(0.0, w),
            min(ys).clamp(0.0, h),
            max(xs).clamp(0.0, w),
            max(ys).clamp(0.0, h),
        )
    }

    pub fn box_contains(&self, p: Point2) -> bool {
        let (x0, y0, x1, y1) = self.bounding_box();
        (x0..=x1).contains(&p.x) && (y0..=y1).contains(&p.y)
    }
}

/// Renders the scene. Fails when no pixel centre falls inside the post.
pub fn render_scene(spec: &SceneSpec) -> Result<(ClassImage, SceneTruth)> {
    spec.validate()?;
    let truth = spec.truth();
    let (w, h) = (spec.width(), spec.image_height);
    let labels = spec.labels;
    let mut img = ClassImage::from_fn(w, h, |_, y| {
        if f64::from(y) + 0.5 > spec.horizon_y {
            labels.field
        } else {
            labels.background
        }
    });

    let (l, t, r, b) = spec.upright_rect();
    let centre = spec.image_centre();
    let angle = spec.tilt_deg.to_radians();
    let (x0, y0, x1, y1) = truth.bounding_box();
    let mut post_pixels = 0usize;
    for y in (y0.floor() as u32)..(y1.ceil() as u32).min(h) {
        for x in (x0.floor() as u32)..(x1.ceil() as u32).min(w) {
            let c = Point2::new(f64::from(x) + 0.5, f64::from(y) + 0.5).rotate_about(centre, -angle);
            if c.x >= l && c.x < r && c.y >= t && c.y < b {
                img.set(x, y, labels.post);
                post_pixels += 1;
            }
        }
    }
    if post_pixels == 0 {
        return Err(Error::Render(format!(
            "post at {} cm, tilt {}° falls outside the {w}x{h} frame",
            spec.distance_cm, spec.tilt_deg
        )));
    }

    if spec.noise_p > 0.0 {
        add_label_noise(&mut img, spec.noise_p, spec.seed, labels);
    }
    Ok((img, truth))
}

/// Flips each pixel independently with probability `p` to one of the two
/// other scene labels. Gaps between flips are drawn from a geometric
/// distribution, so cost scales with the number of flips.
fn add_label_noise(img: &mut ClassImage, p: f64, seed: u64, labels: SceneLabels) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = Geometric::new(p).expect("0 < p < 0.5");
    let all = [labels.background, labels.field, labels.post];
    let pixels = img.labels_mut();
    let mut pos = gaps.sample(&mut rng) as usize;
    while pos < pixels.len() {
        let current = pixels[pos];
        let others: Vec<ColourLabel> = all.iter().copied().filter(|l| l.0 != current).collect();
        // pixels carrying a foreign label (never produced here) keep a valid choice
        let pick = others[rng.random_range(0..others.len())];
        pixels[pos] = pick.0;
        pos = pos.saturating_add(1).saturating_add(gaps.sample(&mut rng) as usize);
    }
}

/// Per-frame seed from the sweep's base seed, cell index and frame index.
pub fn frame_seed(base: u64, cell: usize, frame: usize) -> u64 {
    splitmix64(base ^ splitmix64(((cell as u64) << 32) | frame as u64))
}

/// Distances × tilts × frames grid over a template scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub distances_cm: Vec<f64>,
    pub tilts_deg: Vec<f64>,
    pub frames_per_cell: usize,
    pub template: SceneSpec,
    pub base_seed: u64,
}

/// The six field distances and three body tilts of the reference experiment.
pub const REFERENCE_DISTANCES_CM: [f64; 6] = [60.0, 150.0, 300.0, 350.0, 530.0, 600.0];
pub const REFERENCE_TILTS_DEG: [f64; 3] = [0.0, 10.0, 20.0];

impl SweepGrid {
    pub fn reference(frames_per_cell: usize, noise_p: f64, base_seed: u64) -> Self {
        Self {
            distances_cm: REFERENCE_DISTANCES_CM.to_vec(),
            tilts_deg: REFERENCE_TILTS_DEG.to_vec(),
            frames_per_cell,
            template: SceneSpec {
                noise_p,
                ..SceneSpec::default()
            },
            base_seed,
        }
    }

    pub fn len(&self) -> usize {
        self.distances_cm.len() * self.tilts_deg.len() * self.frames_per_cell
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Frame specs in grid order: distance-major, then tilt, then frame.
    pub fn frames(&self) -> Result<Vec<SweepFrame>> {
        if self.is_empty() {
            return param("sweep grid is empty");
        }
        let mut out = Vec::with_capacity(self.len());
        for (di, &d) in self.distances_cm.iter().enumerate() {
            for (ti, &t) in self.tilts_deg.iter().enumerate() {
                let cell = di * self.tilts_deg.len() + ti;
                for f in 0..self.frames_per_cell {
                    let spec = SceneSpec {
                        distance_cm: d,
                        tilt_deg: t,
                        seed: frame_seed(self.base_seed, cell, f),
                        ..self.template
                    };
                    spec.validate()?;
                    out.push(SweepFrame {
                        frame_id: format!("frame_{:05}", out.len()),
                        cell,
                        spec,
                    });
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFrame {
    pub frame_id: String,
    pub cell: usize,
    pub spec: SceneSpec,
}

/// Renders every frame of the grid, in grid order.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<(SweepFrame, ClassImage, SceneTruth)>> {
    grid.frames()?
        .into_par_iter()
        .map(|f| render_scene(&f.spec).map(|(img, truth)| (f, img, truth)))
        .collect()
}

pub const MANIFEST_HEADER: &str = "frame_id,distance_cm,tilt_deg,cx0,cy0,cx1,cy1,cx2,cy2,cx3,cy3,width_px,seed";

pub fn write_manifest_row(mut w: impl Write, frame_id: &str, t: &SceneTruth) -> Result<()> {
    write!(w, "{frame_id},{},{}", t.distance_cm, t.tilt_deg)?;
    for c in &t.corners {
        write!(w, ",{},{}", c.x, c.y)?;
    }
    writeln!(w, ",{},{}", t.width_px, t.seed)?;
    Ok(())
}

/// Parses a manifest; `image_width`/`image_height` fill the truth's frame
/// size, which the manifest does not carry.
pub fn read_manifest(r: impl BufRead, image_width: u32, image_height: u32) -> Result<Vec<(String, SceneTruth)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != MANIFEST_HEADER {
                return Err(Error::Format(format!("unexpected manifest header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(Error::Format(format!("manifest row {i} has {} fields", f.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Format(format!("manifest row {i}: bad number {s:?}")))
        };
        let mut corners = [Point2::default(); 4];
        for (k, c) in corners.iter_mut().enumerate() {
            *c = Point2::new(num(f[3 + 2 * k])?, num(f[4 + 2 * k])?);
        }
        let seed = f[12]
            .parse()
            .map_err(|_| Error::Format(format!("manifest row {i}: bad seed {:?}", f[12])))?;
        let width_px = num(f[11])?;
        let truth = SceneTruth {
            corners,
            width_px,
            height_px: corners[0].distance(corners[3]),
            distance_cm: num(f[1])?,
            tilt_deg: num(f[2])?,
            seed,
            image_width,
            image_height,
        };
        out.push((f[0].to_string(), truth));
    }
    Ok(out)
}
