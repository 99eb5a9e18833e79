//! Scan-line front end: equidistant scan-lines, field border, colour
//! segments and edge candidate points.

use crate::error::{param, Result};
use crate::geometry::{Pixel, Point2};
use crate::segmentation::{ClassImage, ColourLabel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanLineSet {
    pub vertical_xs: Vec<u32>,
    pub horizontal_ys: Vec<u32>,
    pub spacing: u32,
}

/// Vertical lines at `x = 0, spacing, 2·spacing, … < width`; horizontal
/// lines likewise.
pub fn generate_scanlines(width: u32, height: u32, spacing: u32) -> Result<ScanLineSet> {
    if spacing == 0 {
        return param("scan-line spacing must be at least 1");
    }
    if width == 0 || height == 0 {
        return param(format!("cannot place scan-lines on a {width}x{height} image"));
    }
    Ok(ScanLineSet {
        vertical_xs: (0..width).step_by(spacing as usize).collect(),
        horizontal_ys: (0..height).step_by(spacing as usize).collect(),
        spacing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Vertical,
    Horizontal,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Vertical => "vertical",
            Orientation::Horizontal => "horizontal",
        }
    }
}

/// Maximal run of one label along a scan-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColourSegment {
    pub start: Pixel,
    pub centre: Pixel,
    pub end: Pixel,
    pub length: u32,
    pub label: ColourLabel,
    pub orientation: Orientation,
}

impl ColourSegment {
    /// `start` and `end` are inclusive and must share the scan-line axis.
    pub fn new(start: Pixel, end: Pixel, label: ColourLabel, orientation: Orientation) -> Self {
        let length = match orientation {
            Orientation::Horizontal => {
                debug_assert_eq!(start.y, end.y);
                end.x - start.x + 1
            }
            Orientation::Vertical => {
                debug_assert_eq!(start.x, end.x);
                end.y - start.y + 1
            }
        };
        Self {
            start,
            centre: Pixel::new((start.x + end.x) / 2, (start.y + end.y) / 2),
            end,
            length,
            label,
            orientation,
        }
    }

    /// True when `next` continues this segment's scan-line directly after it.
    fn is_followed_by(&self, next: &ColourSegment) -> bool {
        self.orientation == next.orientation
            && match self.orientation {
                Orientation::Horizontal => next.start.y == self.end.y && next.start.x == self.end.x + 1,
                Orientation::Vertical => next.start.x == self.end.x && next.start.y == self.end.y + 1,
            }
    }
}

/// Upper convex hull in image coordinates, sorted by strictly increasing `x`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FieldBorder {
    vertices: Vec<(i64, i64)>,
}

impl FieldBorder {
    pub fn vertices(&self) -> &[(i64, i64)] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Border height at `x` by linear interpolation between hull vertices.
    /// Outside the hull's x-range the nearest end vertex's height is used.
    pub fn y_at(&self, x: f64) -> Option<f64> {
        let first = *self.vertices.first()?;
        let last = *self.vertices.last()?;
        if x <= first.0 as f64 {
            return Some(first.1 as f64);
        }
        if x >= last.0 as f64 {
            return Some(last.1 as f64);
        }
        let i = self.vertices.partition_point(|v| (v.0 as f64) <= x);
        let (a, b) = (self.vertices[i - 1], self.vertices[i]);
        let t = (x - a.0 as f64) / (b.0 - a.0) as f64;
        Some(a.1 as f64 + t * (b.1 - a.1) as f64)
    }

    /// Strictly below the border (larger `y`). An empty border constrains
    /// nothing.
    pub fn is_below(&self, p: Pixel) -> bool {
        self.y_at(p.x as f64).is_some_and(|by| p.y as f64 > by)
    }
}

/// Andrew's monotone chain, upper half only, with `y` pointing down so the
/// chain keeps the smallest-`y` points. Collinear interior vertices are
/// dropped and, per `x`, only the uppermost point can survive.
pub fn upper_convex_hull(points: &[(i64, i64)]) -> FieldBorder {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup_by_key(|p| p.0);

    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            // a must lie strictly above the chord o→p to stay on the hull
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross > 0 {
                break;
            }
            hull.pop();
        }
        hull.push(p);
    }
    FieldBorder { vertices: hull }
}

/// Scans each vertical line top-down for the first run of more than
/// `consecutive_threshold` field pixels and hulls the runs' top pixels.
pub fn detect_field_border(
    img: &ClassImage,
    lines: &ScanLineSet,
    field_label: ColourLabel,
    consecutive_threshold: u32,
) -> Result<FieldBorder> {
    if consecutive_threshold == 0 {
        return param("field border threshold must be at least 1");
    }
    let mut tops = Vec::new();
    for &x in lines.vertical_xs.iter().filter(|&&x| x < img.width()) {
        let mut run = 0u32;
        for y in 0..img.height() {
            if img.get(x, y) == field_label {
                run += 1;
                if run > consecutive_threshold {
                    tops.push((i64::from(x), i64::from(y + 1 - run)));
                    break;
                }
            } else {
                run = 0;
            }
        }
    }
    Ok(upper_convex_hull(&tops))
}

/// Splits every scan-line into maximal same-label runs. Vertical lines come
/// first (left to right, each top-down), then horizontal lines (top to
/// bottom, each left to right).
pub fn extract_segments(img: &ClassImage, lines: &ScanLineSet) -> Vec<ColourSegment> {
    let mut out = Vec::new();
    for &x in lines.vertical_xs.iter().filter(|&&x| x < img.width()) {
        push_runs(&mut out, img.height(), Orientation::Vertical, |y| {
            (Pixel::new(x, y), img.get(x, y))
        });
    }
    for &y in lines.horizontal_ys.iter().filter(|&&y| y < img.height()) {
        push_runs(&mut out, img.width(), Orientation::Horizontal, |x| {
            (Pixel::new(x, y), img.get(x, y))
        });
    }
    out
}

fn push_runs(
    out: &mut Vec<ColourSegment>,
    len: u32,
    orientation: Orientation,
    at: impl Fn(u32) -> (Pixel, ColourLabel),
) {
    if len == 0 {
        return;
    }
    let (mut start, mut label) = at(0);
    let mut prev = start;
    for i in 1..len {
        let (p, l) = at(i);
        if l != label {
            out.push(ColourSegment::new(start, prev, label, orientation));
            start = p;
            label = l;
        }
        prev = p;
    }
    out.push(ColourSegment::new(start, prev, label, orientation));
}

/// Run-length label denoising.
///
/// On each scan-line, a maximal stretch of runs shorter than `min_length` is
/// relabelled to its flanking label when both flanks agree (or only one
/// flank exists) and merged with them. Stretches between differing flanks
/// are kept, except that `post_label` runs shorter than `min_length` are
/// always dropped. `min_length <= 1` returns the input unchanged.
pub fn denoise_segments(
    segments: &[ColourSegment],
    post_label: ColourLabel,
    min_length: u32,
) -> Vec<ColourSegment> {
    if min_length <= 1 {
        return segments.to_vec();
    }
    let mut out = Vec::with_capacity(segments.len());
    let mut line_start = 0;
    for i in 1..=segments.len() {
        if i == segments.len() || !segments[i - 1].is_followed_by(&segments[i]) {
            denoise_line(&segments[line_start..i], min_length, &mut out);
            line_start = i;
        }
    }
    out.retain(|s| s.label != post_label || s.length >= min_length);
    out
}

fn denoise_line(runs: &[ColourSegment], min_length: u32, out: &mut Vec<ColourSegment>) {
    let line_start = out.len();
    let push = |out: &mut Vec<ColourSegment>, seg: ColourSegment| {
        let n = out.len();
        if n > line_start && out[n - 1].label == seg.label {
            out[n - 1] = ColourSegment::new(out[n - 1].start, seg.end, seg.label, seg.orientation);
        } else {
            out.push(seg);
        }
    };
    let mut i = 0;
    while i < runs.len() {
        if runs[i].length >= min_length {
            push(out, runs[i]);
            i += 1;
            continue;
        }
        let mut j = i;
        while j < runs.len() && runs[j].length < min_length {
            j += 1;
        }
        let before = (out.len() > line_start).then(|| out[out.len() - 1].label);
        let after = runs.get(j).map(|r| r.label);
        let fill = match (before, after) {
            (Some(a), Some(b)) if a == b => Some(a),
            (Some(a), None) | (None, Some(a)) => Some(a),
            _ => None,
        };
        match fill {
            Some(label) => push(out, ColourSegment::new(runs[i].start, runs[j - 1].end, label, runs[i].orientation)),
            None => runs[i..j].iter().for_each(|&r| push(out, r)),
        }
        i = j;
    }
}

/// `mean + sigma_mult · stddev` (population) of `lengths`, or `None` when
/// there are none.
pub fn length_threshold(lengths: impl IntoIterator<Item = u32>, sigma_mult: f64) -> Option<f64> {
    let lengths: Vec<f64> = lengths.into_iter().map(f64::from).collect();
    if lengths.is_empty() {
        return None;
    }
    let n = lengths.len() as f64;
    let mean = lengths.iter().sum::<f64>() / n;
    let var = lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
    Some(mean + sigma_mult * var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeSide {
    Left,
    Right,
}

impl EdgeSide {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeSide::Left => "left",
            EdgeSide::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidatePoint {
    /// Segment endpoint pixel the candidate came from.
    pub pixel: Pixel,
    /// Sub-pixel location of the colour transition: the pixel boundary
    /// just outside `pixel`, at the scan-line's centre row.
    pub edge: Point2,
    pub side: EdgeSide,
    /// Index of the source segment in the slice given to [`candidate_points`].
    pub segment: usize,
}

/// Left/right post-edge candidates from horizontal `post_label` segments.
///
/// A segment is kept when its length does not exceed
/// `mean + length_sigma_mult · stddev` of all horizontal `post_label`
/// lengths. Its start becomes a left candidate and its end a right candidate
/// when the neighbouring run across that end has another label (image
/// borders produce no candidate). Candidates strictly below `border` are
/// discarded.
pub fn candidate_points(
    segments: &[ColourSegment],
    post_label: ColourLabel,
    border: &FieldBorder,
    length_sigma_mult: f64,
) -> Result<Vec<CandidatePoint>> {
    if !(length_sigma_mult > 0.0) {
        return param(format!("length sigma multiplier must be > 0, got {length_sigma_mult}"));
    }
    let is_post_row = |s: &ColourSegment| s.orientation == Orientation::Horizontal && s.label == post_label;
    let Some(max_len) = length_threshold(
        segments.iter().filter(|s| is_post_row(s)).map(|s| s.length),
        length_sigma_mult,
    ) else {
        return Ok(Vec::new());
    };

    let mut out = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        if !is_post_row(seg) || f64::from(seg.length) > max_len {
            continue;
        }
        let row = f64::from(seg.start.y) + 0.5;
        let before = i.checked_sub(1).map(|j| &segments[j]);
        if before.is_some_and(|b| b.is_followed_by(seg) && b.label != post_label) && !border.is_below(seg.start) {
            out.push(CandidatePoint {
                pixel: seg.start,
                edge: Point2::new(f64::from(seg.start.x), row),
                side: EdgeSide::Left,
                segment: i,
            });
        }
        let after = segments.get(i + 1);
        if after.is_some_and(|a| seg.is_followed_by(a) && a.label != post_label) && !border.is_below(seg.end) {
            out.push(CandidatePoint {
                pixel: seg.end,
                edge: Point2::new(f64::from(seg.end.x) + 1.0, row),
                side: EdgeSide::Right,
                segment: i,
            });
        }
    }
    Ok(out)
}
