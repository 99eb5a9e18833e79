//! Baseline detector: column histogram of post-coloured segment lengths,
//! thresholded peaks grouped into runs of adjacent bins, and one
//! axis-aligned bounding box per group.

use crate::config::DetectorConfig;
use crate::error::{param, Result};
use crate::geometry::{Point2, Quad};
use crate::scanline::{self, ColourSegment};
use crate::segmentation::{ClassImage, ColourLabel};

/// `N` equal-width bins over `[0, w)`; bin `n` (0-based) covers
/// `[n·w/N, (n+1)·w/N)`.
///
/// Membership is decided in integers (`n = ⌊x·N / w⌋`) so points on a
/// boundary always fall into the right-hand bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    width: u32,
    counts: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub x_start: f64,
    pub x_end: f64,
    pub count: u64,
}

impl Histogram {
    pub fn new(bins: usize, width: u32) -> Result<Self> {
        if bins == 0 {
            return param("histogram needs at least one bin");
        }
        if (width as usize) < bins {
            return param(format!("image width {width} is narrower than {bins} bins"));
        }
        Ok(Self {
            width,
            counts: vec![0; bins],
        })
    }

    pub fn from_counts(width: u32, counts: Vec<u64>) -> Result<Self> {
        let mut h = Self::new(counts.len(), width)?;
        h.counts = counts;
        Ok(h)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_of(&self, x: u32) -> Option<usize> {
        (x < self.width).then(|| (u64::from(x) * self.counts.len() as u64 / u64::from(self.width)) as usize)
    }

    /// Left edge of bin `n` (0-based); `boundary(N) = w`.
    pub fn boundary(&self, n: usize) -> f64 {
        (n as f64 * f64::from(self.width)) / self.counts.len() as f64
    }

    pub fn bin(&self, n: usize) -> Bin {
        Bin {
            x_start: self.boundary(n),
            x_end: self.boundary(n + 1),
            count: self.counts[n],
        }
    }

    pub fn bins(&self) -> impl Iterator<Item = Bin> + '_ {
        (0..self.len()).map(|n| self.bin(n))
    }

    pub fn add(&mut self, x: u32, amount: u64) {
        if let Some(n) = self.bin_of(x) {
            self.counts[n] += amount;
        }
    }
}

/// Run of adjacent peak bins, `[x_start of first, x_end of last)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergedInterval {
    pub first_bin: usize,
    pub last_bin: usize,
    pub x_start: f64,
    pub x_end: f64,
    bins: usize,
    width: u32,
}

impl MergedInterval {
    pub fn contains(&self, x: u32) -> bool {
        if x >= self.width {
            return false;
        }
        let n = (u64::from(x) * self.bins as u64 / u64::from(self.width)) as usize;
        (self.first_bin..=self.last_bin).contains(&n)
    }
}

/// `post_label` segments that pass the standard-deviation length check,
/// computed over all `post_label` segments of both orientations.
pub fn accepted_segments(
    segments: &[ColourSegment],
    post_label: ColourLabel,
    sigma_mult: f64,
) -> Vec<ColourSegment> {
    let posts = segments.iter().filter(|s| s.label == post_label);
    let Some(limit) = scanline::length_threshold(posts.clone().map(|s| s.length), sigma_mult) else {
        return Vec::new();
    };
    posts.filter(|s| f64::from(s.length) <= limit).copied().collect()
}

pub fn build_histogram(
    segments: &[ColourSegment],
    post_label: ColourLabel,
    bins: usize,
    width: u32,
    sigma_mult: f64,
) -> Result<Histogram> {
    let mut h = Histogram::new(bins, width)?;
    for s in accepted_segments(segments, post_label, sigma_mult) {
        h.add(s.centre.x, u64::from(s.length));
    }
    Ok(h)
}

/// Indices of bins whose count is at least `gamma`.
pub fn peak_candidates(h: &Histogram, gamma: u64) -> Vec<usize> {
    h.counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= gamma)
        .map(|(n, _)| n)
        .collect()
}

/// Merges maximal runs of consecutive candidate bins.
pub fn group_peaks(h: &Histogram, candidates: &[usize]) -> Vec<MergedInterval> {
    let mut sorted: Vec<usize> = candidates.iter().copied().filter(|&n| n < h.len()).collect();
    sorted.sort_unstable();
    sorted.dedup();

    let mut out: Vec<MergedInterval> = Vec::new();
    for n in sorted {
        match out.last_mut() {
            Some(run) if run.last_bin + 1 == n => {
                run.last_bin = n;
                run.x_end = h.boundary(n + 1);
            }
            _ => out.push(MergedInterval {
                first_bin: n,
                last_bin: n,
                x_start: h.boundary(n),
                x_end: h.boundary(n + 1),
                bins: h.len(),
                width: h.width(),
            }),
        }
    }
    out
}

/// Axis-aligned box around the `post_label` segments whose centre falls in
/// each interval. Intervals without segments, or whose box has zero width,
/// produce nothing.
pub fn peaks_to_posts(
    intervals: &[MergedInterval],
    segments: &[ColourSegment],
    post_label: ColourLabel,
) -> Vec<Quad> {
    intervals
        .iter()
        .filter_map(|iv| {
            let mut inside = segments
                .iter()
                .filter(|s| s.label == post_label && iv.contains(s.centre.x))
                .peekable();
            inside.peek()?;
            let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
            for s in inside {
                x0 = x0.min(s.start.x).min(s.end.x);
                x1 = x1.max(s.start.x).max(s.end.x);
                y0 = y0.min(s.start.y).min(s.end.y);
                y1 = y1.max(s.start.y).max(s.end.y);
            }
            let (x0, y0, x1, y1) = (f64::from(x0), f64::from(y0), f64::from(x1), f64::from(y1));
            (x1 > x0).then(|| Quad {
                corners: [
                    Point2::new(x0, y0),
                    Point2::new(x1, y0),
                    Point2::new(x1, y1),
                    Point2::new(x0, y1),
                ],
                width_px: x1 - x0,
            })
        })
        .collect()
}

/// Every intermediate of one histogram detection run.
#[derive(Debug, Clone)]
pub struct HistogramDetection {
    pub segments: Vec<ColourSegment>,
    pub histogram: Histogram,
    pub peaks: Vec<usize>,
    pub intervals: Vec<MergedInterval>,
    pub quads: Vec<Quad>,
}

pub fn run_histogram(img: &ClassImage, cfg: &DetectorConfig) -> Result<HistogramDetection> {
    cfg.validate()?;
    let lines = scanline::generate_scanlines(img.width(), img.height(), cfg.spacing)?;
    let raw = scanline::extract_segments(img, &lines);
    let segments = scanline::denoise_segments(&raw, cfg.post_label, cfg.min_segment_len);
    let histogram = build_histogram(&segments, cfg.post_label, cfg.bins, img.width(), cfg.sigma_mult)?;
    let peaks = peak_candidates(&histogram, cfg.gamma);
    let intervals = group_peaks(&histogram, &peaks);
    let accepted = accepted_segments(&segments, cfg.post_label, cfg.sigma_mult);
    let quads = peaks_to_posts(&intervals, &accepted, cfg.post_label);
    Ok(HistogramDetection {
        segments,
        histogram,
        peaks,
        intervals,
        quads,
    })
}

pub fn detect_histogram(img: &ClassImage, cfg: &DetectorConfig) -> Result<Vec<Quad>> {
    run_histogram(img, cfg).map(|d| d.quads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pixel;
    use crate::scanline::Orientation;

    const POST: ColourLabel = ColourLabel(2);

    fn hist_with(counts: &[u64], width: u32) -> Histogram {
        let mut h = Histogram::new(counts.len(), width).unwrap();
        h.counts.copy_from_slice(counts);
        h
    }

    fn hseg(x0: u32, x1: u32, y: u32) -> ColourSegment {
        ColourSegment::new(Pixel::new(x0, y), Pixel::new(x1, y), POST, Orientation::Horizontal)
    }

    #[test]
    fn bin_ranges_640_by_20() {
        let h = Histogram::new(20, 640).unwrap();
        let first = h.bin(0);
        let last = h.bin(19);
        assert_eq!((first.x_start, first.x_end), (0.0, 32.0));
        assert_eq!((last.x_start, last.x_end), (608.0, 640.0));
        assert_eq!(h.bin_of(31), Some(0));
        assert_eq!(h.bin_of(32), Some(1));
        assert_eq!(h.bin_of(640), None);
        assert!(Histogram::new(0, 640).is_err());
        assert!(Histogram::new(21, 20).is_err());
    }

    #[test]
    fn uneven_bins_put_boundary_points_right() {
        // w = 10, N = 3: boundaries at 10/3 and 20/3
        let h = Histogram::new(3, 10).unwrap();
        let bins: Vec<Option<usize>> = (0..10).map(|x| h.bin_of(x)).collect();
        assert_eq!(
            bins,
            [0, 0, 0, 0, 1, 1, 1, 2, 2, 2].map(Some).to_vec()
        );
        let h = Histogram::new(4, 12).unwrap();
        assert_eq!(h.bin_of(3), Some(1));
    }

    #[test]
    fn single_segment_lands_in_second_bin() {
        // centre x = 33
        let s = hseg(30, 36, 5);
        assert_eq!(s.centre.x, 33);
        let h = build_histogram(&[s], POST, 20, 640, 2.0).unwrap();
        assert_eq!(h.counts()[1], 7);
        assert_eq!(h.total(), 7);
    }

    #[test]
    fn ignores_other_labels() {
        let mut s = hseg(30, 36, 5);
        s.label = ColourLabel(1);
        let h = build_histogram(&[s], POST, 20, 640, 2.0).unwrap();
        assert_eq!(h.total(), 0);
    }

    #[test]
    fn peak_thresholds() {
        let h = hist_with(&[5, 0, 7], 30);
        assert_eq!(peak_candidates(&h, 5), vec![0, 2]);
        assert_eq!(peak_candidates(&h, 0), vec![0, 1, 2]);
        assert!(peak_candidates(&h, 8).is_empty());
    }

    #[test]
    fn grouping_examples() {
        let h = hist_with(&[5, 0, 7, 8, 0, 2], 60);
        let peaks = peak_candidates(&h, 3);
        assert_eq!(peaks, vec![0, 2, 3]);
        let iv = group_peaks(&h, &peaks);
        assert_eq!(iv.len(), 2);
        assert_eq!((iv[0].x_start, iv[0].x_end), (0.0, 10.0));
        assert_eq!((iv[1].x_start, iv[1].x_end), (20.0, 40.0));

        assert!(group_peaks(&h, &[]).is_empty());
        let all = group_peaks(&h, &[0, 1, 2, 3, 4, 5]);
        assert_eq!(all.len(), 1);
        assert_eq!((all[0].x_start, all[0].x_end), (0.0, 60.0));
    }

    #[test]
    fn bounding_box_of_interval() {
        let h = Histogram::new(20, 640).unwrap();
        let iv = group_peaks(&h, &[3]);
        let segs = [
            hseg(100, 110, 40),
            hseg(101, 109, 200),
            ColourSegment::new(Pixel::new(104, 60), Pixel::new(104, 180), POST, Orientation::Vertical),
        ];
        let quads = peaks_to_posts(&iv, &segs, POST);
        assert_eq!(quads.len(), 1);
        let q = quads[0];
        assert_eq!(
            q.corners,
            [
                Point2::new(100.0, 40.0),
                Point2::new(110.0, 40.0),
                Point2::new(110.0, 200.0),
                Point2::new(100.0, 200.0)
            ]
        );
        assert_eq!(q.width_px, 10.0);
        assert!(peaks_to_posts(&[], &segs, POST).is_empty());
    }

    #[test]
    fn two_intervals_two_boxes() {
        let h = Histogram::new(20, 640).unwrap();
        let iv = group_peaks(&h, &[3, 10, 11]);
        let segs = [hseg(100, 110, 40), hseg(330, 360, 50), hseg(335, 370, 90)];
        let quads = peaks_to_posts(&iv, &segs, POST);
        assert_eq!(quads.len(), 2);
        assert_eq!((quads[0].corners[0], quads[0].corners[2]), (Point2::new(100.0, 40.0), Point2::new(110.0, 40.0)));
        assert_eq!((quads[1].corners[0], quads[1].corners[2]), (Point2::new(330.0, 50.0), Point2::new(370.0, 90.0)));
        assert_eq!(quads[1].width_px, 40.0);
    }

    #[test]
    fn empty_interval_gives_no_quad() {
        let h = Histogram::new(20, 640).unwrap();
        let iv = group_peaks(&h, &[0]);
        assert!(peaks_to_posts(&iv, &[hseg(100, 110, 40)], POST).is_empty());
    }

    #[test]
    fn blank_frame_detects_nothing() {
        let img = ClassImage::filled(64, 48, ColourLabel(1));
        let cfg = DetectorConfig::default();
        assert!(detect_histogram(&img, &cfg).unwrap().is_empty());
    }
}
