//! Pairs left-edge and right-edge line segments into goalposts.
//!
//! A pair `(l1, l2)` is a post when all four similarity conditions hold:
//! acute angle `θ < ε_θ`, length difference `|ℓ1 − ℓ2| < ε_ℓ`, mean closest
//! endpoint distance `(d1 + d2)/2 < ε_d` and consensus difference
//! `|n1 − n2| < ε_n`. All bounds derive from one permissiveness `ρ`.

use std::f64::consts::FRAC_PI_2;

use crate::config::DetectorConfig;
use crate::error::{param, Result};
use crate::geometry::{Point2, Quad};
use crate::ransac::{self, LineSegment};
use crate::scanline::{self, CandidatePoint, ColourSegment, EdgeSide, FieldBorder};
use crate::segmentation::ClassImage;
use crate::splitmix64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Permissiveness {
    rho: f64,
    width: u32,
    height: u32,
}

impl Permissiveness {
    pub fn new(rho: f64, width: u32, height: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return param(format!("rho must lie in [0, 1], got {rho}"));
        }
        Ok(Self { rho, width, height })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonBounds {
    pub theta: f64,
    pub length: f64,
    pub distance: f64,
    pub consensus: f64,
}

pub fn epsilon_bounds(p: &Permissiveness, l1: &LineSegment, l2: &LineSegment) -> EpsilonBounds {
    let diagonal = f64::from(p.width).hypot(f64::from(p.height));
    EpsilonBounds {
        theta: p.rho * FRAC_PI_2,
        length: p.rho * l1.length().max(l2.length()),
        distance: p.rho * diagonal,
        consensus: p.rho * l1.consensus_count().max(l2.consensus_count()) as f64,
    }
}

/// Acute angle between two segments' directions, in `[0, π/2]`.
pub fn acute_angle(l1: &LineSegment, l2: &LineSegment) -> f64 {
    l1.direction.dot(l2.direction).abs().min(1.0).acos()
}

/// `(d1 + d2) / 2` where `d_i` is the distance from endpoint `i` of `l1`
/// to the nearer endpoint of `l2`.
pub fn mean_endpoint_distance(l1: &LineSegment, l2: &LineSegment) -> f64 {
    let nearest = |p: Point2| p.distance(l2.start).min(p.distance(l2.end));
    (nearest(l1.start) + nearest(l1.end)) / 2.0
}

/// Outcome of each similarity condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCheck {
    pub angle: bool,
    pub length: bool,
    pub distance: bool,
    pub consensus: bool,
}

impl PairCheck {
    pub fn passed(&self) -> bool {
        self.angle && self.length && self.distance && self.consensus
    }
}

pub fn pair_conditions(l1: &LineSegment, l2: &LineSegment, eps: &EpsilonBounds) -> PairCheck {
    let n1 = l1.consensus_count() as f64;
    let n2 = l2.consensus_count() as f64;
    PairCheck {
        angle: acute_angle(l1, l2) < eps.theta,
        length: (l1.length() - l2.length()).abs() < eps.length,
        distance: mean_endpoint_distance(l1, l2) < eps.distance,
        consensus: (n1 - n2).abs() < eps.consensus,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostPair {
    pub left: LineSegment,
    pub right: LineSegment,
    pub quad: Quad,
}

/// Separation of two roughly parallel segments, measured along the normal
/// of their mean direction between the segment midpoints.
pub fn perpendicular_separation(l1: &LineSegment, l2: &LineSegment) -> f64 {
    let d2 = if l1.direction.dot(l2.direction) < 0.0 {
        l2.direction * -1.0
    } else {
        l2.direction
    };
    let mean = l1.direction + d2;
    let normal = if mean.norm() > 0.0 {
        mean.perp() * (1.0 / mean.norm())
    } else {
        l1.direction.perp()
    };
    normal.dot(l2.midpoint() - l1.midpoint()).abs()
}

fn post_quad(left: &LineSegment, right: &LineSegment) -> Quad {
    // Both directions point down the image, so `start` is the upper end.
    Quad {
        corners: [left.start, right.start, right.end, left.end],
        width_px: perpendicular_separation(left, right),
    }
}

/// Greedy one-to-one matching: passing pairs in ascending order of mean
/// endpoint distance, skipping any pair whose segment is already used.
pub fn match_posts(left: &[LineSegment], right: &[LineSegment], p: &Permissiveness) -> Vec<PostPair> {
    let mut passing = Vec::new();
    for (i, l1) in left.iter().enumerate() {
        for (j, l2) in right.iter().enumerate() {
            let eps = epsilon_bounds(p, l1, l2);
            if pair_conditions(l1, l2, &eps).passed() {
                passing.push((mean_endpoint_distance(l1, l2), i, j));
            }
        }
    }
    passing.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut left_used = vec![false; left.len()];
    let mut right_used = vec![false; right.len()];
    let mut out = Vec::new();
    for (_, i, j) in passing {
        if left_used[i] || right_used[j] {
            continue;
        }
        left_used[i] = true;
        right_used[j] = true;
        out.push(PostPair {
            left: left[i].clone(),
            right: right[j].clone(),
            quad: post_quad(&left[i], &right[j]),
        });
    }
    out
}

/// Every intermediate of one RANSAC detection run.
#[derive(Debug, Clone)]
pub struct RansacDetection {
    pub segments: Vec<ColourSegment>,
    pub border: FieldBorder,
    pub candidates: Vec<CandidatePoint>,
    pub left_lines: Vec<LineSegment>,
    pub right_lines: Vec<LineSegment>,
    pub posts: Vec<PostPair>,
}

impl RansacDetection {
    pub fn quads(&self) -> Vec<Quad> {
        self.posts.iter().map(|p| p.quad).collect()
    }
}

pub fn run_ransac(img: &ClassImage, cfg: &DetectorConfig) -> Result<RansacDetection> {
    cfg.validate()?;
    let lines = scanline::generate_scanlines(img.width(), img.height(), cfg.spacing)?;
    let raw = scanline::extract_segments(img, &lines);
    let segments = scanline::denoise_segments(&raw, cfg.post_label, cfg.min_segment_len);
    let border = scanline::detect_field_border(img, &lines, cfg.field_label, cfg.green_threshold)?;
    let candidates = scanline::candidate_points(&segments, cfg.post_label, &border, cfg.sigma_mult)?;

    let side_points = |side: EdgeSide| -> Vec<Point2> {
        candidates.iter().filter(|c| c.side == side).map(|c| c.edge).collect()
    };
    let left_params = ransac::RansacParams {
        seed: splitmix64(cfg.ransac.seed),
        ..cfg.ransac
    };
    let right_params = ransac::RansacParams {
        seed: splitmix64(cfg.ransac.seed ^ 0x5249_4748_5400_0000),
        ..cfg.ransac
    };
    let left_lines = ransac::ransac_multi_line(&side_points(EdgeSide::Left), &left_params)?;
    let right_lines = ransac::ransac_multi_line(&side_points(EdgeSide::Right), &right_params)?;

    let perm = Permissiveness::new(cfg.rho, img.width(), img.height())?;
    let posts = match_posts(&left_lines, &right_lines, &perm);
    Ok(RansacDetection {
        segments,
        border,
        candidates,
        left_lines,
        right_lines,
        posts,
    })
}

pub fn detect_ransac(img: &ClassImage, cfg: &DetectorConfig) -> Result<Vec<Quad>> {
    run_ransac(img, cfg).map(|d| d.quads())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn vertical(x: f64, y0: f64, len: f64, n: usize) -> LineSegment {
        let pts: Vec<Point2> = (0..n)
            .map(|i| Point2::new(x, y0 + len * i as f64 / (n - 1) as f64))
            .collect();
        LineSegment {
            start: pts[0],
            end: pts[n - 1],
            direction: Point2::new(0.0, 1.0),
            consensus_indices: (0..n).collect(),
            consensus_points: pts,
        }
    }

    fn horizontal(y: f64, x0: f64, len: f64, n: usize) -> LineSegment {
        let mut s = vertical(0.0, 0.0, len, n);
        for q in &mut s.consensus_points {
            *q = Point2::new(x0 + q.y, y);
        }
        s.start = s.consensus_points[0];
        s.end = s.consensus_points[n - 1];
        s.direction = Point2::new(1.0, 0.0);
        s
    }

    #[test]
    fn bounds() {
        let a = vertical(0.0, 0.0, 100.0, 10);
        let b = vertical(20.0, 0.0, 60.0, 4);
        let zero = epsilon_bounds(&Permissiveness::new(0.0, 640, 480).unwrap(), &a, &b);
        assert_eq!(zero, EpsilonBounds { theta: 0.0, length: 0.0, distance: 0.0, consensus: 0.0 });
        let one = epsilon_bounds(&Permissiveness::new(1.0, 640, 480).unwrap(), &a, &b);
        assert_eq!(one.distance, 800.0);
        assert_eq!(one.length, 100.0);
        assert_eq!(one.consensus, 10.0);
        let half = epsilon_bounds(&Permissiveness::new(0.5, 640, 480).unwrap(), &a, &b);
        assert!((half.theta - FRAC_PI_4).abs() < 1e-15);
        assert!(Permissiveness::new(1.5, 640, 480).is_err());
        assert!(Permissiveness::new(-0.1, 640, 480).is_err());
    }

    #[test]
    fn parallel_pair_passes() {
        let a = vertical(100.0, 50.0, 100.0, 10);
        let b = vertical(120.0, 50.0, 100.0, 10);
        let p = Permissiveness::new(0.5, 640, 480).unwrap();
        let eps = epsilon_bounds(&p, &a, &b);
        assert_eq!(acute_angle(&a, &b), 0.0);
        assert_eq!(mean_endpoint_distance(&a, &b), 20.0);
        let check = pair_conditions(&a, &b, &eps);
        assert!(check.passed(), "{check:?}");
    }

    #[test]
    fn rho_zero_rejects_everything() {
        let a = vertical(100.0, 50.0, 100.0, 10);
        let eps = epsilon_bounds(&Permissiveness::new(0.0, 640, 480).unwrap(), &a, &a);
        let check = pair_conditions(&a, &a, &eps);
        assert!(!check.angle && !check.passed());
    }

    #[test]
    fn perpendicular_pair_fails_angle() {
        let a = vertical(100.0, 50.0, 100.0, 10);
        let b = horizontal(100.0, 100.0, 100.0, 10);
        assert!((acute_angle(&a, &b) - PI / 2.0).abs() < 1e-12);
        let eps = epsilon_bounds(&Permissiveness::new(0.9, 640, 480).unwrap(), &a, &b);
        let check = pair_conditions(&a, &b, &eps);
        assert!(!check.angle);
        assert!(!check.passed());
    }

    #[test]
    fn endpoint_distance_is_symmetric() {
        let a = vertical(100.0, 50.0, 100.0, 10);
        let b = vertical(130.0, 60.0, 100.0, 10);
        assert_eq!(mean_endpoint_distance(&a, &b), mean_endpoint_distance(&b, &a));
    }

    #[test]
    fn single_post() {
        let p = Permissiveness::new(0.5, 640, 480).unwrap();
        let left = [vertical(300.0, 40.0, 150.0, 30)];
        let right = [vertical(311.0, 40.0, 150.0, 30)];
        let posts = match_posts(&left, &right, &p);
        assert_eq!(posts.len(), 1);
        let q = posts[0].quad;
        assert_eq!(q.corners[0], Point2::new(300.0, 40.0));
        assert_eq!(q.corners[1], Point2::new(311.0, 40.0));
        assert_eq!(q.corners[2], Point2::new(311.0, 190.0));
        assert_eq!(q.corners[3], Point2::new(300.0, 190.0));
        assert_eq!(q.width_px, 11.0);
        assert!(q.is_simple());
        assert!(match_posts(&left, &[], &p).is_empty());
    }

    #[test]
    fn two_posts_pick_nearest_edges() {
        let p = Permissiveness::new(0.5, 640, 480).unwrap();
        let left = [vertical(400.0, 40.0, 150.0, 30), vertical(100.0, 40.0, 150.0, 30)];
        let right = [vertical(112.0, 40.0, 150.0, 30), vertical(412.0, 40.0, 150.0, 30)];
        // all four cross pairs pass at rho 0.5 (ε_d = 400), so greedy order decides
        let mut dists = Vec::new();
        for l in &left {
            for r in &right {
                let eps = epsilon_bounds(&p, l, r);
                assert!(pair_conditions(l, r, &eps).passed());
                dists.push(mean_endpoint_distance(l, r));
            }
        }
        assert_eq!(dists, vec![288.0, 12.0, 12.0, 312.0]);
        let posts = match_posts(&left, &right, &p);
        assert_eq!(posts.len(), 2);
        let mut xs: Vec<(f64, f64)> = posts.iter().map(|pp| (pp.left.start.x, pp.right.start.x)).collect();
        xs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(xs, vec![(100.0, 112.0), (400.0, 412.0)]);
    }

    #[test]
    fn separation_of_tilted_pair() {
        let dir = Point2::new(0.2f64.sin(), 0.2f64.cos());
        let mk = |offset: f64| {
            let n = Point2::new(dir.y, -dir.x);
            let a = Point2::new(200.0, 50.0) + n * offset;
            let pts: Vec<Point2> = (0..5).map(|i| a + dir * (30.0 * i as f64)).collect();
            LineSegment {
                start: pts[0],
                end: pts[4],
                direction: dir,
                consensus_indices: (0..5).collect(),
                consensus_points: pts,
            }
        };
        assert!((perpendicular_separation(&mk(0.0), &mk(9.0)) - 9.0).abs() < 1e-9);
    }
}
