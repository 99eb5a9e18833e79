//! Multi-model RANSAC for 2-D lines.
//!
//! Each round draws `k` random point pairs, keeps the line with the largest
//! consensus set, and accepts it if that set has at least `n_min` points.
//! Accepted consensus sets are refit with total least squares and removed
//! before the next round, so models never share points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Error, Result};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    /// Points strictly closer than this to a line are its inliers.
    pub d_inlier: f64,
    /// Pair draws per model.
    pub k: usize,
    /// Smallest consensus set that is accepted as a model.
    pub n_min: usize,
    /// Maximum number of models returned.
    pub m_max: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            d_inlier: 5.0,
            k: 50,
            n_min: 6,
            m_max: 3,
            seed: 0,
        }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_inlier > 0.0 && self.d_inlier.is_finite()) {
            return param(format!("inlier distance must be positive, got {}", self.d_inlier));
        }
        if self.k == 0 {
            return param("RANSAC needs at least one attempt per model");
        }
        if self.n_min < 2 {
            return param(format!("minimum consensus must be at least 2, got {}", self.n_min));
        }
        if self.m_max == 0 {
            return param("maximum model count must be at least 1");
        }
        Ok(())
    }
}

/// Infinite line through `point` with unit `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub point: Point2,
    pub direction: Point2,
}

impl Line {
    pub fn through(a: Point2, b: Point2) -> Result<Line> {
        let d = b - a;
        let len = d.norm();
        if !(len > 0.0) {
            return Err(Error::DegenerateLine(format!(
                "defining points coincide at ({}, {})",
                a.x, a.y
            )));
        }
        Ok(Line {
            point: a,
            direction: d * (1.0 / len),
        })
    }

    pub fn distance(&self, p: Point2) -> f64 {
        self.direction.cross(p - self.point).abs()
    }

    /// Signed position of `p`'s projection along the direction.
    pub fn project(&self, p: Point2) -> f64 {
        self.direction.dot(p - self.point)
    }

    pub fn at(&self, t: f64) -> Point2 {
        self.point + self.direction * t
    }
}

/// Perpendicular distance from `p` to the line through `a` and `b`.
pub fn point_line_distance(p: Point2, a: Point2, b: Point2) -> Result<f64> {
    Line::through(a, b).map(|l| l.distance(p))
}

/// Orthogonal-regression line: through the centroid, along the principal
/// axis of the points' covariance.
pub fn fit_line_least_squares(points: &[Point2]) -> Result<Line> {
    if points.len() < 2 {
        return Err(Error::DegenerateLine(format!(
            "need at least 2 points to fit a line, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let c = points.iter().fold(Point2::default(), |acc, &p| acc + p) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    if sxx + syy == 0.0 {
        return Err(Error::DegenerateLine("all points coincide".into()));
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Ok(Line {
        point: c,
        direction: canonical_direction(Point2::new(angle.cos(), angle.sin())),
    })
}

/// Flip so the direction points down the image (or right when horizontal).
fn canonical_direction(d: Point2) -> Point2 {
    if d.y < 0.0 || (d.y == 0.0 && d.x < 0.0) {
        d * -1.0
    } else {
        d
    }
}

/// Fitted line bounded by the extreme projections of its consensus set.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSegment {
    /// Endpoint with the smaller projection (upper end for non-horizontal lines).
    pub start: Point2,
    pub end: Point2,
    pub direction: Point2,
    pub consensus_points: Vec<Point2>,
    /// Indices of the consensus points in the input slice.
    pub consensus_indices: Vec<usize>,
}

impl LineSegment {
    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    pub fn consensus_count(&self) -> usize {
        self.consensus_points.len()
    }

    pub fn midpoint(&self) -> Point2 {
        (self.start + self.end) * 0.5
    }

    pub fn line(&self) -> Line {
        Line {
            point: self.start,
            direction: self.direction,
        }
    }

    fn from_consensus(points: &[Point2], indices: Vec<usize>) -> Result<LineSegment> {
        let consensus: Vec<Point2> = indices.iter().map(|&i| points[i]).collect();
        let line = fit_line_least_squares(&consensus)?;
        let (lo, hi) = consensus
            .iter()
            .map(|&p| line.project(p))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
        Ok(LineSegment {
            start: line.at(lo),
            end: line.at(hi),
            direction: line.direction,
            consensus_points: consensus,
            consensus_indices: indices,
        })
    }
}

/// Up to `m_max` line segments with pairwise-disjoint consensus sets.
///
/// Pairs are drawn uniformly over distinct indices; a pair of coincident
/// points uses up its attempt. Consensus ties keep the earliest attempt. The
/// search stops when fewer than `n_min` points remain, `m_max` models are
/// found, or a round's best consensus is below `n_min`.
pub fn ransac_multi_line(points: &[Point2], params: &RansacParams) -> Result<Vec<LineSegment>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut models = Vec::new();

    while remaining.len() >= params.n_min && models.len() < params.m_max {
        let mut best: Vec<usize> = Vec::new();
        for _ in 0..params.k {
            let i = rng.random_range(0..remaining.len());
            let mut j = rng.random_range(0..remaining.len() - 1);
            if j >= i {
                j += 1;
            }
            let Ok(line) = Line::through(points[remaining[i]], points[remaining[j]]) else {
                continue;
            };
            let inliers = remaining.iter().filter(|&&r| line.distance(points[r]) < params.d_inlier);
            if inliers.clone().count() > best.len() {
                best = inliers.copied().collect();
            }
        }
        if best.len() < params.n_min {
            break;
        }
        remaining.retain(|r| best.binary_search(r).is_err());
        models.push(LineSegment::from_consensus(points, best)?);
    }
    Ok(models)
}

/// Probability that `k` pair draws include at least one pair from a model
/// holding a fraction `q` of the points: `1 − (1 − q²)^k`.
pub fn success_probability(q: f64, k: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return param(format!("q must lie in [0, 1], got {q}"));
    }
    if k == 0 {
        return param("k must be at least 1");
    }
    Ok(1.0 - (1.0 - q * q).powi(k as i32))
}
