//! Independent reference implementations used by the acceptance suite.
//! None of these call into the library code they check.

#![allow(dead_code)]

/// O(n³) upper hull in image coordinates (smaller `y` is higher).
///
/// A point is a vertex when it is the highest point at its `x` and no chord
/// between two points strictly to its left and right passes on or above it.
pub fn brute_force_upper_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    for &p in points {
        if points.iter().any(|q| q.0 == p.0 && q.1 < p.1) {
            continue;
        }
        let covered = points.iter().any(|&a| {
            a.0 < p.0
                && points.iter().any(|&b| {
                    // chord height at p.x is on or above p, i.e. y_chord <= p.y:
                    // (b - a) × (p - a) >= 0 with x increasing to the right
                    b.0 > p.0 && (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0
                })
        });
        if !covered && !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort();
    out
}

/// Line-by-line transcription of the peak-grouping pseudocode with bins
/// indexed 1..=N, plus the three repairs the transcription needs to
/// terminate correctly: the scan includes bin N, the look-ahead stops at
/// bin N, and the scan resumes after the end of a merged run.
///
/// Returns 1-based `(first_bin, last_bin, x_start, x_end)`.
pub fn literal_group_peaks(counts: &[u64], width: u32, gamma: u64) -> Vec<(usize, usize, f64, f64)> {
    let n_bins = counts.len();
    let x_start = |n: usize| ((n - 1) as f64 * f64::from(width)) / n_bins as f64;
    let x_end = |n: usize| (n as f64 * f64::from(width)) / n_bins as f64;
    let in_p = |n: usize| counts[n - 1] >= gamma;

    let mut p = Vec::new();
    let mut i = 1;
    while i <= n_bins {
        if in_p(i) {
            let mut j = i;
            while j < n_bins && in_p(j + 1) {
                j += 1;
            }
            p.push((i, j, x_start(i), x_end(j)));
            i = j;
        }
        i += 1;
    }
    p
}

/// `mean + mult · population stddev` of the lengths.
pub fn sigma_limit(lengths: &[u32], mult: f64) -> Option<f64> {
    if lengths.is_empty() {
        return None;
    }
    let n = lengths.len() as f64;
    let mean = lengths.iter().map(|&l| f64::from(l)).sum::<f64>() / n;
    let var = lengths.iter().map(|&l| (f64::from(l) - mean).powi(2)).sum::<f64>() / n;
    Some(mean + mult * var.sqrt())
}

/// Runs of equal labels along a sequence: `(start, len, label)`.
pub fn runs(labels: &[u8]) -> Vec<(usize, usize, u8)> {
    let mut out: Vec<(usize, usize, u8)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.2 == l => r.1 += 1,
            _ => out.push((i, 1, l)),
        }
    }
    out
}

/// Consensus set (points strictly closer than `d`) of the line through
/// every distinct point pair `(i, j)`, `i < j`.
pub fn pair_consensus_sets(points: &[(f64, f64)], d: f64) -> Vec<(usize, usize, Vec<usize>)> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (ax, ay) = points[i];
            let (bx, by) = points[j];
            let len = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
            if len == 0.0 {
                continue;
            }
            let inliers: Vec<usize> = (0..points.len())
                .filter(|&r| {
                    let (px, py) = points[r];
                    ((bx - ax) * (py - ay) - (by - ay) * (px - ax)).abs() / len < d
                })
                .collect();
            out.push((i, j, inliers));
        }
    }
    out
}
