use goalpost::histdetect::detect_histogram;
use goalpost::pairing::{self, detect_ransac, match_posts, pair_conditions, run_ransac, Permissiveness};
use goalpost::ransac::{LineSegment, RansacParams};
use goalpost::synth::{render_scene, SceneSpec};
use goalpost::{ClassImage, ColourLabel, DetectorConfig};

const BG: ColourLabel = ColourLabel(0);
const FIELD: ColourLabel = ColourLabel(1);
const POST: ColourLabel = ColourLabel(2);

fn scene(distance_cm: f64, tilt_deg: f64, noise_p: f64, seed: u64) -> SceneSpec {
    SceneSpec {
        distance_cm,
        tilt_deg,
        noise_p,
        seed,
        ..SceneSpec::default()
    }
}

/// Field below row 300, sky above, and upright post columns `[x0, x1)`
/// spanning rows 100..320.
fn posts_image(columns: &[(u32, u32)]) -> ClassImage {
    ClassImage::from_fn(640, 480, |x, y| {
        if columns.iter().any(|&(x0, x1)| (x0..x1).contains(&x)) && (100..320).contains(&y) {
            POST
        } else if y >= 300 {
            FIELD
        } else {
            BG
        }
    })
}

#[test]
fn histogram_finds_one_upright_post() {
    let cfg = DetectorConfig::default();
    let (img, truth) = render_scene(&scene(300.0, 0.0, 0.0, 0)).unwrap();
    let quads = detect_histogram(&img, &cfg).unwrap();
    assert_eq!(quads.len(), 1);
    assert!(truth.box_contains(quads[0].centre()));
    // segment x positions are sampled every `spacing` pixels
    let slack = f64::from(2 * cfg.spacing);
    assert!(
        (quads[0].width_px - truth.width_px).abs() <= slack,
        "width {} vs truth {}",
        quads[0].width_px,
        truth.width_px
    );
}

#[test]
fn histogram_width_grows_with_tilt() {
    let cfg = DetectorConfig::default();
    for tilt in [10.0, 20.0] {
        let (img, truth) = render_scene(&scene(300.0, tilt, 0.0, 0)).unwrap();
        let quads = detect_histogram(&img, &cfg).unwrap();
        assert_eq!(quads.len(), 1, "tilt {tilt}");
        assert!(quads[0].width_px >= truth.width_px, "tilt {tilt}: {} < {}", quads[0].width_px, truth.width_px);
    }
}

#[test]
fn blank_frames_give_nothing() {
    let cfg = DetectorConfig::default();
    for img in [ClassImage::filled(320, 240, BG), posts_image(&[])] {
        assert!(detect_histogram(&img, &cfg).unwrap().is_empty());
        assert!(detect_ransac(&img, &cfg).unwrap().is_empty());
    }
}

#[test]
fn two_separated_posts() {
    let cfg = DetectorConfig::default();
    let img = posts_image(&[(100, 124), (400, 424)]);
    let mut hist: Vec<f64> = detect_histogram(&img, &cfg).unwrap().iter().map(|q| q.centre().x).collect();
    hist.sort_by(f64::total_cmp);
    assert_eq!(hist.len(), 2);
    assert!((100.0..124.0).contains(&hist[0]) && (400.0..424.0).contains(&hist[1]), "{hist:?}");

    let mut rs: Vec<f64> = detect_ransac(&img, &cfg).unwrap().iter().map(|q| q.centre().x).collect();
    rs.sort_by(f64::total_cmp);
    assert_eq!(rs.len(), 2);
    assert!((100.0..124.0).contains(&rs[0]) && (400.0..424.0).contains(&rs[1]), "{rs:?}");
}

#[test]
fn ransac_post_count_is_tilt_invariant() {
    let cfg = DetectorConfig::default();
    for tilt in [0.0, 10.0, 20.0] {
        let (img, truth) = render_scene(&scene(300.0, tilt, 0.0, 3)).unwrap();
        let det = run_ransac(&img, &cfg).unwrap();
        assert_eq!(det.posts.len(), 1, "tilt {tilt}");
        let q = det.posts[0].quad;
        assert!(truth.box_contains(q.centre()));
        let rel = (q.width_px - truth.width_px).abs() / truth.width_px;
        assert!(rel < 0.15, "tilt {tilt}: width {} vs {}", q.width_px, truth.width_px);
    }
}

#[test]
fn ransac_is_deterministic_per_seed() {
    let cfg = DetectorConfig::default();
    let (img, _) = render_scene(&scene(350.0, 10.0, 0.03, 11)).unwrap();
    assert_eq!(detect_ransac(&img, &cfg).unwrap(), detect_ransac(&img, &cfg).unwrap());
}

/// Edge lines from a few noisy frames, to exercise the pairing rules on
/// realistic input.
fn noisy_lines() -> Vec<(Vec<LineSegment>, Vec<LineSegment>)> {
    let cfg = DetectorConfig {
        ransac: RansacParams {
            m_max: 4,
            ..DetectorConfig::default().ransac
        },
        ..DetectorConfig::default()
    };
    (0..6)
        .map(|seed| {
            let (img, _) = render_scene(&scene(150.0 + 80.0 * seed as f64, 5.0 * seed as f64, 0.05, seed)).unwrap();
            let det = run_ransac(&img, &cfg).unwrap();
            (det.left_lines, det.right_lines)
        })
        .collect()
}

#[test]
fn passing_pairs_grow_with_rho() {
    for (left, right) in noisy_lines() {
        let mut prev = 0;
        for step in 0..=20 {
            let p = Permissiveness::new(f64::from(step) / 20.0, 640, 480).unwrap();
            let passing = left
                .iter()
                .flat_map(|l1| right.iter().map(move |l2| (l1, l2)))
                .filter(|(l1, l2)| pair_conditions(l1, l2, &pairing::epsilon_bounds(&p, l1, l2)).passed())
                .count();
            assert!(passing >= prev, "rho step {step}: {passing} < {prev}");
            prev = passing;
        }
    }
}

#[test]
fn pair_conditions_are_symmetric() {
    let p = Permissiveness::new(0.35, 640, 480).unwrap();
    for (left, right) in noisy_lines() {
        let all: Vec<_> = left.iter().chain(&right).collect();
        for a in &all {
            for b in &all {
                let ab = pair_conditions(a, b, &pairing::epsilon_bounds(&p, a, b));
                let ba = pair_conditions(b, a, &pairing::epsilon_bounds(&p, b, a));
                assert_eq!(ab, ba);
            }
        }
    }
}

#[test]
fn matching_is_one_to_one() {
    for rho in [0.35, 0.7, 1.0] {
        let p = Permissiveness::new(rho, 640, 480).unwrap();
        for (left, right) in noisy_lines() {
            let posts = match_posts(&left, &right, &p);
            assert!(posts.len() <= left.len().min(right.len()));
            for (i, a) in posts.iter().enumerate() {
                for b in &posts[i + 1..] {
                    assert_ne!(a.left, b.left);
                    assert_ne!(a.right, b.right);
                }
            }
        }
    }
}
