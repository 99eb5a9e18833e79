//! Distance-by-width and the detection-rate / RMSE scores.

use std::f64::consts::PI;

use crate::error::{param, Result};

/// Horizontal extent of a pinhole camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    width: u32,
    theta_x: f64,
}

impl CameraModel {
    /// `theta_x` is the horizontal field of view in radians.
    pub fn new(width: u32, theta_x: f64) -> Result<Self> {
        if width == 0 {
            return param("image width must be at least 1");
        }
        if !(theta_x > 0.0 && theta_x < PI) {
            return param(format!("horizontal field of view must lie in (0, π), got {theta_x}"));
        }
        Ok(Self { width, theta_x })
    }

    pub fn from_degrees(width: u32, fov_deg: f64) -> Result<Self> {
        Self::new(width, fov_deg.to_radians())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn theta_x(&self) -> f64 {
        self.theta_x
    }

    /// `γ_x = w_img / (2·tan(θ_x / 2))`, i.e. the focal length in pixels.
    pub fn pixel_angular_width(&self) -> f64 {
        f64::from(self.width) / (2.0 * (self.theta_x / 2.0).tan())
    }
}

/// `d_w = (w_cm / w_px) · γ_x`.
pub fn distance_by_width(w_cm: f64, w_px: f64, gamma_x: f64) -> Result<f64> {
    if !(w_px > 0.0) {
        return param(format!("pixel width must be positive, got {w_px}"));
    }
    if !(w_cm > 0.0) {
        return param(format!("physical width must be positive, got {w_cm}"));
    }
    Ok(w_cm / w_px * gamma_x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRecord {
    pub true_distance: f64,
    pub tilt: f64,
    /// Present exactly when the post was correctly identified.
    pub estimated_distance: Option<f64>,
}

impl DetectionRecord {
    pub fn detected(&self) -> bool {
        self.estimated_distance.is_some()
    }
}

pub fn detection_rate(records: &[DetectionRecord]) -> Result<f64> {
    if records.is_empty() {
        return param("detection rate of an empty record set");
    }
    let hits = records.iter().filter(|r| r.detected()).count();
    Ok(hits as f64 / records.len() as f64)
}

/// Root-mean-square distance error over detected records.
pub fn distance_rmse(records: &[DetectionRecord]) -> Result<f64> {
    let errors: Vec<f64> = records
        .iter()
        .filter_map(|r| r.estimated_distance.map(|e| e - r.true_distance))
        .collect();
    if errors.is_empty() {
        return param("RMSE needs at least one detected record");
    }
    Ok((errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt())
}
