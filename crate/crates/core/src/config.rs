use crate::error::{param, Result};
use crate::ransac::RansacParams;
use crate::segmentation::ColourLabel;

/// Knobs shared by both detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub post_label: ColourLabel,
    pub field_label: ColourLabel,
    /// Scan-line spacing in pixels.
    pub spacing: u32,
    /// Field pixels that must be exceeded in a run before it marks the border.
    pub green_threshold: u32,
    /// Post segments longer than `mean + sigma_mult · stddev` are ignored.
    pub sigma_mult: f64,
    /// Scan-line runs shorter than this are treated as label noise.
    pub min_segment_len: u32,
    /// Histogram bin count.
    pub bins: usize,
    /// Peak threshold on summed segment length, in pixels.
    pub gamma: u64,
    pub ransac: RansacParams,
    /// Pairing permissiveness in `[0, 1]`.
    pub rho: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            post_label: ColourLabel(2),
            field_label: ColourLabel(1),
            spacing: 4,
            green_threshold: 3,
            sigma_mult: 2.0,
            min_segment_len: 3,
            bins: 20,
            gamma: 20,
            ransac: RansacParams::default(),
            rho: 0.35,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.spacing == 0 {
            return param("spacing must be at least 1");
        }
        if self.green_threshold == 0 {
            return param("green threshold must be at least 1");
        }
        if !(self.sigma_mult > 0.0 && self.sigma_mult.is_finite()) {
            return param(format!("sigma multiplier must be positive, got {}", self.sigma_mult));
        }
        if self.bins == 0 {
            return param("bin count must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return param(format!("rho must lie in [0, 1], got {}", self.rho));
        }
        self.ransac.validate()
    }
}
