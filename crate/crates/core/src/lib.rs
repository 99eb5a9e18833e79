//! Goalpost detection over colour-segmented images.
//!
//! Two detectors share the same front end (LUT segmentation, scan-lines,
//! field border, colour segments):
//!
//! * [`histdetect`] bins post-coloured segment lengths into vertical columns
//!   and turns grouped peaks into axis-aligned boxes.
//! * [`pairing`] fits edge lines to left/right transition points with
//!   multi-model RANSAC ([`ransac`]) and pairs them into posts.
//!
//! [`synth`] renders labelled frames with exact ground truth and [`bench`]
//! scores both detectors with the distance-by-width metrics in [`metrics`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod error;
pub mod geometry;
pub mod histdetect;
pub mod metrics;
pub mod pairing;
pub mod pnm;
pub mod ransac;
pub mod scanline;
pub mod segmentation;
pub mod synth;

pub use config::DetectorConfig;
pub use error::{Error, Result};
pub use geometry::{Pixel, Point2, Quad};
pub use segmentation::{ClassImage, ColourLabel, Lut, RawImage};

/// Deterministic 64-bit mixer used to derive independent seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
