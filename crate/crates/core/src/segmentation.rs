//! Colour look-up table classification.
//!
//! A [`Lut`] with `n` bits per channel stores one label per colour in a flat
//! `2^n × 2^n × 2^n` table indexed as `(c0 << 2n) | (c1 << n) | c2`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Index into the label set. Label 0 is reserved for "unclassified".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ColourLabel(pub u8);

impl ColourLabel {
    pub const UNCLASSIFIED: ColourLabel = ColourLabel(0);
}

const LUT_MAGIC: &str = "LUTv1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lut {
    bits: u8,
    label_count: u16,
    labels: Vec<u8>,
}

impl Lut {
    pub fn new(bits: u8, label_count: u16, labels: Vec<u8>) -> Result<Self> {
        check_bits(bits)?;
        if label_count == 0 || label_count > 256 {
            return Err(Error::Parameter(format!(
                "label count must be in 1..=256, got {label_count}"
            )));
        }
        let expected = table_len(bits);
        if labels.len() != expected {
            return Err(Error::Parameter(format!(
                "table for {bits} bits needs {expected} entries, got {}",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| u16::from(l) >= label_count) {
            return Err(Error::Parameter(format!(
                "label {bad} not below label count {label_count}"
            )));
        }
        Ok(Self {
            bits,
            label_count,
            labels,
        })
    }

    /// Table mapping every colour to `label`.
    pub fn constant(bits: u8, label_count: u16, label: ColourLabel) -> Result<Self> {
        check_bits(bits)?;
        Self::new(bits, label_count, vec![label.0; table_len(bits)])
    }

    /// Build a table by evaluating `f` on every colour.
    pub fn from_fn(bits: u8, label_count: u16, f: impl Fn([u8; 3]) -> ColourLabel) -> Result<Self> {
        check_bits(bits)?;
        let side = 1u32 << bits;
        let mut labels = Vec::with_capacity(table_len(bits));
        for c0 in 0..side {
            for c1 in 0..side {
                for c2 in 0..side {
                    labels.push(f([c0 as u8, c1 as u8, c2 as u8]).0);
                }
            }
        }
        Self::new(bits, label_count, labels)
    }

    pub fn bits_per_channel(&self) -> u8 {
        self.bits
    }

    pub fn label_count(&self) -> u16 {
        self.label_count
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn classify_pixel(&self, pixel: [u8; 3]) -> Result<ColourLabel> {
        let n = u32::from(self.bits);
        let limit = 1u32 << n;
        if let Some(c) = pixel.iter().find(|&&c| u32::from(c) >= limit) {
            return Err(Error::InputDomain(format!(
                "channel value {c} needs more than {n} bits"
            )));
        }
        let idx = (u32::from(pixel[0]) << (2 * n)) | (u32::from(pixel[1]) << n) | u32::from(pixel[2]);
        Ok(ColourLabel(self.labels[idx as usize]))
    }

    pub fn classify_image(&self, img: &RawImage) -> Result<ClassImage> {
        let labels = img
            .pixels()
            .iter()
            .map(|&p| self.classify_pixel(p).map(|l| l.0))
            .collect::<Result<Vec<u8>>>()?;
        ClassImage::new(img.width(), img.height(), labels)
    }

    /// Serialise as `LUTv1 <n> <k>\n` followed by one byte per entry.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{LUT_MAGIC} {} {}", self.bits, self.label_count)?;
        w.write_all(&self.labels)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.labels.len() + 16);
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("missing LUT header line".into()))?;
        let header = std::str::from_utf8(&bytes[..nl])
            .map_err(|_| Error::Format("LUT header is not ASCII".into()))?;
        let mut fields = header.split(' ');
        if fields.next() != Some(LUT_MAGIC) {
            return Err(Error::Format(format!("bad LUT magic in header {header:?}")));
        }
        let bits: u8 = parse_field(fields.next(), "bit depth")?;
        let label_count: u16 = parse_field(fields.next(), "label count")?;
        if fields.next().is_some() {
            return Err(Error::Format(format!("trailing fields in LUT header {header:?}")));
        }
        if !(1..=8).contains(&bits) {
            return Err(Error::Format(format!("bit depth {bits} outside 1..=8")));
        }
        let payload = &bytes[nl + 1..];
        let expected = table_len(bits);
        if payload.len() != expected {
            return Err(Error::Format(format!(
                "LUT payload has {} bytes, expected {expected}",
                payload.len()
            )));
        }
        Self::new(bits, label_count, payload.to_vec()).map_err(|e| match e {
            Error::Parameter(msg) => Error::Format(msg),
            other => other,
        })
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    field
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::Format(format!("LUT header has no valid {what}")))
}

fn check_bits(bits: u8) -> Result<()> {
    if (1..=8).contains(&bits) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("bits per channel must be in 1..=8, got {bits}")))
    }
}

fn table_len(bits: u8) -> usize {
    1usize << (3 * usize::from(bits))
}

/// Three-channel image with `bits` significant bits per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    width: u32,
    height: u32,
    bits: u8,
    pixels: Vec<[u8; 3]>,
}

impl RawImage {
    pub fn new(width: u32, height: u32, bits: u8, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_bits(bits)?;
        if pixels.len() != width as usize * height as usize {
            return Err(Error::Parameter(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width as usize * height as usize,
                pixels.len()
            )));
        }
        let limit = 1u16 << bits;
        if pixels.iter().flatten().any(|&c| u16::from(c) >= limit) {
            return Err(Error::InputDomain(format!("channel value exceeds {bits} bits")));
        }
        Ok(Self {
            width,
            height,
            bits,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits_per_channel(&self) -> u8 {
        self.bits
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[(y * self.width + x) as usize]
    }
}

/// Row-major grid of colour labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassImage {
    width: u32,
    height: u32,
    labels: Vec<u8>,
}

impl ClassImage {
    pub fn new(width: u32, height: u32, labels: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if labels.len() != expected {
            return Err(Error::Parameter(format!(
                "{width}x{height} class image needs {expected} labels, got {}",
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn filled(width: u32, height: u32, label: ColourLabel) -> Self {
        Self {
            width,
            height,
            labels: vec![label.0; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> ColourLabel) -> Self {
        let labels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y).0)
            .collect();
        Self {
            width,
            height,
            labels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u8] {
        &mut self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> ColourLabel {
        ColourLabel(self.labels[self.index(x, y)])
    }

    pub fn set(&mut self, x: u32, y: u32, label: ColourLabel) {
        let i = self.index(x, y);
        self.labels[i] = label.0;
    }

    pub fn count(&self, label: ColourLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label.0).count()
    }

    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y as usize * self.width as usize + x as usize
    }
}
