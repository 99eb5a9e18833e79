//! Binary PPM (P6) input and PGM (P5) input/output.
//!
//! Only single-byte samples (maxval ≤ 255) are supported. A PPM's maxval
//! must be `2^n − 1`; `n` becomes the image's bit depth.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::segmentation::{ClassImage, RawImage};

struct Header {
    magic: [u8; 2],
    width: u32,
    height: u32,
    maxval: u32,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 {
        return Err(Error::Format("file too short for a PNM header".into()));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("malformed PNM header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("PNM header value out of range".into()))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Format("missing whitespace after PNM maxval".into())),
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    Ok(Header {
        magic,
        width,
        height,
        maxval,
        data_offset: pos,
    })
}

fn payload<'a>(bytes: &'a [u8], header: &Header, channels: usize) -> Result<&'a [u8]> {
    let expected = header.width as usize * header.height as usize * channels;
    let data = &bytes[header.data_offset..];
    if data.len() < expected {
        return Err(Error::Format(format!(
            "pixel data has {} bytes, expected {expected}",
            data.len()
        )));
    }
    Ok(&data[..expected])
}

pub fn read_ppm(mut r: impl Read) -> Result<RawImage> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let header = parse_header(&bytes)?;
    if &header.magic != b"P6" {
        return Err(Error::Format("expected binary PPM (P6)".into()));
    }
    if !(header.maxval + 1).is_power_of_two() {
        return Err(Error::Format(format!(
            "PPM maxval {} is not of the form 2^n - 1",
            header.maxval
        )));
    }
    let bits = (header.maxval + 1).trailing_zeros() as u8;
    let data = payload(&bytes, &header, 3)?;
    let pixels = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    RawImage::new(header.width, header.height, bits, pixels).map_err(|e| match e {
        Error::InputDomain(msg) => Error::Format(msg),
        other => other,
    })
}

pub fn write_ppm(img: &RawImage, mut w: impl Write) -> Result<()> {
    let maxval = (1u32 << img.bits_per_channel()) - 1;
    writeln!(w, "P6\n{} {}\n{maxval}", img.width(), img.height())?;
    let data: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    w.write_all(&data)?;
    Ok(())
}

/// Read a P5 file; grey values are taken as label ids.
pub fn read_pgm(mut r: impl Read) -> Result<ClassImage> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let header = parse_header(&bytes)?;
    if &header.magic != b"P5" {
        return Err(Error::Format("expected binary PGM (P5)".into()));
    }
    let data = payload(&bytes, &header, 1)?;
    ClassImage::new(header.width, header.height, data.to_vec())
}

pub fn write_pgm(img: &ClassImage, mut w: impl Write) -> Result<()> {
    writeln!(w, "P5\n{} {}\n255", img.width(), img.height())?;
    w.write_all(img.labels())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::ColourLabel;

    #[test]
    fn pgm_round_trip() {
        let img = ClassImage::from_fn(5, 3, |x, y| ColourLabel((x * 3 + y) as u8));
        let mut buf = Vec::new();
        write_pgm(&img, &mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n5 3\n255\n"));
        assert_eq!(read_pgm(buf.as_slice()).unwrap(), img);
    }

    #[test]
    fn ppm_with_comment_and_bit_depth() {
        let mut bytes = b"P6 # comment\n2 1\n# another\n127\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 127, 0, 64]);
        let img = read_ppm(bytes.as_slice()).unwrap();
        assert_eq!(img.bits_per_channel(), 7);
        assert_eq!(img.get(1, 0), [127, 0, 64]);

        let mut out = Vec::new();
        write_ppm(&img, &mut out).unwrap();
        assert_eq!(read_ppm(out.as_slice()).unwrap(), img);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_ppm(&b"P6\n2 1\n100\n\0\0\0\0\0\0"[..]).is_err());
        assert!(read_ppm(&b"P6\n2 1\n255\n\0\0\0"[..]).is_err());
        assert!(read_pgm(&b"P6\n1 1\n255\n\0"[..]).is_err());
        assert!(read_pgm(&b"P5\n1 1\n"[..]).is_err());
        assert!(read_pgm(&b"P5\n1 x\n255\n\0"[..]).is_err());
    }
}
