//! Image file I/O: binary PGM (P5) and single-channel PNG, 8- or 16-bit.
//!
//! Intensities are normalized to `[0, 1]` on load (divide by maxval) and
//! quantized on save. Any other format, bit depth, or channel layout is
//! rejected with a descriptive error. Masks are not serialized here; binary
//! masks travel as 0/255 PNGs via [`save_mask_png`] / [`load_mask_png`].

use std::fs::File;
use std::io::{BufWriter, Cursor, Write};
use std::path::Path;

use image::codecs::png::{PngDecoder, PngEncoder};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::raster::Image2D;

/// Output sample depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

/// Load a grayscale image from a PGM (P5) or PNG file, normalized to `[0, 1]`.
///
/// The format is detected from the file's magic bytes, not its extension.
pub fn load_image(path: &Path) -> Result<Image2D> {
    let bytes = std::fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"P5") {
        load_pgm(path, &bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        load_png(path, &bytes)
    } else {
        Err(Error::Load {
            path: path.to_path_buf(),
            reason: "not a binary PGM (P5) or PNG file".into(),
        })
    }
}

/// Save a grayscale image as PGM or PNG, chosen by the path's extension.
///
/// Intensities are clamped to `[0, 1]` and quantized to the requested depth.
/// The mask, if any, is ignored.
pub fn save_image(img: &Image2D, path: &Path, depth: BitDepth) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" => save_pgm(img, path, depth),
        "png" => save_png(img, path, depth),
        other => Err(Error::Parameter(format!(
            "unsupported output extension `{other}` for `{}` (use .pgm or .png)",
            path.display()
        ))),
    }
}

// ── PGM ──────────────────────────────────────────────────────────────────────

fn load_pgm(path: &Path, bytes: &[u8]) -> Result<Image2D> {
    let mut pos = 2usize; // past "P5"
    let mut header = [0usize; 3]; // width, height, maxval

    for slot in header.iter_mut() {
        *slot = next_pgm_token(path, bytes, &mut pos)?;
    }
    let (width, height, maxval) = (header[0], header[1], header[2]);
    if width == 0 || height == 0 {
        return Err(load_err(path, "zero image dimension in PGM header"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(load_err(path, &format!("PGM maxval {maxval} out of range")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(load_err(path, "missing whitespace after PGM maxval"));
    }
    pos += 1;

    let bytes_per_sample = if maxval > 255 { 2 } else { 1 };
    let expected = width * height * bytes_per_sample;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(load_err(
            path,
            &format!("truncated PGM raster: {} bytes, need {expected}", raster.len()),
        ));
    }

    let scale = 1.0 / maxval as f64;
    let mut data = Vec::with_capacity(width * height);
    if bytes_per_sample == 1 {
        for &b in &raster[..expected] {
            data.push(b as f64 * scale);
        }
    } else {
        // Two-byte samples are most-significant-byte first.
        for chunk in raster[..expected].chunks_exact(2) {
            let v = u16::from_be_bytes([chunk[0], chunk[1]]);
            data.push(v as f64 * scale);
        }
    }
    if data.iter().any(|&v| v > 1.0) {
        return Err(load_err(path, "PGM sample exceeds declared maxval"));
    }
    Image2D::from_vec(width, height, data)
}

/// Read one whitespace-delimited decimal token, skipping `#` comments.
fn next_pgm_token(path: &Path, bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(load_err(path, "malformed PGM header"));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| load_err(path, "malformed PGM header token"))
}

fn save_pgm(img: &Image2D, path: &Path, depth: BitDepth) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    let maxval: u32 = match depth {
        BitDepth::Eight => 255,
        BitDepth::Sixteen => 65535,
    };
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n{}\n", img.width(), img.height(), maxval)?;
        match depth {
            BitDepth::Eight => {
                for &v in img.data() {
                    w.write_all(&[quantize(v, 255) as u8])?;
                }
            }
            BitDepth::Sixteen => {
                for &v in img.data() {
                    w.write_all(&(quantize(v, 65535) as u16).to_be_bytes())?;
                }
            }
        }
        w.flush()
    };
    write(&mut w).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

// ── PNG ──────────────────────────────────────────────────────────────────────

fn load_png(path: &Path, bytes: &[u8]) -> Result<Image2D> {
    let decoder = PngDecoder::new(Cursor::new(bytes)).map_err(|e| Error::Load {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let dynamic = DynamicImage::from_decoder(decoder).map_err(|e| Error::Load {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    match dynamic {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let data = buf.into_raw().iter().map(|&v| v as f64 / 255.0).collect();
            Image2D::from_vec(w, h, data)
        }
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let data = buf
                .into_raw()
                .iter()
                .map(|&v| v as f64 / 65535.0)
                .collect();
            Image2D::from_vec(w, h, data)
        }
        other => Err(Error::Load {
            path: path.to_path_buf(),
            reason: format!(
                "unsupported PNG layout {:?}: expected single-channel 8- or 16-bit grayscale",
                other.color()
            ),
        }),
    }
}

fn save_png(img: &Image2D, path: &Path, depth: BitDepth) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })?;
    let w = BufWriter::new(file);
    let encoder = PngEncoder::new(w);
    let (width, height) = (img.width() as u32, img.height() as u32);
    let result = match depth {
        BitDepth::Eight => {
            let buf: Vec<u8> = img.data().iter().map(|&v| quantize(v, 255) as u8).collect();
            encoder.write_image(&buf, width, height, ExtendedColorType::L8)
        }
        BitDepth::Sixteen => {
            // The encoder takes u16 samples as native-endian bytes and
            // handles the PNG byte order itself.
            let mut buf = Vec::with_capacity(img.len() * 2);
            for &v in img.data() {
                buf.extend_from_slice(&(quantize(v, 65535) as u16).to_ne_bytes());
            }
            encoder.write_image(&buf, width, height, ExtendedColorType::L16)
        }
    };
    result.map_err(|e| Error::Write {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })
}

// ── Binary masks ─────────────────────────────────────────────────────────────

/// Save a boolean mask as an 8-bit 0/255 PNG.
pub fn save_mask_png(mask: &[bool], width: usize, height: usize, path: &Path) -> Result<()> {
    if mask.len() != width * height {
        return Err(Error::Parameter("mask length mismatch".into()));
    }
    let img = Image2D::from_vec(
        width,
        height,
        mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    )?;
    save_image(&img, path, BitDepth::Eight)
}

/// Load a 0/255 PNG as a boolean mask (any value above half counts as true).
pub fn load_mask_png(path: &Path) -> Result<(Vec<bool>, usize, usize)> {
    let img = load_image(path)?;
    let mask = img.data().iter().map(|&v| v > 0.5).collect();
    Ok((mask, img.width(), img.height()))
}

fn quantize(v: f64, maxval: u32) -> u32 {
    (v.clamp(0.0, 1.0) * maxval as f64).round() as u32
}

fn load_err(path: &Path, reason: &str) -> Error {
    Error::Load {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn pgm_8bit_extremes_map_to_unit_range() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.pgm");

        let white = Image2D::constant(4, 3, 1.0);
        save_image(&white, &path, BitDepth::Eight).unwrap();
        let back = load_image(&path).unwrap();
        assert!(back.data().iter().all(|&v| v == 1.0));

        let black = Image2D::constant(4, 3, 0.0);
        save_image(&black, &path, BitDepth::Eight).unwrap();
        let back = load_image(&path).unwrap();
        assert!(back.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn png_16bit_midpoint_scaling() {
        // A 16-bit sample of 32768 must decode to 32768/65535.
        let dir = tempdir().unwrap();
        let path = dir.path().join("mid.png");
        let img = Image2D::constant(2, 2, 32768.0 / 65535.0);
        save_image(&img, &path, BitDepth::Sixteen).unwrap();
        let back = load_image(&path).unwrap();
        let expected = 32768.0 / 65535.0;
        for &v in back.data() {
            assert!((v - expected).abs() < 1e-12, "got {v}, want {expected}");
        }
        assert!((expected - 0.50001).abs() < 1e-4);
    }

    #[test]
    fn eight_bit_round_trip_quantization_bound() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("half.png");
        let img = Image2D::constant(5, 5, 0.5);
        save_image(&img, &path, BitDepth::Eight).unwrap();
        let back = load_image(&path).unwrap();
        for &v in back.data() {
            assert!((v - 0.5).abs() <= 1.0 / 255.0);
        }
    }

    #[test]
    fn sixteen_bit_round_trip_quantization_bound() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("half16.pgm");
        let img = Image2D::from_fn(7, 5, |x, y| ((x * 5 + y * 3) % 11) as f64 / 11.0);
        save_image(&img, &path, BitDepth::Sixteen).unwrap();
        let back = load_image(&path).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 1.0 / 65535.0);
        }
    }

    #[test]
    fn rejects_color_png() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let rgb = image::RgbImage::from_pixel(3, 3, image::Rgb([10, 20, 30]));
        rgb.save(&path).unwrap();
        let err = load_image(&path).unwrap_err();
        assert!(matches!(err, Error::Load { .. }), "got {err:?}");
    }

    #[test]
    fn rejects_garbage_file() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"definitely not an image").unwrap();
        assert!(load_image(&path).is_err());
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let mut bytes = b"P5\n# a comment\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 128, 255, 64]);
        std::fs::write(&path, &bytes).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.dims(), (2, 2));
        assert_eq!(img.get(1, 1), 64.0 / 255.0);
    }
}
