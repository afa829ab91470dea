//! Framebuffer export/import.
//!
//! Two formats are supported:
//!
//! * PFM (`PF`, 32-bit float RGB, little-endian via a negative scale,
//!   rows bottom to top). Channels hold the premultiplied RGB values
//!   untouched, which makes PFM the format for bit-exact comparisons.
//! * PPM (`P6`, 8 bits per channel). Premultiplied color is converted to
//!   straight color (divide by alpha; zero-alpha pixels become black),
//!   clamped to `[0, 1]`, scaled by 255 and rounded half away from zero.

use std::io::Write;
use std::path::Path;

use volren_core::raycast::Framebuffer;

use crate::error::{Error, Result};

pub fn write_pfm(fb: &Framebuffer, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(fb.width() * fb.height() * 12 + 32);
    write!(bytes, "PF\n{} {}\n-1.0\n", fb.width(), fb.height()).expect("vec write");
    for y in (0..fb.height()).rev() {
        for x in 0..fb.width() {
            let p = fb.pixel(x, y);
            for c in 0..3 {
                bytes.extend_from_slice(&(p[c] as f32).to_le_bytes());
            }
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read a little-endian color PFM. The alpha channel is not stored in PFM
/// and is set to 1.
pub fn read_pfm(path: &Path) -> Result<Framebuffer> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |detail: &str| Error::format("PFM image", path, detail.to_string());
    // header: three whitespace-terminated tokens
    let mut pos = 0usize;
    let token = |bytes: &[u8], pos: &mut usize| -> Result<String> {
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos >= bytes.len() {
            return Err(Error::format("PFM image", path, "truncated header".to_string()));
        }
        let text = String::from_utf8_lossy(&bytes[start..*pos]).into_owned();
        *pos += 1; // single whitespace terminator
        Ok(text)
    };
    if token(&bytes, &mut pos)? != "PF" {
        return Err(bad("not a color PFM (missing 'PF' magic)"));
    }
    let width: usize = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad width"))?;
    let height_tok = token(&bytes, &mut pos)?;
    let height: usize = height_tok.parse().map_err(|_| bad("bad height"))?;
    let scale: f64 = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad scale"))?;
    if scale >= 0.0 {
        return Err(bad("big-endian PFM is not supported"));
    }
    let expected = width * height * 12;
    if bytes.len() - pos != expected {
        return Err(bad(&format!(
            "payload is {} bytes, expected {expected}",
            bytes.len() - pos
        )));
    }
    let mut fb = Framebuffer::new(width, height);
    let mut offset = pos;
    for y in (0..height).rev() {
        for x in 0..width {
            let mut px = [0.0f64; 4];
            for channel in px.iter_mut().take(3) {
                let raw = [bytes[offset], bytes[offset + 1], bytes[offset + 2], bytes[offset + 3]];
                *channel = f32::from_le_bytes(raw) as f64;
                offset += 4;
            }
            px[3] = 1.0;
            fb.set_pixel(x, y, px);
        }
    }
    Ok(fb)
}

/// Convert one premultiplied pixel to straight 8-bit RGB.
fn to_u8(p: [f64; 4]) -> [u8; 3] {
    let mut out = [0u8; 3];
    if p[3] > 1e-12 {
        for c in 0..3 {
            let straight = (p[c] / p[3]).clamp(0.0, 1.0);
            out[c] = (straight * 255.0).round() as u8;
        }
    }
    out
}

pub fn write_ppm(fb: &Framebuffer, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(fb.width() * fb.height() * 3 + 32);
    write!(bytes, "P6\n{} {}\n255\n", fb.width(), fb.height()).expect("vec write");
    for y in 0..fb.height() {
        for x in 0..fb.width() {
            bytes.extend_from_slice(&to_u8(fb.pixel(x, y)));
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read a binary PPM; channels are scaled back to `[0, 1]` and alpha set
/// to 1 (the straight/premultiplied distinction is lost in PPM).
pub fn read_ppm(path: &Path) -> Result<Framebuffer> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |detail: &str| Error::format("PPM image", path, detail.to_string());
    let mut pos = 0usize;
    let token = |bytes: &[u8], pos: &mut usize| -> Result<String> {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::format("PPM image", path, "truncated header".to_string()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    if token(&bytes, &mut pos)? != "P6" {
        return Err(bad("not a binary PPM"));
    }
    let width: usize = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad width"))?;
    let height: usize = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad height"))?;
    let maxval: usize = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad maxval"))?;
    if maxval != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    pos += 1; // single whitespace after maxval
    if bytes.len() - pos != width * height * 3 {
        return Err(bad("payload size mismatch"));
    }
    let mut fb = Framebuffer::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let o = pos + (y * width + x) * 3;
            fb.set_pixel(
                x,
                y,
                [
                    bytes[o] as f64 / 255.0,
                    bytes[o + 1] as f64 / 255.0,
                    bytes[o + 2] as f64 / 255.0,
                    1.0,
                ],
            );
        }
    }
    Ok(fb)
}
