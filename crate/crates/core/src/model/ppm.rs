//! Binary PPM (P6, maxval 255) reading and writing.

use std::io::{Read, Write};
use std::path::Path;

use crate::model::{Frame, ModelError};

/// Encodes a frame as a P6 byte stream.
pub fn encode(frame: &Frame) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", frame.width(), frame.height());
    let mut out = Vec::with_capacity(header.len() + frame.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(frame.pixels());
    out
}

pub fn write_to<W: Write>(frame: &Frame, mut w: W) -> std::io::Result<()> {
    w.write_all(&encode(frame))?;
    w.flush()
}

pub fn save(frame: &Frame, path: &Path) -> Result<(), ModelError> {
    let file = std::fs::File::create(path).map_err(|e| ModelError::io(path, e))?;
    write_to(frame, std::io::BufWriter::new(file)).map_err(|e| ModelError::io(path, e))
}

pub fn load(path: &Path) -> Result<Frame, ModelError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| ModelError::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        ModelError::Ppm(msg) => ModelError::Ppm(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Decodes a P6 image. Header comments (`#` to end of line) are skipped.
pub fn decode(bytes: &[u8]) -> Result<Frame, ModelError> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    if cursor.bytes.get(0..2) != Some(b"P6") {
        return Err(ModelError::Ppm("missing P6 magic".into()));
    }
    cursor.pos = 2;
    let width = cursor.next_uint("width")?;
    let height = cursor.next_uint("height")?;
    let maxval = cursor.next_uint("maxval")?;
    if maxval != 255 {
        return Err(ModelError::Ppm(format!("unsupported maxval {maxval}, expected 255")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match cursor.bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(ModelError::Ppm("missing whitespace after maxval".into())),
    }
    if width == 0 || height == 0 || width > u32::MAX as u64 || height > u32::MAX as u64 {
        return Err(ModelError::Ppm(format!("bad dimensions {width}x{height}")));
    }
    let expected = (3 * width * height) as usize;
    let raster = &bytes[cursor.pos..];
    if raster.len() < expected {
        return Err(ModelError::Ppm(format!(
            "truncated raster: {} of {expected} bytes",
            raster.len()
        )));
    }
    Frame::new(width as u32, height as u32, raster[..expected].to_vec())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_uint(&mut self, field: &str) -> Result<u64, ModelError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos || self.pos - start > 10 {
            return Err(ModelError::Ppm(format!("invalid {field} in header")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ModelError::Ppm(format!("invalid {field} in header")))
    }
}
