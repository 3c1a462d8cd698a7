//! Netpbm graymap (PGM) reading and writing.
//!
//! Reads plain (`P2`) and raw (`P5`) files with any maxval up to 65535 and
//! rescales so that maxval maps to 255. Writes raw `P5` with maxval 255.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Plain,
    Raw,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Option<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }
}

/// Decodes an in-memory PGM. `path` is only used for error messages.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Image> {
    let format_err = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let truncated = || Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "truncated pixel data"),
    };

    let encoding = match bytes.get(..2) {
        Some(b"P2") => Encoding::Plain,
        Some(b"P5") => Encoding::Raw,
        Some(magic) => {
            return Err(format_err(&format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(magic)
            )))
        }
        None => return Err(format_err("missing magic number")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number().ok_or_else(|| format_err("bad width"))? as usize;
    let height = cur.number().ok_or_else(|| format_err("bad height"))? as usize;
    let maxval = cur.number().ok_or_else(|| format_err("bad maxval"))?;
    if width == 0 || height == 0 {
        return Err(format_err("zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format_err("maxval must be in 1..=65535"));
    }
    let n = width * height;
    let scale = 255.0 / f64::from(maxval);

    let raw: Vec<u32> = match encoding {
        Encoding::Plain => {
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                cur.skip_space_and_comments();
                if cur.pos >= bytes.len() {
                    return Err(truncated());
                }
                out.push(cur.number().ok_or_else(|| format_err("bad sample"))?);
            }
            out
        }
        Encoding::Raw => {
            // exactly one whitespace byte separates the header from the raster
            if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(format_err("missing whitespace after maxval"));
            }
            let data = &bytes[cur.pos + 1..];
            if maxval < 256 {
                if data.len() < n {
                    return Err(truncated());
                }
                data[..n].iter().map(|&b| u32::from(b)).collect()
            } else {
                if data.len() < 2 * n {
                    return Err(truncated());
                }
                data[..2 * n]
                    .chunks_exact(2)
                    .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]])))
                    .collect()
            }
        }
    };
    if raw.iter().any(|&v| v > maxval) {
        return Err(format_err("sample exceeds maxval"));
    }
    Image::new(width, height, raw.into_iter().map(|v| f64::from(v) * scale).collect())
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_pgm(&bytes, path)
}

/// Clamps to `[0, 255]` and rounds half up.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 255.0) + 0.5).floor() as u8
}

/// Raw `P5` encoding with maxval 255.
pub fn encode_pgm(image: &Image) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(image.data().iter().map(|&v| quantize(v)));
    out
}

pub fn save_pgm(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode(bytes: &[u8]) -> Result<Image> {
        decode_pgm(bytes, Path::new("mem.pgm"))
    }

    #[test]
    fn plain_identity_scale() {
        let img = decode(b"P2\n2 2\n255\n0 128\n255 64\n").unwrap();
        assert_eq!(img.data(), &[0.0, 128.0, 255.0, 64.0]);
    }

    #[test]
    fn plain_rescales_maxval() {
        let img = decode(b"P2\n# made by hand\n2 2\n510\n0 128 255 64").unwrap();
        assert_eq!(img.data(), &[0.0, 64.0, 127.5, 32.0]);
    }

    #[test]
    fn rejects_color() {
        assert!(matches!(
            decode(b"P3\n1 1\n255\n0 0 0\n"),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn raw_sixteen_bit() {
        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0xff, 0xff, 0x00, 0x00]);
        let img = decode(&bytes).unwrap();
        assert_eq!(img.data(), &[255.0, 0.0]);
    }

    #[test]
    fn truncated_raw_is_io_error() {
        assert!(matches!(
            decode(b"P5\n2 2\n255\n\x01\x02"),
            Err(Error::Io { .. })
        ));
        assert!(matches!(decode(b"P2\n2 2\n255\n1 2 3"), Err(Error::Io { .. })));
    }

    #[test]
    fn save_clamps_and_rounds() {
        for (v, byte) in [(300.0, 255u8), (-4.0, 0), (127.5, 128), (127.49, 127)] {
            let img = Image::new(1, 1, vec![v]).unwrap();
            let bytes = encode_pgm(&img);
            assert_eq!(*bytes.last().unwrap(), byte, "value {v}");
        }
    }
}
