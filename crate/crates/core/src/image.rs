//! 8-bit grayscale images and binary PGM (P5) I/O.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale image, `height` rows of `width` pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::invalid(format!(
                "{} pixels do not fill {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                pixels.push(f(i, j));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Pixel at row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.pixels[i * self.width + j]
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

pub fn write_pgm(img: &GrayImage, mut w: impl Write) -> io::Result<()> {
    write!(w, "P5\n{} {}\n255\n", img.width, img.height)?;
    w.write_all(&img.pixels)
}

pub fn to_pgm_bytes(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.len() + 20);
    write_pgm(img, &mut out).expect("writing to a Vec cannot fail");
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    /// Skips whitespace and `#` comments; requires at least one whitespace byte.
    fn skip_separator(&mut self) -> Result<()> {
        let start = self.pos;
        loop {
            match self.data.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while self.data.get(self.pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                        self.pos += 1;
                    }
                }
                Some(_) if self.pos == start => return Err(self.err("expected whitespace")),
                None => return Err(self.err("unexpected end of header")),
                Some(_) => return Ok(()),
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse {
                offset: start,
                message: format!("{what} out of range"),
            })
    }
}

/// Parses a binary PGM with maximum value 255. Errors carry the byte offset.
pub fn read_pgm(data: &[u8]) -> Result<GrayImage> {
    let mut c = Cursor { data, pos: 0 };
    if !data.starts_with(b"P5") {
        return Err(c.err("missing P5 magic"));
    }
    c.pos = 2;
    c.skip_separator()?;
    let width = c.number("width")?;
    c.skip_separator()?;
    let height = c.number("height")?;
    c.skip_separator()?;
    let maxval_at = c.pos;
    let maxval = c.number("maximum value")?;
    if maxval != 255 {
        return Err(Error::Parse {
            offset: maxval_at,
            message: format!("maximum value {maxval} is not supported (only 255)"),
        });
    }
    match data.get(c.pos) {
        Some(b) if b.is_ascii_whitespace() => c.pos += 1,
        _ => return Err(c.err("expected a single whitespace byte after the maximum value")),
    }
    if width == 0 || height == 0 {
        return Err(c.err("image dimensions must be positive"));
    }
    let need = width
        .checked_mul(height)
        .ok_or_else(|| c.err("image dimensions overflow"))?;
    let raster = &data[c.pos..];
    if raster.len() < need {
        return Err(Error::Parse {
            offset: data.len(),
            message: format!("raster truncated: {} of {need} bytes", raster.len()),
        });
    }
    if raster.len() > need {
        return Err(Error::Parse {
            offset: c.pos + need,
            message: format!("{} trailing bytes after raster", raster.len() - need),
        });
    }
    GrayImage::new(width, height, raster.to_vec())
}
