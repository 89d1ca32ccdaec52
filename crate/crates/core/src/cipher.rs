//! Permutation-diffusion cipher for grayscale images.
//!
//! Encryption scrambles rows and columns by the argsort of the row and column
//! keys, flattens row-major, and applies alternating diffusion passes with
//! modulo-256 addition: forward with `Q_1`, backward with `Q_2`, forward with
//! `Q_3`, and so on. Every forward pass starts from `iv = 0`.
//!
//! The inverse passes subtract the chaining value that the forward passes
//! actually added (the previous *output* byte), which makes decryption exact.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::keystream::{generate_layout, permutation_indices, Key};
use crate::maps::MapSpec;

pub const DEFAULT_ROUNDS: usize = 4;

#[derive(Debug, Clone)]
pub struct CipherConfig {
    map: MapSpec,
    key: Key,
    rounds: usize,
}

impl CipherConfig {
    /// `rounds` must be even and at least 2 so the last pass runs backward.
    pub fn new(map: MapSpec, key: Key, rounds: usize) -> Result<Self> {
        if rounds < 2 || !rounds.is_multiple_of(2) {
            return Err(Error::invalid(format!("rounds must be even and >= 2, got {rounds}")));
        }
        if key.dim() != map.dim() {
            return Err(Error::invalid(format!(
                "key has {} coordinates, map has dimension {}",
                key.dim(),
                map.dim()
            )));
        }
        Ok(Self { map, key, rounds })
    }

    pub fn map(&self) -> &MapSpec {
        &self.map
    }

    pub fn key(&self) -> &Key {
        &self.key
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn with_key(&self, key: Key) -> Result<Self> {
        Self::new(self.map.clone(), key, self.rounds)
    }

    pub fn with_map(&self, map: MapSpec) -> Result<Self> {
        Self::new(map, self.key.clone(), self.rounds)
    }
}

fn check_permutation(idx: &[usize], n: usize, what: &str) -> Result<()> {
    if idx.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "{what} index has length {}, expected {n}",
            idx.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in idx {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidPermutation(format!("{what} index is not a bijection")));
        }
    }
    Ok(())
}

/// `S(i, j) = I(row_idx[i], col_idx[j])` (0-based indices).
pub fn scramble(img: &GrayImage, row_idx: &[usize], col_idx: &[usize]) -> Result<GrayImage> {
    check_permutation(row_idx, img.height(), "row")?;
    check_permutation(col_idx, img.width(), "column")?;
    GrayImage::from_fn(img.width(), img.height(), |i, j| img.get(row_idx[i], col_idx[j]))
}

/// Inverse of [`scramble`]: `I(row_idx[i], col_idx[j]) = S(i, j)`.
pub fn unscramble(s: &GrayImage, row_idx: &[usize], col_idx: &[usize]) -> Result<GrayImage> {
    check_permutation(row_idx, s.height(), "row")?;
    check_permutation(col_idx, s.width(), "column")?;
    let w = s.width();
    let mut out = vec![0u8; s.len()];
    for (i, &ri) in row_idx.iter().enumerate() {
        for (j, &cj) in col_idx.iter().enumerate() {
            out[ri * w + cj] = s.get(i, j);
        }
    }
    GrayImage::new(w, s.height(), out)
}

fn check_lengths(a: &[u8], q: &[u8]) -> Result<()> {
    if a.len() != q.len() {
        return Err(Error::invalid(format!(
            "data length {} differs from keystream length {}",
            a.len(),
            q.len()
        )));
    }
    Ok(())
}

/// `t[i] = p[i] + q[i] + t[i-1]` (mod 256) with `t[-1] = iv`.
pub fn diffuse_forward(p: &[u8], q: &[u8], iv: u8) -> Result<Vec<u8>> {
    check_lengths(p, q)?;
    let mut prev = iv;
    Ok(p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            prev = a.wrapping_add(b).wrapping_add(prev);
            prev
        })
        .collect())
}

/// Exact inverse of [`diffuse_forward`].
pub fn undiffuse_forward(t: &[u8], q: &[u8], iv: u8) -> Result<Vec<u8>> {
    check_lengths(t, q)?;
    let mut prev = iv;
    Ok(t.iter()
        .zip(q)
        .map(|(&c, &b)| {
            let p = c.wrapping_sub(b).wrapping_sub(prev);
            prev = c;
            p
        })
        .collect())
}

/// `t2[i] = t[i] + q[i] + t2[i+1]` (mod 256) from the last element down, with
/// `t2[P] = 0`.
pub fn diffuse_backward(t: &[u8], q: &[u8]) -> Result<Vec<u8>> {
    check_lengths(t, q)?;
    let mut out = vec![0u8; t.len()];
    let mut next = 0u8;
    for i in (0..t.len()).rev() {
        next = t[i].wrapping_add(q[i]).wrapping_add(next);
        out[i] = next;
    }
    Ok(out)
}

/// Exact inverse of [`diffuse_backward`]: `t[i] = c[i] - q[i] - c[i+1]`.
pub fn undiffuse_backward(c: &[u8], q: &[u8]) -> Result<Vec<u8>> {
    check_lengths(c, q)?;
    let n = c.len();
    Ok((0..n)
        .map(|i| {
            let follow = if i + 1 < n { c[i + 1] } else { 0 };
            c[i].wrapping_sub(q[i]).wrapping_sub(follow)
        })
        .collect())
}

pub fn encrypt(img: &GrayImage, cfg: &CipherConfig) -> Result<GrayImage> {
    let (m, n) = (img.height(), img.width());
    let layout = generate_layout(&cfg.map, &cfg.key, m, n, cfg.rounds)?;
    let rows = permutation_indices(&layout.rows)?;
    let cols = permutation_indices(&layout.cols)?;
    let mut data = scramble(img, &rows, &cols)?.into_pixels();
    for (round, q) in layout.diffusion.iter().enumerate() {
        data = if round % 2 == 0 {
            diffuse_forward(&data, q, 0)?
        } else {
            diffuse_backward(&data, q)?
        };
    }
    GrayImage::new(n, m, data)
}

pub fn decrypt(cimg: &GrayImage, cfg: &CipherConfig) -> Result<GrayImage> {
    let (m, n) = (cimg.height(), cimg.width());
    let layout = generate_layout(&cfg.map, &cfg.key, m, n, cfg.rounds)?;
    let rows = permutation_indices(&layout.rows)?;
    let cols = permutation_indices(&layout.cols)?;
    let mut data = cimg.pixels().to_vec();
    for (round, q) in layout.diffusion.iter().enumerate().rev() {
        data = if round % 2 == 0 {
            undiffuse_forward(&data, q, 0)?
        } else {
            undiffuse_backward(&data, q)?
        };
    }
    unscramble(&GrayImage::new(n, m, data)?, &rows, &cols)
}
