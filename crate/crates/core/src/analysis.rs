//! Statistical security battery for image ciphers.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cipher::{decrypt, encrypt, CipherConfig};
use crate::error::{Error, Result};
use crate::identify::{build_library, identify_from_map, FitOptions};
use crate::image::GrayImage;
use crate::keystream::Key;
use crate::maps::{henon, MapSpec};
use crate::rng::SplitMix64;

/// 95% critical value of the χ² distribution with 255 degrees of freedom.
pub const CHI_SQUARE_CRITICAL: f64 = 293.25;
pub const CHI_SQUARE_DOF: f64 = 255.0;
/// Adjacent pairs sampled per direction by default.
pub const DEFAULT_PAIRS: usize = 5000;

pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut h = [0u64; 256];
    for &p in img.pixels() {
        h[p as usize] += 1;
    }
    h
}

/// Shannon entropy of the gray-level distribution, in bits.
pub fn entropy(img: &GrayImage) -> f64 {
    let n = img.len() as f64;
    histogram(img)
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .fold(0.0, |acc, v| acc + v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Goodness of fit of the histogram to the uniform distribution.
pub fn chi_square(img: &GrayImage) -> ChiSquare {
    let expected = img.len() as f64 / 256.0;
    let statistic: f64 = histogram(img)
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    let p_value = if statistic > 0.0 {
        statrs::function::gamma::gamma_ur(CHI_SQUARE_DOF / 2.0, statistic / 2.0)
    } else {
        1.0
    };
    ChiSquare {
        statistic,
        p_value,
        pass: statistic < CHI_SQUARE_CRITICAL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
    Diagonal,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Horizontal, Direction::Vertical, Direction::Diagonal];

    fn offset(self) -> (usize, usize) {
        match self {
            Direction::Horizontal => (0, 1),
            Direction::Vertical => (1, 0),
            Direction::Diagonal => (1, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
            Direction::Diagonal => "diagonal",
        }
    }
}

/// Samples `pairs` anchor pixels uniformly with replacement among those whose
/// neighbor in `dir` exists, returning `(anchor, neighbor)` gray values.
pub fn correlation_pairs(img: &GrayImage, dir: Direction, pairs: usize, seed: u64) -> Result<Vec<(u8, u8)>> {
    let (di, dj) = dir.offset();
    let rows = img.height().saturating_sub(di);
    let cols = img.width().saturating_sub(dj);
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "a {}x{} image has no {} neighbors",
            img.width(),
            img.height(),
            dir.name()
        )));
    }
    if pairs == 0 {
        return Err(Error::invalid("pair count must be positive"));
    }
    let mut rng = SplitMix64::new(seed);
    Ok((0..pairs)
        .map(|_| {
            let a = rng.below(rows * cols);
            let (i, j) = (a / cols, a % cols);
            (img.get(i, j), img.get(i + di, j + dj))
        })
        .collect())
}

/// Pearson correlation of sampled adjacent pixel pairs.
pub fn adjacent_correlation(img: &GrayImage, dir: Direction, pairs: usize, seed: u64) -> Result<f64> {
    pearson(&correlation_pairs(img, dir, pairs, seed)?)
}

fn pearson(pairs: &[(u8, u8)]) -> Result<f64> {
    let n = pairs.len() as f64;
    let ex = pairs.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let ey = pairs.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let (mut cov, mut dx, mut dy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (a, b) = (x as f64 - ex, y as f64 - ey);
        cov += a * b;
        dx += a * a;
        dy += b * b;
    }
    if dx == 0.0 || dy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(cov / (dx.sqrt() * dy.sqrt()))
}

/// NPCR and UACI between two same-sized images, in percent.
pub fn npcr_uaci(a: &GrayImage, b: &GrayImage) -> Result<(f64, f64)> {
    if !a.same_shape(b) {
        return Err(Error::invalid("images differ in size"));
    }
    let (mut changed, mut intensity) = (0u64, 0u64);
    for (&x, &y) in a.pixels().iter().zip(b.pixels()) {
        changed += (x != y) as u64;
        intensity += x.abs_diff(y) as u64;
    }
    let n = a.len() as f64;
    Ok((100.0 * changed as f64 / n, 100.0 * intensity as f64 / (255.0 * n)))
}

/// Peak signal-to-noise ratio in dB; `f64::INFINITY` for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::invalid("images differ in size"));
    }
    let sse: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x.abs_diff(y) as u64;
            d * d
        })
        .sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / a.len() as f64;
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

fn serialize_db<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_infinite() => s.serialize_str("inf"),
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub magnitude: f64,
    /// False when the perturbed key is bit-identical to the original.
    pub effective: bool,
    #[serde(serialize_with = "serialize_db")]
    pub psnr: Option<f64>,
    pub npcr: Option<f64>,
    pub uaci: Option<f64>,
}

/// Perturbs one key coordinate by each magnitude, then reports the PSNR of the
/// wrong-key decryption against the plaintext and the NPCR/UACI between the
/// ciphertexts under the original and perturbed keys.
pub fn key_sensitivity_sweep(
    img: &GrayImage,
    cfg: &CipherConfig,
    magnitudes: &[f64],
    coordinate: usize,
) -> Result<Vec<SensitivityRow>> {
    if coordinate >= cfg.key().dim() {
        return Err(Error::invalid(format!("key has no coordinate {coordinate}")));
    }
    if let Some(m) = magnitudes.iter().find(|m| m.is_nan() || **m < 0.0 || m.is_infinite()) {
        return Err(Error::invalid(format!("perturbation magnitude must be >= 0, got {m}")));
    }
    let cipher = encrypt(img, cfg)?;
    magnitudes
        .par_iter()
        .map(|&m| {
            let key = cfg.key().perturbed(coordinate, m)?;
            if m > 0.0 && key == *cfg.key() {
                return Ok(SensitivityRow {
                    magnitude: m,
                    effective: false,
                    psnr: None,
                    npcr: None,
                    uaci: None,
                });
            }
            let wrong = cfg.with_key(key)?;
            let plain_guess = decrypt(&cipher, &wrong)?;
            let other = encrypt(img, &wrong)?;
            let (npcr, uaci) = npcr_uaci(&cipher, &other)?;
            Ok(SensitivityRow {
                magnitude: m,
                effective: true,
                psnr: Some(psnr(img, &plain_guess)?),
                npcr: Some(npcr),
                uaci: Some(uaci),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub avg: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count() as f64;
        Self {
            min: values.clone().fold(f64::INFINITY, f64::min),
            max: values.clone().fold(f64::NEG_INFINITY, f64::max),
            avg: values.sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    /// Row-major index of the flipped pixel.
    pub pixel: usize,
    pub npcr: f64,
    pub uaci: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferentialReport {
    pub seed: u64,
    pub trials: Vec<Trial>,
    pub npcr: Summary,
    pub uaci: Summary,
}

/// Flips the least significant bit of one random pixel per trial and compares
/// the two ciphertexts. Trial `k` draws its pixel from `SplitMix64(seed + k)`.
pub fn differential_attack_trials(
    img: &GrayImage,
    cfg: &CipherConfig,
    trials: usize,
    seed: u64,
) -> Result<DifferentialReport> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let base = encrypt(img, cfg)?;
    let results: Vec<Trial> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let pixel = SplitMix64::new(seed.wrapping_add(k)).below(img.len());
            let mut modified = img.clone();
            modified.pixels_mut()[pixel] ^= 1;
            let (npcr, uaci) = npcr_uaci(&base, &encrypt(&modified, cfg)?)?;
            Ok(Trial { pixel, npcr, uaci })
        })
        .collect::<Result<_>>()?;
    Ok(DifferentialReport {
        seed,
        npcr: Summary::of(results.iter().map(|t| t.npcr)),
        uaci: Summary::of(results.iter().map(|t| t.uaci)),
        trials: results,
    })
}

/// Training setup for the implicit-key experiment.
#[derive(Debug, Clone)]
pub struct TrainingSetup {
    pub truth: MapSpec,
    pub x0: Vec<f64>,
    pub samples: usize,
    pub max_degree: u32,
    pub options: FitOptions,
    pub rounds: usize,
}

impl Default for TrainingSetup {
    fn default() -> Self {
        Self {
            truth: henon(1.4, 0.3).expect("finite parameters"),
            x0: vec![0.1, 0.1],
            samples: 10_000,
            max_degree: 3,
            options: FitOptions::default(),
            rounds: crate::cipher::DEFAULT_ROUNDS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImplicitKeyOutcome {
    pub npcr: f64,
    pub uaci: f64,
    pub map_clean: MapSpec,
    pub map_noisy: MapSpec,
}

/// Identifies one map from clean data and one from data with noise level
/// `sigma`, encrypts `img` with both under the same key, and compares the
/// ciphertexts.
pub fn implicit_key_experiment(
    img: &GrayImage,
    key: &Key,
    sigma: f64,
    seed: u64,
    setup: &TrainingSetup,
) -> Result<ImplicitKeyOutcome> {
    let lib = build_library(setup.truth.dim(), setup.max_degree, false)?;
    let fit = |noise| identify_from_map(&setup.truth, &setup.x0, setup.samples, noise, &lib, &setup.options);
    let clean = fit(None)?.map;
    let noisy = fit(Some((sigma, seed)))?.map;
    let c1 = encrypt(img, &CipherConfig::new(clean.clone(), key.clone(), setup.rounds)?)?;
    let c2 = encrypt(img, &CipherConfig::new(noisy.clone(), key.clone(), setup.rounds)?)?;
    let (npcr, uaci) = npcr_uaci(&c1, &c2)?;
    Ok(ImplicitKeyOutcome {
        npcr,
        uaci,
        map_clean: clean,
        map_noisy: noisy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlations {
    pub horizontal: Option<f64>,
    pub vertical: Option<f64>,
    pub diagonal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageStats {
    pub width: usize,
    pub height: usize,
    pub entropy: f64,
    pub chi_square: ChiSquare,
    /// `None` where the correlation is undefined (constant image).
    pub correlation: Correlations,
}

pub fn image_stats(img: &GrayImage, pairs: usize, seed: u64) -> Result<ImageStats> {
    let corr = |d| match adjacent_correlation(img, d, pairs, seed) {
        Ok(r) => Ok(Some(r)),
        Err(Error::UndefinedCorrelation) => Ok(None),
        Err(Error::InvalidParameter(_)) if pairs > 0 => Ok(None),
        Err(e) => Err(e),
    };
    Ok(ImageStats {
        width: img.width(),
        height: img.height(),
        entropy: entropy(img),
        chi_square: chi_square(img),
        correlation: Correlations {
            horizontal: corr(Direction::Horizontal)?,
            vertical: corr(Direction::Vertical)?,
            diagonal: corr(Direction::Diagonal)?,
        },
    })
}

/// Summary of one analysis run. Pairwise metrics are present only when both
/// a plaintext and a ciphertext were supplied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    pub seed: u64,
    pub pairs: usize,
    pub plain: Option<ImageStats>,
    pub cipher: Option<ImageStats>,
    pub npcr: Option<f64>,
    pub uaci: Option<f64>,
    #[serde(serialize_with = "serialize_db")]
    pub psnr: Option<f64>,
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

pub fn security_report(
    plain: Option<&GrayImage>,
    cipher: Option<&GrayImage>,
    pairs: usize,
    seed: u64,
) -> Result<SecurityReport> {
    let stats = |img: Option<&GrayImage>| img.map(|i| image_stats(i, pairs, seed)).transpose();
    let (npcr, uaci, db) = match (plain, cipher) {
        (Some(p), Some(c)) => {
            let (n, u) = npcr_uaci(p, c)?;
            (Some(round4(n)), Some(round4(u)), Some(psnr(p, c)?))
        }
        _ => (None, None, None),
    };
    Ok(SecurityReport {
        seed,
        pairs,
        plain: stats(plain)?,
        cipher: stats(cipher)?,
        npcr,
        uaci,
        psnr: db,
    })
}

pub fn histogram_csv(h: &[u64; 256]) -> String {
    let mut s = String::from("level,count\n");
    for (level, count) in h.iter().enumerate() {
        s.push_str(&format!("{level},{count}\n"));
    }
    s
}

pub fn pairs_csv(pairs: &[(u8, u8)]) -> String {
    let mut s = String::from("x,y\n");
    for (x, y) in pairs {
        s.push_str(&format!("{x},{y}\n"));
    }
    s
}
