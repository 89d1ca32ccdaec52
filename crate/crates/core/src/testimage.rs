//! Deterministic synthetic "lunar surface" test image.
//!
//! Stands in for a natural 256x256 grayscale photograph: smooth multi-octave
//! terrain, cratered with shaded rims, plus fine sensor grain. Plaintext
//! statistics land near those of real surface imagery (entropy around 6.7
//! bits, strong neighbor correlation).

use crate::image::GrayImage;
use crate::rng::{Gaussian, SplitMix64};

pub const STANDIN_SEED: u64 = 0x4d4f_4f4e;

/// Bilinear value noise on a `cells x cells` lattice over the unit square.
fn value_noise(rng: &mut SplitMix64, cells: usize) -> impl Fn(f64, f64) -> f64 {
    let n = cells + 1;
    let grid: Vec<f64> = (0..n * n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
    move |u: f64, v: f64| {
        let (x, y) = (u * cells as f64, v * cells as f64);
        let (i, j) = ((x as usize).min(cells - 1), (y as usize).min(cells - 1));
        let (fx, fy) = (x - i as f64, y - j as f64);
        // smoothstep weights avoid visible lattice creases
        let (sx, sy) = (fx * fx * (3.0 - 2.0 * fx), fy * fy * (3.0 - 2.0 * fy));
        let g = |a: usize, b: usize| grid[b * n + a];
        let top = g(i, j) * (1.0 - sx) + g(i + 1, j) * sx;
        let bot = g(i, j + 1) * (1.0 - sx) + g(i + 1, j + 1) * sx;
        top * (1.0 - sy) + bot * sy
    }
}

type Field = Box<dyn Fn(f64, f64) -> f64>;

struct Crater {
    cx: f64,
    cy: f64,
    r: f64,
    depth: f64,
}

pub fn moon_standin(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = SplitMix64::new(seed);
    let octaves: Vec<(f64, Field)> = [(4, 1.0), (8, 0.5), (16, 0.25), (32, 0.12)]
        .into_iter()
        .map(|(cells, amp)| (amp, Box::new(value_noise(&mut rng, cells)) as Field))
        .collect();
    let craters: Vec<Crater> = (0..60)
        .map(|_| {
            let r = 0.015 + 0.11 * rng.next_f64().powi(3);
            Crater {
                cx: rng.next_f64(),
                cy: rng.next_f64(),
                r,
                depth: 0.6 + 0.8 * rng.next_f64(),
            }
        })
        .collect();
    let mut grain = Gaussian::new(seed ^ 0x9e37_79b9);

    let mut field = vec![0.0f64; width * height];
    for i in 0..height {
        for j in 0..width {
            let (u, v) = (j as f64 / width as f64, i as f64 / height as f64);
            let mut h: f64 = octaves.iter().map(|(a, f)| a * f(u, v)).sum();
            for c in &craters {
                let (dx, dy) = (u - c.cx, v - c.cy);
                let d = (dx * dx + dy * dy).sqrt() / c.r;
                if d < 1.0 {
                    // bowl, darker on the side facing away from the light
                    h -= c.depth * (1.0 - d * d) * (0.8 + 0.6 * (dx + dy) / (c.r * 2.0));
                } else if d < 1.35 {
                    let t = (d - 1.0) / 0.35;
                    h += 0.5 * c.depth * (1.0 - t) * (1.0 - t);
                }
            }
            field[i * width + j] = h;
        }
    }
    let n = field.len() as f64;
    let mean = field.iter().sum::<f64>() / n;
    let sd = (field.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n).sqrt();
    let pixels = field
        .iter()
        .map(|h| {
            let g = 118.0 + 26.0 * (h - mean) / sd + 3.0 * grain.sample();
            g.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(width, height, pixels).expect("consistent dimensions")
}

/// The bundled 256x256 stand-in.
pub fn default_standin() -> GrayImage {
    moon_standin(256, 256, STANDIN_SEED)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{adjacent_correlation, entropy, Direction};

    #[test]
    fn statistics_resemble_natural_image() {
        let img = default_standin();
        let e = entropy(&img);
        assert!((6.4..7.0).contains(&e), "entropy {e}");
        let r = adjacent_correlation(&img, Direction::Horizontal, 5000, 1).unwrap();
        assert!(r > 0.8, "correlation {r}");
    }

    #[test]
    fn deterministic() {
        assert_eq!(moon_standin(40, 30, 5), moon_standin(40, 30, 5));
    }
}
