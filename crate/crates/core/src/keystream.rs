//! Keystream layout: permutation keys and quantized diffusion streams read
//! from one chaotic orbit.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::maps::MapSpec;

/// Iterates discarded before the first keystream state.
pub const BURN_IN: usize = 500;

/// The secret key: the initial state of the map.
#[derive(Debug, Clone, PartialEq)]
pub struct Key(Vec<f64>);

impl Key {
    pub fn new(initial_state: Vec<f64>) -> Result<Self> {
        if initial_state.is_empty() {
            return Err(Error::invalid("key must have at least one coordinate"));
        }
        if initial_state.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("key coordinates must be finite"));
        }
        Ok(Self(initial_state))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The key with `delta` added to one coordinate.
    pub fn perturbed(&self, coordinate: usize, delta: f64) -> Result<Key> {
        let mut v = self.0.clone();
        let slot = v
            .get_mut(coordinate)
            .ok_or_else(|| Error::invalid(format!("key has no coordinate {coordinate}")))?;
        *slot += delta;
        Key::new(v)
    }
}

impl fmt::Display for Key {
    /// Comma-separated shortest round-trip decimals, e.g. `0.2,0.3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Key {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .trim()
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("invalid key component `{}`", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Key::new(values)
    }
}

/// `floor(frac(|xi|) * 256)`.
pub fn quantize(xi: f64) -> Result<u8> {
    if !xi.is_finite() {
        return Err(Error::invalid(format!("cannot quantize {xi}")));
    }
    Ok(quantize_unchecked(xi))
}

#[inline]
fn quantize_unchecked(xi: f64) -> u8 {
    let a = xi.abs();
    let frac = a - a.floor();
    // frac < 1, so the product is < 256; `min` guards the rounding edge
    ((frac * 256.0).floor() as u32).min(255) as u8
}

/// Stable ascending argsort (0-based). Ties keep their original order.
pub fn permutation_indices(keys: &[f64]) -> Result<Vec<usize>> {
    if keys.is_empty() {
        return Err(Error::invalid("cannot sort an empty key list"));
    }
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    Ok(idx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeystreamLayout {
    /// Row permutation keys (first coordinate of the first `M` states).
    pub rows: Vec<f64>,
    /// Column permutation keys (second coordinate of the next `N` states).
    pub cols: Vec<f64>,
    /// Quantized diffusion streams, one per round, each of length `M * N`.
    pub diffusion: Vec<Vec<u8>>,
    pub burn_in: usize,
    /// Total iterates consumed, burn-in included.
    pub length: usize,
}

impl KeystreamLayout {
    /// Writes the diffusion streams back to back in round order.
    pub fn write_dump(&self, mut w: impl Write) -> io::Result<()> {
        for q in &self.diffusion {
            w.write_all(q)?;
        }
        Ok(())
    }
}

/// Reads the keystream for an `m x n` image and `rounds` diffusion passes.
///
/// The orbit from `key` runs for `BURN_IN + m + n + rounds * m * n` iterates.
/// After the burn-in, states are consumed in disjoint segments: `m` states for
/// the row keys, `n` for the column keys, then `m * n` per diffusion round.
/// One-dimensional maps use their only coordinate for both row and column keys.
pub fn generate_layout(map: &MapSpec, key: &Key, m: usize, n: usize, rounds: usize) -> Result<KeystreamLayout> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("image dimensions must be positive"));
    }
    if rounds == 0 {
        return Err(Error::invalid("at least one diffusion round is required"));
    }
    if key.dim() != map.dim() {
        return Err(Error::invalid(format!(
            "key has {} coordinates, map has dimension {}",
            key.dim(),
            map.dim()
        )));
    }
    let p = m * n;
    let length = BURN_IN + m + n + rounds * p;
    let col_coord = if map.dim() >= 2 { 1 } else { 0 };
    let mut rows = Vec::with_capacity(m);
    let mut cols = Vec::with_capacity(n);
    let mut diffusion: Vec<Vec<u8>> = (0..rounds).map(|_| Vec::with_capacity(p)).collect();

    map.for_each_state(key.values(), length, |step, s| {
        if step <= BURN_IN {
            return;
        }
        let k = step - BURN_IN - 1;
        if k < m {
            rows.push(s[0]);
        } else if k < m + n {
            cols.push(s[col_coord]);
        } else {
            let q = k - m - n;
            diffusion[q / p].push(quantize_unchecked(s[0]));
        }
    })
    .map_err(|e| Error::KeyUnusable(Box::new(e)))?;

    Ok(KeystreamLayout {
        rows,
        cols,
        diffusion,
        burn_in: BURN_IN,
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{henon, logistic3d};
    use proptest::prelude::*;

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.2).unwrap(), 51);
        assert_eq!(quantize(-1.3).unwrap(), 76);
        assert_eq!(quantize(0.0).unwrap(), 0);
        assert_eq!(quantize(0.999999999).unwrap(), 255);
        assert!(quantize(f64::NAN).is_err());
        assert!(quantize(f64::INFINITY).is_err());
    }

    #[test]
    fn argsort_examples() {
        let one_based = |v: Vec<usize>| v.into_iter().map(|i| i + 1).collect::<Vec<_>>();
        assert_eq!(one_based(permutation_indices(&[0.3, 0.1, 0.2]).unwrap()), vec![2, 3, 1]);
        assert_eq!(permutation_indices(&[1.0, 2.0, 3.0]).unwrap(), vec![0, 1, 2]);
        assert_eq!(permutation_indices(&[5.0; 4]).unwrap(), vec![0, 1, 2, 3]);
        assert!(permutation_indices(&[]).is_err());
    }

    #[test]
    fn key_parse_and_display() {
        let k: Key = "0.2, 0.3".parse().unwrap();
        assert_eq!(k.values(), &[0.2, 0.3]);
        assert_eq!(k.to_string(), "0.2,0.3");
        let fine: Key = "0.20000000000000004,0.3".parse().unwrap();
        assert_ne!(fine.values()[0], 0.2);
        assert_eq!(fine.to_string().parse::<Key>().unwrap(), fine);
        assert!("0.2,abc".parse::<Key>().is_err());
        assert!("inf,0".parse::<Key>().is_err());
    }

    #[test]
    fn layout_matches_direct_iteration() {
        let map = henon(1.4, 0.3).unwrap();
        let key = Key::new(vec![0.1, 0.1]).unwrap();
        let lay = generate_layout(&map, &key, 1, 1, 1).unwrap();
        assert_eq!(lay.length, 503);
        // independent oracle: plain loop over the recurrence
        let (mut x, mut y) = (0.1f64, 0.1f64);
        let mut states = Vec::new();
        for _ in 0..503 {
            // same summation order as the canonical term order: 1, x^2, y
            let nx = 1.0 - 1.4 * (x * x) + y;
            let ny = 0.3 * x;
            x = nx;
            y = ny;
            states.push((x, y));
        }
        assert_eq!(lay.rows, vec![states[500].0]);
        assert_eq!(lay.cols, vec![states[501].1]);
        let frac = states[502].0.abs().fract();
        assert_eq!(lay.diffusion, vec![vec![(frac * 256.0).floor() as u8]]);
    }

    #[test]
    fn layout_is_deterministic_and_rounds_extend() {
        let map = henon(1.4, 0.3).unwrap();
        let key = Key::new(vec![0.2, 0.3]).unwrap();
        let a = generate_layout(&map, &key, 8, 5, 2).unwrap();
        let b = generate_layout(&map, &key, 8, 5, 2).unwrap();
        assert_eq!(a, b);
        let c = generate_layout(&map, &key, 8, 5, 4).unwrap();
        assert_eq!(a.rows, c.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(a.diffusion[..], c.diffusion[..2]);
        assert_eq!(c.diffusion.len(), 4);
        assert!(c.diffusion.iter().all(|q| q.len() == 40));
    }

    #[test]
    fn layout_errors() {
        let map = henon(1.4, 0.3).unwrap();
        let key = Key::new(vec![0.2, 0.3]).unwrap();
        assert!(generate_layout(&map, &key, 0, 5, 2).is_err());
        assert!(generate_layout(&map, &key, 5, 5, 0).is_err());
        assert!(generate_layout(&logistic3d(), &key, 5, 5, 2).is_err());
        let bad = Key::new(vec![10.0, 10.0]).unwrap();
        assert!(matches!(
            generate_layout(&map, &bad, 4, 4, 2),
            Err(Error::KeyUnusable(_))
        ));
    }

    #[test]
    fn one_dimensional_map_uses_single_coordinate() {
        let m = crate::model::parse_model("# map dim=1 vars=x\nx' = 3.99*x - 3.99*x^2\n").unwrap();
        let key = Key::new(vec![0.3]).unwrap();
        let lay = generate_layout(&m, &key, 3, 2, 2).unwrap();
        let t = m.iterate(&[0.3], 5, BURN_IN).unwrap();
        assert_eq!(lay.rows, t.as_flat()[..3]);
        assert_eq!(lay.cols, t.as_flat()[3..5]);
    }

    #[test]
    fn tiny_key_difference_decorrelates_streams() {
        let map = henon(1.4, 0.3).unwrap();
        let k1 = Key::new(vec![0.1, 0.1]).unwrap();
        let equal_bytes = |delta: f64| {
            let k2 = k1.perturbed(0, delta).unwrap();
            assert_ne!(k1, k2);
            let a = generate_layout(&map, &k1, 256, 256, 1).unwrap();
            let b = generate_layout(&map, &k2, 256, 256, 1).unwrap();
            a.diffusion[0]
                .iter()
                .zip(&b.diffusion[0])
                .filter(|(x, y)| x == y)
                .count()
        };
        // x0 + 1e-16 differs from x0, but the change is rounded away in the
        // first iterates (1 + y - a x^2 absorbs it), so the orbit is unchanged
        assert_eq!(equal_bytes(1e-16), 65536);
        let same = equal_bytes(1e-15);
        assert!((same as f64) < 0.01 * 65536.0, "{same} equal bytes");
    }

    #[test]
    fn byte_coverage() {
        // The x marginal of the attractor is far from uniform, so quantized
        // bytes are too (roughly 0.5x..3.3x the uniform count); the chained
        // diffusion is what flattens the ciphertext histogram.
        let map = henon(1.4, 0.3).unwrap();
        let key = Key::new(vec![0.2, 0.3]).unwrap();
        let lay = generate_layout(&map, &key, 1000, 1000, 1).unwrap();
        let mut counts = [0usize; 256];
        for &b in &lay.diffusion[0] {
            counts[b as usize] += 1;
        }
        let expected = 1e6 / 256.0;
        let (lo, hi) = (*counts.iter().min().unwrap(), *counts.iter().max().unwrap());
        assert!(lo as f64 > 0.3 * expected && (hi as f64) < 4.0 * expected, "{lo}..{hi}");

        let flat = crate::cipher::diffuse_forward(&vec![0u8; 1_000_000], &lay.diffusion[0], 0).unwrap();
        let mut counts = [0usize; 256];
        for &b in &flat {
            counts[b as usize] += 1;
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 293.25, "chi2 {chi2}");
    }

    #[test]
    fn dump_concatenates_rounds() {
        let lay = KeystreamLayout {
            rows: vec![0.0],
            cols: vec![0.0],
            diffusion: vec![vec![1, 2], vec![3, 4]],
            burn_in: BURN_IN,
            length: 0,
        };
        let mut buf = Vec::new();
        lay.write_dump(&mut buf).unwrap();
        assert_eq!(buf, vec![1, 2, 3, 4]);
    }

    proptest! {
        #[test]
        fn argsort_is_bijection(keys in prop::collection::vec(-1e6f64..1e6, 1..200)) {
            let idx = permutation_indices(&keys).unwrap();
            let mut seen = vec![false; keys.len()];
            for &i in &idx {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
            for w in idx.windows(2) {
                prop_assert!(keys[w[0]] <= keys[w[1]]);
            }
        }

        #[test]
        fn quantize_integer_shift_invariant(x in -1e6f64..1e6, k in 0u32..1000) {
            let shifted = x.abs() + k as f64;
            // only exact shifts keep the fractional part bit-identical
            prop_assume!(shifted - k as f64 == x.abs());
            prop_assert_eq!(quantize(x).unwrap(), quantize(shifted).unwrap());
        }
    }
}
