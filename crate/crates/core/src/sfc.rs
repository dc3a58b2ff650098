//! Cubes-preserving space-filling curve `[0,1] -> [0,1]^n`.
//!
//! The curve is the n-dimensional Hilbert curve in Skilling's transposed
//! formulation. It starts at the origin and ends at `(1, 0, ..., 0)`. For
//! `n = 2` the level-1 cells are visited in the order
//! `(0,0), (0,1), (1,1), (1,0)` (cell coordinates `(x0, x1)`); for `n = 1`
//! the curve is the identity.
//!
//! Level-`n·s` dyadic intervals map onto level-`s` dyadic cubes bijectively,
//! so [`interval_to_cube`] and [`cube_preimage`] are exact inverse codecs.
//! [`curve_point`] interpolates linearly between exact curve vertices (the
//! corners where the curve enters each level-`d` cell), which keeps every
//! level-`n·s` interval inside its cube for all `s ≤ d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gapset::HolderWitness;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SfcError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("curve parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("interval level {level} is not a multiple of n = {n}")]
    LevelNotDivisible { level: u32, n: usize },
    #[error("level {level} exceeds the cap {max} for n = {n}")]
    LevelTooDeep { level: u32, max: u32, n: usize },
    #[error("index or corner outside the level-{0} grid")]
    OutOfGrid(u32),
}

/// Bits available for interval indices.
pub const INDEX_BITS: u32 = 62;

/// Deepest cube level whose interval indices fit in [`INDEX_BITS`].
pub fn max_level(n: usize) -> u32 {
    INDEX_BITS / n as u32
}

/// `K = 2^{2n} n^{n/2}` of the `D^n` modulus.
pub fn dn_bound(n: usize) -> f64 {
    let n = n as f64;
    2f64.powf(2.0 * n) * n.powf(n / 2.0)
}

/// Closed dyadic interval `[index, index + 1] · 2^{-level}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub fn endpoints(&self) -> (f64, f64) {
        let w = 2f64.powi(-(self.level as i32));
        (self.index as f64 * w, (self.index + 1) as f64 * w)
    }
}

/// Closed dyadic cube `corner · 2^{-level} + [0, 2^{-level}]^n`, corner in grid units.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub corner: Vec<u64>,
}

impl DyadicCube {
    pub fn n(&self) -> usize {
        self.corner.len()
    }

    pub fn side(&self) -> f64 {
        2f64.powi(-(self.level as i32))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let w = self.side();
        self.corner
            .iter()
            .zip(x)
            .all(|(&c, &xi)| xi >= c as f64 * w && xi <= (c + 1) as f64 * w)
    }

    /// `self ⊆ other`.
    pub fn within(&self, other: &DyadicCube) -> bool {
        self.level >= other.level
            && self
                .corner
                .iter()
                .zip(&other.corner)
                .all(|(&c, &o)| c >> (self.level - other.level) == o)
    }

    /// Shares at least a face with `other` (same level): corners differ by one
    /// in exactly one coordinate, or coincide.
    pub fn face_adjacent(&self, other: &DyadicCube) -> bool {
        let diffs: Vec<u64> = self
            .corner
            .iter()
            .zip(&other.corner)
            .map(|(&a, &b)| a.abs_diff(b))
            .collect();
        diffs.iter().all(|&d| d <= 1) && diffs.iter().filter(|&&d| d == 1).count() <= 1
    }
}

// Skilling, "Programming the Hilbert curve" (2004): transposed index <-> axes.
fn transpose_to_axes(x: &mut [u128], bits: u32) {
    let n = x.len();
    if bits == 0 {
        return;
    }
    let big = 2u128 << (bits - 1);
    let t = x[n - 1] >> 1;
    for i in (1..n).rev() {
        x[i] ^= x[i - 1];
    }
    x[0] ^= t;
    let mut q = 2u128;
    while q != big {
        let p = q - 1;
        for i in (0..n).rev() {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q <<= 1;
    }
}

fn axes_to_transpose(x: &mut [u128], bits: u32) {
    let n = x.len();
    if bits == 0 {
        return;
    }
    let m = 1u128 << (bits - 1);
    let mut q = m;
    while q > 1 {
        let p = q - 1;
        for i in 0..n {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q >>= 1;
    }
    for i in 1..n {
        x[i] ^= x[i - 1];
    }
    let mut t = 0;
    let mut q = m;
    while q > 1 {
        if x[n - 1] & q != 0 {
            t ^= q - 1;
        }
        q >>= 1;
    }
    for xi in x.iter_mut() {
        *xi ^= t;
    }
}

/// Cell coordinates (grid units at `bits` levels) of Hilbert index `h`.
fn decode(n: usize, bits: u32, h: u128) -> Vec<u128> {
    let mut x = vec![0u128; n];
    for lvl in 0..bits {
        for (i, xi) in x.iter_mut().enumerate() {
            let shift = (bits - 1 - lvl) as usize * n + (n - 1 - i);
            *xi |= ((h >> shift) & 1) << (bits - 1 - lvl);
        }
    }
    transpose_to_axes(&mut x, bits);
    x
}

fn encode(bits: u32, coords: &[u128]) -> u128 {
    let n = coords.len();
    let mut x = coords.to_vec();
    axes_to_transpose(&mut x, bits);
    let mut h = 0u128;
    for lvl in 0..bits {
        for (i, xi) in x.iter().enumerate() {
            let bit = (xi >> (bits - 1 - lvl)) & 1;
            h |= bit << ((bits - 1 - lvl) as usize * n + (n - 1 - i));
        }
    }
    h
}

fn check_n(n: usize) -> Result<(), SfcError> {
    if n == 0 {
        Err(SfcError::ZeroDimension)
    } else {
        Ok(())
    }
}

fn check_level(n: usize, level: u32) -> Result<(), SfcError> {
    let max = max_level(n);
    if level > max {
        Err(SfcError::LevelTooDeep { level, max, n })
    } else {
        Ok(())
    }
}

/// The level-`s` cube containing the image of a level-`n·s` interval.
pub fn interval_to_cube(n: usize, alpha: DyadicInterval) -> Result<DyadicCube, SfcError> {
    check_n(n)?;
    if alpha.level % n as u32 != 0 {
        return Err(SfcError::LevelNotDivisible {
            level: alpha.level,
            n,
        });
    }
    let s = alpha.level / n as u32;
    check_level(n, s)?;
    if (alpha.index as u128) >> alpha.level != 0 {
        return Err(SfcError::OutOfGrid(alpha.level));
    }
    let corner = decode(n, s, alpha.index as u128)
        .into_iter()
        .map(|c| c as u64)
        .collect();
    Ok(DyadicCube { level: s, corner })
}

/// The level-`n·s` interval whose image is the level-`s` cube `delta`.
pub fn cube_preimage(delta: &DyadicCube) -> Result<DyadicInterval, SfcError> {
    let n = delta.n();
    check_n(n)?;
    check_level(n, delta.level)?;
    if delta.corner.iter().any(|&c| (c as u128) >> delta.level != 0) {
        return Err(SfcError::OutOfGrid(delta.level));
    }
    let coords: Vec<u128> = delta.corner.iter().map(|&c| c as u128).collect();
    Ok(DyadicInterval {
        level: delta.level * n as u32,
        index: encode(delta.level, &coords) as u64,
    })
}

/// Exact curve point at parameter `j · 2^{-n·d}`, `0 ≤ j ≤ 2^{n·d}`.
///
/// The curve enters every cell at a corner; the first subcell one level down
/// contains that corner, which is the even one of `c` and `c + 1` per axis.
fn vertex(n: usize, d: u32, j: u128) -> Vec<f64> {
    let fine = d + 1;
    let cells = 1u128 << (n as u32 * d);
    let sub = if j >= cells {
        (1u128 << (n as u32 * fine)) - 1
    } else {
        j << n
    };
    let scale = 2f64.powi(-(fine as i32));
    decode(n, fine, sub)
        .into_iter()
        .map(|c| (c + (c & 1)) as f64 * scale)
        .collect()
}

/// Point of the curve at `t`, resolved to depth `d` (within `√n · 2^{-d}`).
pub fn curve_point(n: usize, t: f64, d: u32) -> Result<Vec<f64>, SfcError> {
    check_n(n)?;
    check_level(n, d)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(SfcError::ParameterOutOfRange(t));
    }
    let cells = 1u128 << (n as u32 * d);
    let scaled = t * cells as f64;
    let mut j = scaled.floor() as u128;
    let mut frac = scaled - scaled.floor();
    if j >= cells {
        j = cells - 1;
        frac = 1.0;
    }
    let a = vertex(n, d, j);
    if frac == 0.0 {
        return Ok(a);
    }
    let b = vertex(n, d, j + 1);
    Ok(a.iter().zip(&b).map(|(x, y)| x + frac * (y - x)).collect())
}

/// Outcome of the sampled `D^n` modulus check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnCheck {
    pub n: usize,
    pub pairs: usize,
    pub depth: u32,
    pub bound: f64,
    pub witness: HolderWitness,
    /// Parameters of the maximizing pair.
    pub witness_params: Option<(f64, f64)>,
    pub violations: usize,
}

impl DnCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Evaluation depth for sampled checks: keeps `t · 2^{n d}` within the mantissa.
pub fn sampling_depth(n: usize) -> u32 {
    (52 / n as u32).min(max_level(n))
}

/// Empirical `max |f(b) − f(a)|^n / |b − a|` over random pairs at all scales.
pub fn dn_check(n: usize, pair_count: usize, seed: u64) -> Result<DnCheck, SfcError> {
    check_n(n)?;
    let depth = sampling_depth(n);
    let bound = dn_bound(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witness = HolderWitness::empty(n as f64);
    let mut witness_params = None;
    let mut violations = 0;
    for i in 0..pair_count {
        let a: f64 = rng.gen();
        let b = if i % 2 == 0 {
            rng.gen()
        } else {
            let delta = 2f64.powf(-rng.gen_range(0.0..50.0));
            if rng.gen::<bool>() {
                (a + delta).min(1.0)
            } else {
                (a - delta).max(0.0)
            }
        };
        let fa = curve_point(n, a, depth)?;
        let fb = curve_point(n, b, depth)?;
        let dt = (b - a).abs();
        let dv = fa
            .iter()
            .zip(&fb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        if dv.powi(n as i32) > bound * dt {
            violations += 1;
        }
        let before = witness.modulus;
        witness.observe((0, 1), dt, dv);
        if witness.modulus > before {
            witness_params = Some((a, b));
        }
    }
    Ok(DnCheck {
        n,
        pairs: pair_count,
        depth,
        bound,
        witness,
        witness_params,
        violations,
    })
}

/// All level-`n·s` intervals in curve order.
pub fn intervals(n: usize, s: u32) -> impl Iterator<Item = DyadicInterval> {
    let level = n as u32 * s;
    (0..1u64 << level).map(move |index| DyadicInterval { level, index })
}
