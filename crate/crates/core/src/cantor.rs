//! Nested cube system in `Q0 = [-1/2, 1/2]^n` and its Cantor set.
//!
//! A cube of side `L` centred at `c` has `2^n` children centred at
//! `c ± L/4` (per coordinate) with side `β L`, where `β = β_{k+1}` at depth
//! `k + 1` and `β_k = e^{-1/k} / 2`. Letter `i` of an address selects the
//! child whose offset in coordinate `j` is `+L/4` iff bit `j` of `i - 1` is set.
//!
//! Every child keeps a clearance `g_k = L_k (1/4 − β_{k+1}/2)` to its siblings'
//! midplanes and to the parent boundary. The plateau functions of the
//! extension live in that clearance: `h_i = 1` within `g/4` of the child and
//! vanishes beyond `3g/4`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CantorError {
    #[error("letter {letter} outside 1..={max}")]
    InvalidLetter { letter: u32, max: u32 },
    #[error("depth {depth} exceeds the tabulated schedule ({k_max})")]
    TooDeep { depth: usize, k_max: usize },
    #[error("dimension must lie in 1..=16, got {0}")]
    BadDimension(usize),
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("enumerating {0} cubes is too expensive")]
    TooManyCubes(u128),
}

/// Tabulated `β_k`, `L_k`, `π_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomSchedule {
    k_max: usize,
    /// `beta[k]` for `1 ≤ k ≤ k_max + 1`; `beta[0]` unused.
    beta: Vec<f64>,
    /// `side[k] = L_k` for `0 ≤ k ≤ k_max + 1`.
    side: Vec<f64>,
    /// `pi[k]` for `1 ≤ k ≤ k_max + 1`; `pi[0]` unused.
    pi: Vec<f64>,
}

impl GeomSchedule {
    /// Tabulate up to `k_max` (one extra level is kept for `β_{k+1}`, `π_{k+1}`).
    pub fn new(k_max: usize) -> Self {
        let k_max = k_max.max(1);
        let top = k_max + 1;
        let mut beta = vec![f64::NAN; top + 1];
        let mut side = vec![1.0; top + 1];
        let mut pi = vec![f64::NAN; top + 1];
        let mut ln_side = 0.0;
        for k in 1..=top {
            let ln_beta = -std::f64::consts::LN_2 - 1.0 / k as f64;
            beta[k] = ln_beta.exp();
            ln_side += ln_beta;
            side[k] = ln_side.exp();
            pi[k] = side[k] / (16.0 * k as f64);
        }
        GeomSchedule {
            k_max,
            beta,
            side,
            pi,
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.beta[k]
    }

    /// `L_k`, side of the depth-`k` cubes.
    pub fn side(&self, k: usize) -> f64 {
        self.side[k]
    }

    pub fn pi(&self, k: usize) -> f64 {
        self.pi[k]
    }

    /// `(1/4 − β_{k+1}/2) L_k`: distance from a depth-`(k+1)` cube to its
    /// siblings' midplanes and to the parent boundary.
    pub fn clearance(&self, k: usize) -> f64 {
        (0.25 - 0.5 * self.beta[k + 1]) * self.side[k]
    }

    /// Half-width of a depth-`(k+1)` child cube.
    pub fn child_half(&self, k: usize) -> f64 {
        0.5 * self.beta[k + 1] * self.side[k]
    }

    /// Half-width of the region where the plateau of a depth-`(k+1)` child is 1.
    pub fn plateau_half(&self, k: usize) -> f64 {
        self.child_half(k) + 0.25 * self.clearance(k)
    }

    /// Half-width of the support of the plateau of a depth-`(k+1)` child.
    pub fn support_half(&self, k: usize) -> f64 {
        self.child_half(k) + 0.75 * self.clearance(k)
    }

    /// Width of the transition layer of the plateau functions at depth `k`.
    pub fn ramp_width(&self, k: usize) -> f64 {
        0.5 * self.clearance(k)
    }
}

/// Word over `{1, …, 2^n}`; the empty word addresses `Q0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CubeAddress(pub Vec<u32>);

impl CubeAddress {
    pub fn root() -> Self {
        CubeAddress(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn child(&self, letter: u32) -> Self {
        let mut v = self.0.clone();
        v.push(letter);
        CubeAddress(v)
    }

    pub fn prefix(&self, k: usize) -> Self {
        CubeAddress(self.0[..k].to_vec())
    }

    /// Position among the `2^{n k}` addresses of the same depth (letters as
    /// base-`2^n` digits, most significant first).
    pub fn ordinal(&self, n: usize) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &l| (acc << n) | (l as usize - 1))
    }

    pub fn from_ordinal(n: usize, depth: usize, mut ord: usize) -> Self {
        let mask = (1usize << n) - 1;
        let mut v = vec![0u32; depth];
        for slot in v.iter_mut().rev() {
            *slot = (ord & mask) as u32 + 1;
            ord >>= n;
        }
        CubeAddress(v)
    }

    pub fn validate(&self, n: usize) -> Result<(), CantorError> {
        let max = 1u32 << n;
        match self.0.iter().find(|&&l| l < 1 || l > max) {
            Some(&letter) => Err(CantorError::InvalidLetter { letter, max }),
            None => Ok(()),
        }
    }

    /// Length of the longest common prefix.
    pub fn common_depth(&self, other: &CubeAddress) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count()
    }
}

/// Axis-aligned cube by centre and side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomCube {
    pub center: Vec<f64>,
    pub side: f64,
}

impl GeomCube {
    pub fn contains(&self, x: &[f64]) -> bool {
        let h = 0.5 * self.side;
        self.center.iter().zip(x).all(|(c, xi)| (xi - c).abs() <= h)
    }

    pub fn contains_cube(&self, other: &GeomCube) -> bool {
        let h = 0.5 * (self.side - other.side);
        h >= 0.0
            && self
                .center
                .iter()
                .zip(&other.center)
                .all(|(a, b)| (a - b).abs() <= h)
    }

    /// Distance between the boundaries: clearance if nested, Euclidean gap if
    /// disjoint, 0 if the boundaries meet.
    pub fn boundary_distance(&self, other: &GeomCube) -> f64 {
        let (outer, inner) = if self.side >= other.side {
            (self, other)
        } else {
            (other, self)
        };
        if outer.contains_cube(inner) {
            let h = 0.5 * (outer.side - inner.side);
            return outer
                .center
                .iter()
                .zip(&inner.center)
                .map(|(a, b)| h - (a - b).abs())
                .fold(f64::INFINITY, f64::min);
        }
        let gap2: f64 = self
            .center
            .iter()
            .zip(&other.center)
            .map(|(a, b)| ((a - b).abs() - 0.5 * (self.side + other.side)).max(0.0))
            .map(|g| g * g)
            .sum();
        gap2.sqrt()
    }
}

/// Where a point sits relative to the cube system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Outside `Q0`.
    Outside,
    /// In `Q(a_k)` but in none of its children nor their plateaus.
    Shell,
    /// In `Q(a_k)`, outside the children, on the plateau of child `child`.
    Plateau { child: u32 },
    /// Inside a cube at the depth cap: a point of the truncated Cantor set.
    Undecided,
}

/// The cube system for a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeSystem {
    n: usize,
    schedule: GeomSchedule,
}

/// Result of [`CubeSystem::separation_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub k: usize,
    /// Minimum boundary distance between distinct cubes of equal depth `≤ k`.
    pub min_same_depth: f64,
    /// Minimum boundary distance between any two distinct cubes of depth `≤ k`.
    pub min_any: f64,
    /// `(1/4 − β_{k+1}/2) L_k`.
    pub clearance: f64,
    pub pi_k: f64,
}

impl SeparationReport {
    pub fn holds(&self) -> bool {
        self.min_same_depth >= self.pi_k && self.min_any >= self.pi_k && self.clearance >= self.pi_k
    }
}

/// Largest number of cubes [`CubeSystem::separation_check`] enumerates.
pub const MAX_ENUMERATED_CUBES: u128 = 1 << 14;

impl CubeSystem {
    pub fn new(n: usize, k_max: usize) -> Result<Self, CantorError> {
        if n == 0 || n > 16 {
            return Err(CantorError::BadDimension(n));
        }
        Ok(CubeSystem {
            n,
            schedule: GeomSchedule::new(k_max),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn schedule(&self) -> &GeomSchedule {
        &self.schedule
    }

    fn child_center(&self, center: &[f64], parent_side: f64, letter: u32) -> Vec<f64> {
        let off = 0.25 * parent_side;
        center
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if (letter - 1) >> j & 1 == 1 {
                    c + off
                } else {
                    c - off
                }
            })
            .collect()
    }

    pub fn root_cube(&self) -> GeomCube {
        GeomCube {
            center: vec![0.0; self.n],
            side: 1.0,
        }
    }

    /// Geometry of `Q(a_k)`.
    pub fn cube_of(&self, address: &CubeAddress) -> Result<GeomCube, CantorError> {
        address.validate(self.n)?;
        if address.depth() > self.schedule.k_max() + 1 {
            return Err(CantorError::TooDeep {
                depth: address.depth(),
                k_max: self.schedule.k_max(),
            });
        }
        let mut center = vec![0.0; self.n];
        for (k, &l) in address.letters().iter().enumerate() {
            center = self.child_center(&center, self.schedule.side(k), l);
        }
        Ok(GeomCube {
            center,
            side: self.schedule.side(address.depth()),
        })
    }

    /// Cube of child `letter` of `parent` (at depth `k`).
    pub fn child_cube(&self, parent: &GeomCube, k: usize, letter: u32) -> GeomCube {
        GeomCube {
            center: self.child_center(&parent.center, parent.side, letter),
            side: self.schedule.side(k + 1),
        }
    }

    /// Deepest address whose cube contains `x`, with the region tag.
    ///
    /// For `Shell` and `Plateau` the address is the cube whose extension
    /// covers `x`; for `Undecided` it is the depth-`cap` cube holding `x`.
    pub fn locate(&self, x: &[f64], cap: usize) -> Result<(CubeAddress, Region), CantorError> {
        if x.len() != self.n {
            return Err(CantorError::DimensionMismatch {
                got: x.len(),
                expected: self.n,
            });
        }
        if cap > self.schedule.k_max() {
            return Err(CantorError::TooDeep {
                depth: cap,
                k_max: self.schedule.k_max(),
            });
        }
        if x.iter().any(|xi| xi.abs() > 0.5) {
            return Ok((CubeAddress::root(), Region::Outside));
        }
        let mut addr = Vec::with_capacity(cap);
        let mut center = vec![0.0; self.n];
        for k in 0..cap {
            let side = self.schedule.side(k);
            let letter = 1 + x
                .iter()
                .zip(&center)
                .enumerate()
                .map(|(j, (xi, c))| ((xi > c) as u32) << j)
                .sum::<u32>();
            let cc = self.child_center(&center, side, letter);
            let dist = x
                .iter()
                .zip(&cc)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dist <= self.schedule.child_half(k) {
                addr.push(letter);
                center = cc;
                continue;
            }
            let region = if dist <= self.schedule.plateau_half(k) {
                Region::Plateau { child: letter }
            } else {
                Region::Shell
            };
            return Ok((CubeAddress(addr), region));
        }
        Ok((CubeAddress(addr), Region::Undecided))
    }

    /// Enumerate all cubes of depth `≤ k` and measure boundary separations.
    pub fn separation_check(&self, k: usize) -> Result<SeparationReport, CantorError> {
        if k > self.schedule.k_max() {
            return Err(CantorError::TooDeep {
                depth: k,
                k_max: self.schedule.k_max(),
            });
        }
        let total: u128 = (0..=k).map(|d| 1u128 << (self.n * d)).sum();
        if total > MAX_ENUMERATED_CUBES {
            return Err(CantorError::TooManyCubes(total));
        }
        let mut cubes: Vec<(usize, GeomCube)> = vec![(0, self.root_cube())];
        let mut frontier = vec![self.root_cube()];
        for d in 0..k {
            let mut next = Vec::with_capacity(frontier.len() << self.n);
            for c in &frontier {
                for l in 1..=(1u32 << self.n) {
                    next.push(self.child_cube(c, d, l));
                }
            }
            cubes.extend(next.iter().cloned().map(|c| (d + 1, c)));
            frontier = next;
        }
        let mut min_same = f64::INFINITY;
        let mut min_any = f64::INFINITY;
        for i in 0..cubes.len() {
            for j in i + 1..cubes.len() {
                let dist = cubes[i].1.boundary_distance(&cubes[j].1);
                min_any = min_any.min(dist);
                if cubes[i].0 == cubes[j].0 {
                    min_same = min_same.min(dist);
                }
            }
        }
        Ok(SeparationReport {
            k,
            min_same_depth: min_same,
            min_any,
            clearance: self.schedule.clearance(k),
            pi_k: self.schedule.pi(k.max(1)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn schedule_values() {
        let s = GeomSchedule::new(60);
        assert_relative_eq!(s.beta(1), 0.5 * (-1f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(s.beta(1), 0.183940, epsilon = 1e-6);
        assert_relative_eq!(s.pi(1), s.beta(1) / 16.0, max_relative = 1e-15);
        assert_relative_eq!(s.pi(1), 0.0114962, epsilon = 1e-7);
        assert_relative_eq!(s.side(2), s.beta(1) * s.beta(2), max_relative = 1e-15);
        assert_relative_eq!(s.side(2), 0.0557825, epsilon = 1e-7);
        for k in 1..=60 {
            assert!(s.beta(k + 1) > s.beta(k) && s.beta(k) < 0.5);
            assert!(s.side(k + 1) < s.side(k) && s.pi(k + 1) < s.pi(k));
        }
    }

    #[test]
    fn side_law_matches_direct_product() {
        let s = GeomSchedule::new(60);
        let mut prod = 1.0;
        for k in 1..=60 {
            prod *= 0.5 * (-1.0 / k as f64).exp();
            assert_relative_eq!(s.side(k), prod, max_relative = 64.0 * f64::EPSILON);
        }
    }

    #[test]
    fn cube_of_examples() {
        let q = CubeSystem::new(1, 10).unwrap();
        let root = q.cube_of(&CubeAddress::root()).unwrap();
        assert_eq!(root, GeomCube { center: vec![0.0], side: 1.0 });
        let c = q.cube_of(&CubeAddress(vec![1])).unwrap();
        assert_relative_eq!(c.center[0], -0.25);
        assert_relative_eq!(c.side, 0.18394, epsilon = 1e-5);
        assert!(matches!(
            q.cube_of(&CubeAddress(vec![3])),
            Err(CantorError::InvalidLetter { letter: 3, max: 2 })
        ));

        let q3 = CubeSystem::new(3, 10).unwrap();
        let a = CubeAddress(vec![5, 2, 8, 1]);
        for k in 1..=a.depth() {
            let parent = q3.cube_of(&a.prefix(k - 1)).unwrap();
            let child = q3.cube_of(&a.prefix(k)).unwrap();
            assert!(parent.contains_cube(&child));
            assert!(parent.boundary_distance(&child) > 0.0);
        }
    }

    #[test]
    fn children_disjoint_and_interior() {
        for n in 1..=3 {
            let q = CubeSystem::new(n, 5).unwrap();
            let parent = q.cube_of(&CubeAddress(vec![1; 2])).unwrap();
            let kids: Vec<GeomCube> = (1..=1u32 << n).map(|l| q.child_cube(&parent, 2, l)).collect();
            for (i, a) in kids.iter().enumerate() {
                assert!(parent.contains_cube(a));
                for b in &kids[i + 1..] {
                    assert!(a.boundary_distance(b) > 0.0 && !a.contains_cube(b));
                }
            }
        }
    }

    #[test]
    fn locate_examples() {
        let q = CubeSystem::new(2, 20).unwrap();
        assert_eq!(
            q.locate(&[0.7, 0.0], 5).unwrap(),
            (CubeAddress::root(), Region::Outside)
        );
        for cap in 1..=6 {
            assert_eq!(
                q.locate(&[0.0, 0.0], cap).unwrap(),
                (CubeAddress::root(), Region::Shell)
            );
        }
        // limit point of 1,1,1,...
        let deep = q.cube_of(&CubeAddress(vec![1; 20])).unwrap();
        let (a, r) = q.locate(&deep.center, 8).unwrap();
        assert_eq!(r, Region::Undecided);
        assert_eq!(a, CubeAddress(vec![1; 8]));
        // just outside child 1, inside its plateau
        let s = q.schedule();
        let x = -0.25 + s.child_half(0) + 0.5 * (s.plateau_half(0) - s.child_half(0));
        assert_eq!(
            q.locate(&[x, -0.25], 4).unwrap(),
            (CubeAddress::root(), Region::Plateau { child: 1 })
        );
    }

    #[test]
    fn separation_examples() {
        let q = CubeSystem::new(1, 60).unwrap();
        let r = q.separation_check(1).unwrap();
        assert_relative_eq!(r.min_same_depth, 0.5 - q.schedule().beta(1), epsilon = 1e-15);
        assert_relative_eq!(r.min_same_depth, 0.31606, epsilon = 1e-5);
        assert_relative_eq!(0.25 - q.schedule().beta(2) / 2.0, 0.09837, epsilon = 1e-5);
        assert!(r.holds());
        let s = q.schedule();
        for k in 1..=60 {
            assert!(s.clearance(k) >= s.pi(k), "k={k}");
        }
        assert!(matches!(
            CubeSystem::new(3, 10).unwrap().separation_check(6),
            Err(CantorError::TooManyCubes(_))
        ));
    }

    #[test]
    fn ordinal_round_trip() {
        let a = CubeAddress(vec![3, 1, 4, 2]);
        assert_eq!(CubeAddress::from_ordinal(2, 4, a.ordinal(2)), a);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[3,1,4,2]");
    }
}
