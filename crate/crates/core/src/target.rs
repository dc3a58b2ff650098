//! Preparation of the target set: exponent sequence, weighted gap sums and
//! the recursive block decomposition indexed by cube addresses.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::CubeAddress;
use crate::gapset::{converges_at, GapSet, TailEstimate};
use crate::numeric::csum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TargetError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("target is not a null set (measure at least {0})")]
    NotNull(f64),
    #[error("gap sum of the target diverges at exponent t = {0}")]
    Divergent(f64),
    #[error("convergence of the gap sum at t = {0} cannot be verified")]
    Unverifiable(f64),
    #[error("decomposition with {0} leaves is too large")]
    TooLarge(u128),
}

/// Largest number of leaves [`decompose`] materializes.
pub const MAX_LEAVES: u128 = 1 << 22;

/// `P`: the greatest integer strictly below `sn`.
pub fn order_below(sn: f64) -> u32 {
    (sn.ceil() - 1.0) as u32
}

/// Nondecreasing exponents `s_m` in `((P+sn)/2, sn)` tending to `sn`.
///
/// `s_m = sn - (sn - (P+sn)/2) 2^{-j}` where `j = 1` for `m ≤ breakpoints[0]`,
/// `j = 2` up to `breakpoints[1]`, and so on; past the last breakpoint `j`
/// stays at `breakpoints.len() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSequence {
    pub s: f64,
    pub n: usize,
    pub p: u32,
    pub breakpoints: Vec<usize>,
}

impl ExponentSequence {
    /// The sequence with a single level, `(P + 3sn)/4` for every `m`.
    pub fn constant(s: f64, n: usize) -> Result<Self, TargetError> {
        if !(s > 1.0) || !s.is_finite() || n == 0 {
            return Err(TargetError::InvalidParameter(format!(
                "need s > 1 and n >= 1, got s = {s}, n = {n}"
            )));
        }
        Ok(ExponentSequence {
            s,
            n,
            p: order_below(s * n as f64),
            breakpoints: Vec::new(),
        })
    }

    pub fn sn(&self) -> f64 {
        self.s * self.n as f64
    }

    /// Open interval `((P+sn)/2, sn)` containing every term.
    pub fn bounds(&self) -> (f64, f64) {
        (0.5 * (self.p as f64 + self.sn()), self.sn())
    }

    /// Exponent of level `j ≥ 1`.
    pub fn level(&self, j: usize) -> f64 {
        let (lo, hi) = self.bounds();
        hi - (hi - lo) * 0.5f64.powi(j as i32)
    }

    /// `s_m` for `m ≥ 1`.
    pub fn get(&self, m: usize) -> f64 {
        let j = 1 + self.breakpoints.partition_point(|&b| b < m);
        self.level(j)
    }

    /// `Σ_m |z_m|^{n/s_m}` for lengths already in enumeration order.
    pub fn weighted_sum(&self, lengths: &[f64]) -> f64 {
        let n = self.n as f64;
        let mut out = Vec::with_capacity(lengths.len());
        let mut j = 1;
        for (i, &len) in lengths.iter().enumerate() {
            let m = i + 1;
            while j <= self.breakpoints.len() && self.breakpoints[j - 1] < m {
                j += 1;
            }
            out.push(len.powf(n / self.level(j)));
        }
        csum(out)
    }
}

/// Gap lengths by decreasing length, ties by position.
pub fn enumeration_order(block: &GapSet) -> Vec<f64> {
    let mut lens: Vec<f64> = block.gaps().iter().map(|g| g.len()).collect();
    lens.sort_by(|a, b| b.total_cmp(a));
    lens
}

const MAX_RULE_LEVELS: usize = 4096;
const MAX_BREAKPOINT: u128 = 1 << 62;

/// Choose up to `count` exponent levels for the target `b`.
///
/// Level `j + 1` starts after the first index `m` at which the remaining
/// weighted tail at the level-`(j+1)` exponent drops below `2^{-j}`. Sets
/// with omitted gaps need a level rule to make that tail computable.
pub fn choose_s_sequence(
    s: f64,
    n: usize,
    b: &GapSet,
    count: usize,
) -> Result<ExponentSequence, TargetError> {
    let mut seq = ExponentSequence::constant(s, n)?;
    let (lower, _) = b.measure_bounds();
    if !b.is_null() {
        return Err(TargetError::NotNull(lower));
    }
    if b.is_exact() {
        return Ok(seq);
    }
    let nf = n as f64;
    let check = |c: f64| -> Result<(), TargetError> {
        let t = c / nf;
        match converges_at(b, t) {
            Some(true) => Ok(()),
            Some(false) => Err(TargetError::Divergent(t)),
            None => Err(TargetError::Unverifiable(t)),
        }
    };
    check(seq.level(1))?;
    // Enumeration by decreasing length walks the rule level by level, so the
    // weighted tail after the first `J` levels is the rule remainder.
    let rule = b
        .level_rule()
        .ok_or_else(|| TargetError::Unverifiable(seq.level(1) / nf))?;
    let mut levels_done = 0usize;
    let mut m = 0u128;
    for j in 1..count.max(1) {
        let c = seq.level(j + 1);
        check(c)?;
        let target = 0.5f64.powi(j as i32);
        let mut found = false;
        while levels_done < MAX_RULE_LEVELS && m < MAX_BREAKPOINT {
            match rule.tail_from(levels_done, c / nf) {
                TailEstimate::Finite(x) if x < target => {
                    found = true;
                    break;
                }
                TailEstimate::Finite(_) => {}
                TailEstimate::Divergent => return Err(TargetError::Divergent(c / nf)),
                TailEstimate::Unknown => return Err(TargetError::Unverifiable(c / nf)),
            }
            m += rule.count_at(levels_done).round() as u128;
            levels_done += 1;
        }
        if !found {
            break;
        }
        seq.breakpoints.push(m as usize);
    }
    Ok(seq)
}

/// `G = Σ_m |z_m|^{n/s_m}` over the listed gaps of `block`, enumerated by
/// decreasing length.
pub fn weighted_g(block: &GapSet, seq: &ExponentSequence) -> f64 {
    seq.weighted_sum(&enumeration_order(block))
}

/// One block `R(a_k)` with its representative and weighted sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionNode {
    pub block: GapSet,
    pub r: f64,
    pub g: f64,
}

impl DecompositionNode {
    fn new(block: GapSet, seq: &ExponentSequence) -> Self {
        let g = weighted_g(&block, seq);
        DecompositionNode {
            r: block.hull().0,
            block,
            g,
        }
    }

    pub fn diam(&self) -> f64 {
        self.block.hull_len()
    }
}

/// Blocks `R(a_k)` for all addresses of depth `k ≤ depth`.
///
/// `levels[k]` holds the `2^{nk}` nodes of depth `k` ordered by
/// [`CubeAddress::ordinal`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTree {
    pub n: usize,
    pub depth: usize,
    pub seq: ExponentSequence,
    levels: Vec<Vec<DecompositionNode>>,
    /// `M_k = max 2^{nk} G(R(a_k))` over depth-`k` nodes.
    pub m_by_depth: Vec<f64>,
    /// `M = max_k M_k`.
    pub m_bound: f64,
}

/// Children of `block`: split at the `2^n − 1` largest gaps; missing
/// children are the singleton at the block minimum.
pub fn split_block(block: &GapSet, n: usize) -> Vec<GapSet> {
    let want = (1usize << n) - 1;
    let gaps = block.gaps();
    let mut idx: Vec<usize> = (0..gaps.len()).collect();
    idx.sort_by(|&a, &b| gaps[b].len().total_cmp(&gaps[a].len()).then(a.cmp(&b)));
    idx.truncate(want);
    idx.sort_unstable();
    let (lo, hi) = block.hull();
    let mut out = Vec::with_capacity(want + 1);
    let mut left = lo;
    for &i in &idx {
        out.push(block.restrict(left, gaps[i].lo));
        left = gaps[i].hi;
    }
    out.push(block.restrict(left, hi));
    while out.len() < want + 1 {
        out.push(GapSet::singleton(lo));
    }
    out
}

pub fn decompose(
    b: &GapSet,
    n: usize,
    depth: usize,
    seq: &ExponentSequence,
) -> Result<DecompositionTree, TargetError> {
    if n == 0 || n != seq.n {
        return Err(TargetError::InvalidParameter(format!(
            "dimension {n} does not match the exponent sequence ({})",
            seq.n
        )));
    }
    let leaves = 1u128.checked_shl((n * depth) as u32).unwrap_or(u128::MAX);
    if n * depth >= 128 || leaves > MAX_LEAVES {
        return Err(TargetError::TooLarge(leaves));
    }
    let mut levels = vec![vec![DecompositionNode::new(b.clone(), seq)]];
    for _ in 0..depth {
        let next: Vec<DecompositionNode> = levels
            .last()
            .unwrap()
            .iter()
            .flat_map(|node| split_block(&node.block, n))
            .map(|blk| DecompositionNode::new(blk, seq))
            .collect();
        levels.push(next);
    }
    let m_by_depth: Vec<f64> = levels
        .iter()
        .enumerate()
        .map(|(k, lv)| {
            let scale = 2f64.powi((n * k) as i32);
            lv.iter().map(|nd| scale * nd.g).fold(0.0, f64::max)
        })
        .collect();
    let m_bound = m_by_depth.iter().copied().fold(0.0, f64::max);
    Ok(DecompositionTree {
        n,
        depth,
        seq: seq.clone(),
        levels,
        m_by_depth,
        m_bound,
    })
}

/// One entry of the JSON dump of a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub address: CubeAddress,
    pub hull: [f64; 2],
    pub gap_count: usize,
    pub r: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub n: usize,
    pub depth: usize,
    pub sequence: ExponentSequence,
    pub m_bound: f64,
    pub m_by_depth: Vec<f64>,
    pub nodes: Vec<NodeSummary>,
}

impl DecompositionTree {
    pub fn level(&self, k: usize) -> &[DecompositionNode] {
        &self.levels[k]
    }

    pub fn root(&self) -> &DecompositionNode {
        &self.levels[0][0]
    }

    /// Node at `address`; `None` if deeper than the tree or malformed.
    pub fn node(&self, address: &CubeAddress) -> Option<&DecompositionNode> {
        if address.depth() > self.depth || address.validate(self.n).is_err() {
            return None;
        }
        self.levels[address.depth()].get(address.ordinal(self.n))
    }

    pub fn children(&self, k: usize, ordinal: usize) -> &[DecompositionNode] {
        let w = 1usize << self.n;
        &self.levels[k + 1][ordinal * w..(ordinal + 1) * w]
    }

    pub fn summary(&self) -> TreeSummary {
        let nodes = self
            .levels
            .iter()
            .enumerate()
            .flat_map(|(k, lv)| {
                lv.iter().enumerate().map(move |(i, nd)| {
                    let (lo, hi) = nd.block.hull();
                    NodeSummary {
                        address: CubeAddress::from_ordinal(self.n, k, i),
                        hull: [lo, hi],
                        gap_count: nd.block.gaps().len(),
                        r: nd.r,
                        g: nd.g,
                    }
                })
            })
            .collect();
        TreeSummary {
            n: self.n,
            depth: self.depth,
            sequence: self.seq.clone(),
            m_bound: self.m_bound,
            m_by_depth: self.m_by_depth.clone(),
            nodes,
        }
    }
}

impl Serialize for DecompositionTree {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.summary().serialize(ser)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapset::{cantor_gapset, make_gapset, Gap};
    use approx::assert_relative_eq;

    #[test]
    fn sequence_bounds() {
        let q = ExponentSequence::constant(1.5, 2).unwrap();
        assert_eq!(q.p, 2);
        assert_eq!(q.bounds(), (2.5, 3.0));
        let q = ExponentSequence::constant(1.5, 1).unwrap();
        assert_eq!(q.p, 1);
        assert_eq!(q.bounds(), (1.25, 1.5));
        assert_eq!(order_below(3.0), 2);
        assert_eq!(order_below(1.4), 1);
    }

    #[test]
    fn finite_target_gets_midpoint_constant() {
        let b = GapSet::from_points(&[0.0, 0.25, 1.0]).unwrap();
        let q = choose_s_sequence(1.5, 2, &b, 10).unwrap();
        assert!(q.breakpoints.is_empty());
        for m in 1..20 {
            assert_relative_eq!(q.get(m), (2.0 + 9.0) / 4.0);
        }
    }

    #[test]
    fn refusals() {
        let full = make_gapset(0.0, 1.0, vec![], 0.0).unwrap();
        assert!(matches!(
            choose_s_sequence(1.4, 1, &full, 8),
            Err(TargetError::NotNull(_))
        ));
        // degree 2 set, s = 2.5 needs convergence near t = 2.5
        let half = cantor_gapset(0.5, 12).unwrap();
        assert!(matches!(
            choose_s_sequence(2.5, 1, &half, 8),
            Err(TargetError::Divergent(_))
        ));
        // truncated set with no rule: nothing to verify against
        let blk = half.restrict(0.0, 0.25);
        assert!(matches!(
            choose_s_sequence(1.2, 1, &blk, 8),
            Err(TargetError::Unverifiable(_))
        ));
    }

    #[test]
    fn sequence_is_admissible_and_tails_hold() {
        let b = cantor_gapset(1.0 / 3.0, 14).unwrap();
        for (s, n) in [(1.4, 1), (1.5, 2)] {
            let q = choose_s_sequence(s, n, &b, 12).unwrap();
            let (lo, hi) = q.bounds();
            let mut prev = lo;
            for m in 1..=b.gaps().len() + 5 {
                let v = q.get(m);
                assert!(lo < v && v < hi && v >= prev);
                prev = v;
            }
            assert!(!q.breakpoints.is_empty());
            // tail after each breakpoint at the next level's exponent, summed
            // level by level: level j holds 2^{j-1} gaps of length 3^{-j}
            for (i, &m) in q.breakpoints.iter().enumerate() {
                let c = q.level(i + 2);
                let levels = (m as f64 + 1.0).log2().round() as i32;
                assert_eq!((1usize << levels) - 1, m);
                let tail: f64 = (levels + 1..levels + 4000)
                    .map(|j| {
                        let j = j as f64;
                        ((j - 1.0) * 2f64.ln() - j * n as f64 / c * 3f64.ln()).exp()
                    })
                    .sum();
                assert!(tail < 0.5f64.powi(i as i32 + 1));
            }
        }
    }

    #[test]
    fn weighted_g_examples() {
        let q = ExponentSequence::constant(1.5, 2).unwrap();
        assert_eq!(weighted_g(&GapSet::singleton(0.3), &q), 0.0);
        let one = make_gapset(0.0, 1.0, vec![Gap::new(0.2, 0.6)], 0.6).unwrap();
        assert_relative_eq!(weighted_g(&one, &q), 0.4f64.powf(2.0 / 2.75), max_relative = 1e-15);
        // constant s_m = 2.75, n = 2: oracle sum_j 2^{j-1} 3^{-j n / 2.75}
        let b = cantor_gapset(1.0 / 3.0, 10).unwrap();
        let oracle: f64 = (1..=10)
            .map(|j| 2f64.powi(j - 1) * 3f64.powf(-(j as f64) * 2.0 / 2.75))
            .sum();
        assert_relative_eq!(weighted_g(&b, &q), oracle, max_relative = 1e-9);
    }

    #[test]
    fn decompose_examples() {
        let q = ExponentSequence::constant(1.4, 1).unwrap();
        let t = decompose(&GapSet::singleton(0.0), 1, 3, &q).unwrap();
        assert_eq!(t.m_bound, 0.0);
        assert!(t.level(3).iter().all(|nd| nd.block == GapSet::singleton(0.0)));

        let b = cantor_gapset(1.0 / 3.0, 4).unwrap();
        let t = decompose(&b, 1, 1, &q).unwrap();
        let kids = t.level(1);
        assert_relative_eq!(kids[0].block.hull().1, 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(kids[1].block.hull().0, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(kids[0].block.gaps().len(), 7);

        let t0 = decompose(&b, 2, 0, &ExponentSequence::constant(1.5, 2).unwrap()).unwrap();
        assert!(t0.m_bound >= t0.root().g);
    }

    #[test]
    fn children_cover_parent() {
        let b = cantor_gapset(1.0 / 3.0, 6).unwrap();
        for n in 1..=2 {
            let q = ExponentSequence::constant(1.5, n).unwrap();
            let t = decompose(&b, n, 3, &q).unwrap();
            for k in 0..3 {
                for (i, parent) in t.level(k).iter().enumerate() {
                    let kids = t.children(k, i);
                    let mut gaps: Vec<Gap> = kids.iter().flat_map(|c| c.block.gaps().to_vec()).collect();
                    let (lo, hi) = parent.block.hull();
                    let mut hull_min = f64::INFINITY;
                    let mut hull_max = f64::NEG_INFINITY;
                    for c in kids {
                        hull_min = hull_min.min(c.block.hull().0);
                        hull_max = hull_max.max(c.block.hull().1);
                        assert!(parent.block.contains(c.r));
                        assert!(c.block.contains(c.r));
                    }
                    assert_eq!((hull_min, hull_max), (lo, hi));
                    // separating gaps plus inherited gaps = parent gaps
                    let mut real: Vec<&DecompositionNode> =
                        kids.iter().filter(|c| c.block.hull_len() > 0.0 || parent.block.hull_len() == 0.0).collect();
                    real.sort_by(|a, b| a.block.hull().0.total_cmp(&b.block.hull().0));
                    for w in real.windows(2) {
                        if w[0].block.hull().1 < w[1].block.hull().0 {
                            gaps.push(Gap::new(w[0].block.hull().1, w[1].block.hull().0));
                        }
                    }
                    gaps.sort_by(|a, b| a.lo.total_cmp(&b.lo));
                    gaps.dedup();
                    assert_eq!(gaps, parent.block.gaps());
                }
            }
        }
    }

    #[test]
    fn diameter_identity_on_null_blocks() {
        let b = cantor_gapset(1.0 / 3.0, 10).unwrap();
        let q = ExponentSequence::constant(1.4, 1).unwrap();
        let t = decompose(&b, 1, 4, &q).unwrap();
        for k in 0..=4 {
            for nd in t.level(k) {
                assert!(nd.block.is_null());
                let listed = nd.block.gap_total();
                assert!(nd.diam() >= listed - 1e-15);
                assert!(nd.diam() <= listed + nd.block.tail_bound() + 1e-15);
            }
        }
    }

    #[test]
    fn summary_json() {
        let b = cantor_gapset(1.0 / 3.0, 3).unwrap();
        let q = ExponentSequence::constant(1.4, 1).unwrap();
        let t = decompose(&b, 1, 2, &q).unwrap();
        let v: serde_json::Value = serde_json::to_value(&t).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 7);
        assert_eq!(v["nodes"][4]["address"], serde_json::json!([1, 2]));
        assert_eq!(v["nodes"][0]["gap_count"], 7);
    }
}
