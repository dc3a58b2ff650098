//! Compact subsets of the line represented by their complementary gaps.
//!
//! A [`GapSet`] stores the convex hull `[lo, hi]` of a compact set `A` and the
//! sorted list of bounded open components of `R \ A` (the gaps). Sets with
//! infinitely many gaps are truncated; `tail_bound` then bounds the total
//! length of the omitted gaps and an optional [`LevelRule`] describes how
//! gap counts and lengths continue level by level.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{csum, CompensatedSum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapSetError {
    #[error("invalid hull [{lo}, {hi}]")]
    InvalidHull { lo: f64, hi: f64 },
    #[error("gap ({lo}, {hi}) is empty or not finite")]
    EmptyGap { lo: f64, hi: f64 },
    #[error("gap ({lo}, {hi}) is not inside the hull [{hull_lo}, {hull_hi}]")]
    GapOutsideHull {
        lo: f64,
        hi: f64,
        hull_lo: f64,
        hull_hi: f64,
    },
    #[error("gaps ({0}, {1}) and ({2}, {3}) overlap")]
    OverlappingGaps(f64, f64, f64, f64),
    #[error("tail bound {0} must be finite and nonnegative")]
    InvalidTail(f64),
    #[error("gap lengths plus tail bound ({total}) exceed the hull length ({hull})")]
    ExcessLength { total: f64, hull: f64 },
    #[error("invalid level rule: {0}")]
    InvalidLevelRule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("degree estimate inconclusive: {0}")]
    Inconclusive(String),
    #[error("set is not inside the domain [{a}, {b}] of the function")]
    DomainMismatch { a: f64, b: f64 },
    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),
    #[error("no injective gap matching exists (gap {0} of the image is unmatched)")]
    MatchingFailed(usize),
    #[error("samples do not define a function: point repeated with different values")]
    NotAFunction,
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
}

/// An open interval `(lo, hi)` of the complement; serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
}

impl Gap {
    pub fn new(lo: f64, hi: f64) -> Self {
        Gap { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// `self ⊆ (a, b)`.
    pub fn inside(&self, a: f64, b: f64) -> bool {
        a <= self.lo && self.hi <= b
    }
}

impl From<[f64; 2]> for Gap {
    fn from(v: [f64; 2]) -> Self {
        Gap::new(v[0], v[1])
    }
}

impl From<Gap> for [f64; 2] {
    fn from(g: Gap) -> Self {
        [g.lo, g.hi]
    }
}

/// Per-level structure of a self-similar gap family.
///
/// Level `j` (1-based) has `counts[j-1]` gaps of length `lengths[j-1]`.
/// Levels past the end of the lists continue geometrically with the ratios
/// of the last two listed levels; a single-level rule has no continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRule {
    pub counts: Vec<f64>,
    pub lengths: Vec<f64>,
}

/// Remainder of a gap sum beyond the represented gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailEstimate {
    Unknown,
    Finite(f64),
    Divergent,
}

impl LevelRule {
    fn validate(&self) -> Result<(), GapSetError> {
        if self.counts.is_empty() || self.counts.len() != self.lengths.len() {
            return Err(GapSetError::InvalidLevelRule(
                "counts and lengths must be nonempty and of equal length".into(),
            ));
        }
        if self.counts.iter().any(|c| !c.is_finite() || *c < 1.0) {
            return Err(GapSetError::InvalidLevelRule("counts must be >= 1".into()));
        }
        if self.lengths.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(GapSetError::InvalidLevelRule(
                "lengths must be positive".into(),
            ));
        }
        Ok(())
    }

    fn continuation(&self) -> Option<(f64, f64)> {
        let l = self.counts.len();
        (l >= 2).then(|| {
            (
                self.counts[l - 1] / self.counts[l - 2],
                self.lengths[l - 1] / self.lengths[l - 2],
            )
        })
    }

    /// Number of gaps at 0-based level `j`, continued past the listed levels.
    pub fn count_at(&self, j: usize) -> f64 {
        let listed = self.counts.len();
        if j < listed {
            return self.counts[j];
        }
        match self.continuation() {
            Some((rc, _)) => self.counts[listed - 1] * rc.powi((j + 1 - listed) as i32),
            None => 0.0,
        }
    }

    /// `ln` of the level-`j` contribution (0-based, listed levels only).
    fn ln_contribution(&self, j: usize, t: f64) -> f64 {
        self.counts[j].ln() + self.lengths[j].ln() / t
    }

    /// Sum of level contributions from 0-based level `from` to infinity.
    pub fn tail_from(&self, from: usize, t: f64) -> TailEstimate {
        let listed = self.counts.len();
        let mut acc = CompensatedSum::new();
        for j in from..listed {
            acc += self.ln_contribution(j, t).exp();
        }
        match self.continuation() {
            None => TailEstimate::Finite(acc.value()),
            Some((rc, rl)) => {
                let q = rc * rl.powf(1.0 / t);
                if q >= 1.0 {
                    return TailEstimate::Divergent;
                }
                let last = self.ln_contribution(listed - 1, t).exp();
                let start = if from > listed {
                    last * q.powi((from - listed) as i32)
                } else {
                    last
                };
                acc += start * q / (1.0 - q);
                TailEstimate::Finite(acc.value())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GapSetRepr {
    hull: [f64; 2],
    gaps: Vec<Gap>,
    tail_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level_rule: Option<LevelRule>,
}

/// A compact subset of `R` given by its hull and complementary gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GapSetRepr", into = "GapSetRepr")]
pub struct GapSet {
    hull_lo: f64,
    hull_hi: f64,
    gaps: Vec<Gap>,
    tail_bound: f64,
    level_rule: Option<LevelRule>,
}

impl TryFrom<GapSetRepr> for GapSet {
    type Error = GapSetError;
    fn try_from(r: GapSetRepr) -> Result<Self, Self::Error> {
        let mut set = make_gapset(r.hull[0], r.hull[1], r.gaps, r.tail_bound)?;
        if let Some(rule) = r.level_rule {
            rule.validate()?;
            set.level_rule = Some(rule);
        }
        Ok(set)
    }
}

impl From<GapSet> for GapSetRepr {
    fn from(s: GapSet) -> Self {
        GapSetRepr {
            hull: [s.hull_lo, s.hull_hi],
            gaps: s.gaps,
            tail_bound: s.tail_bound,
            level_rule: s.level_rule,
        }
    }
}

/// Validate and normalize a gap representation.
///
/// Gaps may touch the hull endpoints and may share endpoints with each other
/// (the shared point then is an isolated point of the set); overlapping gaps
/// are rejected.
pub fn make_gapset(
    hull_lo: f64,
    hull_hi: f64,
    mut gaps: Vec<Gap>,
    tail_bound: f64,
) -> Result<GapSet, GapSetError> {
    if !(hull_lo.is_finite() && hull_hi.is_finite()) || hull_lo > hull_hi {
        return Err(GapSetError::InvalidHull {
            lo: hull_lo,
            hi: hull_hi,
        });
    }
    if !tail_bound.is_finite() || tail_bound < 0.0 {
        return Err(GapSetError::InvalidTail(tail_bound));
    }
    if !gaps.windows(2).all(|w| w[0].lo <= w[1].lo) {
        gaps.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    }
    for g in &gaps {
        if !(g.lo.is_finite() && g.hi.is_finite()) || g.lo >= g.hi {
            return Err(GapSetError::EmptyGap { lo: g.lo, hi: g.hi });
        }
        if g.lo < hull_lo || g.hi > hull_hi {
            return Err(GapSetError::GapOutsideHull {
                lo: g.lo,
                hi: g.hi,
                hull_lo,
                hull_hi,
            });
        }
    }
    for w in gaps.windows(2) {
        if w[1].lo < w[0].hi {
            return Err(GapSetError::OverlappingGaps(w[0].lo, w[0].hi, w[1].lo, w[1].hi));
        }
    }
    let hull = hull_hi - hull_lo;
    let total = csum(gaps.iter().map(Gap::len)) + tail_bound;
    if total > hull * (1.0 + 1e-12) + 1e-300 {
        return Err(GapSetError::ExcessLength { total, hull });
    }
    Ok(GapSet {
        hull_lo,
        hull_hi,
        gaps,
        tail_bound,
        level_rule: None,
    })
}

/// Number of rule levels attached to generated Cantor sets.
pub const CANTOR_RULE_LEVELS: usize = 64;
/// Largest depth `cantor_gapset` will materialize.
pub const MAX_CANTOR_DEPTH: u32 = 26;

/// The middle-`ratio` Cantor set on `[0, 1]`, truncated at `depth` levels.
///
/// Level `j` has `2^(j-1)` gaps of length `ratio * ((1 - ratio) / 2)^(j-1)`;
/// the tail bound is the total length of the omitted levels, `(1 - ratio)^depth`.
pub fn cantor_gapset(ratio: f64, depth: u32) -> Result<GapSet, GapSetError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(GapSetError::InvalidParameter(format!(
            "ratio must lie in (0, 1), got {ratio}"
        )));
    }
    if depth < 1 || depth > MAX_CANTOR_DEPTH {
        return Err(GapSetError::InvalidParameter(format!(
            "depth must lie in 1..={MAX_CANTOR_DEPTH}, got {depth}"
        )));
    }
    let keep = (1.0 - ratio) / 2.0;
    let mut gaps = Vec::with_capacity((1usize << depth) - 1);
    fn emit(gaps: &mut Vec<Gap>, a: f64, len: f64, level: u32, depth: u32, keep: f64) {
        if level > depth {
            return;
        }
        let side = len * keep;
        emit(gaps, a, side, level + 1, depth, keep);
        gaps.push(Gap::new(a + side, a + len - side));
        emit(gaps, a + len - side, side, level + 1, depth, keep);
    }
    emit(&mut gaps, 0.0, 1.0, 1, depth, keep);
    let levels = CANTOR_RULE_LEVELS.max(depth as usize);
    let rule = LevelRule {
        counts: (0..levels).map(|j| 2f64.powi(j as i32)).collect(),
        lengths: (0..levels).map(|j| ratio * keep.powi(j as i32)).collect(),
    };
    let tail = (1.0 - ratio).powi(depth as i32);
    Ok(GapSet {
        hull_lo: 0.0,
        hull_hi: 1.0,
        gaps,
        tail_bound: tail,
        level_rule: Some(rule),
    })
}

impl GapSet {
    /// The one-point set `{x}`.
    pub fn singleton(x: f64) -> Self {
        GapSet {
            hull_lo: x,
            hull_hi: x,
            gaps: Vec::new(),
            tail_bound: 0.0,
            level_rule: None,
        }
    }

    /// A finite set of points (duplicates allowed).
    pub fn from_points(points: &[f64]) -> Result<Self, GapSetError> {
        let mut p: Vec<f64> = points.to_vec();
        if p.is_empty() || p.iter().any(|x| !x.is_finite()) {
            return Err(GapSetError::InvalidParameter(
                "need a nonempty list of finite points".into(),
            ));
        }
        p.sort_by(f64::total_cmp);
        p.dedup();
        let gaps = p.windows(2).map(|w| Gap::new(w[0], w[1])).collect();
        make_gapset(p[0], p[p.len() - 1], gaps, 0.0)
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.hull_lo, self.hull_hi)
    }

    pub fn hull_len(&self) -> f64 {
        self.hull_hi - self.hull_lo
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn level_rule(&self) -> Option<&LevelRule> {
        self.level_rule.as_ref()
    }

    /// No omitted gaps: the represented set is exactly the set.
    pub fn is_exact(&self) -> bool {
        self.tail_bound == 0.0 && self.level_rule.is_none()
    }

    pub fn gap_total(&self) -> f64 {
        csum(self.gaps.iter().map(Gap::len))
    }

    /// Lower and upper bounds on the Lebesgue measure of the set.
    pub fn measure_bounds(&self) -> (f64, f64) {
        let upper = (self.hull_len() - self.gap_total()).max(0.0);
        ((upper - self.tail_bound).max(0.0), upper)
    }

    /// Measure zero is consistent with the representation: the lower bound
    /// vanishes up to the rounding of the gap endpoints.
    pub fn is_null(&self) -> bool {
        let rounding = (4.0 * f64::EPSILON * (self.gaps.len() + 1) as f64).max(1e-12);
        self.measure_bounds().0 <= rounding * self.hull_len().max(f64::MIN_POSITIVE)
    }

    /// Closed components of the represented set, left to right.
    pub fn components(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        let mut left = self.hull_lo;
        for g in &self.gaps {
            out.push((left, g.lo));
            left = g.hi;
        }
        out.push((left, self.hull_hi));
        out
    }

    /// Whether `x` belongs to the represented set.
    pub fn contains(&self, x: f64) -> bool {
        if x < self.hull_lo || x > self.hull_hi {
            return false;
        }
        // first gap with hi > x
        let i = self.gaps.partition_point(|g| g.hi <= x);
        match self.gaps.get(i) {
            Some(g) => !(g.lo < x && x < g.hi),
            None => true,
        }
    }

    /// The part of the set inside `[lo, hi]`, where `lo` and `hi` are points of
    /// the set. Omitted gaps inside the window are bounded by
    /// `min(tail_bound, window length - listed gaps)`.
    pub fn restrict(&self, lo: f64, hi: f64) -> GapSet {
        let a = self.gaps.partition_point(|g| g.lo < lo);
        let b = self.gaps.partition_point(|g| g.hi <= hi);
        let gaps: Vec<Gap> = if a < b { self.gaps[a..b].to_vec() } else { Vec::new() };
        let listed = csum(gaps.iter().map(Gap::len));
        let tail = self.tail_bound.min((hi - lo - listed).max(0.0));
        GapSet {
            hull_lo: lo,
            hull_hi: hi,
            gaps,
            tail_bound: tail,
            level_rule: None,
        }
    }

    /// Number of leading rule levels materialized as gaps, if the gap count
    /// lines up with a level boundary.
    fn materialized_levels(&self) -> Option<usize> {
        let rule = self.level_rule.as_ref()?;
        let n = self.gaps.len() as f64;
        let mut acc = 0.0;
        if n == 0.0 {
            return Some(0);
        }
        for (j, c) in rule.counts.iter().enumerate() {
            acc += c;
            if (acc - n).abs() < 0.5 {
                return Some(j + 1);
            }
            if acc > n {
                return None;
            }
        }
        None
    }
}

/// `Σ_{z} |z|^{1/t}` over the represented gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeSum {
    pub exponent: f64,
    pub value: f64,
    pub truncated: bool,
    pub tail_estimate: TailEstimate,
}

pub fn gap_sum(set: &GapSet, t: f64) -> Result<DegreeSum, GapSetError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(GapSetError::NonPositiveExponent(t));
    }
    let inv = 1.0 / t;
    let value = csum(set.gaps.iter().map(|g| g.len().powf(inv)));
    let tail_estimate = if set.tail_bound == 0.0 && set.level_rule.is_none() {
        TailEstimate::Finite(0.0)
    } else {
        match (set.level_rule.as_ref(), set.materialized_levels()) {
            (Some(rule), Some(m)) => rule.tail_from(m, t),
            _ => TailEstimate::Unknown,
        }
    };
    Ok(DegreeSum {
        exponent: t,
        value,
        truncated: set.tail_bound > 0.0,
        tail_estimate,
    })
}

/// Result of [`estimate_degree`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeEstimate {
    /// Boundary `t*` between convergent and divergent gap sums.
    Finite(f64),
    /// Every tested exponent converges.
    Infinite,
}

/// Number of trailing level ratios inspected by the ratio test.
pub const RATIO_WINDOW: usize = 8;
/// A level ratio above this counts as non-convergent.
pub const RATIO_THRESHOLD: f64 = 1.0 - 1e-3;
/// Exponent search interval for the bisection.
pub const T_SEARCH: (f64, f64) = (1e-3, 1e3);

enum LevelData {
    Rule(Vec<(f64, f64)>),
    Pseudo(Vec<Vec<f64>>),
}

impl LevelData {
    fn of(set: &GapSet) -> Option<LevelData> {
        if let Some(rule) = &set.level_rule {
            let l = rule.counts.len();
            return (l > RATIO_WINDOW).then(|| {
                LevelData::Rule(
                    rule.counts
                        .iter()
                        .zip(&rule.lengths)
                        .map(|(c, len)| (c.ln(), len.ln()))
                        .collect(),
                )
            });
        }
        let mut logs: Vec<f64> = set.gaps.iter().map(|g| g.len().ln()).collect();
        logs.sort_by(|a, b| b.total_cmp(a));
        let mut levels = Vec::new();
        let mut start = 0usize;
        let mut size = 1usize;
        while start + size <= logs.len() {
            levels.push(logs[start..start + size].to_vec());
            start += size;
            size *= 2;
        }
        (levels.len() > RATIO_WINDOW).then_some(LevelData::Pseudo(levels))
    }

    fn ln_contributions(&self, t: f64) -> Vec<f64> {
        match self {
            LevelData::Rule(v) => v.iter().map(|(lc, ll)| lc + ll / t).collect(),
            LevelData::Pseudo(levels) => levels
                .iter()
                .map(|lv| {
                    let m = lv.iter().fold(f64::NEG_INFINITY, |m, l| m.max(l / t));
                    m + csum(lv.iter().map(|l| (l / t - m).exp())).ln()
                })
                .collect(),
        }
    }

    /// Ratio test over the last `RATIO_WINDOW` level ratios.
    fn converges(&self, t: f64) -> bool {
        let c = self.ln_contributions(t);
        let lim = RATIO_THRESHOLD.ln();
        c[c.len() - RATIO_WINDOW - 1..]
            .windows(2)
            .all(|w| w[1] - w[0] <= lim)
    }
}

/// Whether `Σ|z|^{1/t}` converges for the (infinite) set, when decidable.
pub fn converges_at(set: &GapSet, t: f64) -> Option<bool> {
    if set.is_exact() {
        return Some(true);
    }
    LevelData::of(set).map(|d| d.converges(t))
}

/// Bisection estimate of `sup { t : Σ|z|^{1/t} < ∞ }` within `tol`.
pub fn estimate_degree(set: &GapSet, tol: f64) -> Result<DegreeEstimate, GapSetError> {
    if !(tol > 0.0) {
        return Err(GapSetError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if set.is_exact() {
        return Ok(DegreeEstimate::Infinite);
    }
    let data = LevelData::of(set).ok_or_else(|| {
        GapSetError::Inconclusive(format!(
            "need more than {RATIO_WINDOW} complete levels of gaps or a level rule"
        ))
    })?;
    let (mut lo, mut hi) = T_SEARCH;
    if data.converges(hi) {
        return Ok(DegreeEstimate::Infinite);
    }
    if !data.converges(lo) {
        return Ok(DegreeEstimate::Finite(0.0));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if data.converges(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DegreeEstimate::Finite(0.5 * (lo + hi)))
}

/// Continuous piecewise-linear function through `(xs[i], ys[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, GapSetError> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(GapSetError::InvalidFunction(
                "need at least two breakpoints with one value each".into(),
            ));
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) || xs.iter().chain(&ys).any(|v| !v.is_finite())
        {
            return Err(GapSetError::InvalidFunction(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        Ok(PiecewiseLinear { xs, ys })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&b| b <= x).clamp(1, self.xs.len() - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        if x == x0 {
            return y0;
        }
        if x == x1 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// `(min, max)` of the function on `[a, b]`.
    pub fn range_on(&self, a: f64, b: f64) -> (f64, f64) {
        let (fa, fb) = (self.eval(a), self.eval(b));
        let mut lo = fa.min(fb);
        let mut hi = fa.max(fb);
        let i = self.xs.partition_point(|&x| x <= a);
        for (&x, &y) in self.xs[i..].iter().zip(&self.ys[i..]) {
            if x >= b {
                break;
            }
            lo = lo.min(y);
            hi = hi.max(y);
        }
        (lo, hi)
    }
}

/// Injective assignment of image gaps to source gaps: `pairs[i]` is the index
/// of the gap of `A` matched to gap `i` of `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapMatching {
    pub pairs: Vec<usize>,
}

/// Image `B = f(A)` as a gap set together with an injective `γ : Z(B) → Z(A)`
/// such that each `z ∈ Z(B)` lies between the images of the endpoints of `γ(z)`.
///
/// Image gaps are visited in decreasing length (ties leftmost first) and
/// offered candidate source gaps leftmost first; conflicts are resolved with
/// augmenting paths, so the greedy choice is kept whenever it works.
pub fn image_and_match(
    f: &PiecewiseLinear,
    a_set: &GapSet,
) -> Result<(GapSet, GapMatching), GapSetError> {
    let (da, db) = f.domain();
    let (lo, hi) = a_set.hull();
    if lo < da || hi > db {
        return Err(GapSetError::DomainMismatch { a: da, b: db });
    }
    let mut images: Vec<(f64, f64)> = a_set
        .components()
        .into_iter()
        .map(|(l, h)| f.range_on(l, h))
        .collect();
    images.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (l, h) in images {
        match merged.last_mut() {
            Some(last) if l <= last.1 => last.1 = last.1.max(h),
            _ => merged.push((l, h)),
        }
    }
    let b_gaps: Vec<Gap> = merged.windows(2).map(|w| Gap::new(w[0].1, w[1].0)).collect();
    let b_set = make_gapset(merged[0].0, merged[merged.len() - 1].1, b_gaps, 0.0)?;

    let ends: Vec<(f64, f64)> = a_set
        .gaps()
        .iter()
        .map(|g| (f.eval(g.lo), f.eval(g.hi)))
        .collect();
    let candidates: Vec<Vec<usize>> = b_set
        .gaps()
        .iter()
        .map(|z| {
            ends.iter()
                .enumerate()
                .filter(|(_, &(fx, fy))| z.inside(fx.min(fy), fx.max(fy)))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..b_set.gaps().len()).collect();
    order.sort_by(|&i, &j| {
        b_set.gaps()[j]
            .len()
            .total_cmp(&b_set.gaps()[i].len())
            .then(i.cmp(&j))
    });

    let mut owner: Vec<Option<usize>> = vec![None; a_set.gaps().len()];
    fn augment(
        z: usize,
        cand: &[Vec<usize>],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &a in &cand[z] {
            if seen[a] {
                continue;
            }
            seen[a] = true;
            if owner[a].is_none() || augment(owner[a].unwrap(), cand, owner, seen) {
                owner[a] = Some(z);
                return true;
            }
        }
        false
    }
    for &z in &order {
        // fast path: the leftmost free candidate
        if let Some(&a) = candidates[z].iter().find(|&&a| owner[a].is_none()) {
            owner[a] = Some(z);
            continue;
        }
        let mut seen = vec![false; owner.len()];
        if !augment(z, &candidates, &mut owner, &mut seen) {
            return Err(GapSetError::MatchingFailed(z));
        }
    }
    let mut pairs = vec![usize::MAX; b_set.gaps().len()];
    for (a, o) in owner.iter().enumerate() {
        if let Some(z) = o {
            pairs[*z] = a;
        }
    }
    Ok((b_set, GapMatching { pairs }))
}

/// Points of a metric space usable as Hölder samples.
pub trait MetricPoint {
    fn dist(&self, other: &Self) -> f64;
}

impl MetricPoint for f64 {
    fn dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl MetricPoint for Vec<f64> {
    fn dist(&self, other: &Self) -> f64 {
        euclid(self, other)
    }
}

impl<const N: usize> MetricPoint for [f64; N] {
    fn dist(&self, other: &Self) -> f64 {
        euclid(self, other)
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Empirical `K` with `|ψ(b) − ψ(b')|^k ≤ K |b − b'|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderWitness {
    pub exponent: f64,
    pub modulus: f64,
    /// Indices of the maximizing sample pair, if any pair has a nonzero quotient.
    pub pair: Option<(usize, usize)>,
    pub pair_distance: f64,
    pub value_distance: f64,
}

impl HolderWitness {
    pub fn empty(k: f64) -> Self {
        HolderWitness {
            exponent: k,
            modulus: 0.0,
            pair: None,
            pair_distance: 0.0,
            value_distance: 0.0,
        }
    }

    /// Fold one pair into the running maximum.
    pub fn observe(&mut self, pair: (usize, usize), d_point: f64, d_value: f64) {
        if d_point == 0.0 {
            return;
        }
        let q = d_value.powf(self.exponent) / d_point;
        if q > self.modulus {
            self.modulus = q;
            self.pair = Some(pair);
            self.pair_distance = d_point;
            self.value_distance = d_value;
        }
    }
}

/// Maximum over all sample pairs of `|ψ(b) − ψ(b')|^k / |b − b'|`.
pub fn holder_quotient<P: MetricPoint, V: MetricPoint>(
    samples: &[(P, V)],
    k: f64,
) -> Result<HolderWitness, GapSetError> {
    if !(k > 0.0) {
        return Err(GapSetError::NonPositiveExponent(k));
    }
    if samples.len() < 2 {
        return Err(GapSetError::TooFewSamples(samples.len()));
    }
    let mut w = HolderWitness::empty(k);
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let dp = samples[i].0.dist(&samples[j].0);
            let dv = samples[i].1.dist(&samples[j].1);
            if dp == 0.0 {
                if dv != 0.0 {
                    return Err(GapSetError::NotAFunction);
                }
                continue;
            }
            w.observe((i, j), dp, dv);
        }
    }
    Ok(w)
}
