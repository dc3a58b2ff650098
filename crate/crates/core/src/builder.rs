//! The extension `f = r + Σ (r_i − r) h_i` over the cube tree, its
//! derivatives, the `σ_t(k)` ledger, verification and tiling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::{CantorError, CubeAddress, CubeSystem, GeomCube, GeomSchedule, Region};
use crate::gapset::GapSet;
use crate::numeric::{gauss_legendre, Jet};
use crate::target::{choose_s_sequence, decompose, DecompositionTree, ExponentSequence, TargetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("target refused: {0}")]
    Target(#[from] TargetError),
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error("derivative order {p} exceeds the maximum {max}")]
    OrderTooHigh { p: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Number of exponent levels requested from [`choose_s_sequence`].
pub const EXPONENT_LEVELS: usize = 24;
/// Depth up to which the geometric schedule is always tabulated.
pub const SCHEDULE_DEPTH: usize = 61;
/// Grid size used to measure the ramp derivative suprema.
pub const PROFILE_GRID: usize = 10_000;

const PANELS: usize = 64;
const GL_ORDER: usize = 16;

fn bump(v: f64) -> f64 {
    let e = 1.0 - v * v;
    if e <= 0.0 {
        0.0
    } else {
        (-1.0 / e).exp()
    }
}

/// Smooth monotone ramp `ρ: [0,1] → [0,1]`, `ρ(u) = ∫_{-1}^{2u-1} φ / ∫ φ`
/// with `φ(v) = exp(−1/(1−v²))`. All derivatives vanish at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Ramp {
    z: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for Ramp {
    fn default() -> Self {
        Self::new()
    }
}

impl Ramp {
    pub fn new() -> Self {
        let (nodes, weights) = gauss_legendre(GL_ORDER);
        let mut r = Ramp {
            z: 1.0,
            nodes,
            weights,
        };
        r.z = r.integral(-1.0, 1.0);
        r
    }

    /// `∫ φ` over `[-1, 1]`.
    pub fn normalizer(&self) -> f64 {
        self.z
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        let h = (b - a) / PANELS as f64;
        let mut acc = 0.0;
        for i in 0..PANELS {
            let mid = a + (i as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += w * bump(mid + 0.5 * h * x);
            }
        }
        0.5 * h * acc
    }

    pub fn value(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let v = 2.0 * u - 1.0;
        if v <= 0.0 {
            self.integral(-1.0, v) / self.z
        } else {
            1.0 - self.integral(v, 1.0) / self.z
        }
    }

    /// `ρ^{(q)}(u)`.
    pub fn derivative(&self, u: f64, q: usize) -> f64 {
        if q == 0 {
            return self.value(u);
        }
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let v = 2.0 * u - 1.0;
        2f64.powi(q as i32) * bump_derivatives(v, q - 1)[q - 1] / self.z
    }

    /// `ρ^{(q)}(u)` for `q = 0..=p`.
    pub fn derivatives(&self, u: f64, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; p + 1];
        out[0] = self.value(u);
        if p == 0 || u <= 0.0 || u >= 1.0 {
            return out;
        }
        let v = 2.0 * u - 1.0;
        let phi = bump_derivatives(v, p - 1);
        let mut scale = 1.0;
        for q in 1..=p {
            scale *= 2.0;
            out[q] = scale * phi[q - 1] / self.z;
        }
        out
    }
}

/// `φ^{(m)}(v)` for `m = 0..=order`.
fn bump_derivatives(v: f64, order: usize) -> Vec<f64> {
    let e = 1.0 - v * v;
    // e^{-1/e} times a polynomial in 1/e is below 1e-200 here
    if e <= 1.0 / 600.0 {
        return vec![0.0; order + 1];
    }
    let x = Jet::variable(v, order);
    let one = Jet::constant(1.0, order);
    let jet = (&one - &(&x * &x)).recip().scale(-1.0).exp();
    (0..=order).map(|k| jet.derivative(k)).collect()
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Plateau functions `h_i` as coordinate products of the ramp, with the
/// measured constants `R_q = sup |ρ^{(q)}|` and `M_p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateauSpec {
    pub n: usize,
    pub p_max: usize,
    /// `R_q` for `q = 0..=p_max`.
    pub ramp_sup: Vec<f64>,
    /// `M_p` for `p = 0..=p_max` (Frobenius norm of the derivative tensor).
    pub m: Vec<f64>,
    #[serde(skip)]
    ramp: Ramp,
}

/// Relative margin added to the measured ramp suprema.
const SUP_MARGIN: f64 = 1e-9;

impl PlateauSpec {
    pub fn new(n: usize, p_max: usize) -> Self {
        let ramp = Ramp::new();
        let mut ramp_sup = vec![1.0; p_max + 1];
        for (q, slot) in ramp_sup.iter_mut().enumerate().skip(1) {
            let grid: Vec<f64> = (0..PROFILE_GRID)
                .map(|i| ramp.derivative(i as f64 / (PROFILE_GRID - 1) as f64, q).abs())
                .collect();
            let (imax, _) = grid
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            let step = 1.0 / (PROFILE_GRID - 1) as f64;
            let lo = (imax as f64 - 1.0).max(0.0) * step;
            let hi = ((imax + 1) as f64 * step).min(1.0);
            let refined = golden_max(|u| ramp.derivative(u, q).abs(), lo, hi);
            *slot = grid[imax].max(refined) * (1.0 + SUP_MARGIN);
        }
        let m = (0..=p_max).map(|p| tensor_bound(n, p, &ramp_sup)).collect();
        PlateauSpec {
            n,
            p_max,
            ramp_sup,
            m,
            ramp,
        }
    }

    pub fn ramp(&self) -> &Ramp {
        &self.ramp
    }

    /// `η^{(q)}(x)` for `q = 0..=p` of the 1-D plateau equal to 1 on
    /// `|x − c| ≤ a` and vanishing beyond `a + w`.
    pub fn profile(&self, x: f64, c: f64, a: f64, w: f64, p: usize) -> Vec<f64> {
        let d = (x - c).abs();
        let mut out = vec![0.0; p + 1];
        if d <= a {
            out[0] = 1.0;
            return out;
        }
        if d >= a + w {
            return out;
        }
        let u = (a + w - d) / w;
        let rho = self.ramp.derivatives(u, p);
        let step = if x > c { -1.0 / w } else { 1.0 / w };
        let mut scale = 1.0;
        for q in 0..=p {
            out[q] = rho[q] * scale;
            scale *= step;
        }
        out
    }
}

/// `sqrt(Σ over index tuples of Π_j R_{α_j}²)`.
fn tensor_bound(n: usize, p: usize, r: &[f64]) -> f64 {
    let mut total = 0.0;
    for_each_tuple(n, p, |alpha| {
        let prod: f64 = alpha.iter().map(|&a| r[a]).product();
        total += prod * prod;
    });
    total.sqrt()
}

/// Calls `f` with the multi-index (per-coordinate counts) of every ordered
/// tuple in `{0..n}^p`, in row-major order.
fn for_each_tuple(n: usize, p: usize, mut f: impl FnMut(&[usize])) {
    let total = n.pow(p as u32);
    let mut alpha = vec![0usize; n];
    for idx in 0..total {
        alpha.iter_mut().for_each(|a| *a = 0);
        let mut rest = idx;
        for _ in 0..p {
            alpha[rest % n] += 1;
            rest /= n;
        }
        f(&alpha);
    }
}

/// A derivative tensor `D^p` with `n^p` entries in row-major index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derivative {
    pub order: usize,
    pub n: usize,
    pub entries: Vec<f64>,
    /// Bound on the distance to the derivative of the limit function.
    pub error_bound: f64,
    pub region: Region,
    pub depth: usize,
}

impl Derivative {
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e * e).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub error_bound: f64,
    pub region: Region,
    pub depth: usize,
}

/// One `(p, sup ‖D^p h_i‖ on the grid, M_p π_{k+1}^{-p})` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauBound {
    pub p: usize,
    pub measured: f64,
    pub bound: f64,
}

/// Grid measurement of condition (3) for the children of a depth-`k` cube,
/// together with `max Σ_i h_i` over a grid of the parent (condition (2)).
pub fn plateau_bounds(spec: &PlateauSpec, sched: &GeomSchedule, k: usize) -> (Vec<PlateauBound>, f64) {
    let n = spec.n;
    let a = sched.plateau_half(k);
    let w = sched.ramp_width(k);
    let b = a + w;
    let pi = sched.pi(k + 1);
    // per-axis grid over the support of one child (centred at 0)
    let per_axis = ((PROFILE_GRID as f64).powf(1.0 / n as f64).ceil() as usize).max(3);
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -b + 2.0 * b * i as f64 / (per_axis - 1) as f64)
        .collect();
    let profiles: Vec<Vec<f64>> = axis
        .iter()
        .map(|&x| spec.profile(x, 0.0, a, w, spec.p_max))
        .collect();
    let mut rows: Vec<PlateauBound> = (0..=spec.p_max)
        .map(|p| PlateauBound {
            p,
            measured: 0.0,
            bound: spec.m[p] * pi.powi(-(p as i32)),
        })
        .collect();
    let points = per_axis.pow(n as u32);
    let mut idx = vec![0usize; n];
    for flat in 0..points {
        let mut rest = flat;
        for slot in idx.iter_mut() {
            *slot = rest % per_axis;
            rest /= per_axis;
        }
        for (p, row) in rows.iter_mut().enumerate() {
            let mut total = 0.0;
            let mut tuple_index = 0usize;
            for_each_tuple(n, p, |alpha| {
                let _ = tuple_index;
                let prod: f64 = (0..n).map(|j| profiles[idx[j]][alpha[j]]).product();
                total += prod * prod;
                tuple_index += 1;
            });
            row.measured = row.measured.max(total.sqrt());
        }
    }
    // Σ_i h_i over a grid of the parent cube (side L_k, centred at 0)
    let side = sched.side(k);
    let per_axis = ((4000f64).powf(1.0 / n as f64).ceil() as usize).max(3);
    let mut max_sum: f64 = 0.0;
    let mut x = vec![0.0; n];
    for flat in 0..per_axis.pow(n as u32) {
        let mut rest = flat;
        for xj in x.iter_mut() {
            *xj = side * ((rest % per_axis) as f64 / (per_axis - 1) as f64 - 0.5);
            rest /= per_axis;
        }
        let mut sum = 0.0;
        for letter in 0..(1u32 << n) {
            let h: f64 = (0..n)
                .map(|j| {
                    let c = if letter >> j & 1 == 1 { 0.25 * side } else { -0.25 * side };
                    spec.profile(x[j], c, a, w, 0)[0]
                })
                .product();
            sum += h;
        }
        max_sum = max_sum.max(sum);
    }
    (rows, max_sum)
}

/// `σ_t(k) = 2^{-(sn+t)k/2} π_{k+1}^{-t}`.
pub fn sigma(t: f64, k: usize, sn: f64, sched: &GeomSchedule) -> f64 {
    (-(sn + t) * k as f64 * 0.5 * std::f64::consts::LN_2 - t * sched.pi(k + 1).ln()).exp()
}

/// Everything needed to evaluate the truncated construction.
#[derive(Debug, Clone)]
pub struct ConstructionParams {
    pub n: usize,
    pub s: f64,
    pub p: usize,
    pub depth: usize,
    pub seq: ExponentSequence,
    pub tree: DecompositionTree,
    pub cubes: CubeSystem,
    pub plateau: PlateauSpec,
}

enum Resolved {
    Outside,
    Undecided(CubeAddress),
    Shell {
        address: CubeAddress,
        child_center: Vec<f64>,
        letter: u32,
        on_plateau: bool,
    },
}

impl ConstructionParams {
    /// Build the construction for `target` in dimension `n` with smoothness
    /// parameter `s`, materialized to `depth`.
    pub fn build(target: &GapSet, n: usize, s: f64, depth: usize) -> Result<Self, BuildError> {
        let seq = choose_s_sequence(s, n, target, EXPONENT_LEVELS)?;
        let tree = decompose(target, n, depth, &seq)?;
        let cubes = CubeSystem::new(n, SCHEDULE_DEPTH.max(depth + 2))?;
        let p = seq.p as usize;
        Ok(ConstructionParams {
            n,
            s,
            p,
            depth,
            plateau: PlateauSpec::new(n, p + 1),
            seq,
            tree,
            cubes,
        })
    }

    pub fn sn(&self) -> f64 {
        self.s * self.n as f64
    }

    pub fn schedule(&self) -> &GeomSchedule {
        self.cubes.schedule()
    }

    pub fn sigma(&self, t: f64, k: usize) -> f64 {
        sigma(t, k, self.sn(), self.schedule())
    }

    /// `(P + sn) / 2n`, the exponent turning `G` into a diameter bound.
    pub fn diam_exponent(&self) -> f64 {
        (self.p as f64 + self.sn()) / (2.0 * self.n as f64)
    }

    /// `M′ = M^{(P+sn)/2n}`.
    pub fn m_prime(&self) -> f64 {
        self.tree.m_bound.powf(self.diam_exponent())
    }

    /// `M′_p = M_p M′`.
    pub fn m_prime_p(&self, p: usize) -> f64 {
        self.plateau.m[p] * self.m_prime()
    }

    fn resolve(&self, x: &[f64]) -> Result<Resolved, BuildError> {
        let (address, region) = self.cubes.locate(x, self.depth)?;
        match region {
            Region::Outside => Ok(Resolved::Outside),
            Region::Undecided => Ok(Resolved::Undecided(address)),
            Region::Shell | Region::Plateau { .. } => {
                let k = address.depth();
                let cube = self.cubes.cube_of(&address)?;
                let letter = 1 + x
                    .iter()
                    .zip(&cube.center)
                    .enumerate()
                    .map(|(j, (xi, c))| ((xi > c) as u32) << j)
                    .sum::<u32>();
                let child = self.cubes.child_cube(&cube, k, letter);
                Ok(Resolved::Shell {
                    address,
                    child_center: child.center,
                    letter,
                    on_plateau: matches!(region, Region::Plateau { .. }),
                })
            }
        }
    }

    fn node_r(&self, address: &CubeAddress) -> (f64, f64) {
        let nd = self.tree.node(address).expect("address within the tree");
        (nd.r, nd.diam())
    }

    pub fn eval_f(&self, x: &[f64]) -> Result<EvalResult, BuildError> {
        Ok(match self.resolve(x)? {
            Resolved::Outside => EvalResult {
                value: self.tree.root().r,
                error_bound: 0.0,
                region: Region::Outside,
                depth: 0,
            },
            Resolved::Undecided(a) => {
                let (r, diam) = self.node_r(&a);
                EvalResult {
                    value: r,
                    error_bound: diam,
                    region: Region::Undecided,
                    depth: a.depth(),
                }
            }
            Resolved::Shell {
                address,
                child_center,
                letter,
                on_plateau,
            } => {
                let k = address.depth();
                let (r, _) = self.node_r(&address);
                let (ri, _) = self.node_r(&address.child(letter));
                let sched = self.schedule();
                let (a, w) = (sched.plateau_half(k), sched.ramp_width(k));
                let value = if on_plateau {
                    ri
                } else {
                    let h: f64 = x
                        .iter()
                        .zip(&child_center)
                        .map(|(&xj, &cj)| self.plateau.profile(xj, cj, a, w, 0)[0])
                        .product();
                    if h == 0.0 {
                        r
                    } else {
                        r + (ri - r) * h
                    }
                };
                EvalResult {
                    value,
                    error_bound: 0.0,
                    region: if on_plateau {
                        Region::Plateau { child: letter }
                    } else {
                        Region::Shell
                    },
                    depth: k,
                }
            }
        })
    }

    /// `D^p f(x)` for `p ≤ P`.
    pub fn eval_grad(&self, x: &[f64], p: usize) -> Result<Derivative, BuildError> {
        if p > self.p {
            return Err(BuildError::OrderTooHigh { p, max: self.p });
        }
        self.eval_derivative(x, p)
    }

    /// `D^p` of the truncated function for any `p ≤ p_max`.
    pub fn eval_derivative(&self, x: &[f64], p: usize) -> Result<Derivative, BuildError> {
        if p > self.plateau.p_max {
            return Err(BuildError::OrderTooHigh {
                p,
                max: self.plateau.p_max,
            });
        }
        let n = self.n;
        let len = n.pow(p as u32);
        let zero = |region, depth, error_bound| Derivative {
            order: p,
            n,
            entries: vec![0.0; len],
            error_bound,
            region,
            depth,
        };
        if p == 0 {
            let e = self.eval_f(x)?;
            return Ok(Derivative {
                order: 0,
                n,
                entries: vec![e.value],
                error_bound: e.error_bound,
                region: e.region,
                depth: e.depth,
            });
        }
        Ok(match self.resolve(x)? {
            Resolved::Outside => zero(Region::Outside, 0, 0.0),
            Resolved::Undecided(a) => {
                let bound = if p <= self.p {
                    self.m_prime_p(p) * self.sigma(p as f64, a.depth())
                } else {
                    f64::INFINITY
                };
                zero(Region::Undecided, a.depth(), bound)
            }
            Resolved::Shell {
                address,
                letter,
                on_plateau: true,
                ..
            } => zero(Region::Plateau { child: letter }, address.depth(), 0.0),
            Resolved::Shell {
                address,
                child_center,
                letter,
                on_plateau: false,
            } => {
                let k = address.depth();
                let (r, _) = self.node_r(&address);
                let (ri, _) = self.node_r(&address.child(letter));
                let sched = self.schedule();
                let (a, w) = (sched.plateau_half(k), sched.ramp_width(k));
                let prof: Vec<Vec<f64>> = x
                    .iter()
                    .zip(&child_center)
                    .map(|(&xj, &cj)| self.plateau.profile(xj, cj, a, w, p))
                    .collect();
                let mut entries = Vec::with_capacity(len);
                for_each_tuple(n, p, |alpha| {
                    let prod: f64 = (0..n).map(|j| prof[j][alpha[j]]).product();
                    entries.push((ri - r) * prod);
                });
                Derivative {
                    order: p,
                    n,
                    entries,
                    error_bound: 0.0,
                    region: Region::Shell,
                    depth: k,
                }
            }
        })
    }

    /// Rows `(x, f(x), ‖Df(x)‖)` over a regular grid of `[lo, hi]^n` with
    /// `m` points per axis.
    pub fn sample_grid(&self, m: usize, lo: f64, hi: f64) -> Result<Vec<(Vec<f64>, f64, f64)>, BuildError> {
        if m < 2 {
            return Err(BuildError::InvalidParameter("grid needs at least 2 points per axis".into()));
        }
        let mut rows = Vec::with_capacity(m.pow(self.n as u32));
        let mut x = vec![0.0; self.n];
        for flat in 0..m.pow(self.n as u32) {
            let mut rest = flat;
            for xj in x.iter_mut() {
                *xj = lo + (hi - lo) * (rest % m) as f64 / (m - 1) as f64;
                rest /= m;
            }
            let f = self.eval_f(&x)?.value;
            let g = self.eval_derivative(&x, 1)?.norm();
            rows.push((x.clone(), f, g));
        }
        Ok(rows)
    }
}

/// One line of a [`VerificationReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    pub bound: f64,
    pub measured: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

/// Constants entering the estimate chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConstants {
    pub n: usize,
    pub s: f64,
    pub p: usize,
    pub depth: usize,
    pub m: f64,
    pub m_by_depth: Vec<f64>,
    pub m_p: Vec<f64>,
    pub m_prime: f64,
    pub m_prime_p: Vec<f64>,
    /// `(t, M″_P)` pairs.
    pub m_double_prime: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub sample_budget: usize,
    pub seed: u64,
    pub constants: ReportConstants,
    pub entries: Vec<ReportEntry>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

/// Boundary tolerance for the flatness check.
pub const FLATNESS_TOL: f64 = 1e-12;

fn entry(name: impl Into<String>, bound: f64, measured: f64, pass: bool, witness: Option<Vec<f64>>) -> ReportEntry {
    ReportEntry {
        name: name.into(),
        bound,
        measured,
        pass,
        witness: if pass { None } else { witness },
    }
}

/// `num / den` with `0 / 0 = 0`.
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Track the largest ratio and where it happened.
struct Worst {
    ratio: f64,
    at: Option<Vec<f64>>,
}

impl Worst {
    fn new() -> Self {
        Worst { ratio: 0.0, at: None }
    }

    fn see(&mut self, ratio: f64, x: &[f64]) {
        if ratio > self.ratio || ratio.is_nan() {
            self.ratio = ratio;
            self.at = Some(x.to_vec());
        }
    }

    fn into_entry(self, name: impl Into<String>, bound: f64) -> ReportEntry {
        let pass = self.ratio <= bound;
        entry(name, bound, self.ratio, pass, self.at)
    }
}

fn random_address(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CubeAddress {
    CubeAddress((0..k).map(|_| rng.gen_range(1..=(1u32 << n))).collect())
}

fn uniform_in(rng: &mut ChaCha8Rng, cube: &GeomCube) -> Vec<f64> {
    let h = 0.5 * cube.side;
    cube.center.iter().map(|c| c + rng.gen_range(-h..=h)).collect()
}

/// A point whose max-norm distance to `center` lies in `[a, b]`.
fn in_ramp(rng: &mut ChaCha8Rng, center: &[f64], a: f64, b: f64) -> Vec<f64> {
    let axis = rng.gen_range(0..center.len());
    center
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if j == axis {
                let d = a + rng.gen::<f64>() * (b - a);
                if rng.gen::<bool>() {
                    c + d
                } else {
                    c - d
                }
            } else {
                c + rng.gen_range(-b..=b)
            }
        })
        .collect()
}

/// Run the structural checks and, with a positive budget, the sampled ones.
pub fn verify_construction(params: &ConstructionParams, budget: usize, seed: u64) -> Result<VerificationReport, BuildError> {
    let n = params.n;
    let d = params.depth;
    let pp = params.p;
    let sched = params.schedule().clone();
    let tree = &params.tree;
    let mut entries = Vec::new();

    // (i) mapping and prescription at the centres of the depth-d cubes
    let leaves = tree.level(d);
    let mut mapping = Worst::new();
    let mut prescription_ok = true;
    let mut prescription_witness = None;
    for (ord, leaf) in leaves.iter().enumerate() {
        let a = CubeAddress::from_ordinal(n, d, ord);
        let centre = params.cubes.cube_of(&a)?.center;
        let v = params.eval_f(&centre)?.value;
        if v != leaf.r && prescription_ok {
            prescription_ok = false;
            prescription_witness = Some(centre.clone());
        }
        for k in 0..=d {
            let (lo, hi) = tree.node(&a.prefix(k)).unwrap().block.hull();
            let out = (lo - v).max(v - hi).max(0.0);
            mapping.see(out, &centre);
        }
    }
    entries.push(mapping.into_entry("mapping", 0.0));
    entries.push(entry(
        "prescription",
        0.0,
        if prescription_ok { 0.0 } else { 1.0 },
        prescription_ok,
        prescription_witness,
    ));

    // coverage: every listed gap endpoint of B is within diam(R(a_d)) of r(a_d)
    let mut hulls: Vec<(f64, f64, f64)> = leaves
        .iter()
        .map(|l| {
            let (lo, hi) = l.block.hull();
            (lo, hi, l.r)
        })
        .collect();
    hulls.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let root = &tree.root().block;
    let (blo, bhi) = root.hull();
    let endpoints = root
        .gaps()
        .iter()
        .flat_map(|g| [g.lo, g.hi])
        .chain([blo, bhi]);
    let mut coverage = Worst::new();
    for e in endpoints {
        let i = hulls.partition_point(|h| h.0 <= e);
        let ratio = hulls[..i]
            .iter()
            .rev()
            .take_while(|h| h.1 >= e || h.0 == hulls[i - 1].0)
            .map(|&(lo, hi, r)| {
                if e > hi {
                    f64::INFINITY
                } else if hi > lo {
                    (e - r).abs() / (hi - lo)
                } else if e == r {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min);
        coverage.see(ratio, &[e]);
    }
    entries.push(coverage.into_entry("coverage", 1.0));

    // continuity chain: diam R(a_k) ≤ G^{(P+sn)/2n} ≤ M′ σ_P(k) π_{k+1}^P
    let expo = params.diam_exponent();
    let mut chain_g = Worst::new();
    let mut chain_sigma = Worst::new();
    for k in 0..=d {
        let env = params.m_prime() * params.sigma(pp as f64, k) * sched.pi(k + 1).powi(pp as i32);
        for nd in tree.level(k) {
            let diam = nd.diam();
            if diam > 0.0 {
                chain_g.see(ratio(diam, nd.g.powf(expo)), &[k as f64, nd.r]);
                chain_sigma.see(ratio(diam, env), &[k as f64, nd.r]);
            }
        }
    }
    entries.push(chain_g.into_entry("diameter_vs_weighted_sum", 1.0));
    entries.push(chain_sigma.into_entry("diameter_vs_sigma", 1.0));

    // plateau conditions (2) and (3)
    let mut plateau = Worst::new();
    let mut overlap: f64 = 0.0;
    for k in 0..d {
        let (rows, max_sum) = plateau_bounds(&params.plateau, &sched, k);
        for r in rows {
            plateau.see(r.measured / r.bound, &[k as f64, r.p as f64]);
        }
        overlap = overlap.max(max_sum);
    }
    entries.push(plateau.into_entry("plateau_derivative_bounds", 1.0));
    entries.push(entry("plateau_disjoint_supports", 1.0, overlap, overlap <= 1.0, None));

    let m_double_prime: Vec<(f64, f64)> = holder_exponents(params)
        .into_iter()
        .map(|t| (t, holder_constant(params, t)))
        .collect();

    if budget > 0 && d > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sampled_checks(params, budget, &mut rng, &m_double_prime, &mut entries)?;
    }

    let constants = ReportConstants {
        n,
        s: params.s,
        p: pp,
        depth: d,
        m: tree.m_bound,
        m_by_depth: tree.m_by_depth.clone(),
        m_p: params.plateau.m.clone(),
        m_prime: params.m_prime(),
        m_prime_p: (0..=params.plateau.p_max).map(|p| params.m_prime_p(p)).collect(),
        m_double_prime,
    };
    Ok(VerificationReport {
        passed: entries.iter().all(|e| e.pass),
        sample_budget: budget,
        seed,
        constants,
        entries,
    })
}

/// Tested Hölder exponents `t ∈ (P, sn)`: `P + 0.1` and `(P + sn)/2`.
pub fn holder_exponents(params: &ConstructionParams) -> Vec<f64> {
    let p = params.p as f64;
    let mut ts = vec![p + 0.1, 0.5 * (p + params.sn())];
    ts.retain(|&t| t < params.sn());
    ts.dedup();
    ts
}

/// Envelope of `‖D^P f(y)‖ / |x − y|^{t−P}` over `x ∈ ζ ∩ Q(a_{k+1})`,
/// `y ∈ Q(a_k) \ Q(a_{k+1})`, using `|x − y| ≥ π_{k+1}`.
pub fn holder_envelope(params: &ConstructionParams, t: f64, k: usize) -> f64 {
    let sched = params.schedule();
    let pp = params.p as i32;
    let deeper = (k..params.depth)
        .map(|j| {
            let dmax = params.tree.level(j).iter().map(|nd| nd.diam()).fold(0.0, f64::max);
            sched.pi(j + 1).powi(-pp) * dmax
        })
        .fold(0.0, f64::max);
    params.plateau.m[params.p] * sched.pi(k + 1).powf(-(t - params.p as f64)) * deeper
}

/// `M″_P = max_k envelope_k / σ_t(k+1)` over the materialized shells.
pub fn holder_constant(params: &ConstructionParams, t: f64) -> f64 {
    (0..params.depth)
        .map(|k| holder_envelope(params, t, k) / params.sigma(t, k + 1))
        .fold(0.0, f64::max)
}

fn sampled_checks(
    params: &ConstructionParams,
    budget: usize,
    rng: &mut ChaCha8Rng,
    m_double_prime: &[(f64, f64)],
    entries: &mut Vec<ReportEntry>,
) -> Result<(), BuildError> {
    let n = params.n;
    let d = params.depth;
    let pp = params.p;
    let sched = params.schedule().clone();

    // derivative bounds on the shells
    let deriv_samples = budget / 2;
    let mut per_shell: Vec<Worst> = (0..=pp).map(|_| Worst::new()).collect();
    let mut per_sigma: Vec<Worst> = (0..=pp).map(|_| Worst::new()).collect();
    for _ in 0..deriv_samples {
        let k = rng.gen_range(0..d);
        let a = random_address(rng, n, k);
        let cube = params.cubes.cube_of(&a)?;
        let y = if rng.gen::<f64>() < 0.7 {
            let letter = rng.gen_range(1..=(1u32 << n));
            let child = params.cubes.child_cube(&cube, k, letter);
            in_ramp(rng, &child.center, sched.plateau_half(k), sched.support_half(k))
        } else {
            uniform_in(rng, &cube)
        };
        for p in 1..=pp {
            let dv = params.eval_grad(&y, p)?;
            if dv.region != Region::Shell {
                continue;
            }
            let (ya, _) = params.cubes.locate(&y, d)?;
            let diam = params.tree.node(&ya).unwrap().diam();
            let kk = ya.depth();
            let apriori = params.plateau.m[p] * sched.pi(kk + 1).powi(-(p as i32)) * diam;
            let norm = dv.norm();
            per_shell[p].see(ratio(norm, apriori), &y);
            per_sigma[p].see(ratio(norm, params.m_prime_p(p) * params.sigma(p as f64, kk)), &y);
        }
    }
    for p in 1..=pp {
        let w = std::mem::replace(&mut per_shell[p], Worst::new());
        entries.push(w.into_entry(format!("derivative_shell_bound_p{p}"), 1.0));
        let w = std::mem::replace(&mut per_sigma[p], Worst::new());
        entries.push(w.into_entry(format!("derivative_sigma_bound_p{p}"), 1.0));
    }

    // rank: D^p f = 0 on ζ up to M′_p σ_p(d)
    let zeta_samples = (budget / 8).max(1);
    let mut zeta: Vec<Worst> = (0..=pp).map(|_| Worst::new()).collect();
    for _ in 0..zeta_samples {
        let a = random_address(rng, n, d);
        let x = uniform_in(rng, &params.cubes.cube_of(&a)?);
        for p in 1..=pp {
            let bound = params.m_prime_p(p) * params.sigma(p as f64, d);
            zeta[p].see(ratio(params.eval_grad(&x, p)?.norm(), bound), &x);
        }
    }
    for (p, w) in zeta.into_iter().enumerate().skip(1) {
        entries.push(w.into_entry(format!("zeta_derivative_p{p}"), 1.0));
    }

    // Hölder ledger for D^P
    let holder_samples = budget / 4;
    for &(t, mpp) in m_double_prime {
        let theta = t - pp as f64;
        let mut vs_sigma = Worst::new();
        let mut vs_env = Worst::new();
        let mut sep = Worst::new();
        for _ in 0..holder_samples.max(1) {
            let leaf = random_address(rng, n, d);
            let x = params.cubes.cube_of(&leaf)?.center;
            let k = rng.gen_range(0..d);
            let parent = params.cubes.cube_of(&leaf.prefix(k))?;
            let inner = params.cubes.cube_of(&leaf.prefix(k + 1))?;
            let mut y = if rng.gen::<f64>() < 0.7 {
                let letter = rng.gen_range(1..=(1u32 << n));
                let child = params.cubes.child_cube(&parent, k, letter);
                in_ramp(rng, &child.center, sched.plateau_half(k), sched.support_half(k))
            } else {
                uniform_in(rng, &parent)
            };
            let mut tries = 0;
            while inner.contains(&y) && tries < 16 {
                y = uniform_in(rng, &parent);
                tries += 1;
            }
            if inner.contains(&y) {
                continue;
            }
            let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            sep.see(sched.pi(k + 1) / dist, &y);
            let (dy, dx) = (params.eval_grad(&y, pp)?, params.eval_grad(&x, pp)?);
            let num = dy
                .entries
                .iter()
                .zip(&dx.entries)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let q = num / dist.powf(theta);
            vs_env.see(ratio(q, holder_envelope(params, t, k)), &y);
            vs_sigma.see(ratio(q, mpp * params.sigma(t, k + 1)), &y);
        }
        entries.push(sep.into_entry(format!("holder_separation_t{t:.3}"), 1.0));
        entries.push(vs_env.into_entry(format!("holder_envelope_t{t:.3}"), 1.0));
        entries.push(vs_sigma.into_entry(format!("holder_sigma_t{t:.3}"), 1.0));
    }

    // boundary flatness on ∂Q(a_k)
    let faces = (budget / 8).max(1);
    let mut flat = Worst::new();
    for _ in 0..faces {
        let k = rng.gen_range(0..=d);
        let cube = params.cubes.cube_of(&random_address(rng, n, k))?;
        let mut x = uniform_in(rng, &cube);
        let axis = rng.gen_range(0..n);
        let sign = if rng.gen::<bool>() { 0.5 } else { -0.5 };
        x[axis] = cube.center[axis] + sign * cube.side;
        for p in 1..=params.plateau.p_max {
            let m = params
                .eval_derivative(&x, p)?
                .entries
                .iter()
                .fold(0.0f64, |acc, e| acc.max(e.abs()));
            flat.see(m, &x);
        }
    }
    let mut e = flat.into_entry("boundary_flatness", FLATNESS_TOL);
    e.pass = e.measured <= FLATNESS_TOL;
    entries.push(e);
    Ok(())
}

/// One unit cube of a tiling with its construction.
#[derive(Debug, Clone)]
pub struct Tile {
    pub center: Vec<f64>,
    pub params: ConstructionParams,
}

/// Tiles centred at `(2i, 0, …, 0)`; between them `F` depends on `x_0` only
/// and ramps between the outside constants of neighbouring tiles.
#[derive(Debug, Clone)]
pub struct Tiling {
    pub n: usize,
    pub tiles: Vec<Tile>,
    ramp: Ramp,
}

/// Distance between consecutive tile centres.
pub const TILE_SPACING: f64 = 2.0;

pub fn tile_assembly(targets: &[GapSet], n: usize, s: f64, depth: usize) -> Result<Tiling, BuildError> {
    let tiles = targets
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut center = vec![0.0; n];
            center[0] = TILE_SPACING * i as f64;
            Ok(Tile {
                center,
                params: ConstructionParams::build(b, n, s, depth)?,
            })
        })
        .collect::<Result<Vec<_>, BuildError>>()?;
    Ok(Tiling {
        n,
        tiles,
        ramp: Ramp::new(),
    })
}

impl Tiling {
    fn tile_at(&self, x: &[f64]) -> Option<&Tile> {
        let i = (x[0] / TILE_SPACING).round();
        if i < 0.0 || i as usize >= self.tiles.len() {
            return None;
        }
        let t = &self.tiles[i as usize];
        t.center
            .iter()
            .zip(x)
            .all(|(c, xi)| (xi - c).abs() <= 0.5)
            .then_some(t)
    }

    fn outside(&self, tile: usize) -> f64 {
        self.tiles[tile].params.tree.root().r
    }

    /// Between the tiles: `(c_i, c_{i+1}, u)` with `F = c_i + (c_{i+1} − c_i) ρ(u)`.
    fn seam(&self, x0: f64) -> (f64, f64, f64) {
        let last = self.tiles.len() - 1;
        let pos = x0 / TILE_SPACING;
        if pos <= 0.0 {
            return (self.outside(0), self.outside(0), 0.0);
        }
        if pos >= last as f64 {
            return (self.outside(last), self.outside(last), 0.0);
        }
        let i = pos.floor() as usize;
        let u = x0 - TILE_SPACING * i as f64 - 0.5;
        (self.outside(i), self.outside(i + 1), u)
    }

    pub fn eval(&self, x: &[f64]) -> Result<EvalResult, BuildError> {
        if self.tiles.is_empty() || x.len() != self.n {
            return Err(BuildError::InvalidParameter("empty tiling or dimension mismatch".into()));
        }
        if let Some(t) = self.tile_at(x) {
            let local: Vec<f64> = x.iter().zip(&t.center).map(|(a, c)| a - c).collect();
            return t.params.eval_f(&local);
        }
        let (a, b, u) = self.seam(x[0]);
        Ok(EvalResult {
            value: if a == b { a } else { a + (b - a) * self.ramp.value(u) },
            error_bound: 0.0,
            region: Region::Outside,
            depth: 0,
        })
    }

    pub fn eval_derivative(&self, x: &[f64], p: usize) -> Result<Derivative, BuildError> {
        if self.tiles.is_empty() || x.len() != self.n {
            return Err(BuildError::InvalidParameter("empty tiling or dimension mismatch".into()));
        }
        if let Some(t) = self.tile_at(x) {
            let local: Vec<f64> = x.iter().zip(&t.center).map(|(a, c)| a - c).collect();
            return t.params.eval_derivative(&local, p);
        }
        let (a, b, u) = self.seam(x[0]);
        let mut entries = vec![0.0; self.n.pow(p as u32)];
        entries[0] = if p == 0 {
            a + (b - a) * self.ramp.value(u)
        } else {
            (b - a) * self.ramp.derivative(u, p)
        };
        Ok(Derivative {
            order: p,
            n: self.n,
            entries,
            error_bound: 0.0,
            region: Region::Outside,
            depth: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapset::cantor_gapset;
    use approx::assert_relative_eq;

    fn thirds_params(n: usize, s: f64, depth: usize) -> ConstructionParams {
        ConstructionParams::build(&cantor_gapset(1.0 / 3.0, 14).unwrap(), n, s, depth).unwrap()
    }

    #[test]
    fn ramp_shape() {
        let r = Ramp::new();
        assert_relative_eq!(r.normalizer(), 0.443_993_816_168_079_4, max_relative = 1e-12);
        assert_eq!(r.value(0.0), 0.0);
        assert_eq!(r.value(1.0), 1.0);
        assert_relative_eq!(r.value(0.5), 0.5, epsilon = 1e-14);
        assert_relative_eq!(r.value(0.3) + r.value(0.7), 1.0, epsilon = 1e-14);
        for q in 1..5 {
            assert_eq!(r.derivative(1e-4, q), 0.0);
        }
        // central differences of the value and of each derivative
        let h = 1e-5;
        for &u in &[0.2, 0.45, 0.61, 0.8] {
            let fd = (r.value(u + h) - r.value(u - h)) / (2.0 * h);
            assert_relative_eq!(fd, r.derivative(u, 1), max_relative = 1e-7);
            for q in 1..4 {
                let fd = (r.derivative(u + h, q) - r.derivative(u - h, q)) / (2.0 * h);
                assert_relative_eq!(fd, r.derivative(u, q + 1), max_relative = 1e-5, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn plateau_constants() {
        let spec = PlateauSpec::new(1, 3);
        assert_eq!(spec.m[0], 1.0);
        // ρ' peaks at u = 1/2 with value 2 φ(0) / Z
        assert_relative_eq!(
            spec.ramp_sup[1],
            2.0 * (-1f64).exp() / Ramp::new().normalizer(),
            max_relative = 1e-8
        );
        let spec2 = PlateauSpec::new(2, 2);
        // n = 2, p = 1: sqrt(2) R_1; p = 2: sqrt(2 R_2² + 2 R_1⁴)
        assert_relative_eq!(spec2.m[1], 2f64.sqrt() * spec2.ramp_sup[1], max_relative = 1e-14);
        let r = &spec2.ramp_sup;
        assert_relative_eq!(spec2.m[2], (2.0 * r[2] * r[2] + 2.0 * r[1].powi(4)).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn plateau_bounds_hold() {
        let sched = GeomSchedule::new(10);
        for n in 1..=2 {
            let spec = PlateauSpec::new(n, 2);
            for k in 0..3 {
                let (rows, max_sum) = plateau_bounds(&spec, &sched, k);
                assert_relative_eq!(rows[0].measured, 1.0);
                assert!(rows[0].bound >= 1.0);
                for r in &rows {
                    assert!(r.measured <= r.bound, "n={n} k={k} {r:?}");
                }
                assert!(max_sum <= 1.0);
            }
        }
        // transition width exceeds π_1
        assert!(sched.ramp_width(0) > sched.pi(1));
    }

    #[test]
    fn sigma_examples() {
        let sched = GeomSchedule::new(61);
        for k in 0..10 {
            assert_relative_eq!(sigma(0.0, k, 1.4, &sched), 2f64.powf(-0.7 * k as f64), max_relative = 1e-12);
        }
        let v = sigma(2.0, 1, 3.0, &sched);
        assert_relative_eq!(v, 2f64.powf(-2.5) * sched.pi(2).powi(-2), max_relative = 1e-12);
        assert_relative_eq!(sched.pi(2), 1.7432e-3, max_relative = 1e-4);
    }

    #[test]
    fn eval_examples() {
        let prm = thirds_params(1, 1.4, 4);
        let r0 = prm.tree.root().r;
        let out = prm.eval_f(&[0.8]).unwrap();
        assert_eq!((out.value, out.error_bound, out.region), (r0, 0.0, Region::Outside));
        assert_eq!(prm.eval_f(&[0.0]).unwrap().value, r0);
        let sched = prm.schedule();
        for letter in 1..=2u32 {
            let c = if letter == 1 { -0.25 } else { 0.25 };
            let x = c + sched.child_half(0) + 0.1 * (sched.plateau_half(0) - sched.child_half(0));
            let v = prm.eval_f(&[x]).unwrap();
            assert_eq!(v.region, Region::Plateau { child: letter });
            assert_eq!(v.value, prm.tree.level(1)[letter as usize - 1].r);
        }
        assert!(matches!(
            prm.eval_grad(&[0.1], 2),
            Err(BuildError::OrderTooHigh { p: 2, max: 1 })
        ));
        assert!(prm.eval_grad(&[0.9], 1).unwrap().norm() == 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for n in 1..=2 {
            let prm = thirds_params(n, 1.5, 3);
            let sched = prm.schedule().clone();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let mut checked = 0;
            for _ in 0..400 {
                let k = rng.gen_range(0..3);
                let a = random_address(&mut rng, n, k);
                let cube = prm.cubes.cube_of(&a).unwrap();
                let child = prm.cubes.child_cube(&cube, k, rng.gen_range(1..=(1u32 << n)));
                let y = in_ramp(&mut rng, &child.center, sched.plateau_half(k), sched.support_half(k));
                let d1 = prm.eval_derivative(&y, 1).unwrap();
                // deep in the flat part of the ramp the values are below f64 resolution
                if d1.region != Region::Shell || d1.norm() < 1e-6 {
                    continue;
                }
                let h = 1e-6 * sched.side(k);
                // natural scales Δr R_p / w^p with Δr ≤ diam B = 1
                let w = sched.ramp_width(k);
                let char1 = prm.plateau.ramp_sup[1] / w;
                let char2 = prm.plateau.ramp_sup[2] / (w * w);
                for j in 0..n {
                    let mut yp = y.clone();
                    let mut ym = y.clone();
                    yp[j] += h;
                    ym[j] -= h;
                    let fd = (prm.eval_f(&yp).unwrap().value - prm.eval_f(&ym).unwrap().value) / (2.0 * h);
                    assert!((fd - d1.entries[j]).abs() <= 1e-7 * char1, "n={n} fd={fd} an={}", d1.entries[j]);
                    // second order from first derivatives
                    let d2 = prm.eval_derivative(&y, 2).unwrap();
                    let g_p = prm.eval_derivative(&yp, 1).unwrap();
                    let g_m = prm.eval_derivative(&ym, 1).unwrap();
                    for i in 0..n {
                        let fd2 = (g_p.entries[i] - g_m.entries[i]) / (2.0 * h);
                        let an = d2.entries[i * n + j];
                        assert!((fd2 - an).abs() <= 1e-7 * char2, "fd2={fd2} an={an}");
                    }
                }
                checked += 1;
            }
            assert!(checked > 50);
        }
    }

    #[test]
    fn singleton_target_is_constant() {
        let b = GapSet::singleton(0.25);
        let prm = ConstructionParams::build(&b, 2, 1.5, 3).unwrap();
        for x in [[0.0, 0.0], [0.3, -0.2], [-0.25, -0.25], [0.9, 0.0]] {
            assert_eq!(prm.eval_f(&x).unwrap().value, 0.25);
        }
        let rep = verify_construction(&prm, 500, 1).unwrap();
        assert!(rep.passed, "{:#?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn zero_budget_is_structural_only() {
        let prm = thirds_params(1, 1.4, 3);
        let rep = verify_construction(&prm, 0, 1).unwrap();
        assert!(rep.passed);
        let names: Vec<&str> = rep.entries.iter().map(|e| e.name.as_str()).collect();
        assert!(names.contains(&"mapping") && names.iter().all(|n| !n.starts_with("holder")));
    }

    #[test]
    fn tiling_is_flat_at_faces() {
        let a = cantor_gapset(1.0 / 3.0, 10).unwrap();
        let b = GapSet::singleton(5.0);
        let til = tile_assembly(&[a, b], 1, 1.4, 3).unwrap();
        assert_eq!(til.tiles[1].center, vec![2.0]);
        let c0 = til.tiles[0].params.tree.root().r;
        assert_eq!(til.eval(&[-3.0]).unwrap().value, c0);
        assert_eq!(til.eval(&[7.0]).unwrap().value, 5.0);
        assert_eq!(til.eval(&[2.1]).unwrap().value, 5.0);
        for x in [0.5, 0.5 + 1e-9, 1.5 - 1e-9, 1.5] {
            for p in 1..=2 {
                assert!(til.eval_derivative(&[x], p).unwrap().norm() < 1e-12);
            }
        }
        let mid = til.eval(&[1.0]).unwrap().value;
        assert_relative_eq!(mid, 0.5 * (c0 + 5.0), epsilon = 1e-12);
        assert!(tile_assembly(&[], 1, 1.4, 3).unwrap().tiles.is_empty());
    }
}
