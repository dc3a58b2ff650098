//! Command-line front end: classify, curve, build, verify, sample, cantor.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::builder::{verify_construction, BuildError, ConstructionParams};
use crate::gapset::{cantor_gapset, converges_at, estimate_degree, gap_sum, DegreeEstimate, GapSet, GapSetError};
use crate::sfc::{cube_preimage, curve_point, dn_check, interval_to_cube, intervals, DyadicCube, DyadicInterval, SfcError};
use crate::target::TargetError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const MALFORMED: i32 = 1;
    pub const INCONCLUSIVE: i32 = 2;
    pub const REFUSED: i32 = 3;
    pub const FAILED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed input: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    GapSet(#[from] GapSetError),
    #[error(transparent)]
    Sfc(#[from] SfcError),
    #[error("construction refused: {0}")]
    Refused(TargetError),
    #[error(transparent)]
    Build(BuildError),
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Target(t) => CliError::Refused(t),
            other => CliError::Build(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Refused(_) => exit::REFUSED,
            _ => exit::MALFORMED,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "critval", version, about = "Gap-sum degrees and smooth functions with prescribed critical values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree estimate, gap sums and measure of a compact set.
    Classify(ClassifyArgs),
    /// Hilbert-curve codecs and the modulus check.
    Curve {
        #[command(subcommand)]
        op: CurveOp,
    },
    /// Build the construction and dump the decomposition tree.
    Build(RunArgs),
    /// Build the construction and run the verification report.
    Verify(VerifyArgs),
    /// Evaluate f and |Df| on a regular grid (CSV).
    Sample(SampleArgs),
    /// Write a middle-ratio Cantor set as GapSet JSON.
    Cantor(CantorArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file (stdout if omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// GapSet JSON or generator spec.
    #[arg(long)]
    pub input: PathBuf,
    /// Exponents at which to report gap sums and the 0_t test.
    #[arg(long = "t")]
    pub t: Vec<f64>,
    /// Bisection tolerance of the degree estimate.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Subcommand)]
pub enum CurveOp {
    /// Point of the curve at parameter t.
    Point {
        #[arg(long)]
        n: usize,
        #[arg(long = "t")]
        t: f64,
        #[arg(long, default_value_t = 16)]
        depth: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Dyadic interval (level divisible by n) to its cube.
    Encode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        index: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Dyadic cube to the interval mapped onto it.
    Decode {
        #[arg(long)]
        level: u32,
        /// Comma-separated grid corner.
        #[arg(long, value_delimiter = ',', required = true)]
        corner: Vec<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Exhaustive interval/cube round trip, nesting and adjacency at a level.
    Roundtrip {
        #[arg(long)]
        n: usize,
        /// Interval level (a multiple of n).
        #[arg(long)]
        level: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Randomized check of |f(b) - f(a)|^n <= K |b - a|.
    Modulus {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run configuration JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write the CSV grid here.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Grid covers [-extent, extent]^n.
    #[arg(long, default_value_t = 0.5)]
    pub extent: f64,
}

#[derive(Debug, Args)]
pub struct CantorArgs {
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub ratio: f64,
    #[arg(long)]
    pub depth: u32,
    #[command(flatten)]
    pub out: Output,
}

/// A target given inline or by generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Cantor { cantor: CantorSpec },
    Set(GapSet),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub ratio: f64,
    pub depth: u32,
}

impl TargetSpec {
    pub fn materialize(&self) -> Result<GapSet, GapSetError> {
        match self {
            TargetSpec::Cantor { cantor } => cantor_gapset(cantor.ratio, cantor.depth),
            TargetSpec::Set(s) => Ok(s.clone()),
        }
    }
}

/// Configuration file of `build`, `verify` and `sample`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub s: f64,
    pub depth: usize,
    pub target: TargetSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sample_budget: usize,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: &Output, text: &str) -> Result<(), CliError> {
    match &out.output {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Write {
            path: p.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn emit_json<T: Serialize>(out: &Output, v: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    emit(out, &s)
}

fn distinct(input: &Path, outputs: &[Option<&PathBuf>]) -> Result<(), CliError> {
    for o in outputs.iter().flatten() {
        if o.as_path() == input {
            return Err(CliError::Usage(format!(
                "output path {} equals the input path",
                o.display()
            )));
        }
    }
    let named: Vec<&PathBuf> = outputs.iter().flatten().copied().collect();
    for (i, a) in named.iter().enumerate() {
        if named[i + 1..].contains(a) {
            return Err(CliError::Usage(format!("output path {} given twice", a.display())));
        }
    }
    Ok(())
}

pub fn load_target(path: &Path) -> Result<GapSet, CliError> {
    let spec: TargetSpec = serde_json::from_str(&read(path)?)?;
    Ok(spec.materialize()?)
}

pub fn load_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig = serde_json::from_str(&read(&args.input)?)?;
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(s) = args.s {
        cfg.s = s;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(b) = args.budget {
        cfg.sample_budget = b;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn build(cfg: &RunConfig) -> Result<ConstructionParams, CliError> {
    let target = cfg.target.materialize()?;
    Ok(ConstructionParams::build(&target, cfg.n, cfg.s, cfg.depth)?)
}

/// The classification report and whether the estimate was conclusive.
pub fn classify_report(set: &GapSet, ts: &[f64], tol: f64) -> Result<(Value, bool), CliError> {
    let (estimate, conclusive) = match estimate_degree(set, tol) {
        Ok(DegreeEstimate::Finite(t)) => (json!(t), true),
        Ok(DegreeEstimate::Infinite) => (json!("infinity"), true),
        Err(GapSetError::Inconclusive(why)) => (json!({ "inconclusive": why }), false),
        Err(e) => return Err(e.into()),
    };
    let (lower, upper) = set.measure_bounds();
    let null = set.is_null();
    let mut sums = Vec::with_capacity(ts.len());
    let mut zero = Vec::with_capacity(ts.len());
    for &t in ts {
        sums.push(serde_json::to_value(gap_sum(set, t)?)?);
        let is_zero = if !null {
            Some(false)
        } else {
            converges_at(set, t)
        };
        zero.push(json!({ "t": t, "value": is_zero }));
    }
    let report = json!({
        "degree_estimate": estimate,
        "gap_sums": sums,
        "measure": { "lower": lower, "upper": upper, "hull_length": set.hull_len() },
        "is_zero_k": zero,
    });
    Ok((report, conclusive))
}

/// Exhaustive round trip at interval level `level`: identity, nesting in the
/// parent cube and face adjacency of consecutive cubes.
pub fn roundtrip_report(n: usize, level: u32) -> Result<Value, CliError> {
    if n == 0 || level % n as u32 != 0 {
        return Err(SfcError::LevelNotDivisible { level, n }.into());
    }
    let s = level / n as u32;
    let mut count = 0u64;
    let mut identity_failures = 0u64;
    let mut nesting_failures = 0u64;
    let mut adjacency_failures = 0u64;
    let mut prev: Option<DyadicCube> = None;
    for alpha in intervals(n, s) {
        let cube = interval_to_cube(n, alpha)?;
        if cube_preimage(&cube)? != alpha {
            identity_failures += 1;
        }
        if s > 0 {
            let parent = interval_to_cube(
                n,
                DyadicInterval {
                    level: level - n as u32,
                    index: alpha.index >> n,
                },
            )?;
            if !cube.within(&parent) {
                nesting_failures += 1;
            }
        }
        if let Some(p) = &prev {
            if !p.face_adjacent(&cube) || *p == cube {
                adjacency_failures += 1;
            }
        }
        prev = Some(cube);
        count += 1;
    }
    Ok(json!({
        "n": n,
        "level": level,
        "intervals": count,
        "identity_failures": identity_failures,
        "nesting_failures": nesting_failures,
        "adjacency_failures": adjacency_failures,
    }))
}

fn write_grid(params: &ConstructionParams, path: &Path, points: usize, extent: f64) -> Result<(), CliError> {
    let rows = params.sample_grid(points, -extent, extent)?;
    let mut text = String::new();
    for j in 0..params.n {
        text.push_str(&format!("x{},", j + 1));
    }
    text.push_str("f,grad_norm\n");
    for (x, f, g) in rows {
        for xj in x {
            text.push_str(&format!("{xj},"));
        }
        text.push_str(&format!("{f},{g}\n"));
    }
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Classify(a) => {
            distinct(&a.input, &[a.out.output.as_ref()])?;
            let set = load_target(&a.input)?;
            let (report, conclusive) = classify_report(&set, &a.t, a.tol)?;
            emit_json(&a.out, &report)?;
            Ok(if conclusive { exit::OK } else { exit::INCONCLUSIVE })
        }
        Command::Curve { op } => run_curve(op),
        Command::Build(a) => {
            distinct(&a.input, &[a.out.output.as_ref()])?;
            let cfg = load_config(&a)?;
            let params = build(&cfg)?;
            emit_json(&a.out, &params.tree)?;
            Ok(exit::OK)
        }
        Command::Verify(a) => {
            distinct(&a.run.input, &[a.run.out.output.as_ref(), a.grid.as_ref()])?;
            let cfg = load_config(&a.run)?;
            let params = build(&cfg)?;
            let report = verify_construction(&params, cfg.sample_budget, cfg.seed)?;
            emit_json(&a.run.out, &report)?;
            if let Some(g) = &a.grid {
                write_grid(&params, g, a.points, 0.5)?;
            }
            if !report.passed {
                for e in report.failures() {
                    eprintln!(
                        "check {} failed: measured {} > bound {} at {:?}",
                        e.name, e.measured, e.bound, e.witness
                    );
                }
                return Ok(exit::FAILED);
            }
            Ok(exit::OK)
        }
        Command::Sample(a) => {
            let path = a
                .run
                .out
                .output
                .clone()
                .ok_or_else(|| CliError::Usage("sample needs --output".into()))?;
            distinct(&a.run.input, &[Some(&path)])?;
            let cfg = load_config(&a.run)?;
            let params = build(&cfg)?;
            write_grid(&params, &path, a.points, a.extent)?;
            Ok(exit::OK)
        }
        Command::Cantor(a) => {
            let set = cantor_gapset(a.ratio, a.depth)?;
            emit_json(&a.out, &set)?;
            Ok(exit::OK)
        }
    }
}

fn run_curve(op: CurveOp) -> Result<i32, CliError> {
    match op {
        CurveOp::Point { n, t, depth, out } => {
            let p = curve_point(n, t, depth)?;
            emit_json(&out, &json!({ "n": n, "t": t, "depth": depth, "point": p }))?;
            Ok(exit::OK)
        }
        CurveOp::Encode { n, level, index, out } => {
            let alpha = DyadicInterval { level, index };
            let cube = interval_to_cube(n, alpha)?;
            emit_json(&out, &json!({ "interval": alpha, "cube": cube }))?;
            Ok(exit::OK)
        }
        CurveOp::Decode { level, corner, out } => {
            let cube = DyadicCube { level, corner };
            let alpha = cube_preimage(&cube)?;
            emit_json(&out, &json!({ "cube": cube, "interval": alpha }))?;
            Ok(exit::OK)
        }
        CurveOp::Roundtrip { n, level, out } => {
            let report = roundtrip_report(n, level)?;
            let clean = ["identity_failures", "nesting_failures", "adjacency_failures"]
                .iter()
                .all(|k| report[*k] == 0);
            emit_json(&out, &report)?;
            Ok(if clean { exit::OK } else { exit::FAILED })
        }
        CurveOp::Modulus { n, budget, seed, out } => {
            let check = dn_check(n, budget, seed)?;
            emit_json(&out, &check)?;
            Ok(if check.passed() { exit::OK } else { exit::FAILED })
        }
    }
}
