//! The `siegel` command line.
//!
//! Exit codes: 0 on success, 1 when a computation or check fails, 2 on
//! usage errors (bad flags, unknown forms, malformed documents).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use siegel_core::ball::{Ball, ComplexBall, Float, Mag};
use siegel_core::bounds::{generator_bound, truncation_bound};
use siegel_core::cosets::HeckeOperatorId;
use siegel_core::eigenform::{builtin, builtin_catalog, EigenformSpec};
use siegel_core::elliptic;
use siegel_core::engine::{
    abs_radius, assemble_tp2, round_nearest, snap, EigenvalueOptions, EigenvalueResult, Engine, GeneratorSource,
    MemorySource, Mode,
};
use siegel_core::eval::{evaluate_direct, evaluate_series, NumericSeries};
use siegel_core::generators::{igusa_generator_with, CohenTable, GeneratorId};
use siegel_core::point::{parse_decimal, EvalPoint};
use siegel_core::series::TruncatedSeries;
use siegel_core::Error;

use crate::cache::{expand_generators, parse_rational, read_series, series_to_string, CacheDir, CacheError, DiskSource};
use crate::form_doc::{parse_eigenform, FormError};
use crate::parallel::RayonExecutor;

#[derive(Parser, Debug)]
#[command(name = "siegel", version, about = "Certified Hecke eigenvalues of degree-2 Siegel eigenforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalue of a form under T_p, T_{p^2,1} or T_{p^2}.
    Eigenvalue(EigenArgs),
    /// Materialize the four generator caches up to a trace bound.
    ExpandGenerators {
        #[arg(long)]
        trace: u32,
        /// Output directory (defaults to the cache directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "SIEGEL_CACHE_DIR")]
        cache_dir: Option<PathBuf>,
    },
    /// Print coset representatives, one per line.
    ListCosets {
        #[arg(long, alias = "op", value_enum, default_value = "tp")]
        operator: CosetOp,
        #[arg(long)]
        prime: u64,
    },
    /// Run the built-in invariant checks.
    Verify,
    /// Time one eigenvalue computation and print the timing line.
    Bench(EigenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CosetOp {
    Tp,
    #[value(name = "tp2_1")]
    Tp21,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OperatorArg {
    Tp,
    #[value(name = "tp2_1")]
    Tp21,
    Tp2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Rigorous,
    Heuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Args, Debug, Clone)]
pub struct EigenArgs {
    /// Built-in form name (see `verify` output or the README).
    #[arg(long, conflicts_with = "form_file", required_unless_present = "form_file")]
    pub form: Option<String>,
    /// JSON eigenform document.
    #[arg(long)]
    pub form_file: Option<PathBuf>,
    #[arg(long)]
    pub prime: u64,
    #[arg(long, value_enum, default_value = "tp")]
    pub operator: OperatorArg,
    /// Target: normalized box radius below 10^-digits.
    #[arg(long, default_value_t = 5)]
    pub digits: u32,
    #[arg(long)]
    pub precision_bits: Option<u32>,
    #[arg(long, default_value_t = 8192)]
    pub max_precision_bits: u32,
    /// Imaginary part of z1 (decimal or n/d); z2 = z1 + i, z3 = i.
    #[arg(long)]
    pub y11: Option<String>,
    /// Uniform generator trace in heuristic mode.
    #[arg(long)]
    pub trace_bound: Option<u32>,
    #[arg(long, value_enum, default_value = "heuristic")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, env = "SIEGEL_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "off")]
    pub symmetry: Switch,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn failed(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::NotPrime(_)
            | Error::InvalidArgument(_)
            | Error::InvalidSpec(_)
            | Error::NonHomogeneous { .. }
            | Error::RootIsolation(_)
            | Error::NotPositiveDefinite => usage(e.to_string()),
            e => failed(e.to_string()),
        }
    }
}

impl From<CacheError> for Failure {
    fn from(e: CacheError) -> Failure {
        match e {
            CacheError::Core(e) => e.into(),
            e => failed(e.to_string()),
        }
    }
}

impl From<FormError> for Failure {
    fn from(e: FormError) -> Failure {
        match e {
            FormError::Invalid(e) => usage(e.to_string()),
            e => usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        failed(e.to_string())
    }
}

/// Parses arguments and runs; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Eigenvalue(a) => {
            let r = compute(&a)?;
            print_result(&a, &r, out)?;
            Ok(())
        }
        Command::Bench(a) => {
            let r = compute(&a)?;
            writeln!(out, "{}", r.timing_line())?;
            writeln!(out, "box {}", r.box_text())?;
            Ok(())
        }
        Command::ExpandGenerators { trace, out: dir, cache_dir } => {
            let dir = dir.or(cache_dir).ok_or_else(|| usage("--out or SIEGEL_CACHE_DIR is required"))?;
            let mut cache = CacheDir::open(&dir)?;
            let report = expand_generators(&mut cache, trace)?;
            if report.written.is_empty() && !report.cohen_written {
                writeln!(out, "up to date: {}", dir.display())?;
            }
            for f in &report.written {
                writeln!(out, "wrote {}", dir.join(f).display())?;
            }
            if report.cohen_written {
                writeln!(out, "wrote H table")?;
            }
            Ok(())
        }
        Command::ListCosets { operator, prime } => {
            let op = match operator {
                CosetOp::Tp => HeckeOperatorId::tp(prime)?,
                CosetOp::Tp21 => HeckeOperatorId::tp2_1(prime)?,
            };
            for r in op.reps() {
                writeln!(out, "{}\t{}", r.label, r.row_major())?;
            }
            Ok(())
        }
        Command::Verify => {
            let mut all = true;
            for (name, outcome) in verify_checks() {
                match outcome {
                    Ok(()) => writeln!(out, "PASS {name}")?,
                    Err(why) => {
                        all = false;
                        writeln!(out, "FAIL {name}: {why}")?
                    }
                }
            }
            if all {
                Ok(())
            } else {
                Err(failed("some checks failed"))
            }
        }
    }
}

/// The spec of `--form` or `--form-file`.
pub fn load_form(a: &EigenArgs) -> Result<EigenformSpec, Failure> {
    match (&a.form, &a.form_file) {
        (Some(name), None) => builtin(name).ok_or_else(|| {
            let names: Vec<String> = builtin_catalog().into_iter().map(|s| s.name).collect();
            usage(format!("unknown form `{name}`; built-in forms: {}", names.join(", ")))
        }),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok(parse_eigenform(&text)?)
        }
        _ => Err(usage("exactly one of --form and --form-file is required")),
    }
}

fn parse_y11(s: &str) -> Result<BigRational, Failure> {
    let y = if s.contains('/') { parse_rational(s) } else { parse_decimal(s) };
    y.filter(|y| y > &BigRational::zero())
        .ok_or_else(|| usage(format!("--y11 `{s}` is not a positive number")))
}

enum Source {
    Memory(MemorySource),
    Disk(DiskSource),
}

impl GeneratorSource for Source {
    fn generator(&mut self, id: GeneratorId, t: u32) -> Result<&TruncatedSeries, Error> {
        match self {
            Source::Memory(m) => m.generator(id, t),
            Source::Disk(d) => d.generator(id, t),
        }
    }
}

/// An eigenvalue with the per-operator results it came from.
pub struct Computed {
    pub normalized: ComplexBall,
    pub snapped: Option<BigInt>,
    pub parts: Vec<EigenvalueResult>,
    pub wall_ms: u64,
    pub operator: OperatorArg,
}

impl Computed {
    /// `prime,operator,cosets,precision_bits,trace_bound,wall_ms`; sums
    /// cosets and takes maxima for `T_{p^2}`.
    pub fn timing_line(&self) -> String {
        let d: Vec<_> = self.parts.iter().map(|p| &p.diagnostics).collect();
        let name = match self.operator {
            OperatorArg::Tp => "tp",
            OperatorArg::Tp21 => "tp2_1",
            OperatorArg::Tp2 => "tp2",
        };
        format!(
            "{},{},{},{},{},{}",
            d[0].prime,
            name,
            d.iter().map(|x| x.cosets).sum::<usize>(),
            d.iter().map(|x| x.precision_bits).max().unwrap_or(0),
            d.iter().map(|x| x.trace_bound).max().unwrap_or(0),
            self.wall_ms
        )
    }

    /// Exact midpoints and radii of the normalized box.
    pub fn box_text(&self) -> String {
        box_text(&self.normalized)
    }
}

pub fn box_text(b: &ComplexBall) -> String {
    let part = |x: &Ball| format!("{}*2^{} +/- {}*2^{}", x.mid().mantissa(), x.mid().exponent(), x.rad().mantissa(), x.rad().exponent());
    format!("re {} ; im {}", part(&b.re), part(&b.im))
}

/// Runs the eigenvalue computation described by `a`.
pub fn compute(a: &EigenArgs) -> Result<Computed, Failure> {
    let spec = load_form(a)?;
    let mode = match a.mode {
        ModeArg::Rigorous => Mode::Rigorous,
        ModeArg::Heuristic => Mode::Heuristic,
    };
    let opts = EigenvalueOptions {
        digits: a.digits,
        y11: a.y11.as_deref().map(parse_y11).transpose()?,
        mode,
        precision_bits: a.precision_bits,
        max_precision_bits: a.max_precision_bits,
        trace_bound: a.trace_bound,
        symmetry: a.symmetry == Switch::On,
        ..EigenvalueOptions::default()
    };
    if a.threads == 0 {
        return Err(usage("--threads must be positive"));
    }
    let exec = RayonExecutor::new(a.threads).map_err(|e| failed(e.to_string()))?;
    let mut source = match &a.cache_dir {
        Some(dir) => Source::Disk(DiskSource::new(CacheDir::open(dir)?)?),
        None => Source::Memory(MemorySource::new()),
    };
    let start = Instant::now();
    let ops = match a.operator {
        OperatorArg::Tp => vec![HeckeOperatorId::tp(a.prime)?],
        OperatorArg::Tp21 => vec![HeckeOperatorId::tp2_1(a.prime)?],
        OperatorArg::Tp2 => vec![HeckeOperatorId::tp(a.prime)?, HeckeOperatorId::tp2_1(a.prime)?],
    };
    let mut parts = Vec::new();
    for op in &ops {
        // T_{p^2} amplifies the errors of lambda_p by about 2 |lambda_p| and of
        // lambda_{p^2,1} by p, so those parts get extra digits
        let mut digits = a.digits;
        if ops.len() == 2 && matches!(op, HeckeOperatorId::Tp21(_)) {
            digits += (4.0 * a.prime as f64).log10().ceil() as u32;
        }
        let mut r = eigenvalue_timed(&spec, &mut source, &exec, *op, &EigenvalueOptions { digits, ..opts.clone() })?;
        if ops.len() == 2 && matches!(op, HeckeOperatorId::Tp(_)) {
            let extra = (4.0 * r.normalized.mag_up().to_f64() + 4.0).log10().ceil() as u32;
            r = eigenvalue_timed(&spec, &mut source, &exec, *op, &EigenvalueOptions { digits: digits + extra, ..opts.clone() })?;
        }
        parts.push(r);
    }
    if let Source::Disk(d) = &mut source {
        d.flush()?;
    }
    let (normalized, snapped) = if parts.len() == 2 {
        let prec = parts.iter().map(|p| p.diagnostics.precision_bits).max().unwrap_or(64);
        // heuristic parts carry unknown truncation error, so combine their roundings
        let exact = |r: &EigenvalueResult| r.snapped.as_ref().map(|n| ComplexBall::real(Ball::from_bigint(n, prec)));
        let (lp, l21) = match (mode, exact(&parts[0]), exact(&parts[1])) {
            (Mode::Heuristic, Some(x), Some(y)) => (x, y),
            _ => (parts[0].normalized.clone(), parts[1].normalized.clone()),
        };
        let v = assemble_tp2(&lp, &l21, a.prime, spec.weight, prec);
        let s = match mode {
            Mode::Rigorous => snap(&v),
            Mode::Heuristic => round_nearest(&v),
        };
        (v, s)
    } else {
        (parts[0].normalized.clone(), parts[0].snapped.clone())
    };
    Ok(Computed {
        normalized,
        snapped,
        parts,
        wall_ms: start.elapsed().as_millis() as u64,
        operator: a.operator,
    })
}

fn eigenvalue_timed<S: GeneratorSource>(
    spec: &EigenformSpec,
    source: &mut S,
    exec: &RayonExecutor,
    op: HeckeOperatorId,
    opts: &EigenvalueOptions,
) -> Result<EigenvalueResult, Failure> {
    let started = Instant::now();
    let mut r = Engine::new(spec, source, exec)?.eigenvalue(op, opts)?;
    r.diagnostics.wall_ms = Some(started.elapsed().as_millis() as u64);
    Ok(r)
}

fn decimal(x: &Ball, digits: u32) -> String {
    format!("{} +/- {:.3e}", x.mid().to_decimal(digits), x.rad().to_f64())
}

fn print_result(a: &EigenArgs, r: &Computed, out: &mut dyn Write) -> std::io::Result<()> {
    let d0 = &r.parts[0].diagnostics;
    writeln!(out, "form        {}", a.form.clone().unwrap_or_else(|| "(document)".into()))?;
    for p in &r.parts {
        let d = &p.diagnostics;
        writeln!(
            out,
            "operator    {} p={} ({} cosets, {} evaluated)",
            d.operator, d.prime, d.cosets, d.evaluated
        )?;
        writeln!(
            out,
            "  y11 {}  precision {} bits  attempts {}  trace {}..{}  {} ms",
            d.y11, d.precision_bits, d.attempts, d.min_trace_bound, d.trace_bound, d.wall_ms.unwrap_or(0)
        )?;
        writeln!(out, "  raw ratio   {:.17e} +/- {:.3e}", p.raw_ratio.re.to_f64(), p.raw_ratio.re.rad().to_f64())?;
        if r.parts.len() > 1 {
            writeln!(out, "  normalized  {}", decimal(&p.normalized.re, a.digits))?;
        }
    }
    writeln!(out, "mode        {:?}", d0.mode)?;
    writeln!(out, "normalized  {}", decimal(&r.normalized.re, a.digits))?;
    writeln!(out, "imaginary   {}", decimal(&r.normalized.im, a.digits))?;
    match &r.snapped {
        Some(n) => writeln!(out, "snapped     {n}")?,
        None => writeln!(out, "snapped     none")?,
    }
    writeln!(out, "timing      {}", r.timing_line())
}

type Check = (&'static str, Result<(), String>);

fn check(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

/// `lambda_p` of a Saito-Kurokawa lift from the `p`-th coefficient of the
/// elliptic eigenform of weight `2k - 2`.
fn sk_eigenvalue(a_p: &BigInt, p: u64, k: u32) -> BigInt {
    a_p + num_traits::pow(BigInt::from(p), k as usize - 1) + num_traits::pow(BigInt::from(p), k as usize - 2)
}

/// Quick invariant checks used by the `verify` subcommand.
pub fn verify_checks() -> Vec<Check> {
    let mut out: Vec<Check> = Vec::new();
    out.push(("coset degrees", {
        let mut r = Ok(());
        for p in [2u64, 3, 5, 7] {
            let tp = HeckeOperatorId::Tp(p);
            let t21 = HeckeOperatorId::Tp21(p);
            if tp.reps().len() as u64 != p * p * p + p * p + p + 1 || t21.reps().len() as u64 != p.pow(4) + p.pow(3) + p * p + p {
                r = Err(format!("wrong count at p = {p}"));
            }
        }
        r
    }));
    out.push(("truncation table", {
        let z = EvalPoint::from_y11(&BigRational::from_integer(BigInt::from(5)), 128);
        let c = siegel_core::ball::Consts::new(160);
        match z.and_then(|z| z.alpha_lower_f64(&c)) {
            Ok(alpha) => {
                let got: Vec<u32> = GeneratorId::ALL
                    .iter()
                    .map(|g| truncation_bound(generator_bound(*g), alpha, 100))
                    .collect();
                check((alpha - 27.5327).abs() < 1e-3 && got == [10, 10, 10, 11], || format!("alpha {alpha}, T {got:?}"))
            }
            Err(e) => Err(e.to_string()),
        }
    }));
    out.push(("generator symmetry and cache round trip", {
        let mut h = CohenTable::new();
        let mut r = Ok(());
        for id in GeneratorId::ALL {
            let s = match igusa_generator_with(id, 8, &mut h) {
                Ok(s) => s,
                Err(e) => {
                    r = Err(e.to_string());
                    break;
                }
            };
            let text = series_to_string(&s);
            if !s.is_symmetric() || read_series(text.as_bytes()).ok().as_ref() != Some(&s) {
                r = Err(format!("{id}"));
            }
        }
        r
    }));
    out.push(("Horner matches direct summation", {
        let h = || -> Result<bool, Error> {
            let s = igusa_generator_with(GeneratorId::Chi12, 6, &mut CohenTable::new())?;
            let r = |n: i64, d: i64| Ball::from_rational(&BigRational::new(n.into(), d.into()), 128);
            let z = EvalPoint::new(
                ComplexBall::new(r(1, 7), r(3, 2)),
                ComplexBall::new(r(-2, 9), r(7, 4)),
                ComplexBall::new(r(1, 3), r(1, 2)),
                128,
            )?;
            let a = evaluate_series(&NumericSeries::from_series(&s, 128), &z, 6, 128)?;
            let b = evaluate_direct(&s, &z, 6, 128)?;
            Ok(a.overlaps(&b))
        };
        match h() {
            Ok(ok) => check(ok, || "boxes are disjoint".into()),
            Err(e) => Err(e.to_string()),
        }
    }));
    out.push(("lambda_2 of E4, chi10, chi12 against elliptic forms", {
        let oracle = || -> Result<Vec<BigInt>, Error> {
            let e4 = elliptic::eisenstein(4, 3)?;
            let e6 = elliptic::eisenstein(6, 3)?;
            let delta = elliptic::delta(3);
            // sigma_5(2), then the normalized cusp forms of weight 18 and 22
            let a6 = BigInt::from(33);
            let a18 = elliptic::mul(&delta, &e6)[2].clone();
            let a22 = elliptic::mul(&elliptic::mul(&delta, &e4), &e6)[2].clone();
            Ok(vec![sk_eigenvalue(&a6, 2, 4), sk_eigenvalue(&a18, 2, 10), sk_eigenvalue(&a22, 2, 12)])
        };
        let want = match oracle() {
            Ok(w) => w,
            Err(e) => return vec![("lambda_2 oracle", Err(e.to_string()))],
        };
        let mut r = Ok(());
        for (name, w) in ["e4", "chi10", "chi12"].into_iter().zip(want) {
            let spec = builtin(name).expect("built-in");
            let opts = EigenvalueOptions {
                mode: Mode::Rigorous,
                digits: 4,
                ..EigenvalueOptions::default()
            };
            let mut src = MemorySource::new();
            let got = Engine::new(&spec, &mut src, &siegel_core::exec::Sequential)
                .and_then(|mut e| e.eigenvalue(HeckeOperatorId::Tp(2), &opts));
            match got {
                Ok(g) if g.snapped.as_ref() == Some(&w) => {}
                Ok(g) => r = Err(format!("{name}: {:?} vs {w}", g.normalized.to_f64())),
                Err(e) => r = Err(format!("{name}: {e}")),
            }
        }
        r
    }));
    out.push(("quotient budget", {
        let (ex, ey) = siegel_core::engine::quotient_budget(Mag::pow2(-30), 0.5, Mag::one(), Mag::from_u64(3));
        let bound = ex.add(ey.mul(Mag::from_u64(3))).div(Mag::one().sub_down(ey));
        check(bound <= Mag::pow2(-30), || format!("bound {}", bound.to_f64()))
    }));
    out.push(("degree of T_2 on the constant form", {
        let one = EigenformSpec::new(
            "one",
            0,
            siegel_core::eigenform::CoefficientField::Rational,
            vec![siegel_core::eigenform::Term {
                coeff: vec![BigRational::one()],
                expo: [0; 4],
            }],
        );
        let v = one.and_then(|one| {
            let z = EvalPoint::from_y11(&BigRational::from_integer(BigInt::from(3)), 64)?;
            siegel_core::engine::hecke_image_at(
                &one,
                &z,
                &HeckeOperatorId::Tp(2).reps(),
                &siegel_core::engine::TracePolicy::Uniform(0),
                64,
                &mut MemorySource::new(),
                &siegel_core::exec::Sequential,
            )
        });
        match v {
            Ok(v) => check(v.contains(&Float::from_i64(15), &Float::zero()) && abs_radius(&v).is_zero(), || format!("{:?}", v.to_f64())),
            Err(e) => Err(e.to_string()),
        }
    }));
    out
}
