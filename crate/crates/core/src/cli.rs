//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a requested check failed its tolerance, 2 domain
//! or argument error, 3 I/O, parse or usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frenet::{CurveTrace, SampledCurve, DEFAULT_STENCIL};
use crate::rectifying::{
    chen_ratio_fit, hyperboloid_residual, omega_trace, sigma_trace, upsilon_trace, Branch, RectifyingSpec, SigmaCurve,
};
use crate::synth::{b_from_initial_ratio, check_synthesized, synthesize_curve, KappaFamily, SynthForm, WhirlSpec};
use crate::trace_io::{read_trace, write_trace, Format};
use crate::vec3::Sign;
use crate::whirl::{fit_lambda_axis, verify_whirl};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// The six whirl constants of the reference figure.
pub const FIGURE1_LAMBDAS: [f64; 6] = [-20.0, -4.0, -1.8, -1.0, -0.5, -0.26];

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(name = "whirl", version, about = "Synthesize, verify and export whirl curves")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Whirl curve from a prescribed curvature.
    Synth(SynthArgs),
    /// The whirl-rectifying curve on one side of its seam.
    Rect(RectArgs),
    /// The continuous extensions: Omega over s and Upsilon over t.
    Extend(ExtendArgs),
    /// Fit lambda, axis and the torsion-ratio line to a trace file.
    Verify(VerifyArgs),
    /// The reference figure data: Omega and Upsilon for six values of lambda.
    Figure1(Figure1Args),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Number of samples (at least 2).
    #[arg(long, default_value_t = 513, value_parser = parse_samples)]
    pub samples: usize,
    /// csv or json.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: Format,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Tolerance override NAME=VAL; repeatable.
    #[arg(long = "tol", value_name = "NAME=VAL")]
    pub tol: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Curvature family: const:K, linear (uses --a, --b) or poly:C0,C1,...
    #[arg(long, default_value = "const:1")]
    pub kappa: String,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub lambda: f64,
    /// Slope of the torsion ratio for the linear family.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub a: Option<f64>,
    /// Intercept of the torsion ratio for the linear family.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub b: Option<f64>,
    /// Integration constant B.
    #[arg(long = "B", allow_hyphen_values = true, value_parser = parse_number, conflicts_with = "h0")]
    pub big_b: Option<f64>,
    /// Torsion ratio |tau/kappa| at s0, fixing B.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub h0: Option<f64>,
    /// Base point of the curvature integral (default: start of range).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub s0: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub range: (f64, f64),
    #[arg(long = "sign-z", default_value = "+", allow_hyphen_values = true, value_parser = parse_sign)]
    pub sign_z: Sign,
    #[arg(long = "sign-tau", default_value = "+", allow_hyphen_values = true, value_parser = parse_sign)]
    pub sign_tau: Sign,
    /// theorem or remark.
    #[arg(long, default_value = "theorem", value_parser = parse_form)]
    pub form: SynthForm,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RectArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub a: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_number)]
    pub b: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub lambda: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_number)]
    pub d: f64,
    /// Must lie on one side of the seam s = -b/a.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub range: (f64, f64),
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExtendArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub a: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_number)]
    pub b: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub lambda: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_number)]
    pub d: f64,
    /// Range of s for Omega.
    #[arg(long, default_value = "-pi/4:pi/4", allow_hyphen_values = true, value_parser = parse_range)]
    pub range: (f64, f64),
    /// Range of t for Upsilon (default: same as --range).
    #[arg(long = "t-range", allow_hyphen_values = true, value_parser = parse_range)]
    pub t_range: Option<(f64, f64)>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Trace file (.csv or .json).
    pub input: PathBuf,
    /// Expected lambda; the fit must match it within the `lambda` tolerance.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    pub lambda: Option<f64>,
    /// Also require the torsion ratio to be linear and nonconstant.
    #[arg(long)]
    pub rectifying: bool,
    #[arg(long = "tol", value_name = "NAME=VAL")]
    pub tol: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct Figure1Args {
    #[arg(long, default_value = "0.65", allow_hyphen_values = true, value_parser = parse_number)]
    pub a: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_number)]
    pub b: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_number)]
    pub d: f64,
    /// Comma-separated lambdas (default: the six reference values).
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', value_parser = parse_number)]
    pub lambda: Vec<f64>,
    #[arg(long, default_value = "-pi/4:pi/4", allow_hyphen_values = true, value_parser = parse_range)]
    pub range: (f64, f64),
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Named tolerances with their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(BTreeMap::from([
            ("unit_speed", 1e-6),
            ("intrinsic", 1e-6),
            ("axis", 1e-6),
            ("whirl_rms", 1e-5),
            ("lambda", 1e-3),
            ("chen", 1e-4),
            ("hyperboloid", 1e-8),
            ("sphere", 1e-8),
        ]))
    }
}

impl Tolerances {
    pub fn with_overrides(overrides: &[String]) -> Result<Self> {
        let mut tol = Self::default();
        for item in overrides {
            let (name, value) =
                item.split_once('=').ok_or_else(|| Error::Parse(format!("--tol expects NAME=VAL, got {item:?}")))?;
            let value = parse_number(value.trim()).map_err(Error::Parse)?;
            if !(value > 0.0) {
                return Err(Error::Parse(format!("tolerance {name} must be positive, got {value}")));
            }
            let known: Vec<&str> = tol.0.keys().copied().collect();
            let slot = tol
                .0
                .get_mut(name.trim())
                .ok_or_else(|| Error::Parse(format!("unknown tolerance {name:?}; known: {}", known.join(", "))))?;
            *slot = value;
        }
        Ok(tol)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    fn to_json(&self) -> Value {
        self.0.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>().into()
    }
}

/// A decimal number, or a multiple of `pi` such as `-pi/4`, `2pi` or `3*pi/2`.
pub fn parse_number(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    let bad = || format!("not a number: {text:?}");
    let value = if let Ok(v) = t.parse::<f64>() {
        v
    } else {
        let (neg, rest) = match t.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (num, den) = match rest.split_once('/') {
            Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
            None => (rest, 1.0),
        };
        let coef = num.strip_suffix("pi").ok_or_else(bad)?.trim_end_matches('*');
        let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
        let v = coef * std::f64::consts::PI / den;
        if neg {
            -v
        } else {
            v
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// `LO:HI` with `LO < HI`.
pub fn parse_range(text: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| format!("expected LO:HI, got {text:?}"))?;
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("empty range {lo}:{hi}"))
    }
}

fn parse_samples(text: &str) -> std::result::Result<usize, String> {
    match text.trim().parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        _ => Err(format!("samples must be an integer >= 2, got {text:?}")),
    }
}

fn parse_format(text: &str) -> std::result::Result<Format, String> {
    match text.to_ascii_lowercase().as_str() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(format!("format must be csv or json, got {text:?}")),
    }
}

fn parse_sign(text: &str) -> std::result::Result<Sign, String> {
    text.trim().parse()
}

fn parse_form(text: &str) -> std::result::Result<SynthForm, String> {
    match text.to_ascii_lowercase().as_str() {
        "theorem" => Ok(SynthForm::Theorem),
        "remark" => Ok(SynthForm::Remark),
        _ => Err(format!("form must be theorem or remark, got {text:?}")),
    }
}

/// `const:K`, `linear` or `poly:C0,C1,...`.
pub fn parse_kappa(text: &str, a: Option<f64>, b: Option<f64>) -> Result<KappaFamily> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    match kind.trim() {
        "const" | "constant" => {
            let k = if arg.is_empty() { 1.0 } else { parse_number(arg).map_err(Error::InvalidArgument)? };
            Ok(KappaFamily::Constant(k))
        }
        "linear" | "linear-ratio" => {
            let a = a.ok_or_else(|| Error::InvalidArgument("--kappa linear needs --a".into()))?;
            Ok(KappaFamily::LinearRatio { a, b: b.unwrap_or(0.0) })
        }
        "poly" | "polynomial" => {
            let coeffs = arg
                .split(',')
                .map(|c| parse_number(c).map_err(Error::InvalidArgument))
                .collect::<Result<Vec<_>>>()?;
            Ok(KappaFamily::Polynomial(coeffs))
        }
        _ => Err(Error::InvalidArgument(format!("unknown curvature family {text:?}"))),
    }
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Io(_) | Error::Parse(_) | Error::InsufficientSamples { .. } => EXIT_IO,
        _ => EXIT_DOMAIN,
    }
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    match execute(&config, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command, returning [`EXIT_OK`] or [`EXIT_CHECK_FAILED`].
pub fn execute(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    match &config.command {
        Command::Synth(a) => cmd_synth(a, out),
        Command::Rect(a) => cmd_rect(a, out),
        Command::Extend(a) => cmd_extend(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Figure1(a) => cmd_figure1(a, out),
    }
}

struct Report<'a> {
    out: &'a mut dyn Write,
    ok: bool,
}

impl<'a> Report<'a> {
    fn new(out: &'a mut dyn Write) -> Self {
        Self { out, ok: true }
    }

    fn line(&mut self, text: impl AsRef<str>) -> Result<()> {
        writeln!(self.out, "{}", text.as_ref())?;
        Ok(())
    }

    /// Prints `name value (tol ...) ok|FAIL`.
    fn check(&mut self, name: &str, value: f64, tol: f64) -> Result<()> {
        let pass = value < tol;
        self.ok &= pass;
        self.line(format!("{name:<24} {value:.3e}  (tol {tol:.0e})  {}", if pass { "ok" } else { "FAIL" }))
    }

    fn verdict(&mut self, name: &str, pass: bool, detail: &str) -> Result<()> {
        self.ok &= pass;
        self.line(format!("{name:<24} {}{detail}", if pass { "yes" } else { "no" }))
    }

    fn code(&self) -> i32 {
        if self.ok {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn emit(report: &mut Report, output: &OutputArgs, stem: &str, trace: &CurveTrace) -> Result<PathBuf> {
    let path = output.out.join(format!("{stem}.{}", output.format.extension()));
    write_trace(&path, trace, output.format)?;
    report.line(format!("wrote {} ({} samples)", path.display(), trace.len()))?;
    Ok(path)
}

fn interior(params: &[f64]) -> &[f64] {
    if params.len() > 2 {
        &params[1..params.len() - 1]
    } else {
        params
    }
}

fn range_json(r: (f64, f64)) -> Value {
    json!([r.0, r.1])
}

fn with_meta(mut trace: CurveTrace, meta: &[(&str, Value)]) -> CurveTrace {
    for (k, v) in meta {
        trace.meta.insert((*k).to_string(), v.clone());
    }
    trace
}

fn kappa_json(family: &KappaFamily) -> Value {
    match family {
        KappaFamily::Constant(k) => json!({"family": "constant", "value": k}),
        KappaFamily::LinearRatio { a, b } => json!({"family": "linear-ratio", "a": a, "b": b}),
        KappaFamily::Polynomial(c) => json!({"family": "polynomial", "coefficients": c}),
    }
}

pub fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<i32> {
    let tol = Tolerances::with_overrides(&args.output.tol)?;
    let family = parse_kappa(&args.kappa, args.a, args.b)?;
    let (lo, hi) = args.range;
    let s0 = args.s0.unwrap_or(lo);
    let big_b = match (args.big_b, args.h0, &family) {
        (Some(b), _, _) => b,
        (None, Some(h0), _) => b_from_initial_ratio(h0, args.lambda)?,
        (None, None, KappaFamily::LinearRatio { a, b }) => b_from_initial_ratio(a * s0 + b, args.lambda)?,
        (None, None, _) => return Err(Error::InvalidArgument("one of --B or --h0 is required".into())),
    };
    let spec = WhirlSpec::new(family.to_scalar_fn(args.lambda), args.lambda, big_b, s0)?
        .signs(args.sign_z, args.sign_tau)
        .form(args.form);
    let (curve, trace) = synthesize_curve(&spec, lo, hi, args.output.samples)?;
    let trace = with_meta(
        trace,
        &[
            ("command", json!("synth")),
            ("kappa", kappa_json(&family)),
            ("h0", json!(args.h0)),
            ("range", range_json(args.range)),
            ("samples", json!(args.output.samples)),
            ("tolerances", tol.to_json()),
        ],
    );

    let mut report = Report::new(out);
    prepare_dir(&args.output.out)?;
    emit(&mut report, &args.output, "synth", &trace)?;
    report.line(format!("{spec}"))?;
    let params = trace.params();
    let check = check_synthesized(&curve, interior(&params))?;
    report.check("unit-speed residual", check.unit_speed, tol.get("unit_speed"))?;
    report.check("intrinsic residual max", check.intrinsic, tol.get("intrinsic"))?;
    report.check("axis deviation", check.axis_deviation, tol.get("axis"))?;
    report.check("proportionality residual", check.proportionality, tol.get("axis"))?;
    Ok(report.code())
}

fn rect_spec(a: f64, b: f64, lambda: f64, d: f64, range: (f64, f64)) -> Result<RectifyingSpec> {
    let mid = 0.5 * (range.0 + range.1);
    let branch = Branch::of(a * mid + b).unwrap_or_default();
    RectifyingSpec::new(a, b, lambda, d, branch)
}

fn max_hyperboloid(trace: &CurveTrace, lambda: f64, a: f64) -> f64 {
    trace.points().map(|p| hyperboloid_residual(p, lambda, a).abs()).fold(0.0, f64::max)
}

fn max_sphere(trace: &CurveTrace) -> f64 {
    trace.points().map(|p| (p.norm() - 1.0).abs()).fold(0.0, f64::max)
}

pub fn cmd_rect(args: &RectArgs, out: &mut dyn Write) -> Result<i32> {
    let tol = Tolerances::with_overrides(&args.output.tol)?;
    let spec = rect_spec(args.a, args.b, args.lambda, args.d, args.range)?;
    let (lo, hi) = args.range;
    let trace = with_meta(
        sigma_trace(&spec, lo, hi, args.output.samples)?,
        &[
            ("command", json!("rect")),
            ("a", json!(args.a)),
            ("b", json!(args.b)),
            ("lambda", json!(args.lambda)),
            ("d", json!(args.d)),
            ("range", range_json(args.range)),
            ("samples", json!(args.output.samples)),
            ("tolerances", tol.to_json()),
        ],
    );

    let mut report = Report::new(out);
    prepare_dir(&args.output.out)?;
    emit(&mut report, &args.output, "rect", &trace)?;
    report.check("hyperboloid residual", max_hyperboloid(&trace, args.lambda, args.a), tol.get("hyperboloid"))?;
    let params = trace.params();
    let grid = interior(&params);
    let curve = SigmaCurve(spec);
    let fit = chen_ratio_fit(&curve, grid)?;
    let (c1, c2) = spec.ratio_line();
    report.line(format!("tau/kappa line           c1 = {:.9}, c2 = {:.9} (expected {c1}, {c2})", fit.c1, fit.c2))?;
    report.check("ratio line error", (fit.c1 - c1).abs().max((fit.c2 - c2).abs()), tol.get("chen"))?;
    let axis = verify_whirl(&curve, grid, spec.whirl_constant())?;
    report.line(format!("whirl constant           {}", spec.whirl_constant()))?;
    report.check("axis deviation", axis.max_deviation, tol.get("axis"))?;
    Ok(report.code())
}

fn extension_meta(command: &str, a: f64, b: f64, lambda: f64, d: f64, samples: usize, tol: &Tolerances) -> Vec<(&'static str, Value)> {
    vec![
        ("command", json!(command)),
        ("a", json!(a)),
        ("b", json!(b)),
        ("lambda", json!(lambda)),
        ("d", json!(d)),
        ("samples", json!(samples)),
        ("tolerances", tol.to_json()),
    ]
}

#[allow(clippy::too_many_arguments)]
fn extension_pair(
    report: &mut Report,
    output: &OutputArgs,
    spec: &RectifyingSpec,
    s_range: (f64, f64),
    t_range: (f64, f64),
    meta: &[(&str, Value)],
    suffix: &str,
    tol: &Tolerances,
) -> Result<()> {
    let n = output.samples;
    let omega = with_meta(omega_trace(spec, s_range.0, s_range.1, n)?, meta)
        .with_meta("curve", "omega")
        .with_meta("range", range_json(s_range));
    let upsilon = with_meta(upsilon_trace(spec, t_range.0, t_range.1, n)?, meta)
        .with_meta("curve", "upsilon")
        .with_meta("range", range_json(t_range));
    emit(report, output, &format!("omega{suffix}"), &omega)?;
    emit(report, output, &format!("upsilon{suffix}"), &upsilon)?;
    report.check("  omega hyperboloid", max_hyperboloid(&omega, spec.lambda, spec.a), tol.get("hyperboloid"))?;
    report.check("  upsilon sphere", max_sphere(&upsilon), tol.get("sphere"))?;
    Ok(())
}

pub fn cmd_extend(args: &ExtendArgs, out: &mut dyn Write) -> Result<i32> {
    let tol = Tolerances::with_overrides(&args.output.tol)?;
    let spec = RectifyingSpec::new(args.a, args.b, args.lambda, args.d, Branch::Plus)?;
    let meta = extension_meta("extend", args.a, args.b, args.lambda, args.d, args.output.samples, &tol);
    let mut report = Report::new(out);
    prepare_dir(&args.output.out)?;
    let t_range = args.t_range.unwrap_or(args.range);
    extension_pair(&mut report, &args.output, &spec, args.range, t_range, &meta, "", &tol)?;
    Ok(report.code())
}

/// `lambda-1.8` style file-name suffix.
pub fn lambda_suffix(lambda: f64) -> String {
    format!("_lambda{lambda}")
}

pub fn cmd_figure1(args: &Figure1Args, out: &mut dyn Write) -> Result<i32> {
    let tol = Tolerances::with_overrides(&args.output.tol)?;
    let lambdas: Vec<f64> = if args.lambda.is_empty() { FIGURE1_LAMBDAS.to_vec() } else { args.lambda.clone() };
    let mut report = Report::new(out);
    prepare_dir(&args.output.out)?;
    for &lambda in &lambdas {
        let spec = RectifyingSpec::new(args.a, args.b, lambda, args.d, Branch::Plus)?;
        let meta = extension_meta("figure1", args.a, args.b, lambda, args.d, args.output.samples, &tol);
        report.line(format!("lambda = {lambda}"))?;
        extension_pair(&mut report, &args.output, &spec, args.range, args.range, &meta, &lambda_suffix(lambda), &tol)?;
    }
    Ok(report.code())
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let tol = Tolerances::with_overrides(&args.tol)?;
    let trace = read_trace(&args.input)?;
    if trace.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: trace.len() });
    }
    let sampled = SampledCurve::new(&trace, DEFAULT_STENCIL.min(trace.len()))?;
    let params = trace.params();
    let half = DEFAULT_STENCIL / 2;
    let grid = if params.len() > 2 * half + 4 { &params[half..params.len() - half] } else { &params[..] };

    let mut report = Report::new(out);
    report.line(format!("{}: {} samples over {} in [{}, {}]", args.input.display(), trace.len(), trace.parameter.as_str(), params[0], params[params.len() - 1]))?;
    match fit_lambda_axis(&sampled, grid) {
        Ok(fit) => {
            report.line(format!("fitted lambda            {:.9}", fit.lambda))?;
            report.line(format!("axis                     ({:.9}, {:.9}, {:.9})", fit.d.x, fit.d.y, fit.d.z))?;
            report.line(format!("rms residual             {:.3e}", fit.rms_residual))?;
            match fit.verdict(tol.get("whirl_rms")) {
                Ok(()) => report.verdict("whirl curve", true, "")?,
                Err(why) => report.verdict("whirl curve", false, &format!(" ({why})"))?,
            }
            if let Some(expected) = args.lambda {
                report.check("lambda error", (fit.lambda - expected).abs(), tol.get("lambda"))?;
            }
        }
        Err(e) if !matches!(e.root(), Error::Io(_) | Error::Parse(_)) => {
            report.verdict("whirl curve", false, &format!(" ({e})"))?;
        }
        Err(e) => return Err(e),
    }
    match chen_ratio_fit(&sampled, grid) {
        Ok(chen) => {
            report.line(format!("tau/kappa line           c1 = {:.9}, c2 = {:.9}, rms {:.3e}", chen.c1, chen.c2, chen.rms))?;
            let rect = chen.is_rectifying(tol.get("chen"));
            if args.rectifying {
                report.verdict("rectifying", rect, "")?;
            } else {
                report.line(format!("rectifying               {}", if rect { "yes" } else { "no" }))?;
            }
        }
        Err(e) => {
            if args.rectifying {
                report.verdict("rectifying", false, &format!(" ({e})"))?;
            } else {
                report.line(format!("rectifying               no ({e})"))?;
            }
        }
    }
    Ok(report.code())
}
