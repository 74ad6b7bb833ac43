//! Command line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure (including a
//! verification that misses its tolerance), 3 I/O failure.
//!
//! Options not given on the command line are looked up by flag name in an
//! optional `ellipse-phase.json` in the working directory, e.g.
//! `{"seed": 7, "grid": "20x20", "backend": "direct"}`. The environment
//! variable `ELLIPSE_PHASE_SEED` overrides `--seed`.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::divisor::DivisorJson;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Period};
use crate::lemma::{v_constant, VMethod};
use crate::render::{render_phase_portrait, Coloring, RenderSpec};
use crate::synthesis::{synthesize_with, PhaseFunctionSpec, SpecJson};
use crate::verify::{spec_function, verify_spec, VerifyOptions};
use crate::weierstrass::{Backend, SigmaEvaluator};

pub const CONFIG_FILE: &str = "ellipse-phase.json";
pub const SEED_ENV: &str = "ELLIPSE_PHASE_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "ellipse-phase",
    version,
    about = "Meromorphic functions with doubly periodic phase",
    long_about = "Evaluate Weierstrass sigma, synthesize functions whose phase f/|f| is doubly \
                  periodic, verify them numerically and draw phase portraits.\n\n\
                  JSON arguments accept inline JSON or a path to a JSON file."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate ln σ(z) (printed as log-magnitude and phase).
    Sigma(SigmaArgs),
    /// Quasi-periods η1, η2 and the Legendre relation defect.
    Eta(EtaArgs),
    /// The constant v_j of the four-sigma identity.
    Vj(VjArgs),
    /// Synthesize f from a balanced divisor and integers m1, m2.
    Synth(SynthArgs),
    /// Numerically verify a synthesized spec.
    Verify(VerifyArgs),
    /// Render a phase portrait of a synthesized f as binary PPM.
    Plot(PlotArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Fast,
    Direct,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Eta,
    Direct,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ColoringArg {
    Phase,
    Contours,
}

#[derive(Args, Debug)]
struct SigmaArgs {
    /// Lattice as {"p1": [re, im], "p2": [re, im]} or a file path.
    #[arg(long)]
    lattice: Option<String>,
    /// Argument as re,im.
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Shells for the direct product backend [default: 200].
    #[arg(long)]
    shells: Option<usize>,
}

#[derive(Args, Debug)]
struct EtaArgs {
    #[arg(long)]
    lattice: Option<String>,
}

#[derive(Args, Debug)]
struct VjArgs {
    #[arg(long)]
    lattice: Option<String>,
    /// ξ0 as re,im.
    #[arg(long, allow_hyphen_values = true)]
    xi0: String,
    /// Period index, 1 or 2.
    #[arg(long)]
    j: u8,
    /// Lattice sum or quasi-period [default: eta].
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Shells for the lattice sum [default: 200].
    #[arg(long)]
    shells: Option<usize>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    lattice: Option<String>,
    /// Divisor as {"zeros": [[re, im, mult], ...], "poles": [...]} or a file path.
    #[arg(long)]
    divisor: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m1: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    m2: Option<i64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Spec JSON as printed by `synth`, or a file path.
    #[arg(long)]
    spec: String,
    /// Sample grid as NXxNY [default: 10x10].
    #[arg(long)]
    grid: Option<String>,
    /// Seed for sample jitter and contour offsets [default: 42].
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance for every residual [default: 1e-6].
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    spec: String,
    /// Output PPM path.
    #[arg(long)]
    out: PathBuf,
    /// Region center as re,im [default: center of the fundamental cell].
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Region width [default: width of the cell's bounding box].
    #[arg(long)]
    width: Option<f64>,
    /// Region height [default: height of the cell's bounding box].
    #[arg(long)]
    height: Option<f64>,
    /// Resolution as WxH [default: 256x256].
    #[arg(long)]
    px: Option<String>,
    #[arg(long, value_enum)]
    coloring: Option<ColoringArg>,
}

/// Settings read from the optional configuration file.
#[derive(Debug, Default, Clone)]
pub struct Config {
    values: Map<String, Value>,
}

impl Config {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(CONFIG_FILE);
        if !path.exists() {
            return Ok(Config::default());
        }
        Self::from_json(&std::fs::read_to_string(&path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str(text)? {
            Value::Object(values) => Ok(Config { values }),
            _ => Err(Error::InvalidInput(format!("{CONFIG_FILE} must contain a JSON object"))),
        }
    }

    /// Raw text of a setting: strings as-is, other JSON values re-encoded.
    fn text(&self, key: &str) -> Option<String> {
        self.values.get(key).map(|v| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.text(key)
            .map(|t| t.parse::<T>().map_err(|e| Error::InvalidInput(format!("config {key}: {e}"))))
            .transpose()
    }

    fn value_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>> {
        self.text(key)
            .map(|t| T::from_str(&t, true).map_err(|e| Error::InvalidInput(format!("config {key}: {e}"))))
            .transpose()
    }
}

/// Process environment seen by [`run_with`].
#[derive(Debug, Clone, Default)]
pub struct Environment {
    pub config: Config,
    pub seed_override: Option<String>,
}

impl Environment {
    pub fn from_process() -> Result<Self> {
        Ok(Environment {
            config: Config::load(&std::env::current_dir()?)?,
            seed_override: std::env::var(SEED_ENV).ok(),
        })
    }
}

/// Runs the CLI on `args` (including the program name) with the process
/// environment and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Environment::from_process() {
        Ok(env) => run_with(args, &env, out, err),
        Err(e) => report(err, &e),
    }
}

pub fn run_with<I, T>(args: I, env: &Environment, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, env, out) {
        Ok(code) => code,
        Err(e) => report(err, &e),
    }
}

fn report(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    e.exit_code()
}

fn dispatch(cmd: Command, env: &Environment, out: &mut dyn Write) -> Result<i32> {
    let cfg = &env.config;
    match cmd {
        Command::Sigma(a) => cmd_sigma(a, cfg, out),
        Command::Eta(a) => {
            let lattice = lattice_arg(a.lattice, cfg)?;
            let ev = SigmaEvaluator::fast(&lattice)?;
            let c = |z: Complex64| json!([z.re, z.im]);
            let doc = json!({
                "eta1": c(ev.eta(Period::P1)),
                "eta2": c(ev.eta(Period::P2)),
                "legendre_defect": c(ev.legendre_defect()),
            });
            print_json(out, &doc)
        }
        Command::Vj(a) => cmd_vj(a, cfg, out),
        Command::Synth(a) => {
            let lattice = lattice_arg(a.lattice, cfg)?;
            let divisor: DivisorJson = parse_json_arg(&required(a.divisor, cfg, "divisor")?)?;
            let m1 = a.m1.map_or_else(|| cfg.get("m1"), |v| Ok(Some(v)))?.unwrap_or(0);
            let m2 = a.m2.map_or_else(|| cfg.get("m2"), |v| Ok(Some(v)))?.unwrap_or(0);
            let ev = SigmaEvaluator::fast(&lattice)?;
            let spec = synthesize_with(&divisor.to_divisor(&lattice)?, m1, m2, &ev)?;
            print_json(out, &serde_json::to_value(spec.to_json())?)
        }
        Command::Verify(a) => cmd_verify(a, env, out),
        Command::Plot(a) => cmd_plot(a, cfg, out),
    }
}

fn cmd_sigma(a: SigmaArgs, cfg: &Config, out: &mut dyn Write) -> Result<i32> {
    let lattice = lattice_arg(a.lattice, cfg)?;
    let z = parse_complex(&a.z)?;
    let backend = match a.backend.map_or_else(|| cfg.value_enum("backend"), |b| Ok(Some(b)))? {
        Some(BackendArg::Direct) => {
            Backend::direct(a.shells.map_or_else(|| cfg.get("shells"), |s| Ok(Some(s)))?.unwrap_or(200))
        }
        _ => Backend::fast(),
    };
    let ev = SigmaEvaluator::new(&lattice, backend)?;
    let (value, bound) = ev.sigma_with_bound(z)?;
    writeln!(out, "log_mag {}", format_sig(value.log_mag()))?;
    writeln!(out, "phase {}", format_sig(value.phase()))?;
    writeln!(out, "error_bound {bound:e}")?;
    Ok(0)
}

fn cmd_vj(a: VjArgs, cfg: &Config, out: &mut dyn Write) -> Result<i32> {
    let lattice = lattice_arg(a.lattice, cfg)?;
    let xi0 = parse_complex(&a.xi0)?;
    let j = Period::try_from(a.j)?;
    let method = match a.method.map_or_else(|| cfg.value_enum("method"), |m| Ok(Some(m)))? {
        Some(MethodArg::Direct) => VMethod::DirectSum {
            shells: a.shells.map_or_else(|| cfg.get("shells"), |s| Ok(Some(s)))?.unwrap_or(200),
        },
        _ => VMethod::ViaEta,
    };
    let c = v_constant(&lattice, xi0, j, method)?;
    let doc = json!({
        "v": [c.v.re, c.v.im],
        "error_bound": c.error_bound,
        "j": j.index(),
        "method": match method { VMethod::ViaEta => "eta", VMethod::DirectSum { .. } => "direct" },
        "shells": c.shells_used,
    });
    print_json(out, &doc)
}

fn cmd_verify(a: VerifyArgs, env: &Environment, out: &mut dyn Write) -> Result<i32> {
    let cfg = &env.config;
    let spec = load_spec(&a.spec)?;
    let grid = match a.grid {
        Some(g) => g,
        None => cfg.text("grid").unwrap_or_else(|| "10x10".into()),
    };
    let (nx, ny) = parse_dims(&grid)?;
    let seed = match &env.seed_override {
        Some(s) => s.trim().parse().map_err(|e| Error::InvalidInput(format!("{SEED_ENV}: {e}")))?,
        None => a.seed.map_or_else(|| cfg.get("seed"), |s| Ok(Some(s)))?.unwrap_or(42),
    };
    let tol = a.tol.map_or_else(|| cfg.get("tol"), |t| Ok(Some(t)))?.unwrap_or(1e-6);
    let opts = VerifyOptions { nx, ny, seed, tol, ..VerifyOptions::default() };
    let ev = SigmaEvaluator::fast(&spec.lattice)?;
    let report = verify_spec(&spec, &ev, &opts)?;
    print_json(out, &serde_json::to_value(&report)?)?;
    Ok(if report.passed { 0 } else { 2 })
}

fn cmd_plot(a: PlotArgs, cfg: &Config, out: &mut dyn Write) -> Result<i32> {
    let spec = load_spec(&a.spec)?;
    let l = &spec.lattice;
    let corners = [Complex64::new(0.0, 0.0), l.p1(), l.p2(), l.p1() + l.p2()];
    let span = |f: fn(&Complex64) -> f64| {
        let xs = corners.iter().map(f);
        xs.clone().fold(f64::NEG_INFINITY, f64::max) - xs.fold(f64::INFINITY, f64::min)
    };
    let center = match a.center.or_else(|| cfg.text("center")) {
        Some(c) => parse_complex(&c)?,
        None => (l.p1() + l.p2()) / 2.0,
    };
    let width = a.width.map_or_else(|| cfg.get("width"), |v| Ok(Some(v)))?.unwrap_or_else(|| span(|z| z.re));
    let height = a.height.map_or_else(|| cfg.get("height"), |v| Ok(Some(v)))?.unwrap_or_else(|| span(|z| z.im));
    let (px_width, px_height) = parse_dims(&a.px.or_else(|| cfg.text("px")).unwrap_or_else(|| "256x256".into()))?;
    let coloring = match a.coloring.map_or_else(|| cfg.value_enum("coloring"), |c| Ok(Some(c)))? {
        Some(ColoringArg::Contours) => Coloring::PhaseHueWithModulusContours,
        _ => Coloring::PhaseHue,
    };
    let rs = RenderSpec { center, width, height, px_width, px_height, coloring };
    let ev = SigmaEvaluator::fast(l)?;
    render_phase_portrait(&spec_function(&spec, &ev), &rs, &a.out)?;
    writeln!(out, "wrote {} ({px_width}x{px_height})", a.out.display())?;
    Ok(0)
}

fn required(v: Option<String>, cfg: &Config, key: &str) -> Result<String> {
    v.or_else(|| cfg.text(key)).ok_or_else(|| Error::InvalidInput(format!("--{key} is required")))
}

fn lattice_arg(v: Option<String>, cfg: &Config) -> Result<Lattice> {
    let text = match v {
        Some(t) => t,
        // A lattice object in the config file is used as-is.
        None => match cfg.values.get("lattice") {
            Some(Value::Object(_)) => return Ok(serde_json::from_value(cfg.values["lattice"].clone())?),
            _ => required(None, cfg, "lattice")?,
        },
    };
    parse_json_arg(&text)
}

/// Inline JSON (starting with `{`) or the path of a JSON file.
fn parse_json_arg<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        Ok(serde_json::from_str(trimmed)?)
    } else {
        Ok(serde_json::from_str(&std::fs::read_to_string(arg)?)?)
    }
}

fn load_spec(arg: &str) -> Result<PhaseFunctionSpec> {
    PhaseFunctionSpec::from_json(&parse_json_arg::<SpecJson>(arg)?)
}

/// `re,im` (or a bare real number).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidInput(format!("expected re,im but got {s:?}"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(bad()),
    }
}

/// `AxB` with positive integers.
fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("expected dimensions like 10x10 but got {s:?}"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

/// Fixed-point decimal with 15 significant digits.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (14 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn print_json(out: &mut dyn Write, v: &Value) -> Result<i32> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("0.3,-0.2").unwrap(), Complex64::new(0.3, -0.2));
        assert_eq!(parse_complex(" -1 ").unwrap(), Complex64::new(-1.0, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("nan,0").is_err());
    }

    #[test]
    fn dims() {
        assert_eq!(parse_dims("10x20").unwrap(), (10, 20));
        assert!(parse_dims("0x2").is_err());
        assert!(parse_dims("10").is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.0), "1.00000000000000");
        assert_eq!(format_sig(-0.000_123_456_789_012_345_7), "-0.000123456789012346");
        assert_eq!(format_sig(123456.0), "123456.000000000");
        assert_eq!(format_sig(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn config_values() {
        let cfg = Config::from_json(r#"{"seed": 7, "grid": "3x4", "backend": "direct"}"#).unwrap();
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(7));
        assert_eq!(cfg.text("grid").as_deref(), Some("3x4"));
        assert_eq!(cfg.value_enum::<BackendArg>("backend").unwrap(), Some(BackendArg::Direct));
        assert!(cfg.get::<u64>("grid").is_err());
    }
}
