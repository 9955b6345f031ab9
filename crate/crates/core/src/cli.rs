//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library and returns the process exit code: 0 on success, 1 on numerical
//! failure, 2 on usage errors. Errors are reported as one JSON object on
//! stderr.

use crate::asymptotics::{scaled_cloud, trace_trajectories};
use crate::critical::{
    collision_report, default_seed, t_crit_bisect, t_crit_hermite_double_zero, table_csv, zeros_at, CriticalResult,
    DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::family::{make_family, FamilyDoc, FamilySpec, RecurrenceFamily};
use crate::verify::{verify_family, VerifyReport};
use crate::zeros::{classify_real, fmt_f64, zeros_aberth_seeded, ZeroSet, DEFAULT_SEED, DEFAULT_TOL_IM};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "opsums",
    version,
    about = "Partial sums of orthogonal polynomial generating functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// hermite, charlier, lommel, or the path of a JSON family document
    #[arg(long, default_value = "hermite")]
    pub family: String,
    /// Charlier parameter
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Lommel parameter
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ZeroRoute {
    Eig,
    Aberth,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TcritMethod {
    /// double-zero method for rescaled Hermite, bisection otherwise
    Auto,
    Bisect,
    DoubleZero,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// q_m(x; t) by the direct sum and by the four-term recursion
    Eval {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'm', long = "degrees", value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(short = 'x', allow_negative_numbers = true)]
        x: f64,
        #[arg(short = 't', allow_negative_numbers = true)]
        t: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// All zeros of x -> q_m(x; t)
    Zeros {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'm', long = "degrees", value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(short = 't', allow_negative_numbers = true)]
        t: f64,
        /// zeros of q_m(sqrt(m) x; sqrt(m) t)
        #[arg(long)]
        rescaled: bool,
        #[arg(long, value_enum, default_value = "eig")]
        method: ZeroRoute,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL_IM)]
        tol_im: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Zero trajectories over a geometric sweep from t0 down to t1
    Traj {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'm', long = "degrees")]
        m: usize,
        /// `t0,t1` with t0 > t1 > 0
        #[arg(short = 't', long = "t-range", value_delimiter = ',', num_args = 1, required = true)]
        t_range: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        rescaled: bool,
        /// also write an SVG rendering here
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Threshold t above which all zeros are real
    Tcrit {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'm', long = "degrees", value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long)]
        rescaled: bool,
        #[arg(long, value_enum, default_value = "auto")]
        method: TcritMethod,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// starting point of the bracket search
        #[arg(long)]
        t_seed: Option<f64>,
        /// CSV with columns m,x0,t_crit; implies --rescaled for Hermite
        #[arg(long)]
        table: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Zeros mapped onto the Szego curve |z e^{1-z}| = 1
    Szego {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'm', long = "degrees")]
        m: usize,
        #[arg(short = 't', allow_negative_numbers = true)]
        t: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Identity suite; exits 1 if any identity fails
    Verify {
        /// all built-in families when omitted
        #[arg(long)]
        family: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        nu: Option<f64>,
        #[arg(long, default_value_t = 30)]
        max_m: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            report(stderr, "usage", e.to_string().trim().to_string(), 2);
            return 2;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let code = if e.is_usage() { 2 } else { 1 };
            report(stderr, e.kind(), e.to_string(), code);
            code
        }
    }
}

fn report(stderr: &mut dyn Write, kind: &str, message: String, code: i32) {
    let r = ErrorReport {
        error: kind,
        message,
        exit_code: code,
    };
    let _ = writeln!(stderr, "{}", serde_json::to_string(&r).unwrap_or_default());
}

fn family(args: &FamilyArgs) -> Result<RecurrenceFamily> {
    family_from(&args.family, args.a, args.nu)
}

fn family_from(name: &str, a: Option<f64>, nu: Option<f64>) -> Result<RecurrenceFamily> {
    let path = Path::new(name);
    if name.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read family file {name}: {e}")))?;
        let doc: FamilyDoc = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("malformed family file {name}: {e}")))?;
        return RecurrenceFamily::from_doc(&doc);
    }
    let mut spec = FamilySpec::new(name);
    if let Some(a) = a {
        spec = spec.with("a", a);
    }
    if let Some(nu) = nu {
        spec = spec.with("nu", nu);
    }
    make_family(&spec)
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} is not finite")))
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be positive")))
    }
}

fn emit(out: &OutArgs, stdout: &mut dyn Write, body: &str) -> Result<()> {
    match &out.out {
        Some(p) => std::fs::write(p, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn reject(fmt: Format, cmd: &str) -> Error {
    Error::InvalidParameter(format!("format {fmt:?} is not available for {cmd}").to_lowercase())
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Eval { fam, m, x, t, out } => cmd_eval(&family(&fam)?, &m, x, t, &out, stdout),
        Command::Zeros {
            fam,
            m,
            t,
            rescaled,
            method,
            seed,
            tol_im,
            out,
        } => cmd_zeros(&family(&fam)?, &m, t, rescaled, method, seed, tol_im, &out, stdout),
        Command::Traj {
            fam,
            m,
            t_range,
            steps,
            rescaled,
            svg,
            out,
        } => {
            if t_range.len() != 2 {
                return Err(Error::InvalidParameter("--t-range takes two values `t0,t1`".into()));
            }
            let fam = family(&fam)?;
            let (t0, t1) = (positive("t0", t_range[0])?, positive("t1", t_range[1])?);
            let b = trace_trajectories(&fam, m, t0, t1, steps, rescaled)?;
            if let Some(p) = svg {
                std::fs::write(p, b.to_svg(false))?;
            }
            let body = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => b.to_csv(),
                Format::Json => b.to_json()? + "\n",
                Format::Svg => b.to_svg(false),
                f => return Err(reject(f, "traj")),
            };
            emit(&out, stdout, &body)?;
            Ok(0)
        }
        Command::Tcrit {
            fam,
            m,
            rescaled,
            method,
            tol,
            t_seed,
            table,
            out,
        } => cmd_tcrit(&family(&fam)?, &m, rescaled, method, tol, t_seed, table, &out, stdout),
        Command::Szego { fam, m, t, svg, out } => {
            let fam = family(&fam)?;
            let t = positive("t", t)?;
            let zs = crate::zeros::zeros_eig(&fam, m, t)?;
            let cloud = scaled_cloud(&fam, &zs)?;
            if let Some(p) = svg {
                std::fs::write(p, cloud.to_svg())?;
            }
            let body = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => cloud.to_csv(),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        #[serde(flatten)]
                        cloud: &'a crate::asymptotics::ScaledZeroCloud,
                        max_residual: f64,
                    }
                    json(&Doc {
                        cloud: &cloud,
                        max_residual: cloud.max_residual(),
                    })?
                }
                Format::Svg => cloud.to_svg(),
                f => return Err(reject(f, "szego")),
            };
            emit(&out, stdout, &body)?;
            Ok(0)
        }
        Command::Verify {
            family,
            a,
            nu,
            max_m,
            out,
        } => {
            let fams = match family {
                Some(name) => vec![family_from(&name, a, nu)?],
                None => vec![
                    RecurrenceFamily::hermite(),
                    RecurrenceFamily::charlier(a.unwrap_or(3.0))?,
                    RecurrenceFamily::lommel(nu.unwrap_or(3.0))?,
                ],
            };
            let reports = fams
                .iter()
                .map(|f| verify_family(f, max_m))
                .collect::<Result<Vec<VerifyReport>>>()?;
            let body = match out.format.unwrap_or(Format::Text) {
                Format::Text => verify_text(&reports),
                Format::Json => json(&reports)?,
                Format::Csv => {
                    let mut s = String::new();
                    for (i, r) in reports.iter().enumerate() {
                        let csv = r.to_csv();
                        s.push_str(if i == 0 { &csv } else { csv.split_once('\n').map_or("", |p| p.1) });
                    }
                    s
                }
                f => return Err(reject(f, "verify")),
            };
            emit(&out, stdout, &body)?;
            Ok(if reports.iter().all(|r| r.passed()) { 0 } else { 1 })
        }
    }
}

fn verify_text(reports: &[VerifyReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "{} (m <= {})", r.family, r.max_m);
        for c in &r.checks {
            let _ = writeln!(
                s,
                "  {} {:<30} worst {:.3e}  tol {:.0e}  cases {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.worst,
                c.tolerance,
                c.cases
            );
        }
    }
    s
}

#[derive(Serialize)]
struct EvalRow {
    family: String,
    m: usize,
    x: f64,
    t: f64,
    direct: f64,
    recurrence: Option<f64>,
    discrepancy: Option<f64>,
}

fn cmd_eval(fam: &RecurrenceFamily, ms: &[usize], x: f64, t: f64, out: &OutArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (x, t) = (finite("x", x)?, finite("t", t)?);
    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        let direct = fam.partial_sum_direct(m, x, t)?;
        // the recursion divides by t
        let recurrence = if t != 0.0 {
            Some(fam.partial_sum_recurrence(m, x, t)?)
        } else {
            None
        };
        rows.push(EvalRow {
            family: fam.label(),
            m,
            x,
            t,
            direct,
            recurrence,
            discrepancy: recurrence.map(|r| (r - direct).abs()),
        });
    }
    let body = match out.format.unwrap_or(Format::Json) {
        Format::Json if rows.len() == 1 => json(&rows[0])?,
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = String::from("family,m,x,t,direct,recurrence,discrepancy\n");
            let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.family,
                    r.m,
                    fmt_f64(r.x),
                    fmt_f64(r.t),
                    fmt_f64(r.direct),
                    opt(r.recurrence),
                    opt(r.discrepancy)
                );
            }
            s
        }
        f => return Err(reject(f, "eval")),
    };
    emit(out, stdout, &body)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_zeros(
    fam: &RecurrenceFamily,
    ms: &[usize],
    t: f64,
    rescaled: bool,
    method: ZeroRoute,
    seed: u64,
    tol_im: f64,
    out: &OutArgs,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let t = finite("t", t)?;
    positive("tol-im", tol_im)?;
    let sets = ms
        .par_iter()
        .map(|&m| {
            let zs = match method {
                ZeroRoute::Eig => zeros_at(fam, m, t, rescaled)?,
                ZeroRoute::Aberth => {
                    let s = if rescaled { (m as f64).sqrt() } else { 1.0 };
                    let mut zs = zeros_aberth_seeded(fam, m, s * t, seed)?.divided_by(s);
                    zs.t = t;
                    zs
                }
            };
            classify_real(zs, tol_im)
        })
        .collect::<Result<Vec<ZeroSet>>>()?;
    let failed = sets.iter().any(|z| !z.converged);
    let body = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::new();
            for (i, z) in sets.iter().enumerate() {
                let csv = z.to_csv();
                s.push_str(if i == 0 { &csv } else { csv.split_once('\n').map_or("", |p| p.1) });
            }
            s
        }
        Format::Json => {
            let docs: Vec<_> = sets
                .iter()
                .map(|z| {
                    let mut d = z.to_doc();
                    d.family = Some(fam.label());
                    d.seed = (method == ZeroRoute::Aberth).then_some(seed);
                    d
                })
                .collect();
            if docs.len() == 1 {
                json(&docs[0])?
            } else {
                json(&docs)?
            }
        }
        f => return Err(reject(f, "zeros")),
    };
    emit(out, stdout, &body)?;
    Ok(if failed { 1 } else { 0 })
}

/// Undoes the sqrt(m) rescaling of a result.
fn unrescale(mut r: CriticalResult) -> CriticalResult {
    let s = (r.m as f64).sqrt();
    r.t_crit *= s;
    r.bracket = (r.bracket.0 * s, r.bracket.1 * s);
    r.x0 = r.x0.map(|x| x * s);
    r.diagnostics.double_zero = r.diagnostics.double_zero.map(|(x, t)| (x * s, t * s));
    r.rescaled = false;
    r
}

#[allow(clippy::too_many_arguments)]
fn cmd_tcrit(
    fam: &RecurrenceFamily,
    ms: &[usize],
    rescaled: bool,
    method: TcritMethod,
    tol: f64,
    t_seed: Option<f64>,
    table: bool,
    out: &OutArgs,
    stdout: &mut dyn Write,
) -> Result<i32> {
    positive("tol", tol)?;
    if let Some(s) = t_seed {
        positive("t-seed", s)?;
    }
    let rescaled = rescaled || (table && fam.is_hermite());
    let double_zero = match method {
        TcritMethod::Auto => fam.is_hermite() && rescaled,
        TcritMethod::Bisect => false,
        TcritMethod::DoubleZero if fam.is_hermite() => true,
        TcritMethod::DoubleZero => return Err(Error::UnsupportedFamily(fam.label())),
    };
    let rows = ms
        .par_iter()
        .map(|&m| {
            if double_zero {
                let r = t_crit_hermite_double_zero(m)?;
                Ok(if rescaled { r } else { unrescale(r) })
            } else {
                t_crit_bisect(fam, m, t_seed.unwrap_or_else(|| default_seed(m, rescaled)), tol, rescaled)
            }
        })
        .collect::<Result<Vec<CriticalResult>>>()?;
    for r in rows.iter().filter(|_| double_zero) {
        if !collision_report(fam, r)?.passed() {
            return Err(Error::VerificationFailed(format!(
                "m = {}: no double zero at the reported point ({}, {})",
                r.m,
                r.x0.unwrap_or(f64::NAN),
                r.t_crit
            )));
        }
    }
    let fmt = out.format.unwrap_or(if table { Format::Csv } else { Format::Json });
    let body = match fmt {
        Format::Csv => table_csv(&rows),
        Format::Json if rows.len() == 1 => json(&rows[0])?,
        Format::Json => json(&rows)?,
        f => return Err(reject(f, "tcrit")),
    };
    emit(out, stdout, &body)?;
    Ok(0)
}
