//! `salem`: evaluate and analyse digit-permuted Salem functions from the
//! command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 domain error,
//! 4 failed self-check or verification.
//!
//! CSV schemas:
//!
//! | command    | columns                                   |
//! |------------|-------------------------------------------|
//! | `eval`     | `input,value,decimal,error_bound`         |
//! | `integral` | `quantity,value`                          |
//! | `verify`   | `suite,cases,failures`                    |
//! | `graph`    | `x,y`                                     |
//! | `jump`     | `point,left,right,jump`                   |
//! | `cylinder` | `base,inf,sup,length,increment,ratio`     |
//! | `freq`     | `s,count,frequency`                       |
//! | `quotient` | `n0,quotient_num,quotient_den,log_abs`    |
//! | `invert`   | `value,expansion,exact`                   |

mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use salem_core::analysis::{
    cylinder_increment, derivative_ratio, difference_quotient_trace, digit_frequency,
    integral_bracket, integral_closed_form, integral_enclosure, integral_monte_carlo, jump_at,
};
use salem_core::numerals::{cylinder, digits_of, parse_expansion};
use salem_core::rational::{fmt_exact, parse_rational, to_decimal, to_f64};
use salem_core::selfaffine::{
    chaos_game, deterministic_points, write_csv, write_svg, ChaosConfig, GraphPointSet,
};
use salem_core::{DigitExpansion, DigitPermutation, Error, PartitionParams, Rational, SalemSystem};

/// Environment variable naming the directory for relative `--out` paths and
/// for `graph` output when `--out` is absent.
const OUT_DIR_ENV: &str = "SALEM_OUT_DIR";

const DECIMAL_DIGITS: usize = 17;

#[derive(Parser, Debug)]
#[command(
    name = "salem",
    version,
    about = "Exact evaluation of digit-permuted Salem functions"
)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Digit weights p_0,...,p_{q-1}
    #[arg(long, global = true, default_value = "1/3,1/3,1/3")]
    p: String,
    /// Built-in ternary permutation θ_1..θ_6
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=6))]
    theta: u8,
    /// Explicit permutation table, e.g. 0,2,1 (overrides --theta)
    #[arg(long, global = true)]
    perm: Option<String>,
    /// Digit budget for rational inputs and streams
    #[arg(long, global = true, default_value_t = 64)]
    digits: usize,
    /// Cylinder rank for integral brackets
    #[arg(long, global = true, default_value_t = 8)]
    rank: usize,
    /// Monte Carlo sample count
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (default: standard output)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate f at an expansion such as 02(1) or a rational such as 3/7
    Eval { x: String },
    /// Closed form, certified bracket and Monte Carlo estimate of ∫f
    Integral,
    /// Run invariant suites and print suite,cases,failures
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
    },
    /// Points on the graph of f
    Graph {
        /// All compositions of this many maps applied to the seed point
        #[arg(long, default_value_t = 6, conflicts_with = "chaos")]
        depth: usize,
        /// Emit this many chaos-game points instead
        #[arg(long)]
        chaos: Option<usize>,
        #[arg(long, default_value_t = 40)]
        burn_in: usize,
        /// Choose map t with probability p_t
        #[arg(long)]
        weighted: bool,
        /// Significant digits per CSV coordinate
        #[arg(long, default_value_t = DECIMAL_DIGITS)]
        precision: usize,
        /// SVG point radius (the unit square spans 1000 units)
        #[arg(long, default_value_t = 1.5)]
        radius: f64,
    },
    /// One-sided limits of f at a point with two spellings
    Jump { x: String },
    /// Length, increment and increment ratio of a cylinder
    Cylinder {
        #[arg(long, default_value = "")]
        base: String,
    },
    /// Digit counts over the first --digits digits of x
    Freq { x: String },
    /// Difference quotients from replacing digit n0 of x by j
    Quotient {
        x: String,
        #[arg(long, default_value_t = 1)]
        j: u8,
        #[arg(long, default_value_t = 20)]
        n0: usize,
    },
    /// Digits of a rational under the weights
    Invert { y: String },
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Check(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        })
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Io { .. }) => 1,
            CliError::Core(e) if e.is_parse() => 2,
            CliError::Core(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Core(err) => eprintln!("error: {err}"),
                CliError::Check(msg) => eprintln!("check failed: {msg}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

impl RunConfig {
    fn system(&self) -> CliResult<SalemSystem> {
        let params = PartitionParams::parse(&self.p)?;
        let perm = match &self.perm {
            Some(text) => DigitPermutation::parse(text)?,
            None => DigitPermutation::builtin(self.theta as usize)?,
        };
        Ok(SalemSystem::new(params, perm)?)
    }

    fn output_path(&self, default_name: Option<&str>) -> Option<PathBuf> {
        let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
        match (&self.out, dir) {
            (Some(out), Some(dir)) if out.is_relative() => Some(dir.join(out)),
            (Some(out), _) => Some(out.clone()),
            (None, Some(dir)) => default_name.map(|name| dir.join(name)),
            (None, None) => None,
        }
    }

    fn open(&self, default_name: Option<&str>) -> CliResult<Box<dyn Write>> {
        match self.output_path(default_name) {
            Some(path) => {
                let file = File::create(&path).map_err(|source| Error::Io { path, source })?;
                Ok(Box::new(BufWriter::new(file)))
            }
            None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        }
    }

    fn csv(&self) -> bool {
        self.format == Format::Csv
    }
}

/// An argument that is either a digit expansion or a number.
enum Point {
    Expansion(DigitExpansion),
    Value(Rational),
}

/// Text containing `/` or `.` is a number; anything else is an expansion,
/// so `1` means the digit string `1(0)` and the number one is `1/1`.
fn parse_point(text: &str, q: usize) -> CliResult<Point> {
    if text.contains('/') || text.contains('.') {
        let r = parse_rational(text)?;
        if r < Rational::from_integer(0.into()) || r > Rational::from_integer(1.into()) {
            return Err(Error::OutOfRange(text.to_owned()).into());
        }
        Ok(Point::Value(r))
    } else {
        Ok(Point::Expansion(parse_expansion(text, q)?))
    }
}

fn point_expansion(text: &str, cfg: &RunConfig, sys: &SalemSystem) -> CliResult<DigitExpansion> {
    match parse_point(text, sys.q())? {
        Point::Expansion(e) => Ok(e),
        Point::Value(r) => Ok(digits_of(&r, sys.params(), cfg.digits)?.expansion()),
    }
}

fn parse_digits(text: &str, q: usize) -> CliResult<Vec<u8>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    Ok(parse_expansion(text, q)?
        .digits()
        .take(text.len())
        .collect())
}

fn dec(r: &Rational) -> String {
    to_decimal(r, DECIMAL_DIGITS)
}

fn run(cli: Cli) -> CliResult {
    let cfg = cli.config;
    let sys = cfg.system()?;
    match cli.command {
        Command::Eval { x } => cmd_eval(&x, &cfg, &sys),
        Command::Integral => cmd_integral(&cfg, &sys),
        Command::Verify { suite } => {
            let mut out = cfg.open(None)?;
            let ok = verify::run(suite, &cfg, &sys, &mut out)?;
            out.flush()?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Check(format!(
                    "suite {suite:?} reported failures"
                )))
            }
        }
        Command::Graph {
            depth,
            chaos,
            burn_in,
            weighted,
            precision,
            radius,
        } => {
            let pts: GraphPointSet = match chaos {
                Some(n) => chaos_game(
                    &sys,
                    &ChaosConfig {
                        n,
                        seed: cfg.seed,
                        burn_in,
                        weighted,
                        start: (0.0, 0.0),
                    },
                ),
                None => deterministic_points(&sys, depth)?,
            };
            let svg = cfg.format == Format::Svg;
            let mut out = cfg.open(Some(if svg { "graph.svg" } else { "graph.csv" }))?;
            if svg {
                write_svg(&pts, &mut out, radius)?;
            } else {
                write_csv(&pts, &mut out, precision)?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Jump { x } => {
            let e = point_expansion(&x, &cfg, &sys)?;
            let r = jump_at(&e, &sys)?;
            let mut out = cfg.open(None)?;
            if cfg.csv() {
                writeln!(out, "point,left,right,jump")?;
                writeln!(
                    out,
                    "{},{},{},{}",
                    r.point,
                    fmt_exact(&r.left_limit),
                    fmt_exact(&r.right_limit),
                    fmt_exact(&r.jump)
                )?;
            } else {
                writeln!(out, "point {}", r.point)?;
                for (name, v) in [
                    ("left", &r.left_limit),
                    ("right", &r.right_limit),
                    ("jump", &r.jump),
                ] {
                    writeln!(out, "{name} {} ({})", fmt_exact(v), dec(v))?;
                }
            }
            out.flush()?;
            Ok(())
        }
        Command::Cylinder { base } => {
            let digits = parse_digits(&base, sys.q())?;
            let c = cylinder(&digits, sys.params())?;
            let inc = cylinder_increment(&digits, &sys)?;
            let ratio = derivative_ratio(&digits, &sys)?;
            let mut out = cfg.open(None)?;
            if cfg.csv() {
                writeln!(out, "base,inf,sup,length,increment,ratio")?;
                writeln!(
                    out,
                    "{base},{},{},{},{},{}",
                    fmt_exact(&c.inf),
                    fmt_exact(&c.sup),
                    fmt_exact(&c.length),
                    fmt_exact(&inc),
                    fmt_exact(&ratio)
                )?;
            } else {
                writeln!(out, "base {base}")?;
                for (name, v) in [
                    ("inf", &c.inf),
                    ("sup", &c.sup),
                    ("length", &c.length),
                    ("increment", &inc),
                    ("ratio", &ratio),
                ] {
                    writeln!(out, "{name} {} ({})", fmt_exact(v), dec(v))?;
                }
            }
            out.flush()?;
            Ok(())
        }
        Command::Freq { x } => {
            let e = point_expansion(&x, &cfg, &sys)?;
            let digits: Vec<u8> = e.digits().take(cfg.digits).collect();
            let r = digit_frequency(&digits, &sys)?;
            let mut out = cfg.open(None)?;
            if !cfg.csv() {
                writeln!(out, "k {}", r.k)?;
            }
            writeln!(out, "s,count,frequency")?;
            for s in 0..sys.q() as u8 {
                writeln!(
                    out,
                    "{s},{},{}",
                    r.counts[s as usize],
                    fmt_exact(&r.frequency(s))
                )?;
            }
            if !cfg.csv() {
                writeln!(out, "log_ratio {}", r.log_ratio)?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Quotient { x, j, n0 } => {
            let e = point_expansion(&x, &cfg, &sys)?;
            let rows = difference_quotient_trace(&e, n0, j, &sys)?;
            let mut out = cfg.open(None)?;
            writeln!(out, "n0,quotient_num,quotient_den,log_abs")?;
            for row in &rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    row.n0,
                    row.quotient.numer(),
                    row.quotient.denom(),
                    row.log_abs()
                )?;
            }
            out.flush()?;
            if let Some(row) = rows.iter().find(|r| !r.factorization_holds()) {
                return Err(CliError::Check(format!(
                    "factorization fails at n0 = {}",
                    row.n0
                )));
            }
            Ok(())
        }
        Command::Invert { y } => {
            let r = parse_rational(&y)?;
            let ex = digits_of(&r, sys.params(), cfg.digits)?;
            let mut out = cfg.open(None)?;
            if cfg.csv() {
                writeln!(out, "value,expansion,exact")?;
                writeln!(out, "{},{ex},{}", fmt_exact(&r), ex.is_exact())?;
            } else {
                writeln!(out, "{ex}")?;
                if !ex.is_exact() {
                    writeln!(out, "truncated after {} digits", cfg.digits)?;
                }
            }
            out.flush()?;
            Ok(())
        }
    }
}

fn cmd_eval(x: &str, cfg: &RunConfig, sys: &SalemSystem) -> CliResult {
    let (value, bound) = match parse_point(x, sys.q())? {
        Point::Expansion(e) => (sys.eval(&e)?, None),
        Point::Value(r) => {
            let ev = sys.eval_at(&r, cfg.digits)?;
            let bound = (!ev.digits.is_exact()).then_some(ev.error_bound);
            (ev.value, bound)
        }
    };
    let mut out = cfg.open(None)?;
    if cfg.csv() {
        writeln!(out, "input,value,decimal,error_bound")?;
        let b = bound.as_ref().map_or_else(|| "0".to_owned(), fmt_exact);
        writeln!(out, "{x},{},{},{b}", fmt_exact(&value), dec(&value))?;
    } else {
        writeln!(out, "{}", fmt_exact(&value))?;
        writeln!(out, "decimal {}", dec(&value))?;
        if let Some(b) = bound {
            writeln!(out, "error_bound {} ({})", fmt_exact(&b), dec(&b))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_integral(cfg: &RunConfig, sys: &SalemSystem) -> CliResult {
    let report = build_integral_report(cfg, sys)?;
    let mut out = cfg.open(None)?;
    let rows: Vec<(&str, String)> = vec![
        ("closed_form", fmt_exact(&report.closed)),
        ("closed_form_decimal", dec(&report.closed)),
        ("rank", report.enclosure.rank.to_string()),
        ("enclosure_lower", dec(&report.enclosure.lower)),
        ("enclosure_upper", dec(&report.enclosure.upper)),
        ("enclosure_gap", dec(&report.enclosure.gap())),
        ("bracket_lower", dec(&report.bracket.lower)),
        ("bracket_upper", dec(&report.bracket.upper)),
        ("bracket_gap", dec(&report.bracket.gap())),
        (
            "bracket_contains",
            report.bracket.contains(&report.closed).to_string(),
        ),
        ("monte_carlo", report.mc.estimate.to_string()),
        ("std_error", report.mc.std_error.to_string()),
        ("samples", report.mc.samples.to_string()),
        ("consistent", report.consistent().to_string()),
    ];
    if cfg.csv() {
        writeln!(out, "quantity,value")?;
        for (k, v) in &rows {
            writeln!(out, "{k},{v}")?;
        }
    } else {
        writeln!(out, "{}", fmt_exact(&report.closed))?;
        for (k, v) in &rows[1..] {
            writeln!(out, "{k} {v}")?;
        }
    }
    out.flush()?;
    if report.consistent() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "integral {} disagrees with enclosure or Monte Carlo {} ± {}",
            dec(&report.closed),
            report.mc.estimate,
            report.mc.std_error
        )))
    }
}

/// Closed form, brackets and Monte Carlo estimate used by `integral` and
/// `verify --suite integral`.
pub(crate) struct IntegralReport {
    pub closed: Rational,
    pub enclosure: salem_core::analysis::IntegralBracket,
    pub bracket: salem_core::analysis::IntegralBracket,
    pub mc: salem_core::analysis::MonteCarloEstimate,
}

impl IntegralReport {
    pub fn enclosure_ok(&self) -> bool {
        self.enclosure.contains(&self.closed)
    }

    /// Within four standard errors; a single sample has no spread and is
    /// not judged.
    pub fn monte_carlo_ok(&self) -> bool {
        self.mc.samples < 2
            || (self.mc.estimate - to_f64(&self.closed)).abs() <= 4.0 * self.mc.std_error
    }

    pub fn consistent(&self) -> bool {
        self.enclosure_ok() && self.monte_carlo_ok()
    }
}

pub(crate) fn build_integral_report(
    cfg: &RunConfig,
    sys: &SalemSystem,
) -> CliResult<IntegralReport> {
    Ok(IntegralReport {
        closed: integral_closed_form(sys),
        enclosure: integral_enclosure(sys, cfg.rank)?,
        bracket: integral_bracket(sys, cfg.rank)?,
        mc: integral_monte_carlo(sys, cfg.samples.max(1), cfg.seed),
    })
}
