//! Command-line front end.
//!
//! Exit codes: 0 success, 1 violations found (or a Monte Carlo z-score above
//! 5), 2 usage or domain error, 3 counterexample search exhausted.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::exec::{threads_from_env, with_threads};
use crate::funcs::{big_phi, elem_root, hom_ratio, hom_root, phi};
use crate::mc::{estimate_hk, CLI_K_MAX};
use crate::parsum::{anderson_psi, multi_p_par_sum, p_par_sum, par_sum, PExponent};
use crate::spectral::{run_matrix_suite, MatrixCheck, MatrixConfig};
use crate::sympoly::{complete_hom, elem_sym, elem_sym_log, PositiveVector};
use crate::verify::{
    run_suite, search_counterexample, Checker, CheckerSummary, DegreePolicy, EntryDistribution,
    InequalityReport, SearchRegion, SuiteSummary, TrialConfig, TrialInputs, DEFAULT_TOLERANCE,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATIONS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_EXHAUSTED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "symineq", version, about = "Symmetric-polynomial inequalities: evaluation and randomized verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one functional.
    Eval(EvalArgs),
    /// Run randomized inequality suites.
    Verify(VerifyArgs),
    /// Search for a counterexample outside a proven parameter range.
    Search(SearchArgs),
    /// Run the matrix log-convexity and reciprocal-concavity checks.
    Matrix(MatrixArgs),
    /// Monte Carlo cross-check of h_k.
    Mc(McArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FnName {
    Ek,
    Hk,
    Phi,
    Bigphi,
    Elemroot,
    Homroot,
    Homratio,
    Psi,
    Parsum,
    Ppsum,
    Multippsum,
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    #[arg(long = "fn", value_enum)]
    pub func: FnName,
    /// Comma-separated entries.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Vec<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    /// `all` or a comma-separated list of checker ids.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Inclusive dimension range `lo..hi`.
    #[arg(long, default_value = "2..8")]
    pub n: String,
    /// Overrides every checker's default grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub checker: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    /// Column count (mixed Minkowski only).
    #[arg(long, default_value_t = 1)]
    pub cols: usize,
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct MatrixArgs {
    #[arg(long)]
    pub check: String,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,6")]
    pub dim: Vec<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::spectral::MATRIX_TOLERANCE)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct McArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<f64>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    AllPass,
    Violations(u64),
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub artifact_version: String,
    pub timestamp: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub manifest: RunManifest,
    pub summary: BTreeMap<String, CheckerSummary>,
    pub violations: Vec<InequalityReport>,
}

impl Report {
    fn new(command: &str, config: serde_json::Value, summary: SuiteSummary) -> Self {
        let count = summary.violations.len() as u64;
        Self::with_outcome(command, config, summary, if count == 0 { Outcome::AllPass } else { Outcome::Violations(count) })
    }

    fn with_outcome(command: &str, config: serde_json::Value, summary: SuiteSummary, outcome: Outcome) -> Self {
        Self {
            manifest: RunManifest {
                command: command.to_string(),
                config,
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                outcome,
            },
            summary: summary.checkers,
            violations: summary.violations,
        }
    }
}

/// Pretty printer that writes every float with 17 significant digits.
struct ExactFloats(PrettyFormatter<'static>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for ExactFloats {
    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

/// Serializes to pretty JSON with lossless floats; non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Config(format!("cannot serialize report: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
}

pub fn parse_report(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("cannot parse report: {e}")))
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    checker_id: &'a str,
    trial_index: u64,
    n: usize,
    k: usize,
    l: usize,
    p: f64,
    form: String,
    lhs: f64,
    rhs: f64,
    margin: f64,
    tolerance: f64,
    inputs: String,
}

fn flatten_inputs(inputs: &TrialInputs) -> String {
    let list = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
    let mat = |m: &[Vec<f64>]| m.iter().map(|r| list(r)).collect::<Vec<_>>().join(" / ");
    match inputs {
        TrialInputs::Vectors { x, y } => format!("x={};y={}", list(x), list(y)),
        TrialInputs::Scalars { a, b, c, d } => format!("abcd={}", list(&[*a, *b, *c, *d])),
        TrialInputs::Matrices { x, y } => format!("x={};y={}", mat(x), mat(y)),
        TrialInputs::Spectral { a, x, y } => {
            let head = a.as_ref().map(|a| format!("a={};", mat(a))).unwrap_or_default();
            format!("{head}x={};y={}", mat(x), mat(y))
        }
    }
}

pub fn write_csv(path: &Path, violations: &[InequalityReport]) -> Result<()> {
    let io_err = |e: csv::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    for v in violations {
        w.serialize(CsvRow {
            checker_id: &v.checker_id,
            trial_index: v.trial_index,
            n: v.n,
            k: v.k,
            l: v.l,
            p: v.p,
            form: v.form.map(|f| format!("{f:?}").to_lowercase()).unwrap_or_default(),
            lhs: v.lhs,
            rhs: v.rhs,
            margin: v.margin,
            tolerance: v.tolerance,
            inputs: flatten_inputs(&v.inputs),
        })
        .map_err(io_err)?;
    }
    if violations.is_empty() {
        // Header only.
        w.write_record([
            "checker_id", "trial_index", "n", "k", "l", "p", "form", "lhs", "rhs", "margin", "tolerance", "inputs",
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

/// Parses `lo..hi`, `lo..=hi` or a single value.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("cannot parse range {s:?}; expected lo..hi"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once("..") {
        Some((lo, hi)) => Ok((num(lo)?, num(hi.trim_start_matches('='))?)),
        None => {
            let v = num(s)?;
            Ok((v, v))
        }
    }
}

fn need<T>(v: Option<T>, flag: &str, func: FnName) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("--{flag} is required for --fn {func:?}").to_lowercase()))
}

fn scalar(v: &[f64], flag: &str) -> Result<f64> {
    match v {
        [s] => Ok(*s),
        _ => Err(Error::Config(format!("--{flag} must be a single value for this function"))),
    }
}

pub fn eval_value(args: &EvalArgs) -> Result<f64> {
    let f = args.func;
    let x = || PositiveVector::from_slice(&args.x);
    match f {
        FnName::Ek => {
            let (x, k) = (x()?, need(args.k, "k", f)?);
            let v = elem_sym(&x, k)?;
            if v.is_finite() && (v > 0.0 || !x.is_strict()) {
                Ok(v)
            } else {
                Ok(elem_sym_log(&x, k)?.value())
            }
        }
        FnName::Hk => Ok(complete_hom(&x()?, need(args.k, "k", f)?)),
        FnName::Phi => phi(&x()?, need(args.k, "k", f)?, need(args.p, "p", f)?),
        FnName::Bigphi => big_phi(&x()?, need(args.k, "k", f)?, need(args.l, "l", f)?, need(args.p, "p", f)?),
        FnName::Elemroot => elem_root(&x()?, need(args.k, "k", f)?, need(args.p, "p", f)?),
        FnName::Homroot => hom_root(&x()?, need(args.k, "k", f)?, need(args.p, "p", f)?),
        FnName::Homratio => hom_ratio(&x()?, need(args.k, "k", f)?, need(args.p, "p", f)?),
        FnName::Psi => anderson_psi(&x()?, need(args.k, "k", f)?),
        FnName::Parsum => par_sum(scalar(&args.x, "x")?, scalar(&args.y, "y")?),
        FnName::Ppsum => p_par_sum(
            scalar(&args.x, "x")?,
            scalar(&args.y, "y")?,
            PExponent::bivariate(need(args.p, "p", f)?)?,
        ),
        FnName::Multippsum => multi_p_par_sum(&x()?, PExponent::multivariate(need(args.p, "p", f)?)?),
    }
}

fn parse_suite(s: &str) -> Result<Vec<Checker>> {
    if s == "all" {
        return Ok(Checker::ALL.to_vec());
    }
    let mut out = Vec::new();
    for id in s.split(',').map(str::trim) {
        let c: Checker = id.parse()?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

fn emit(report: &Report, out: Option<&Path>, csv: Option<&Path>) -> Result<()> {
    let json = to_json(report)?;
    match out {
        Some(path) => {
            write_file(path, &json)?;
            for (id, s) in &report.summary {
                println!(
                    "{id:<18} trials {:>7}  passes {:>7}  worst scaled margin {:.3e}",
                    s.trials, s.passes, s.worst_scaled_margin
                );
            }
        }
        None => print!("{json}"),
    }
    if let Some(path) = csv {
        write_csv(path, &report.violations)?;
    }
    Ok(())
}

fn exit_for(report: &Report) -> u8 {
    if report.violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    }
}

fn config_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Config(e.to_string()))
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let checkers = parse_suite(&args.suite)?;
    let config = TrialConfig {
        seed: args.seed,
        trials: args.trials,
        n_range: parse_range(&args.n)?,
        k_policy: args.k.map_or(DegreePolicy::AllValid, DegreePolicy::Fixed),
        l_policy: DegreePolicy::AllValid,
        p_grid: args.p_grid.clone(),
        entry_distribution: EntryDistribution::LogUniform { lo: 1e-2, hi: 1e2 },
        tolerance: args.tol,
    };
    let summary = run_suite(&config, &checkers)?;
    let mut value = config_value(&config)?;
    value["checkers"] = checkers.iter().map(|c| c.id()).collect::<Vec<_>>().into();
    let report = Report::new("verify", value, summary);
    emit(&report, args.out.as_deref(), args.csv.as_deref())?;
    Ok(exit_for(&report))
}

fn cmd_search(args: &SearchArgs) -> Result<u8> {
    let checker: Checker = args.checker.parse()?;
    let mut region = SearchRegion::new(checker, args.n, args.k, args.p);
    region.l = args.l;
    region.cols = args.cols;
    region.tolerance = args.tol;
    let found = search_counterexample(&region, args.budget, args.seed)?;
    let mut value = config_value(&region)?;
    value["budget"] = args.budget.into();
    value["seed"] = args.seed.into();
    let (code, outcome, violations) = match found {
        Some(r) => (EXIT_OK, Outcome::Violations(1), vec![r]),
        None => (EXIT_EXHAUSTED, Outcome::AllPass, Vec::new()),
    };
    let summary = SuiteSummary { checkers: BTreeMap::new(), violations };
    let report = Report::with_outcome("search", value, summary, outcome);
    match &args.out {
        Some(path) => write_file(path, &to_json(&report)?)?,
        None => print!("{}", to_json(&report)?),
    }
    match report.violations.first() {
        Some(r) => eprintln!("counterexample: margin {:e} at trial {}", r.margin, r.trial_index),
        None => eprintln!("no counterexample within a budget of {}", args.budget),
    }
    Ok(code)
}

fn cmd_matrix(args: &MatrixArgs) -> Result<u8> {
    let mut config = MatrixConfig::new(MatrixCheck::parse(&args.check)?);
    config.dims = args.dim.clone();
    config.k_policy = args.k.map_or(DegreePolicy::AllValid, DegreePolicy::Fixed);
    config.p_grid = args.p.clone();
    config.trials = args.trials;
    config.seed = args.seed;
    config.tolerance = args.tol;
    let summary = run_matrix_suite(&config)?;
    let report = Report::new("matrix", config_value(&config)?, summary);
    emit(&report, args.out.as_deref(), args.csv.as_deref())?;
    Ok(exit_for(&report))
}

fn cmd_mc(args: &McArgs) -> Result<u8> {
    if args.k > CLI_K_MAX {
        return Err(Error::Config(format!(
            "k = {} exceeds the Monte Carlo cap of {CLI_K_MAX} (estimator variance grows too fast)",
            args.k
        )));
    }
    let x = PositiveVector::from_slice(&args.x)?;
    let est = estimate_hk(&x, args.k, args.samples, args.seed)?;
    let exact = complete_hom(&x, args.k);
    let z = est.z_score(exact);
    println!("mean      {}", est.mean);
    println!("std_error {}", est.std_error);
    println!("samples   {}", est.samples);
    println!("h_k       {exact}");
    println!("z         {z}");
    Ok(if z.abs() <= 5.0 { EXIT_OK } else { EXIT_VIOLATIONS })
}

fn dispatch(command: &Command) -> Result<u8> {
    match command {
        Command::Eval(args) => {
            println!("{}", eval_value(args)?);
            Ok(EXIT_OK)
        }
        Command::Verify(args) => cmd_verify(args),
        Command::Search(args) => cmd_search(args),
        Command::Matrix(args) => cmd_matrix(args),
        Command::Mc(args) => cmd_mc(args),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let result = with_threads(threads, || dispatch(&cli.command));
    let _ = io::stdout().flush();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(args: &[&str]) -> Result<f64> {
        let cli = Cli::try_parse_from(["symineq", "eval"].iter().chain(args)).unwrap();
        match cli.command {
            Command::Eval(a) => eval_value(&a),
            _ => unreachable!(),
        }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval(&["--fn", "ek", "--x", "1,2,3", "--k", "2"]).unwrap(), 11.0);
        let v = eval(&["--fn", "phi", "--x", "1,2,3", "--k", "2", "--p", "1"]).unwrap();
        assert_eq!(format!("{v}"), "1.8333333333333333");
        let v = eval(&["--fn", "psi", "--x", "1,2,3", "--k", "2"]).unwrap();
        assert_eq!(format!("{v}"), "1.8333333333333333");
        assert!(eval(&["--fn", "ek", "--x", "1,2", "--k", "3"]).is_err());
        assert!(eval(&["--fn", "phi", "--x", "1,2"]).is_err());
        assert_eq!(eval(&["--fn", "parsum", "--x", "2", "--y", "2"]).unwrap(), 1.0);
        assert_eq!(eval(&["--fn", "ppsum", "--x", "3", "--y", "4", "--p", "-1"]).unwrap(), 7.0);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..8").unwrap(), (2, 8));
        assert_eq!(parse_range("2..=8").unwrap(), (2, 8));
        assert_eq!(parse_range("5").unwrap(), (5, 5));
        assert!(parse_range("a..b").is_err());
    }

    #[test]
    fn json_floats_round_trip() {
        let vals: [f64; 6] = [0.1, 1.0 / 3.0, 1e-300, 5e-324, 123456789.123, -2.5];
        let text = to_json(&vals.to_vec()).unwrap();
        assert!(text.contains("3.3333333333333331e-1"));
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (a, b) in vals.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(to_json(&f64::NAN).unwrap().trim(), "null");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["symineq", "verify", "--suite", "nonsense"]), EXIT_USAGE);
        assert_eq!(run(["symineq", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["symineq", "mc", "--x", "1,2", "--k", "9"]), EXIT_USAGE);
    }
}
