//! Command-line harness: JSON configuration in, JSON or CSV reports out.
//!
//! Exit codes: 0 success, 1 failed check or runtime error, 2 negative verdict
//! (inadmissible, Lie condition fails), 3 undecided admissibility, 4 point
//! outside the domain or off the zero set, 5 undecided quotient membership,
//! 64 configuration or usage error.

pub mod config;
pub mod format;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::liecond::{self, LieTolerances};
use crate::moment::GeneratorSet;
use crate::reduce::{self, MembershipStatus, QuotientCoords, QuotientDomain, ReductionResult, Verdict};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tube::TubePoint;
use crate::{sampling, AffineGenerator};
use config::{Config, ConfigError, Tolerances};
use format::fmt_f64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_MEMBERSHIP_UNDECIDED: i32 = 5;
pub const EXIT_CONFIG: i32 = 64;

/// Environment variable consulted when neither `--seed` nor the config sets one.
pub const SEED_ENV: &str = "SIEGEL_REDUCE_SEED";

#[derive(Debug, Parser)]
#[command(name = "siegel-reduce", version, about = "Symplectic reduction on tube domains over convex cones")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Tube point as JSON: {"re": [...], "im": [...]}.
    #[arg(long, global = true, value_name = "JSON")]
    pub point: Option<String>,
    /// Number of samples for `quotient` and orbit checks in `lie-test`.
    #[arg(long, global = true, value_name = "N")]
    pub samples: Option<usize>,
    /// Trials per invariant and cone for `verify`.
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<usize>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Tolerance override, repeatable.
    #[arg(long, global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Decide admissibility of the configured subspace.
    Check,
    /// Project a point onto the zero level set.
    Reduce,
    /// Sample quotient points: membership and lift/project round trips (CSV).
    Quotient,
    /// Test a candidate subalgebra against the Lie condition.
    LieTest,
    /// Run the randomized invariant suite.
    Verify,
}

/// Result of a command: exit code, report text and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
    pub message: String,
}

impl Outcome {
    fn new(code: i32, report: String, message: impl Into<String>) -> Self {
        Outcome { code, report, message: message.into() }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        Outcome::new(code, String::new(), message)
    }
}

impl From<ConfigError> for Outcome {
    fn from(e: ConfigError) -> Self {
        Outcome::fail(EXIT_CONFIG, e.to_string())
    }
}

struct Run {
    config: Option<Config>,
    tolerances: Tolerances,
    seed: u64,
}

/// Runs a parsed command line; `env_seed` is the value of [`SEED_ENV`].
pub fn run(cli: &Cli, env_seed: Option<&str>) -> Outcome {
    let run = match prepare(cli, env_seed) {
        Ok(r) => r,
        Err(e) => return e.into(),
    };
    let result = match cli.command {
        Command::Check => cmd_check(&run),
        Command::Reduce => cmd_reduce(cli, &run),
        Command::Quotient => cmd_quotient(cli, &run),
        Command::LieTest => cmd_lie_test(cli, &run),
        Command::Verify => Ok(cmd_verify(cli, &run)),
    };
    let mut out = result.unwrap_or_else(Outcome::from);
    if !out.report.is_empty() && !out.report.ends_with('\n') {
        out.report.push('\n');
    }
    out
}

fn prepare(cli: &Cli, env_seed: Option<&str>) -> Result<Run, ConfigError> {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
            Some(Config::parse(&text)?)
        }
        None => None,
    };
    let mut tolerances = Tolerances::default();
    if let Some(c) = &config {
        for (k, &v) in &c.tolerances {
            tolerances.set(k, v).map_err(|m| ConfigError::new(format!("tolerances.{k}"), m))?;
        }
    }
    for spec in &cli.tol {
        tolerances.apply_override(spec)?;
    }
    let seed = match (cli.seed, config.as_ref().and_then(|c| c.seed), env_seed) {
        (Some(s), _, _) | (None, Some(s), _) => s,
        (None, None, Some(text)) => text
            .trim()
            .parse()
            .map_err(|_| ConfigError::new(SEED_ENV, format!("`{text}` is not an unsigned 64-bit integer")))?,
        (None, None, None) => 0,
    };
    Ok(Run { config, tolerances, seed })
}

fn require_config(run: &Run) -> Result<&Config, ConfigError> {
    run.config.as_ref().ok_or_else(|| ConfigError::new("--config", "this command needs a configuration file"))
}

/// Builds the quotient domain, mapping admissibility failures to exit codes.
fn domain(cfg: &Config, seed: u64) -> Result<Result<QuotientDomain, Outcome>, ConfigError> {
    let h = cfg.subspace()?;
    Ok(match QuotientDomain::new(cfg.cone.clone(), h, seed) {
        Ok(q) => Ok(q),
        Err(Error::NotAdmissible) => Err(Outcome::fail(EXIT_NEGATIVE, "subspace is not admissible")),
        Err(Error::Undecided) => Err(Outcome::fail(EXIT_UNDECIDED, "admissibility undecided")),
        Err(e) => Err(Outcome::fail(EXIT_FAILED, e.to_string())),
    })
}

fn parse_point(cli: &Cli, cfg: &Config) -> Result<TubePoint, ConfigError> {
    let p = match &cli.point {
        Some(text) => serde_json::from_str::<TubePoint>(text).map_err(|e| ConfigError::new("--point", e))?,
        None => cfg
            .base_point
            .clone()
            .ok_or_else(|| ConfigError::new("--point", "no point given and no base_point in the config"))?,
    };
    let n = cfg.cone.ambient_dim();
    if p.re.len() != n || p.im.len() != n {
        return Err(ConfigError::new("--point", format!("point must have re and im of length {n}")));
    }
    Ok(p)
}

#[derive(Serialize)]
struct CheckReport<'a> {
    command: &'static str,
    seed: u64,
    tolerances: &'a Tolerances,
    cone: &'a crate::ConeSpec,
    subspace_dim: usize,
    certificate: reduce::AdmissibilityCertificate,
}

fn cmd_check(run: &Run) -> Result<Outcome, ConfigError> {
    let cfg = require_config(run)?;
    let h = cfg.subspace()?;
    let cert = match reduce::check_admissible(&cfg.cone, &h, run.seed) {
        Ok(c) => c,
        Err(e) => return Ok(Outcome::fail(EXIT_FAILED, e.to_string())),
    };
    let code = match cert.verdict {
        Verdict::Admissible => EXIT_OK,
        Verdict::Inadmissible => EXIT_NEGATIVE,
        Verdict::Undecided => EXIT_UNDECIDED,
    };
    let report = CheckReport {
        command: "check",
        seed: run.seed,
        tolerances: &run.tolerances,
        cone: &cfg.cone,
        subspace_dim: h.dim(),
        certificate: cert,
    };
    Ok(Outcome::new(code, format::to_json(&report), ""))
}

#[derive(Serialize)]
struct ReduceReport<'a> {
    command: &'static str,
    seed: u64,
    tolerances: &'a Tolerances,
    result: ReductionResult,
    reduced_coordinates: QuotientCoords,
    within_tolerance: bool,
}

fn cmd_reduce(cli: &Cli, run: &Run) -> Result<Outcome, ConfigError> {
    let cfg = require_config(run)?;
    let point = parse_point(cli, cfg)?;
    let q = match domain(cfg, run.seed)? {
        Ok(q) => q,
        Err(o) => return Ok(o),
    };
    let result = match q.reduce_point(&point) {
        Ok(r) => r,
        Err(e @ Error::NotInDomain { .. }) => return Ok(Outcome::fail(EXIT_DOMAIN, e.to_string())),
        Err(e) => return Ok(Outcome::fail(EXIT_FAILED, e.to_string())),
    };
    let tol = run.tolerances.get("reduce.residual");
    let within_tolerance = result.residual <= tol;
    let reduced_coordinates = reduce::split_coordinates(q.subspace(), &result.point).quotient;
    let report = ReduceReport {
        command: "reduce",
        seed: run.seed,
        tolerances: &run.tolerances,
        result,
        reduced_coordinates,
        within_tolerance,
    };
    let (code, msg) = if within_tolerance {
        (EXIT_OK, String::new())
    } else {
        (EXIT_FAILED, format!("momentum residual exceeds reduce.residual = {}", fmt_f64(tol)))
    };
    Ok(Outcome::new(code, format::to_json(&report), msg))
}

fn cmd_quotient(cli: &Cli, run: &Run) -> Result<Outcome, ConfigError> {
    let cfg = require_config(run)?;
    let q = match domain(cfg, run.seed)? {
        Ok(q) => q,
        Err(o) => return Ok(o),
    };
    let samples = cli.samples.unwrap_or(100);
    let tol = run.tolerances.get("reduce.roundtrip");
    let (m, k) = (q.subspace().codim(), q.subspace().dim());

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header: Vec<String> = (0..m)
        .map(|i| format!("t{i}"))
        .chain(std::iter::once("member".to_string()))
        .chain((0..k).map(|i| format!("witness{i}")))
        .chain(std::iter::once("roundtrip_err".to_string()))
        .collect();
    w.write_record(&header).expect("writing to memory");

    let (mut undecided, mut members, mut worst) = (0usize, 0usize, 0.0f64);
    for i in 0..samples {
        let mut rng = rng_from_seed(derive_seed(run.seed, i as u64));
        let t = sampling::gaussian_vector(m, &mut rng);
        let a = sampling::gaussian_vector(m, &mut rng);
        let mem = match q.quotient_membership(&t) {
            Ok(x) => x,
            Err(e) => return Ok(Outcome::fail(EXIT_FAILED, e.to_string())),
        };
        let err = match mem.status {
            MembershipStatus::Member => {
                members += 1;
                let s = QuotientCoords { re: a, im: t.clone() };
                let back = q.lift(&s).and_then(|z| q.split_map(&z));
                match back {
                    Ok(b) => {
                        let e = (&b.quotient.re - &s.re).amax().max((&b.quotient.im - &s.im).amax());
                        worst = worst.max(e);
                        fmt_f64(e)
                    }
                    Err(_) => {
                        worst = f64::INFINITY;
                        fmt_f64(f64::INFINITY)
                    }
                }
            }
            MembershipStatus::NonMember => String::new(),
            MembershipStatus::Undecided => {
                undecided += 1;
                String::new()
            }
        };
        let status = match mem.status {
            MembershipStatus::Member => "member",
            MembershipStatus::NonMember => "nonmember",
            MembershipStatus::Undecided => "undecided",
        };
        let row: Vec<String> = t
            .iter()
            .map(|&x| fmt_f64(x))
            .chain(std::iter::once(status.to_string()))
            .chain(mem.witness.iter().map(|&x| fmt_f64(x)))
            .chain(std::iter::once(err))
            .collect();
        w.write_record(&row).expect("writing to memory");
    }
    let report = String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV is UTF-8");
    let summary = format!(
        "{samples} samples, {members} members, {undecided} undecided, worst round trip {} (reduce.roundtrip = {})",
        fmt_f64(worst),
        fmt_f64(tol)
    );
    let code = if undecided > 0 {
        EXIT_MEMBERSHIP_UNDECIDED
    } else if !(worst <= tol) {
        EXIT_FAILED
    } else {
        EXIT_OK
    };
    Ok(Outcome::new(code, report, summary))
}

#[derive(Serialize)]
struct LieReport<'a> {
    command: &'static str,
    seed: u64,
    tolerances: &'a Tolerances,
    report: liecond::LieConditionReport,
}

fn cmd_lie_test(cli: &Cli, run: &Run) -> Result<Outcome, ConfigError> {
    let cfg = require_config(run)?;
    let h = GeneratorSet::from_translations(cfg.subspace()?.basis());
    let x0 = parse_point(cli, cfg)?;
    let s = cfg.candidate_subalgebra.clone().ok_or_else(|| ConfigError::new("candidate_subalgebra", "missing key"))?;
    for (i, g) in s.generators.iter().enumerate() {
        check_generator(cfg, i, g)?;
    }
    let tol = LieTolerances {
        span: run.tolerances.get("liecond.span"),
        bracket: run.tolerances.get("liecond.bracket"),
        orbit: run.tolerances.get("liecond.orbit"),
    };
    let samples = cli.samples.unwrap_or(100);
    let report = match liecond::verify_lie_condition_with(&cfg.cone, &h, &x0, &s, samples, run.seed, &tol) {
        Ok(r) => r,
        Err(e @ (Error::NotOnZeroSet { .. } | Error::NotInDomain { .. })) => {
            return Ok(Outcome::fail(EXIT_DOMAIN, e.to_string()))
        }
        Err(e) => return Ok(Outcome::fail(EXIT_FAILED, e.to_string())),
    };
    let (code, msg) = if report.passed() {
        (EXIT_OK, String::new())
    } else {
        let reasons: Vec<String> = report.reasons.iter().map(|r| format!("{r:?}").to_lowercase()).collect();
        (EXIT_NEGATIVE, format!("Lie condition fails: {}", reasons.join(", ")))
    };
    let out = LieReport { command: "lie-test", seed: run.seed, tolerances: &run.tolerances, report };
    Ok(Outcome::new(code, format::to_json(&out), msg))
}

fn check_generator(cfg: &Config, i: usize, g: &AffineGenerator) -> Result<(), ConfigError> {
    g.check_compatible(&cfg.cone).map_err(|e| ConfigError::new(format!("candidate_subalgebra.generators[{i}]"), e))
}

fn cmd_verify(cli: &Cli, run: &Run) -> Outcome {
    let cones = match &run.config {
        Some(c) => vec![c.cone.clone()],
        None => verify::default_cones(),
    };
    let trials = cli.trials.unwrap_or(100);
    let report = verify::run_verify(&cones, trials, run.seed, &run.tolerances);
    let json = format::to_json(&report);
    match report.first_failure {
        None => Outcome::new(EXIT_OK, json, ""),
        Some(name) => Outcome::new(EXIT_FAILED, json, format!("invariant {name} failed")),
    }
}
