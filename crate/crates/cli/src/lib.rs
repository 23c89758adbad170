//! Command-line front end: identity checks, bound reports, volume estimates,
//! sweeps over `n`, and membership queries for a single form.
//!
//! Every JSON report embeds a [`RunManifest`]. Runs are deterministic in
//! the seed and independent of the worker count set by `CONEVOL_THREADS`.

pub mod manifest;
pub mod membership;
pub mod verify;
pub mod volume;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use conevol::bounds::{build_report, BoundReport};
use conevol::forms::HomogeneousForm;
use conevol::sphere::MetricTag;
use serde::Serialize;

pub use manifest::RunManifest;
use membership::Test;
use volume::{Cone, NRange, SweepPlan};

/// Largest `n` accepted without `--unsafe-scale`.
pub const MAX_N: usize = 8;
/// Largest degree accepted without `--unsafe-scale`.
pub const MAX_DEGREE: u32 = 10;
/// Volume runs with more flagged directions than this exit with status 2.
pub const MAX_FLAGGED_FRACTION: f64 = 0.10;

pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_GUARD_RAIL: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

/// An error that maps to a specific process exit code.
#[derive(Debug)]
pub struct ExitError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for ExitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ExitError {}

fn exit_error(code: i32, message: impl Into<String>) -> anyhow::Error {
    ExitError { code, message: message.into() }.into()
}

/// Exit code for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    err.downcast_ref::<ExitError>().map_or(1, |e| e.code)
}

#[derive(Debug, Parser)]
#[command(name = "conevol", version, about = "Volumes and membership tests for cones of forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Lift the n <= 8 and degree <= 10 limits.
    #[arg(long, global = true)]
    pub unsafe_scale: bool,
    /// Record wall-clock time in the manifest (outputs stop being reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity and inequality suite.
    Verify {
        #[arg(long)]
        n: usize,
        /// Degree 2d of the forms.
        #[arg(long)]
        degree: u32,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Print dimension counts and volume lower bounds.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        degree: u32,
    },
    /// Estimate the normalized volume of one section.
    Volume {
        #[arg(long, value_enum)]
        cone: Cone,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        degree: u32,
        #[arg(long, default_value = "l2")]
        metric: MetricTag,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate volumes over a range of n and write CSV.
    Sweep {
        #[arg(long, value_enum, value_delimiter = ',', default_value = "pos,convex,sos")]
        cones: Vec<Cone>,
        /// Inclusive range such as `3..5`.
        #[arg(long = "n")]
        n_range: NRange,
        #[arg(long)]
        degree: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Samples for `sos` rows, whose gauge is far more expensive.
        #[arg(long, default_value_t = 2000)]
        sos_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Test a form read from a JSON file.
    Membership {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "nonneg,convex,sos")]
        tests: Vec<Test>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

/// Worker count from `CONEVOL_THREADS`; `None` means the rayon default.
pub fn threads_from_env(value: Option<&str>) -> anyhow::Result<Option<usize>> {
    match value {
        None => Ok(None),
        Some(v) => {
            let t: usize = v.trim().parse().with_context(|| format!("CONEVOL_THREADS={v:?} is not a number"))?;
            anyhow::ensure!(t > 0, "CONEVOL_THREADS must be positive");
            Ok(Some(t))
        }
    }
}

fn half_degree(degree: u32) -> anyhow::Result<u32> {
    if degree < 2 || degree % 2 == 1 {
        return Err(exit_error(EXIT_FAILURE, format!("--degree must be even and at least 2 (got {degree})")));
    }
    Ok(degree / 2)
}

fn guard(n: usize, degree: u32, unsafe_scale: bool) -> anyhow::Result<()> {
    if n == 0 {
        return Err(exit_error(EXIT_FAILURE, "--n must be positive"));
    }
    if !unsafe_scale && (n > MAX_N || degree > MAX_DEGREE) {
        return Err(exit_error(
            EXIT_GUARD_RAIL,
            format!("n={n}, degree={degree} exceeds n <= {MAX_N}, degree <= {MAX_DEGREE}; pass --unsafe-scale to override"),
        ));
    }
    Ok(())
}

fn write_text(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct BoundsOutput {
    manifest: RunManifest,
    #[serde(flatten)]
    report: BoundReport,
}

struct Ctx<'a> {
    out: Option<&'a Path>,
    timing: bool,
    start: Instant,
}

impl Ctx<'_> {
    fn finish(&self, mut manifest: RunManifest) -> RunManifest {
        if let Some(p) = self.out {
            manifest.artifact(p);
        }
        if self.timing {
            manifest.wall_time = Some(self.start.elapsed().as_secs_f64());
        }
        manifest
    }
}

/// Runs one command and returns the process exit code. Errors carrying an
/// [`ExitError`] select their own code; anything else maps to 1.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    let ctx = Ctx { out: cli.out.as_deref(), timing: cli.timing, start: Instant::now() };
    match cli.command {
        Command::Verify { n, degree, trials, seed } => {
            guard(n, degree, cli.unsafe_scale)?;
            let d = half_degree(degree)?;
            let base = RunManifest::new("verify", seed).param("n", n).param("degree", degree).param("trials", trials);
            let mut report = verify::verify(n, d, trials, seed, base);
            report.manifest = ctx.finish(report.manifest);
            write_text(ctx.out, &to_json(&report)?)?;
            Ok(if report.passed { 0 } else { EXIT_FAILURE })
        }
        Command::Bounds { n, degree } => {
            guard(n, degree, cli.unsafe_scale)?;
            let d = half_degree(degree)?;
            let report = build_report(n, d)?;
            let base = RunManifest::new("bounds", 0).param("n", n).param("degree", degree);
            let output = BoundsOutput { manifest: ctx.finish(base), report };
            write_text(ctx.out, &to_json(&output)?)?;
            Ok(0)
        }
        Command::Volume { cone, n, degree, metric, samples, seed } => {
            guard(n, degree, cli.unsafe_scale)?;
            let d = half_degree(degree)?;
            if samples < 100 {
                return Err(exit_error(EXIT_FAILURE, format!("--samples must be at least 100 (got {samples})")));
            }
            let base = RunManifest::new("volume", seed)
                .param("cone", cone.name())
                .param("n", n)
                .param("degree", degree)
                .param("metric", metric.to_string())
                .param("samples", samples);
            let mut report = volume::volume(cone, n, d, metric, samples, seed, base)?;
            report.manifest = ctx.finish(report.manifest);
            write_text(ctx.out, &to_json(&report)?)?;
            if report.estimate.flagged_fraction > MAX_FLAGGED_FRACTION {
                eprintln!("flagged fraction {:.3} exceeds {MAX_FLAGGED_FRACTION}", report.estimate.flagged_fraction);
                return Ok(EXIT_FAILURE);
            }
            Ok(0)
        }
        Command::Sweep { cones, n_range, degree, samples, sos_samples, seed } => {
            guard(n_range.lo, degree, cli.unsafe_scale)?;
            guard(n_range.hi, degree, cli.unsafe_scale)?;
            let d = half_degree(degree)?;
            if samples < 100 || sos_samples < 100 {
                return Err(exit_error(EXIT_FAILURE, "--samples and --sos-samples must be at least 100"));
            }
            let plan = SweepPlan { cones: cones.clone(), n_range, d, samples, sos_samples, seed };
            let rows = match ctx.out {
                Some(path) => {
                    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                    volume::sweep(&plan, file)?
                }
                None => volume::sweep(&plan, std::io::stdout().lock())?,
            };
            if let Some(path) = ctx.out {
                let names: Vec<&str> = cones.iter().map(|c| c.name()).collect();
                let mut manifest = RunManifest::new("sweep", seed)
                    .param("cones", names)
                    .param("n_range", format!("{}..{}", n_range.lo, n_range.hi))
                    .param("degree", degree)
                    .param("samples", samples)
                    .param("sos_samples", sos_samples);
                let sidecar = manifest_path(path);
                manifest = ctx.finish(manifest);
                manifest.artifact(&sidecar);
                fs::write(&sidecar, to_json(&manifest)?).with_context(|| format!("writing {}", sidecar.display()))?;
            }
            Ok(if rows.iter().any(|r| r.error.is_some()) { EXIT_FAILURE } else { 0 })
        }
        Command::Membership { form, tests, tol } => {
            let text = fs::read_to_string(&form)
                .map_err(|e| exit_error(EXIT_PARSE, format!("reading {}: {e}", form.display())))?;
            let p: HomogeneousForm = serde_json::from_str(&text)
                .map_err(|e| exit_error(EXIT_PARSE, format!("parsing {}: {e}", form.display())))?;
            guard(p.n_vars(), p.degree(), cli.unsafe_scale)?;
            let names: Vec<String> =
                tests.iter().map(|t| format!("{t:?}").to_lowercase()).collect();
            let base = RunManifest::new("membership", 0)
                .param("form", form.display().to_string())
                .param("tests", names)
                .param("tol", tol);
            let mut report = membership::membership(p, &tests, tol, base)?;
            report.manifest = ctx.finish(report.manifest);
            write_text(ctx.out, &to_json(&report)?)?;
            Ok(0)
        }
    }
}

/// Where `sweep` puts the manifest for a CSV written to `csv`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    csv.with_file_name(name)
}
