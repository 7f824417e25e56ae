//! `tbvp`: solve two-point boundary value problems for wave equations from
//! JSON problem files and check the results against an independent
//! finite-difference oracle.
//!
//! Exit codes: 0 when every declared tolerance is met, 2 when the problem is
//! rejected as inadmissible (the manifest carries the reason), 1 for I/O,
//! parse and tolerance failures.

pub mod error;
pub mod output;
pub mod problem;
pub mod solve;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use tbvp_core::curvflow::{emit_frames, solve_flow_with_tol, FLOW_TOLERANCE};
use tbvp_core::verify::Diagnostics;

pub use error::CliError;
use error::io_err;
use output::{read_table, Manifest, Status};
use problem::{Kind, LoadedProblem};

/// Manifest written by `solve`.
pub const MANIFEST: &str = "manifest.json";
/// Report written by `verify`.
pub const VERIFY_REPORT: &str = "verify.json";
/// Largest difference accepted between a stored and a recomputed velocity.
pub const VELOCITY_REPRODUCTION: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "tbvp", version, about = "Exact controls and solutions of wave-equation two-point problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file and write CSV tables plus manifest.json.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// Output directory.
        #[arg(long, env = "TBVP_OUT_DIR", default_value = "tbvp-out")]
        out: PathBuf,
        /// Also run the leapfrog oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Re-run diagnostics and the oracle on a solve directory.
    Verify {
        #[arg(long, env = "TBVP_OUT_DIR", default_value = "tbvp-out")]
        dir: PathBuf,
    },
    /// Write SVG frames of a curvature flow.
    Frames {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, env = "TBVP_OUT_DIR", default_value = "tbvp-out")]
        out: PathBuf,
        /// Number of frames (defaults to output.frames of the problem).
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Print the problem summary and admissibility checks without solving.
    Info {
        #[arg(long)]
        problem: PathBuf,
    },
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Solve { problem, out, oracle } => solve_command(problem, out, *oracle),
        Command::Verify { dir } => verify_command(dir),
        Command::Frames { problem, out, frames } => frames_command(problem, out, *frames),
        Command::Info { problem } => info_command(problem),
    }
}

fn finish(mut manifest: Manifest, diagnostics: Diagnostics) -> Manifest {
    manifest.status = if diagnostics.all_pass() { Status::Ok } else { Status::Failed };
    if manifest.status == Status::Failed {
        manifest.reason = Some("tolerance-not-met".into());
        manifest.message = Some(
            diagnostics
                .failures()
                .iter()
                .map(|c| format!("{} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance))
                .collect::<Vec<_>>()
                .join("; "),
        );
    }
    manifest.diagnostics = Some(diagnostics);
    manifest
}

fn solve_into(lp: &LoadedProblem, out: &Path, with_oracle: bool, manifest: &mut Manifest) -> Result<(), CliError> {
    manifest.admissibility = solve::admissibility(lp)?;
    let (sol, summary) = solve::solve(lp)?;
    manifest.solution = summary;
    let tables = solve::tables(lp, &sol)?;
    for t in &tables {
        t.write(out)?;
        manifest.files.push(t.file.clone());
    }
    manifest.velocity_table = tables.iter().find(|t| t.file == "v.csv").map(|t| t.file.clone());
    let mut diagnostics = solve::diagnose(lp, &sol)?;
    if with_oracle {
        if let Some(dev) = solve::oracle(lp, &sol)? {
            diagnostics.with_oracle(dev, lp.file.tolerances.oracle);
        }
    }
    *manifest = finish(manifest.clone(), diagnostics);
    Ok(())
}

fn solve_command(problem: &Path, out: &Path, with_oracle: bool) -> Result<i32, CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut manifest = Manifest::new("solve");
    let result = problem::load(problem).and_then(|lp| {
        manifest.problem = serde_json::to_value(&lp.file).expect("problem serializes");
        manifest.base_dir = Some(lp.base.display().to_string());
        manifest.tolerances = Some(lp.file.tolerances);
        solve_into(&lp, out, with_oracle, &mut manifest)
    });
    if let Err(e) = &result {
        manifest.fail_with(e);
        eprintln!("error: {e}");
    }
    manifest.files.push(MANIFEST.into());
    manifest.write(out, MANIFEST)?;
    Ok(manifest.exit_code())
}

/// Rebuild the problem recorded in a solve manifest.
pub fn problem_from_manifest(dir: &Path) -> Result<(LoadedProblem, serde_json::Value), CliError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let manifest: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: path.clone(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if manifest["problem"].is_null() {
        return Err(CliError::Invalid(format!("{} records no problem", path.display())));
    }
    let file = problem::parse(&manifest["problem"].to_string())?;
    let base = manifest["base_dir"].as_str().map(PathBuf::from).unwrap_or_else(|| dir.to_path_buf());
    Ok((LoadedProblem { file, base }, manifest))
}

fn verify_command(dir: &Path) -> Result<i32, CliError> {
    let mut report = Manifest::new("verify");
    let result = (|| {
        let (lp, stored) = problem_from_manifest(dir)?;
        report.problem = stored["problem"].clone();
        report.base_dir = stored["base_dir"].as_str().map(str::to_string);
        report.tolerances = Some(lp.file.tolerances);
        report.admissibility = solve::admissibility(&lp)?;
        let (sol, summary) = solve::solve(&lp)?;
        report.solution = summary;
        let mut diagnostics = solve::diagnose(&lp, &sol)?;
        if let Some(dev) = solve::oracle(&lp, &sol)? {
            diagnostics.with_oracle(dev, lp.file.tolerances.oracle);
        }
        if let Some(name) = stored["velocity_table"].as_str() {
            let stored_table = read_table(&dir.join(name))?;
            let fresh = solve::tables(&lp, &sol)?;
            let fresh = fresh.iter().find(|t| t.file == name).ok_or_else(|| {
                CliError::Invalid(format!("kind {} has no table {name}", lp.file.kind.name()))
            })?;
            let diff = if stored_table.rows.len() == fresh.rows.len() {
                stored_table
                    .rows
                    .iter()
                    .zip(&fresh.rows)
                    .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                    .fold(0.0f64, f64::max)
            } else {
                f64::INFINITY
            };
            diagnostics.at_most("velocity_table_reproduction", diff, VELOCITY_REPRODUCTION);
            report.velocity_table = Some(name.to_string());
        }
        report = finish(report.clone(), diagnostics);
        Ok::<_, CliError>(())
    })();
    if let Err(e) = &result {
        report.fail_with(e);
        eprintln!("error: {e}");
    }
    report.files.push(VERIFY_REPORT.into());
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    report.write(dir, VERIFY_REPORT)?;
    Ok(report.exit_code())
}

fn frames_command(problem: &Path, out: &Path, frames: Option<usize>) -> Result<i32, CliError> {
    let lp = problem::load(problem)?;
    if lp.file.kind != Kind::Curvflow {
        return Err(CliError::Usage(format!(
            "frames needs a curvflow problem, got \"{}\"",
            lp.file.kind.name()
        )));
    }
    let sol = solve_flow_with_tol(&lp.flow()?, lp.file.tolerances.solve.min(FLOW_TOLERANCE))?;
    let manifest = emit_frames(&sol, frames.unwrap_or(lp.file.output.frames), out)?;
    let worst = manifest.frames.iter().fold(f64::INFINITY, |m, f| m.min(f.min_curvature));
    emit_stdout(&json!({
        "frames": manifest.frames.len(),
        "dir": out.display().to_string(),
        "min_curvature": worst,
    }).to_string());
    Ok(if worst >= solve::KBAR_FLOOR { 0 } else { 1 })
}

fn info_command(problem: &Path) -> Result<i32, CliError> {
    let lp = problem::load(problem)?;
    let admissibility = solve::admissibility(&lp)?;
    let admissible = admissibility["admissible"].as_bool().unwrap_or(false);
    let summary = json!({
        "kind": lp.file.kind,
        "problem": lp.file,
        "admissibility": admissibility,
    });
    emit_stdout(&serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(if admissible { 0 } else { 2 })
}

/// Print a line to stdout, tolerating a closed pipe.
fn emit_stdout(text: &str) {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}
