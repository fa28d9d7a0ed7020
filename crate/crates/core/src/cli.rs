//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input or arguments, 3 I/O or malformed
//! JSON, 4 disagreement between closed form and oracle.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calculus::{total_index_with, DeficiencyReport};
use crate::model::{parse_configuration, ConfigError, Configuration};
use crate::parallel::{with_jobs, Execution};
use crate::sweep::{
    compare_all, evaluate_grid, grid_points, write_grid_csv, Comparison, GridRow, Outcome, Tally,
    ValueRange,
};
use crate::weyl::{OracleSettings, WeylError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Validation = 2,
    Io = 3,
    Disagreement = 4,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "deficiency", version, about = "Deficiency indices of magnetic Schrödinger operators with point singularities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form indices of a configuration file.
    Classify(FileArgs),
    /// Cross-check every singularity of a configuration with the numerical oracle.
    Verify(FileArgs),
    /// Closed form against oracle over a single-singularity parameter grid.
    Grid(GridArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Report destination; stdout only when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Leave the generation time out of written reports.
    #[arg(long)]
    pub no_timestamp: bool,
    /// Relative tolerance of the ODE integrator.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Outer integration radius.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Half-width of the inconclusive band around nu^2 = 1.
    #[arg(long)]
    pub boundary_band: Option<f64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Rendering on stdout.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct FileArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Flux values, `start:stop:step` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: ValueRange,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub p: ValueRange,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub q: ValueRange,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Classify,
    Verify,
    Grid,
}

/// Grid axes of a `grid` run.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub alpha: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

/// A fully checked invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: CommandKind,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub timestamp: bool,
    pub settings: OracleSettings,
    pub grid: Option<GridSpec>,
    pub jobs: usize,
    pub format: Format,
}

impl RunSpec {
    pub fn from_cli(cli: Cli) -> Result<RunSpec, String> {
        let (command, input, common, grid) = match cli.command {
            Command::Classify(a) => (CommandKind::Classify, Some(a.input), a.common, None),
            Command::Verify(a) => (CommandKind::Verify, Some(a.input), a.common, None),
            Command::Grid(a) => (
                CommandKind::Grid,
                None,
                a.common,
                Some(GridSpec {
                    alpha: a.alpha.0,
                    p: a.p.0,
                    q: a.q.0,
                }),
            ),
        };
        let mut settings = OracleSettings {
            rel_tol: common.rel_tol,
            ..OracleSettings::default()
        };
        if let Some(r) = common.rmax {
            settings.r_max = r;
        }
        if let Some(b) = common.boundary_band {
            settings.boundary_band = b;
        }
        let spec = RunSpec {
            command,
            input,
            output: common.output,
            timestamp: !common.no_timestamp,
            settings,
            grid,
            jobs: common.jobs,
            format: common.format.unwrap_or(match command {
                CommandKind::Grid => Format::Csv,
                _ => Format::Table,
            }),
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<(), String> {
        if !(1e-13..=1e-3).contains(&self.settings.rel_tol) {
            return Err(format!(
                "--rel-tol {} outside [1e-13, 1e-3]",
                self.settings.rel_tol
            ));
        }
        if self.command != CommandKind::Classify {
            self.settings.validate().map_err(|e| e.to_string())?;
        }
        if let Some(g) = &self.grid {
            if g.alpha.is_empty() || g.p.is_empty() || g.q.is_empty() {
                return Err("grid ranges must be non-empty".into());
            }
        }
        if let (Some(i), Some(o)) = (&self.input, &self.output) {
            if same_file(i, o) {
                return Err(format!("input and output are the same file: {}", i.display()));
            }
        }
        Ok(())
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

/// Parses the process arguments and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Exit::Validation.code()
            } else {
                Exit::Ok.code()
            };
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(cli, &mut stdout.lock(), &mut stderr.lock()).code()
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let spec = match RunSpec::from_cli(cli) {
        Ok(spec) => spec,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return Exit::Validation;
        }
    };
    let jobs = spec.jobs;
    let result = with_jobs(jobs, || {
        let mut out_buf = Vec::new();
        let mut err_buf = Vec::new();
        let code = match spec.command {
            CommandKind::Classify => run_classify(&spec, &mut out_buf, &mut err_buf),
            CommandKind::Verify => run_verify(&spec, &mut out_buf, &mut err_buf),
            CommandKind::Grid => run_grid(&spec, &mut out_buf, &mut err_buf),
        };
        (code, out_buf, err_buf)
    });
    match result {
        Some((code, o, e)) => {
            let _ = out.write_all(&o);
            let _ = err.write_all(&e);
            code
        }
        None => {
            let _ = writeln!(err, "error: cannot start {jobs} worker threads");
            Exit::Io
        }
    }
}

fn load(spec: &RunSpec, err: &mut dyn Write) -> Result<Configuration, Exit> {
    let path = spec.input.as_deref().expect("file commands carry an input");
    let text = fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
        Exit::Io
    })?;
    parse_configuration(&text).map_err(|e| match e {
        ConfigError::Parse(p) => {
            let _ = writeln!(err, "error: {}: malformed JSON: {p}", path.display());
            Exit::Io
        }
        ConfigError::Invalid(report) => {
            let _ = writeln!(err, "error: {} is not a valid configuration", path.display());
            for v in &report.violations {
                let _ = writeln!(err, "  {v}");
            }
            Exit::Validation
        }
    })
}

fn timestamp(enabled: bool) -> Option<u64> {
    enabled.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    })
}

fn write_report(path: &Path, bytes: &[u8], err: &mut dyn Write) -> Result<(), Exit> {
    fs::write(path, bytes).map_err(|e| {
        let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
        Exit::Io
    })
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    bytes.push(b'\n');
    bytes
}

fn oracle_failure(e: &WeylError, err: &mut dyn Write) -> Exit {
    let _ = writeln!(err, "error: oracle failed: {e}");
    match e {
        WeylError::InvalidSettings(_) => Exit::Validation,
        _ => Exit::Io,
    }
}

#[derive(Serialize)]
struct ClassifyFile<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    #[serde(flatten)]
    report: &'a DeficiencyReport,
}

pub fn classify_table(config: &Configuration, report: &DeficiencyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:>10} {:>8} {:>8}  {:<18} {:>5}",
        "id", "alpha", "p", "q", "class", "index"
    );
    for (sing, entry) in config.singularities().iter().zip(&report.per_singularity) {
        let _ = writeln!(
            s,
            "{:<12} {:>10} {:>8} {:>8}  {:<18} {:>5}",
            sing.id,
            sing.alpha,
            sing.p,
            sing.q,
            entry.class.as_str(),
            entry.index
        );
    }
    let _ = writeln!(s, "n0 = {}", report.background_index);
    let _ = writeln!(s, "total = {}", report.total);
    s
}

fn classify_csv(config: &Configuration, report: &DeficiencyReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(["id", "alpha", "p", "q", "class", "index"]);
    for (sing, entry) in config.singularities().iter().zip(&report.per_singularity) {
        let _ = w.write_record([
            sing.id.clone(),
            sing.alpha.to_string(),
            sing.p.to_string(),
            sing.q.to_string(),
            entry.class.as_str().to_string(),
            entry.index.to_string(),
        ]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

pub fn run_classify(spec: &RunSpec, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let config = match load(spec, err) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let report = total_index_with(&config, Execution::Parallel);
    let bytes = to_json(&ClassifyFile {
        generated_at: timestamp(spec.timestamp),
        report: &report,
    });
    if let Some(path) = &spec.output {
        if let Err(code) = write_report(path, &bytes, err) {
            return code;
        }
    }
    let rendered = match spec.format {
        Format::Json => String::from_utf8_lossy(&bytes).into_owned(),
        Format::Table => classify_table(&config, &report),
        Format::Csv => classify_csv(&config, &report),
    };
    let _ = out.write_all(rendered.as_bytes());
    Exit::Ok
}

/// Inconclusive harmonics of a comparison, split into those inside the
/// boundary band and the rest.
fn inconclusive_harmonics(c: &Comparison, band: f64) -> (usize, usize) {
    let mut boundary = 0;
    let mut other = 0;
    for h in c.plus.harmonics.iter().chain(&c.minus.harmonics) {
        if h.index.is_none() {
            if (h.nu_squared - 1.0).abs() < band {
                boundary += 1;
            } else {
                other += 1;
            }
        }
    }
    (boundary, other)
}

#[derive(Serialize)]
struct VerifyEntry<'a> {
    id: &'a str,
    closed_form: u8,
    outcome: Outcome,
    plus: &'a crate::weyl::OracleResult,
    minus: &'a crate::weyl::OracleResult,
}

#[derive(Serialize)]
struct VerifyFile<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    settings: &'a OracleSettings,
    tally: Tally,
    boundary_inconclusive: usize,
    singularities: Vec<VerifyEntry<'a>>,
}

fn total_cell(t: Option<u32>) -> String {
    t.map_or_else(|| "inconclusive".into(), |t| t.to_string())
}

fn outcome_cell(o: Outcome) -> &'static str {
    match o {
        Outcome::Agree => "true",
        Outcome::Disagree => "false",
        Outcome::Inconclusive => "inconclusive",
        Outcome::Skipped => "SKIPPED",
    }
}

pub fn run_verify(spec: &RunSpec, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let config = match load(spec, err) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let comparisons = match compare_all(config.singularities(), &spec.settings, Execution::Parallel)
    {
        Ok(c) => c,
        Err(e) => return oracle_failure(&e, err),
    };
    let tally = Tally::of(comparisons.iter().map(Comparison::outcome));
    let (boundary, other) = comparisons
        .iter()
        .map(|c| inconclusive_harmonics(c, spec.settings.boundary_band))
        .fold((0, 0), |(a, b), (x, y)| (a + x, b + y));

    let file = VerifyFile {
        generated_at: timestamp(spec.timestamp),
        settings: &spec.settings,
        tally,
        boundary_inconclusive: boundary,
        singularities: comparisons
            .iter()
            .map(|c| VerifyEntry {
                id: &c.id,
                closed_form: c.closed_form,
                outcome: c.outcome(),
                plus: &c.plus,
                minus: &c.minus,
            })
            .collect(),
    };
    let bytes = to_json(&file);
    if let Some(path) = &spec.output {
        if let Err(code) = write_report(path, &bytes, err) {
            return code;
        }
    }

    let rendered = match spec.format {
        Format::Json => String::from_utf8_lossy(&bytes).into_owned(),
        Format::Table | Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .delimiter(if spec.format == Format::Csv { b',' } else { b'\t' })
                .from_writer(Vec::new());
            let _ = w.write_record(["id", "closed_form", "oracle_plus", "oracle_minus", "agree"]);
            for c in &comparisons {
                let _ = w.write_record([
                    c.id.clone(),
                    c.closed_form.to_string(),
                    total_cell(c.plus.total),
                    total_cell(c.minus.total),
                    outcome_cell(c.outcome()).to_string(),
                ]);
            }
            String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
        }
    };
    let _ = out.write_all(rendered.as_bytes());
    if boundary > 0 {
        let _ = writeln!(err, "warning: {boundary} boundary-inconclusive harmonic run(s)");
    }
    if other > 0 {
        let _ = writeln!(err, "warning: {other} inconclusive harmonic run(s) outside the boundary band");
    }
    if tally.disagree > 0 {
        let _ = writeln!(err, "error: {} singularity(ies) disagree", tally.disagree);
        return Exit::Disagreement;
    }
    Exit::Ok
}

pub fn run_grid(spec: &RunSpec, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let grid = spec.grid.as_ref().expect("grid runs carry a grid");
    let points = grid_points(&grid.alpha, &grid.p, &grid.q);
    let rows: Vec<GridRow> = match evaluate_grid(&points, &spec.settings, Execution::Parallel) {
        Ok(r) => r,
        Err(e) => return oracle_failure(&e, err),
    };
    let tally = Tally::of(rows.iter().map(GridRow::outcome));
    let mut csv_bytes = Vec::new();
    if let Err(e) = write_grid_csv(&rows, &mut csv_bytes) {
        let _ = writeln!(err, "error: {e}");
        return Exit::Io;
    }
    if let Some(path) = &spec.output {
        if let Err(code) = write_report(path, &csv_bytes, err) {
            return code;
        }
    }
    match (spec.format, &spec.output) {
        (Format::Csv, None) => {
            let _ = out.write_all(&csv_bytes);
        }
        (Format::Json, _) => {
            let _ = out.write_all(&to_json(&tally));
        }
        _ => {
            let _ = writeln!(
                out,
                "points = {}, agree = {}, disagree = {}, inconclusive = {}, skipped = {}",
                rows.len(),
                tally.agree,
                tally.disagree,
                tally.inconclusive,
                tally.skipped
            );
        }
    }
    if tally.inconclusive > 0 {
        let _ = writeln!(err, "warning: {} boundary-inconclusive grid point(s)", tally.inconclusive);
    }
    if tally.disagree > 0 {
        let _ = writeln!(err, "error: {} grid point(s) disagree", tally.disagree);
        return Exit::Disagreement;
    }
    Exit::Ok
}
