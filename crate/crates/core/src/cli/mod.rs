//! Command-line front end: configuration, file discovery, analysis runs and
//! output.

mod oracle;
mod report;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use walkdir::WalkDir;

use crate::classmodel::ClassModel;
use crate::config::{Config, ConfigError, OutputFormat, Rule};
use crate::frontend::{parse_compilation_unit, SourceFile};
use crate::hboracle::trace::{parse_execution, parse_program};
use crate::hboracle::{detect_races, program_races, OracleError};
use crate::raceanalysis::{analyze_class, sort_alerts};

pub use oracle::{oracle_check_class, OracleResult, OracleStatus};
pub use report::{serialize_report, FileError, Report, Stats};

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "THREADLINT_CONFIG";

pub const DEFAULT_ORACLE_BOUND: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "threadlint", version, about = "Thread-safety checker for @ThreadSafe Java classes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check `.java` files and directories.
    Check(CheckArgs),
    /// Check a trace file for data races.
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Files or directories, searched recursively for `.java` files.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Config file; defaults to the file named by THREADLINT_CONFIG.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rules to run (P1, P2, P3); repeatable or comma-separated.
    #[arg(long = "rule", value_delimiter = ',')]
    pub rules: Vec<Rule>,
    /// text, json or sarif.
    #[arg(long)]
    pub format: Option<OutputFormat>,
    /// Thread-safe type; a name ending in `.` is a package prefix.
    #[arg(long = "allowlist-add")]
    pub allowlist_add: Vec<String>,
    /// Type whose fields act as explicit locks.
    #[arg(long = "lock-type-add")]
    pub lock_type_add: Vec<String>,
    /// Class annotation that marks a class for checking.
    #[arg(long = "annotation-add")]
    pub annotation_add: Vec<String>,
    /// Also run the happens-before oracle on every annotated class.
    #[arg(long)]
    pub oracle: bool,
    /// Executions per driver program before the oracle gives up.
    #[arg(long, default_value_t = DEFAULT_ORACLE_BOUND)]
    pub oracle_bound: usize,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    pub file: PathBuf,
    /// Treat the file as per-thread programs and check every interleaving.
    #[arg(long)]
    pub enumerate: bool,
    /// Maximum number of executions to enumerate.
    #[arg(long)]
    pub bound: Option<usize>,
    /// text or json.
    #[arg(long, default_value = "text")]
    pub format: OutputFormat,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}")]
    Config { path: String, source: ConfigError },
    #[error("{0}")]
    Oracle(#[from] OracleError),
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

/// Defaults, then the config file (`--config`, else THREADLINT_CONFIG), then
/// the flags.
pub fn build_config(args: &CheckArgs) -> Result<Config, CliError> {
    let mut config = Config::default();
    let file = args.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    if let Some(path) = file {
        let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
        config
            .apply_file(&text)
            .map_err(|source| CliError::Config { path: path.display().to_string(), source })?;
    }
    let flag_err = |source| CliError::Config { path: "command line".to_string(), source };
    if !args.rules.is_empty() {
        let mut rules = args.rules.clone();
        rules.sort();
        rules.dedup();
        config.rules = rules;
    }
    if let Some(f) = args.format {
        config.format = f;
    }
    for entry in &args.allowlist_add {
        let key = if entry.ends_with('.') { "allowlist_prefixes" } else { "allowlist_types" };
        config.set(key, true, &[entry.as_str()], 0).map_err(flag_err)?;
    }
    for entry in &args.lock_type_add {
        config.set("lock_types", true, &[entry.as_str()], 0).map_err(flag_err)?;
    }
    for entry in &args.annotation_add {
        config.set("annotations", true, &[entry.as_str()], 0).map_err(flag_err)?;
    }
    Ok(config)
}

/// `.java` files under the paths, each directory walked in name order.
pub fn discover(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        let meta = std::fs::metadata(p).map_err(|e| io_error(p, e))?;
        if meta.is_file() {
            out.push(p.clone());
            continue;
        }
        for entry in WalkDir::new(p).sort_by_file_name() {
            let entry = entry.map_err(|e| {
                let path = e.path().unwrap_or(p).to_path_buf();
                io_error(&path, e.into())
            })?;
            if entry.file_type().is_file() && entry.path().extension().is_some_and(|x| x == "java") {
                out.push(entry.into_path());
            }
        }
    }
    Ok(out)
}

fn display_path(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

/// Analyzes the files. `oracle_bound` enables the oracle cross-check.
pub fn run(paths: &[PathBuf], config: &Config, oracle_bound: Option<usize>) -> Result<Report, CliError> {
    let started = Instant::now();
    let files = discover(paths)?;
    let mut report = Report::default();
    let mut oracle_results = Vec::new();
    for path in &files {
        let content = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let src = SourceFile::new(display_path(path), content);
        let ast = match parse_compilation_unit(&src) {
            Ok(ast) => ast,
            Err(e) => {
                report.stats.files_failed += 1;
                report.errors.push(FileError { file: src.path.clone(), line: e.line, col: e.col, message: e.message });
                continue;
            }
        };
        report.stats.files_parsed += 1;
        for decl in ast.all_classes() {
            report.stats.classes_analyzed += 1;
            let cm = ClassModel::build(&ast, decl, &config.analysis);
            if !cm.annotated {
                continue;
            }
            report.stats.annotated_classes += 1;
            let result = analyze_class(&cm, &config.rules);
            report.alerts.extend(result.alerts);
            report.notes.extend(result.notes);
            if let Some(bound) = oracle_bound {
                oracle_results.push(oracle_check_class(&cm, bound));
            }
        }
    }
    sort_alerts(&mut report.alerts);
    report.notes.sort();
    if oracle_bound.is_some() {
        report.oracle = Some(oracle_results);
    }
    for rule in Rule::ALL {
        report.stats.alerts_by_rule.insert(rule.id().to_string(), report.count(rule));
    }
    report.stats.wall_time = started.elapsed();
    Ok(report)
}

fn check(args: &CheckArgs) -> Result<i32, CliError> {
    let config = build_config(args)?;
    let report = run(&args.paths, &config, args.oracle.then_some(args.oracle_bound))?;
    print!("{}", serialize_report(&report, config.format));
    let _ = std::io::stdout().flush();
    eprintln!(
        "threadlint: {} file(s) in {:.1} ms",
        report.stats.files_parsed + report.stats.files_failed,
        report.stats.wall_time.as_secs_f64() * 1000.0
    );
    Ok(report.exit_code())
}

fn trace(args: &TraceArgs) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.file).map_err(|e| io_error(&args.file, e))?;
    let json = args.format != OutputFormat::Text;
    if args.enumerate {
        let program = parse_program(&text)?;
        let r = program_races(&program, args.bound)?;
        if json {
            println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
        } else {
            println!(
                "{} execution(s), {} deadlocked, {} racy",
                r.executions, r.deadlocked, r.racy_executions
            );
            if let Some(w) = &r.witness {
                println!("witness:");
                for (i, a) in w.actions.iter().enumerate() {
                    let mark = if r.witness_races.iter().any(|&(x, y)| x == i || y == i) { "  <- race" } else { "" };
                    println!("  {i:>3} {a}{mark}");
                }
            }
        }
        return Ok(i32::from(r.racy));
    }
    let exec = parse_execution(&text)?;
    let races: Vec<(usize, usize)> = detect_races(&exec)?.into_iter().filter(|(a, b)| a < b).collect();
    if json {
        let v = serde_json::json!({ "races": races, "actions": exec.actions });
        println!("{}", serde_json::to_string_pretty(&v).expect("races serialize"));
    } else {
        for &(a, b) in &races {
            println!("race: {} <-> {}", exec.actions[a], exec.actions[b]);
        }
        println!("{} race(s)", races.len());
    }
    Ok(i32::from(!races.is_empty()))
}

/// Runs a parsed command line and returns the exit code.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Check(args) => check(args),
        Command::Trace(args) => trace(args),
    }
}
