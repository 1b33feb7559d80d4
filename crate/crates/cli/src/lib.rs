//! Command-line front end of `gaborlab`.
//!
//! Every subcommand prints one JSON report on standard output and writes its
//! CSV/PGM artifacts to `--out`. Reports embed the resolved configuration
//! (without the run-only keys `out`, `threads` and `cache`) and the tool
//! version, so they are identical across thread counts and cache hits.
//! Errors are printed as a JSON error object; the exit code is 2 for invalid
//! input and 3 for numerical failures.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::json;

use crate::cache::{cache_get_or_compute, cache_key, Payload};
use crate::config::{load_config, RunConfig, COMMON_KEYS};
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn build_cli() -> Command {
    let mut cli = Command::new("gaborlab")
        .version(VERSION)
        .about("Gabor frames, duals, Wilson systems and HRT Gramians on periodic grids")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about, keys) in commands::COMMANDS {
        let mut sub = Command::new(*name)
            .about(*about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("key = value file; flags take precedence"))
            .arg(
                Arg::new("no_cache")
                    .long("no-cache")
                    .action(ArgAction::SetTrue)
                    .help("bypass the result cache"),
            );
        for (key, help) in COMMON_KEYS.iter().chain(keys.iter()) {
            sub = sub.arg(Arg::new(*key).long(flag_name(key)).value_name("VALUE").allow_hyphen_values(true).help(*help));
        }
        cli = cli.subcommand(sub);
    }
    cli
}

fn allowed_keys(command: &str) -> Vec<&'static str> {
    let own = commands::COMMANDS
        .iter()
        .find(|(n, _, _)| *n == command)
        .map(|(_, _, k)| *k)
        .unwrap_or(&[]);
    COMMON_KEYS.iter().chain(own.iter()).map(|(k, _)| *k).collect()
}

fn flags_of(m: &ArgMatches, allowed: &[&str]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for key in allowed {
        if let Some(v) = m.get_one::<String>(key) {
            out.insert(key.to_string(), v.clone());
        }
    }
    if m.get_flag("no_cache") {
        out.insert("cache".into(), "false".into());
    }
    out
}

fn compute(cfg: &RunConfig) -> CliResult<Payload> {
    let out = commands::run_command(cfg)?;
    let report = json!({
        "tool": "gaborlab",
        "version": VERSION,
        "command": cfg.command,
        "config": cfg.semantic(),
        "result": out.result,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("plain json");
    text.push('\n');
    Ok(Payload {
        report: text,
        artifacts: out.artifacts,
    })
}

fn write_artifacts(dir: &Path, artifacts: &[(String, Vec<u8>)]) -> CliResult<()> {
    let io = |p: &Path, e: std::io::Error| CliError::validation("unwritable_output", format!("{}: {e}", p.display()));
    for (name, bytes) in artifacts {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

fn execute(cfg: &RunConfig) -> CliResult<Payload> {
    let out_dir = PathBuf::from(cfg.require("out")?);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::validation("unwritable_output", format!("{}: {e}", out_dir.display())))?;
    let threads = match cfg.get("threads") {
        Some(_) => cfg.count("threads")?,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::validation("threads", e.to_string()))?;
    log::info!("out = {}, threads = {}", out_dir.display(), pool.current_num_threads());
    let payload = pool.install(|| {
        if cfg.flag("cache", true)? {
            let dir = cache::default_dir();
            let key = cache_key(&cfg.command, &cfg.semantic());
            cache_get_or_compute(&dir, &key, VERSION, || compute(cfg)).map(|(p, _)| p)
        } else {
            compute(cfg)
        }
    })?;
    write_artifacts(&out_dir, &payload.artifacts)?;
    Ok(payload)
}

/// Runs one invocation, writing the report to `stdout`; returns the exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match build_cli().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(stdout, "{e}");
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { error::EXIT_VALIDATION } else { 0 };
            }
            let err = CliError::validation("usage", e.to_string().trim().to_string());
            return fail(&err, stdout);
        }
    };
    let (command, sub) = matches.subcommand().expect("subcommand required");
    let allowed = allowed_keys(command);
    let result = (|| {
        let file = match sub.get_one::<String>("config") {
            Some(p) => load_config(Path::new(p))?,
            None => BTreeMap::new(),
        };
        let cfg = RunConfig::resolve(command, &allowed, file, flags_of(sub, &allowed))?;
        execute(&cfg)
    })();
    match result {
        Ok(p) => {
            let _ = stdout.write_all(p.report.as_bytes());
            0
        }
        Err(e) => fail(&e, stdout),
    }
}

fn fail(e: &CliError, stdout: &mut dyn Write) -> i32 {
    log::error!("{e}");
    let _ = writeln!(stdout, "{}", e.to_json());
    e.code
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock())
}
