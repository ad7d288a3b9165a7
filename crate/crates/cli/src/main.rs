//! `torsionlab`: run one experiment from a JSON config, or the self-test.
//!
//! Exit codes: 0 success, 1 numerical failure or failed self-test,
//! 2 invalid input, 3 refused because of a size budget.

mod config;
mod experiments;
mod output;
mod plot;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(
    name = "torsionlab",
    version,
    about = "Twisted Laplacian determinants on square-tiled surfaces"
)]
struct Cli {
    /// Experiment description (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random bundles and sections.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "TORSIONLAB_THREADS")]
    threads: Option<usize>,
    /// Also write plot.svg.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment in --config (the default).
    Run,
    /// Run the invariant suite at small sizes.
    Selftest,
}

const VALIDATION: u8 = 2;
const BUDGET: u8 = 3;
const FAILURE: u8 = 1;

fn exit_code(err: &torsionlab::Error) -> u8 {
    use torsionlab::Error::*;
    if err.is_budget() {
        return BUDGET;
    }
    match err {
        KernelMismatch { .. } | EmptySpectrum | NegativeUnderSqrt(_) | BisectionFailure(_) => {
            FAILURE
        }
        _ => VALIDATION,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            return fail(VALIDATION, "--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            return fail(FAILURE, e);
        }
    }
    match cli.command {
        Some(Command::Selftest) => run_selftest(&cli),
        Some(Command::Run) | None => run_experiment(&cli),
    }
}

fn meta(
    cli: &Cli,
    config: Value,
    seed: Option<u64>,
    started: Instant,
) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("tool".into(), json!("torsionlab"));
    m.insert(
        "versions".into(),
        json!({ "torsionlab": env!("CARGO_PKG_VERSION") }),
    );
    m.insert("config".into(), config);
    m.insert("seed".into(), json!(seed));
    m.insert("threads".into(), json!(rayon::current_num_threads()));
    m.insert("plot".into(), json!(cli.plot));
    m.insert("wall_time_s".into(), json!(started.elapsed().as_secs_f64()));
    m
}

fn write_meta(
    dir: &Path,
    mut files: Vec<(String, String)>,
    m: serde_json::Map<String, Value>,
) -> std::io::Result<()> {
    files.push((
        "meta.json".into(),
        serde_json::to_string_pretty(&Value::Object(m)).unwrap() + "\n",
    ));
    output::write_all(dir, &files)
}

fn run_experiment(cli: &Cli) -> ExitCode {
    let started = Instant::now();
    let Some(path) = &cli.config else {
        return fail(VALIDATION, "--config is required");
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(VALIDATION, format!("{}: {e}", path.display())),
    };
    let cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail(VALIDATION, format!("{}: {e}", path.display())),
    };
    let Some(dir) = cli.out.clone().or_else(|| cfg.out.clone()) else {
        return fail(VALIDATION, "no output directory: pass --out or set `out`");
    };
    let seed = cli.seed.or(cfg.seed);
    let result = experiments::run(&cfg, seed);
    let mut m = meta(cli, serde_json::to_value(&cfg).unwrap(), seed, started);
    m.insert("kind".into(), json!(cfg.kind.name()));
    let (files, code) = match result {
        Ok(out) => {
            let mut files = out.files;
            if cli.plot {
                if let Some(p) = &out.plot {
                    files.push(("plot.svg".into(), p.to_svg()));
                }
            }
            m.insert("status".into(), json!("ok"));
            m.insert("error".into(), Value::Null);
            m.insert("summary".into(), out.summary);
            m.insert(
                "outputs".into(),
                json!(files.iter().map(|f| &f.0).collect::<Vec<_>>()),
            );
            for line in &out.report {
                println!("{line}");
            }
            (files, 0)
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            m.insert("status".into(), json!("error"));
            m.insert(
                "error".into(),
                json!({ "code": e.code(), "message": e.to_string(), "exit_code": code }),
            );
            (Vec::new(), code)
        }
    };
    if let Err(e) = write_meta(&dir, files, m) {
        return fail(FAILURE, format!("{}: {e}", dir.display()));
    }
    ExitCode::from(code)
}

fn run_selftest(cli: &Cli) -> ExitCode {
    let started = Instant::now();
    let seed = cli.seed.unwrap_or(0);
    let results = selftest::run(seed);
    let failed = results.iter().filter(|r| !r.passed).count();
    for r in &results {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    println!(
        "{} of {} checks passed",
        results.len() - failed,
        results.len()
    );
    if let Some(dir) = &cli.out {
        let mut m = meta(cli, Value::Null, Some(seed), started);
        m.insert("kind".into(), json!("selftest"));
        m.insert(
            "status".into(),
            json!(if failed == 0 { "ok" } else { "failed" }),
        );
        m.insert("failed".into(), json!(failed));
        if let Err(e) = write_meta(
            dir,
            vec![("selftest.csv".into(), selftest::to_csv(&results))],
            m,
        ) {
            return fail(FAILURE, format!("{}: {e}", dir.display()));
        }
    }
    ExitCode::from(if failed == 0 { 0 } else { FAILURE })
}
