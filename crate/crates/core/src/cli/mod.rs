//! Command line driver: `run`, `sweep`, `oracle`, `pipeline` and `tents`.
//!
//! Exit codes: 0 ok, 1 I/O or internal error, 2 configuration error,
//! 3 stagnation, 4 oracle violation.

pub mod config_file;
pub mod export;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use crate::config::ProblemConfig;
use crate::costmodel::{default_strategies, evaluate_strategy, sweep_strategies, total_cost, Strategy};
use crate::decomp::{build_decomposition, classify_strategy, m2_star};
use crate::error::Error;
use crate::orchestrator::{run_utp, verify_against_monolithic, RunOptions};
use crate::solver::{dalembert_exact, monolithic_solve, Grid};
use crate::tents::simulate_geometric;

use config_file::FileConfig;
use export::OutDir;

/// Certified nodes must match the monolithic solve to this tolerance.
pub const ORACLE_TOL: f64 = 1e-12;
pub const THREADS_ENV: &str = "UTP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "utp", version, about = "Unmapped tent pitching for the 1D two-speed wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve with UTP and export the field, mask, iteration log and tent diagram.
    Run(Args),
    /// Rank slow-side strategies by pipeline cost.
    Sweep(Args),
    /// Compare the UTP field with the monolithic solve (and d'Alembert when
    /// the medium is homogeneous and nu = 1).
    Oracle(Args),
    /// Per-process timelines of the configured strategy.
    Pipeline(Args),
    /// Continuous tent geometry: rectangles and certified fronts.
    Tents(Args),
}

#[derive(Debug, clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Record per-rectangle wall-clock times (makes the log nondeterministic).
    #[arg(long)]
    timings: bool,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid {THREADS_ENV}: {0}")]
    Threads(String),
    #[error("certified deviation {0:e} exceeds {ORACLE_TOL:e}")]
    Oracle(f64),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                Error::Stagnation { .. } => 3,
                Error::InvalidConfig { .. }
                | Error::EvenPointCount(_)
                | Error::Misaligned(_)
                | Error::EmptyStrategyList
                | Error::UnsupportedClass(_)
                | Error::NoClosedForm(_) => 2,
                _ => 1,
            },
            CliError::Io { .. } => 1,
            CliError::Threads(_) => 2,
            CliError::Oracle(_) => 4,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn threads_from_env() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Threads(format!("{v:?} is not a non-negative integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(0, |n| n.get())),
    }
}

fn load(args: &Args) -> CliResult<(FileConfig, OutDir)> {
    let text = std::fs::read_to_string(&args.config).map_err(io_err(&args.config))?;
    let file = config_file::parse(&text)?;
    let out = OutDir::create(&args.out).map_err(io_err(&args.out))?;
    Ok((file, out))
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Run(a) => cmd_run(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Pipeline(a) => cmd_pipeline(&a),
        Command::Tents(a) => cmd_tents(&a),
    }
}

fn run_options(args: &Args) -> CliResult<RunOptions> {
    Ok(RunOptions {
        threads: threads_from_env()?,
        max_iterations: None,
        inject_fault: args.inject_fault,
        record_wall_clock: args.timings,
    })
}

fn discrete_fronts(run: &crate::orchestrator::UtpRun<f64>) -> Vec<Vec<(f64, f64)>> {
    let g = &run.field.grid;
    run.fronts
        .iter()
        .map(|f| f.iter().enumerate().map(|(i, &n)| (g.x(i), g.t(n))).collect())
        .collect()
}

fn cmd_run(args: &Args) -> CliResult<()> {
    let (file, mut out) = load(args)?;
    let cfg = &file.problem;
    let run = run_utp(cfg, &run_options(args)?)?;
    let dir = out.path().to_path_buf();
    let w = |e| io_err(&dir)(e);

    out.write("field.csv", export::field_csv(&run.field).as_bytes()).map_err(w)?;
    out.write("mask.csv", export::mask_csv(&run.field).as_bytes()).map_err(w)?;
    out.write("field.bin", &export::field_bin(&run.field)).map_err(w)?;
    out.write("iterations.jsonl", export::iterations_jsonl(&run.records).as_bytes())
        .map_err(w)?;
    let diagram = svg::tent_diagram(cfg.length, cfg.final_time, &run.rects, &discrete_fronts(&run));
    out.write("tents.svg", diagram.as_bytes()).map_err(w)?;

    let dec = build_decomposition(cfg)?;
    let geometric = simulate_geometric(cfg, &dec)?.iterations;
    if geometric != run.iterations {
        warn!(
            "discrete run needed {} iterations, continuous geometry {geometric}",
            run.iterations
        );
    }
    println!("iterations: {}", run.iterations);
    println!("geometric iterations: {geometric}");
    println!(
        "certified: {} of {} nodes",
        run.field.certified_count(),
        run.field.values().len()
    );
    out.finish("run", config_file::to_json(cfg)).map_err(w)?;
    Ok(())
}

fn cmd_sweep(args: &Args) -> CliResult<()> {
    let (file, mut out) = load(args)?;
    let cfg = &file.problem;
    let strategies = file.strategies(&default_strategies(cfg));
    let report = sweep_strategies(cfg, &strategies)?;
    let dir = out.path().to_path_buf();
    let w = |e| io_err(&dir)(e);

    for e in &report.entries {
        let name = format!("m2_{}_{}", e.m2, e.h2_rule);
        match evaluate_strategy(cfg, e.strategy()) {
            Ok(ev) => {
                let title = format!("m2 = {}, {}", e.m2, e.h2_rule);
                out.write(&format!("gantt_{name}.svg"), svg::gantt(&ev.sync, &title).as_bytes())
                    .map_err(w)?;
                out.write(
                    &format!("gantt_{name}_async.svg"),
                    svg::gantt(&ev.asynchronous, &title).as_bytes(),
                )
                .map_err(w)?;
            }
            Err(err) => info!("no pipeline for {name}: {err}"),
        }
        match (e.rank, e.total_cost) {
            (Some(rank), Some(total)) => println!(
                "{rank:>2}. m2={} {:<9} class {} iterations {} processes {} total {total}",
                e.m2,
                e.h2_rule,
                e.class,
                e.iterations.unwrap_or(0),
                e.processes
            ),
            _ => println!(
                " -  m2={} {:<9} failed: {}",
                e.m2,
                e.h2_rule,
                e.error.as_deref().unwrap_or("unknown")
            ),
        }
    }
    out.write_json("report.json", &report).map_err(w)?;
    out.finish("sweep", config_file::to_json(cfg)).map_err(w)?;
    Ok(())
}

fn cmd_oracle(args: &Args) -> CliResult<()> {
    let (file, mut out) = load(args)?;
    let cfg = &file.problem;
    let run = run_utp(cfg, &run_options(args)?)?;
    let grid = &run.field.grid;
    let (_, g) = grid.initial_rows(&cfg.initial_data);
    let dev = verify_against_monolithic(&run.field, &g);

    let analytic = if cfg.is_homogeneous() && cfg.nu == 1.0 {
        Some(dalembert_deviation(cfg, grid)?)
    } else {
        None
    };
    println!("max certified deviation: {:e}", dev.max_certified_dev);
    println!("max uncertified deviation: {:e}", dev.max_uncertified_dev);
    println!("uncertified nodes: {}", dev.uncertified_count);
    if let Some(a) = analytic {
        println!("max deviation from d'Alembert: {a:e}");
    }
    let dir = out.path().to_path_buf();
    out.write_json(
        "oracle.json",
        &json!({
            "iterations": run.iterations,
            "max_certified_dev": dev.max_certified_dev,
            "max_uncertified_dev": dev.max_uncertified_dev,
            "uncertified_count": dev.uncertified_count,
            "dalembert_dev": analytic,
            "tolerance": ORACLE_TOL,
        }),
    )
    .map_err(io_err(&dir))?;
    out.finish("oracle", config_file::to_json(cfg)).map_err(io_err(&dir))?;
    if dev.max_certified_dev > ORACLE_TOL {
        return Err(CliError::Oracle(dev.max_certified_dev));
    }
    Ok(())
}

/// Largest node deviation of the monolithic solve from d'Alembert.
pub fn dalembert_deviation(cfg: &ProblemConfig<f64>, grid: &Grid<f64>) -> crate::Result<f64> {
    let mono = monolithic_solve(cfg, grid);
    let mut worst = 0.0f64;
    for n in 0..grid.nt {
        for i in 0..grid.nx {
            let exact = dalembert_exact(grid.x(i), grid.t(n), cfg)?;
            worst = worst.max((mono.get(n, i) - exact).abs());
        }
    }
    Ok(worst)
}

fn cmd_pipeline(args: &Args) -> CliResult<()> {
    let (file, mut out) = load(args)?;
    let cfg = &file.problem;
    let strategy = Strategy {
        m2: cfg.m2,
        h2_rule: cfg.h2_rule,
    };
    let ev = evaluate_strategy(cfg, strategy)?;
    let class = classify_strategy(cfg, &ev.decomposition);
    let closed = total_cost(cfg);
    let dir = out.path().to_path_buf();
    let w = |e| io_err(&dir)(e);

    out.write("pipeline.csv", export::pipeline_csv(&ev.sync).as_bytes()).map_err(w)?;
    out.write("pipeline_async.csv", export::pipeline_csv(&ev.asynchronous).as_bytes())
        .map_err(w)?;
    let title = format!("m1 = {}, m2 = {}, {}", cfg.m1, cfg.m2, cfg.h2_rule);
    out.write("gantt.svg", svg::gantt(&ev.sync, &title).as_bytes()).map_err(w)?;
    out.write("gantt_async.svg", svg::gantt(&ev.asynchronous, &title).as_bytes())
        .map_err(w)?;
    out.write_json(
        "pipeline.json",
        &json!({
            "class": class.tag.as_char().to_string(),
            "m2_star": m2_star(cfg).to_string(),
            "iterations": ev.iterations,
            "processes": ev.sync.processes,
            "total": ev.sync.total,
            "idle": ev.sync.idle,
            "iteration_durations": ev.sync.iteration_durations,
            "async_total": ev.asynchronous.total,
            "async_idle": ev.asynchronous.idle,
            "closed_form": closed.as_ref().ok(),
            "closed_form_note": closed.as_ref().err().map(|e| e.to_string()),
        }),
    )
    .map_err(w)?;

    println!("class: {}", class.tag.as_char());
    println!("iterations: {}", ev.iterations);
    println!("processes: {}", ev.sync.processes);
    println!("synchronous total: {}", ev.sync.total);
    println!("asynchronous total: {}", ev.asynchronous.total);
    match &closed {
        Ok(v) => println!("closed form: {v}"),
        Err(e) => println!("closed form: n/a ({e})"),
    }
    out.finish("pipeline", config_file::to_json(cfg)).map_err(w)?;
    Ok(())
}

fn cmd_tents(args: &Args) -> CliResult<()> {
    let (file, mut out) = load(args)?;
    let cfg = &file.problem;
    let dec = build_decomposition(cfg)?;
    let run = simulate_geometric(cfg, &dec)?;
    let dir = out.path().to_path_buf();
    let w = |e| io_err(&dir)(e);

    let mut rects = String::from("k,j,x_lo,x_hi,t_lo,t_hi,area\n");
    for r in &run.rects {
        rects.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k,
            r.j,
            r.x_lo,
            r.x_hi,
            r.t_lo,
            r.t_hi,
            crate::costmodel::rect_area(r)
        ));
    }
    let mut fronts = String::from("k,x,phi\n");
    let mut polylines = Vec::new();
    for (k, f) in run.fronts.iter().enumerate() {
        let mut pts = Vec::new();
        for (s, &v) in f.values().iter().enumerate() {
            fronts.push_str(&format!("{},{},{v}\n", k + 1, f.x(s)));
            pts.push((f.x(s), v));
        }
        polylines.push(pts);
    }
    out.write("rects.csv", rects.as_bytes()).map_err(w)?;
    out.write("fronts.csv", fronts.as_bytes()).map_err(w)?;
    let diagram = svg::tent_diagram(cfg.length, cfg.final_time, &run.rects, &polylines);
    out.write("tents.svg", diagram.as_bytes()).map_err(w)?;

    println!("iterations: {}", run.iterations);
    println!("rectangles: {}", run.rects.len());
    out.finish("tents", config_file::to_json(cfg)).map_err(w)?;
    Ok(())
}
