mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use nls_tori::report::{aggregate, RunReport};
use nls_tori::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "nls-tori", version, about = "Counterterm expansions and torus diagnostics for the quintic NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Parent of the timestamped run directory.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Worker threads (defaults to the config value, then to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Counterterm expansion with symmetry and residual checks.
    Counterterm,
    /// Compatibility fixed point and asymptotic fit.
    Solve,
    /// Diophantine test and Bryuno sums of the frequency vector.
    Nonres,
    /// Monte Carlo resonance and good-parameter estimates.
    Measure,
    /// Time integration, ansatz comparison and torus probes.
    Evolve,
    /// Aggregates every run report below DIR (default: --out).
    Report { dir: Option<PathBuf> },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Counterterm => "counterterm",
            Command::Solve => "solve",
            Command::Nonres => "nonres",
            Command::Measure => "measure",
            Command::Evolve => "evolve",
            Command::Report { .. } => "report",
        }
    }
}

// Fresh `<out>/<command>-<timestamp>[-n]`; never reuses an existing directory.
fn run_dir(out: &Path, command: &str) -> Result<PathBuf> {
    fs::create_dir_all(out)?;
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
    let base = format!("{command}-{stamp}");
    for n in 0.. {
        let name = if n == 0 { base.clone() } else { format!("{base}-{n}") };
        let path = out.join(name);
        match fs::create_dir(&path) {
            Ok(()) => return Ok(path),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

fn set_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::InvalidParameter("threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(())
}

fn config_path(cli: &Cli) -> Result<&Path> {
    cli.config
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("--config is required for this subcommand".into()))
}

macro_rules! configured {
    ($cli:expr, $ty:ty) => {{
        let mut cfg: $ty = config::load(config_path($cli)?)?;
        if let Some(s) = $cli.seed {
            cfg.seed = s;
        }
        set_threads($cli.threads.or(cfg.threads))?;
        cfg
    }};
}

fn execute(cli: &Cli, dir_slot: &mut Option<PathBuf>) -> Result<RunReport> {
    let name = cli.command.name();
    let start = Instant::now();
    let (dir, rep) = match &cli.command {
        Command::Report { dir } => {
            set_threads(cli.threads)?;
            let src = dir.clone().unwrap_or_else(|| cli.out.clone());
            let rep = if src.exists() { aggregate(&src)? } else { aggregate_missing(&src) };
            let d = run_dir(&cli.out, name)?;
            *dir_slot = Some(d.clone());
            (d, rep)
        }
        cmd => {
            macro_rules! go {
                ($ty:ty, $f:path) => {{
                    let cfg = configured!(cli, $ty);
                    let d = run_dir(&cli.out, name)?;
                    *dir_slot = Some(d.clone());
                    let rep = $f(&cfg, &d)?;
                    (d, rep)
                }};
            }
            match cmd {
                Command::Counterterm => go!(config::CountertermConfig, commands::counterterm),
                Command::Solve => go!(config::SolveConfig, commands::solve),
                Command::Nonres => go!(config::NonresConfig, commands::nonres),
                Command::Measure => go!(config::MeasureConfig, commands::measure),
                Command::Evolve => go!(config::EvolveConfig, commands::evolve),
                Command::Report { .. } => unreachable!(),
            }
        }
    };
    rep.write(&dir)?;
    fs::write(dir.join("timing.txt"), format!("wall_clock_seconds {}\n", start.elapsed().as_secs_f64()))?;
    Ok(rep)
}

fn aggregate_missing(src: &Path) -> RunReport {
    let mut r = RunReport::new("report", json!({ "dir": src.display().to_string() }));
    r.diagnostics.insert("runs".into(), json!([]));
    r
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut dir = None;
    match execute(&cli, &mut dir) {
        Ok(rep) => {
            let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            let summary = json!({
                "command": rep.command,
                "run_dir": dir.map(|d| d.display().to_string()),
                "checks": rep.checks.len(),
                "failed": failed,
            });
            println!("{summary}");
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let err = json!({ "error": e.kind(), "message": e.to_string() });
            if let Some(d) = &dir {
                let _ = fs::write(d.join("error.json"), format!("{err:#}\n"));
            }
            println!("{err}");
            ExitCode::from(2)
        }
    }
}
