use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sausage_core::experiments::{encode, run_experiment, write_atomic, ExperimentConfig, Format, Kind};
use sausage_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_INVALID: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "sausage", version, about = "Monte Carlo experiments on Wiener sausages in four dimensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capacity of balls and hitting probability from twice the radius
    Cap(RunArgs),
    /// Scaled sausage capacity (log t / t)·Cap over a t grid
    Lln(RunArgs),
    /// Decomposition identity on the built-in battery of union pairs
    Decomp(RunArgs),
    /// Occupation functional D_0[0,t]: mean, concentration and log-slope
    D0(RunArgs),
    /// Sausage volume per unit time
    Volume(RunArgs),
    /// Intersection probabilities of independent sausages
    Intersect(RunArgs),
    /// Dyadic blocking decomposition of the capacity
    Blocking(RunArgs),
    /// Pair functional E[R[0,t]] against the Green function
    Pair(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML configuration; missing fields take the defaults of the subcommand
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (required unless the config file sets one)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; results go to stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Comma-separated horizons, overriding t_grid
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    r_sausage: Option<f64>,
    #[arg(long)]
    n_paths: Option<u64>,
    #[arg(long)]
    n_walkers: Option<u64>,
    /// Print the effective configuration and exit without running
    #[arg(long)]
    print_config: bool,
}

impl Command {
    fn split(self) -> (Kind, RunArgs) {
        match self {
            Command::Cap(a) => (Kind::Cap, a),
            Command::Lln(a) => (Kind::Lln, a),
            Command::Decomp(a) => (Kind::Decomp, a),
            Command::D0(a) => (Kind::D0Sweep, a),
            Command::Volume(a) => (Kind::Volume, a),
            Command::Intersect(a) => (Kind::Intersect, a),
            Command::Blocking(a) => (Kind::Blocking, a),
            Command::Pair(a) => (Kind::PairFunctional, a),
        }
    }
}

fn effective_config(kind: Kind, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p, Some(kind))?,
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(o) = &args.out {
        cfg.out_path = Some(o.display().to_string());
    }
    if let Some(f) = args.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(t) = &args.t {
        cfg.t_grid = t.clone();
    }
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    if let Some(r) = args.r_sausage {
        cfg.r_sausage = r;
    }
    if let Some(n) = args.n_paths {
        cfg.n_paths = n;
    }
    if let Some(n) = args.n_walkers {
        cfg.n_walkers = n;
    }
    Ok(cfg)
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn run(kind: Kind, args: RunArgs) -> Result<bool, Error> {
    let cfg = effective_config(kind, &args)?;
    if args.print_config {
        cfg.validate()?;
        print!("{}", cfg.to_toml_string());
        return Ok(true);
    }
    let out = run_experiment(&cfg)?;
    let text = encode(&out.rows, cfg.format)?;
    match &cfg.out_path {
        Some(p) => {
            let p = Path::new(p);
            write_atomic(p, &text)?;
            let meta = serde_json::to_string_pretty(&out.meta).unwrap_or_default() + "\n";
            write_atomic(&meta_path(p), &meta)?;
            log::info!("wrote {} rows to {}", out.rows.len(), p.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })?;
        }
    }
    Ok(out.valid)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: diagnostics invalid: walkers ran out of steps too often (rows marked [invalid])");
            ExitCode::from(EXIT_INVALID)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => EXIT_CONFIG,
                Error::Io { .. } | Error::Parse { .. } => EXIT_IO,
                Error::Domain(_) | Error::Precondition(_) => 1,
            })
        }
    }
}
