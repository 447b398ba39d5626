use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "dol",
    version,
    about = "Dense orbits, exponential conjugation, packing and Lipschitz checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct Common {
    /// Seed for every pseudo-random choice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a dense orbit by cylinder steering.
    Orbit {
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Resolution schedule, coarse to fine.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Backward evaluation depth.
        #[arg(long, default_value_t = 120)]
        depth: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Push an orbit to the slit annulus through exp.
    Push {
        /// Orbit CSV; if absent the orbit is built from --eps.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 120)]
        depth: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Grid coverage of a point CSV.
    Density {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// `omega` or `annulus`; by default inferred from the CSV's last column.
        #[arg(long)]
        domain: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Ball packing inside an open set.
    Pack {
        /// Preset (`unit-square`, `unit-disc`, `l-shape`) or a list like
        /// `box:0,0,1,1;ball:2,0,0.5`.
        #[arg(long, default_value = "unit-square")]
        geom: String,
        #[arg(long, default_value_t = 0.5)]
        h0: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Worst-case volume growth.
    Growth {
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Fraction of |U| to reach.
        #[arg(long, default_value_t = 0.99)]
        target: f64,
        /// Rows in the CSV; defaults to the number of steps to the target,
        /// capped at 10^6.
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Lipschitz estimate, cone check and translation test of a sampled graph.
    Lipschitz {
        #[arg(long)]
        input: PathBuf,
        /// Claimed Lipschitz constant; defaults to the estimate.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn init_threads() {
    if let Some(n) = std::env::var("DOL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    init_threads();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
