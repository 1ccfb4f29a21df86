//! `shatterlab`: speeds, shatter functions, witness searches and
//! certificates for hereditary classes of finite structures.

mod cache;
mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "shatterlab", version, about = "Exact small-scale computations on hereditary properties")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cache directory for speed tables (overrides SHATTERLAB_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Upper bound on raw structure enumeration, as a power of two.
    #[arg(long, global = true)]
    max_enumeration_log2: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct PropertyArgs {
    /// `builtin:<name>`, a bare builtin name, or a property JSON file.
    #[arg(long, short = 'p')]
    property: String,
    /// Language override for builtins, e.g. `E:3`.
    #[arg(long)]
    language: Option<String>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct SearchArgs {
    #[command(flatten)]
    property: PropertyArgs,
    /// Formula such as `E(x1,y1) & x1!=y1`.
    #[arg(long, short = 'f')]
    formula: String,
    /// Universe bound N for witness searches.
    #[arg(long, default_value_t = 4)]
    budget_n: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stream structures on [n] as JSON lines (members only, with --property).
    Enumerate {
        #[arg(long)]
        language: Option<String>,
        #[arg(long)]
        property: Option<String>,
        #[arg(long)]
        n: usize,
        /// Stop after this many structures.
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Exact speeds |H_n| for n = 0..=n_max as CSV.
    Speed {
        #[command(flatten)]
        property: PropertyArgs,
        #[arg(long)]
        n_max: usize,
        /// auto, direct, candidates, extension or orbits.
        #[arg(long, default_value = "auto")]
        method: String,
        /// Also write the CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Largest height of a shattered set of parameter tuples.
    Vc {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 4)]
        max_height: usize,
    },
    /// Shattered (ℓ, |ȳ|)-boxes: test one height or sweep upward.
    Vcell {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        height: Option<usize>,
        #[arg(long, default_value_t = 4)]
        max_height: usize,
    },
    /// Witness search for VC*_ℓ ≥ height; writes a certificate on success.
    Vcstar {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Members of H_n built from a VC*_{ℓ-1} witness of the given height.
    LowerBound {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        height: usize,
        /// Target universe size (defaults to the smallest that fits).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Shatter function of an explicit set system read from JSON.
    Shatterfn {
        /// `{"domain": n, "arity": k, "sets": [[[1,2],...],...]}`, 1-based.
        file: PathBuf,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        height: usize,
    },
    /// Equality-indiscernible subset of the tuples in a file (one per line).
    ExtractIndiscernible { file: PathBuf },
    /// A Steiner triple system on [n], one block per line.
    Steiner {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Lower bound for linear 3-uniform hypergraphs from a Steiner system.
    Example1 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Growth report: speeds, π̂, witness sweeps and a verdict (JSON).
    Classify {
        #[command(flatten)]
        property: PropertyArgs,
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        #[arg(long, default_value_t = 4)]
        vc_budget: usize,
        #[arg(long, default_value_t = 3)]
        max_height: usize,
        #[arg(long, default_value_t = 1e-3)]
        stabilization: f64,
        /// Also write n,count,pi_hat rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Replay a certificate; exit 0 iff every claim checks out.
    Verify { certificate: PathBuf },
    /// The trace family of a formula over H_n with its dimensions.
    Traces {
        #[command(flatten)]
        property: PropertyArgs,
        #[arg(long, short = 'f')]
        formula: String,
        #[arg(long)]
        n: usize,
    },
    /// Sample members and test closure under deletion and relabeling.
    CheckHereditary {
        #[command(flatten)]
        property: PropertyArgs,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed stdout (`| head`) is not a failure.
        Err(e)
            if e
                .chain()
                .filter_map(|c| c.downcast_ref::<std::io::Error>())
                .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
