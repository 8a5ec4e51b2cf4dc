use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frobmod_cli::commands::{self, RoundtripMode, SuiteOptions};
use frobmod_cli::pipeline::Options;

/// Frobenius C*-algebras and local adjunctions in finite dimension.
///
/// Reports are written to stdout as JSON; logs go to stderr
/// (set RUST_LOG=info for progress).
#[derive(Parser)]
#[command(name = "frobmod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Common {
    /// Relative tolerance for validation.
    #[arg(long, default_value_t = 1e-9, global = true)]
    tol: f64,
    /// Seed for every sampled check.
    #[arg(long, env = "FROBMOD_SEED", default_value_t = 0, global = true)]
    seed: u64,
    /// Amplification depth of the norm estimate.
    #[arg(long, default_value_t = 3, global = true)]
    levels: usize,
    /// Samples per amplification level.
    #[arg(long, default_value_t = 200, global = true)]
    samples: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance file and run the structural checks.
    Verify {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run one of the round-trip verifications on an instance file.
    Roundtrip {
        path: PathBuf,
        /// frob, ladj or iso3.
        #[arg(long, default_value = "frob")]
        mode: RoundtripMode,
        #[command(flatten)]
        common: Common,
    },
    /// Build an instance and write it as a fixture file.
    Generate {
        /// trivial, matrix_trace, branched_grid, group_inclusion or random.
        #[arg(long)]
        kind: String,
        /// `key=value,...` (e.g. `n=2,lambda=1`, `m=2`, `budget=6`,
        /// `group=s3,subgroup=0:1:2`) or a JSON object.
        #[arg(long, default_value = "")]
        params: String,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every check over the curated instances and N random ones.
    Suite {
        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        /// Bound on the representation dimension of random instances.
        #[arg(long, default_value_t = 6)]
        budget: usize,
        /// Fraction of instances given a corrupted module, for testing the
        /// failure bookkeeping.
        #[arg(long, default_value_t = 0.0)]
        corrupt_rate: f64,
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn options(&self) -> Options {
        Options { tol: self.tol, seed: self.seed, levels: self.levels, samples: self.samples }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Verify { path, common } => commands::cmd_verify(path, &common.options()),
        Command::Roundtrip { path, mode, common } => commands::cmd_roundtrip(path, *mode, &common.options()),
        Command::Suite { seeds, budget, corrupt_rate, common } => {
            let suite = SuiteOptions { seeds: *seeds, budget: *budget, corrupt_rate: *corrupt_rate };
            commands::cmd_suite(&suite, &common.options())
        }
        Command::Generate { kind, params, out, common } => {
            return generate(kind, params, out.as_ref(), common.seed);
        }
    };
    match &outcome {
        Ok(report) => {
            print!("{}", report.to_json());
            for (id, check) in report.failures() {
                log::warn!("{id}: {} failed ({})", check.name, check.error.as_deref().unwrap_or("threshold exceeded"));
            }
        }
        Err(e) => eprintln!("error: {}: {e}", e.name()),
    }
    ExitCode::from(commands::exit_code(&outcome) as u8)
}

fn generate(kind: &str, params: &str, out: Option<&PathBuf>, seed: u64) -> ExitCode {
    let result = commands::parse_spec(kind, params, seed).and_then(|spec| commands::cmd_generate(&spec));
    match result {
        Ok(file) => {
            let text = file.to_json();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                    log::info!("wrote {} to {}", file.id, path.display());
                }
                None => println!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            let code = match e {
                frobmod::Error::Parse(_) | frobmod::Error::BadParam(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
