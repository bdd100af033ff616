//! Command-line pipeline: synthetic panels, model fitting, partition
//! learning, counterfactual queries, evaluation and the recovery benchmark.

pub mod args;
pub mod bench;
pub mod commands;
pub mod config;

use std::io::Write;

pub use args::{Cli, Command};
pub use config::RunConfig;

/// Bad flags, config or input paths. Maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// 2 for usage and validation errors, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use siscm_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidArgument(_) | E::MissingExpert(_) | E::Schema(_) | E::Parse { .. } => EXIT_USAGE,
                E::Io(io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_USAGE,
                _ => EXIT_RUNTIME,
            };
        }
    }
    EXIT_RUNTIME
}

fn dispatch(cli: &Cli, mut cfg: RunConfig, stdout: &mut dyn Write) -> anyhow::Result<()> {
    if !matches!(cli.command, Command::Infer(_)) {
        std::fs::create_dir_all(&cfg.out_dir)?;
    }
    match &cli.command {
        Command::Synth(a) => {
            cfg.apply_synth(a);
            commands::synth(&cfg)
        }
        Command::Train(a) => commands::train(&cfg, a),
        Command::Partition(a) => commands::partition(&cfg, a),
        Command::Infer(a) => commands::infer(&cfg, a, stdout),
        Command::Eval(a) => commands::eval(&cfg, a),
        Command::Bench(a) => {
            cfg.apply_bench(a);
            cfg.validate()?;
            bench::bench(&cfg).map(|_| ())
        }
    }
}

/// Runs a parsed command line. Results go to files under the output
/// directory, or to `stdout` for `infer`.
pub fn run(cli: &Cli, stdout: &mut (dyn Write + Send)) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| dispatch(cli, cfg, stdout))
        }
        None => dispatch(cli, cfg, stdout),
    }
}
