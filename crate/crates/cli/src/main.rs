use clap::Parser;
use siscm_cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .init();

    let mut stdout = std::io::stdout();
    if let Err(e) = run(&cli, &mut stdout) {
        eprintln!("error: {e:#}");
        std::process::exit(exit_code(&e));
    }
}
