use std::process::ExitCode;

use clap::Parser;

mod config;

use config::Args;

fn run(args: &Args) -> hypdpg::Result<()> {
    let cfg = config::load(args)?;
    let rows = hypdpg::study::run_study(&cfg)?;
    match &cfg.out {
        Some(path) => {
            hypdpg::study::write_csv(&rows, path)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{}", hypdpg::study::csv_string(&rows)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hypdpg: error: {e}");
            ExitCode::FAILURE
        }
    }
}
