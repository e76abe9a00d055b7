use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use levysim::experiments::config::ConfigFile;
use levysim::experiments::{run_with_threads, Experiment};

/// Run a verification experiment and write report.csv, slopes.txt and plot.gp.
///
/// Exit status: 0 when every check passes, 2 when a check fails, 1 on errors.
#[derive(Debug, Parser)]
#[command(name = "levysim", version)]
struct Cli {
    /// clt-check, clt-lower-bound, euler-baseline, scheme-rate, neglect-vs-gauss,
    /// brownian-approx or cost-audit
    experiment: Experiment,

    /// TOML file; missing sections and keys take the experiment defaults
    #[arg(long)]
    config: Option<PathBuf>,

    /// Overrides the seed in the config file
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory, default `out/<experiment>`
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads; falls back to LEVYSIM_THREADS, then to the core count
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("levysim: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let seed = cli.seed.unwrap_or_else(|| cfg.seed());
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(cli.experiment.name()));

    let output = run_with_threads(cli.experiment, &cfg, seed, cli.threads)?;
    output.write_to(&out)?;
    for report in &output.reports {
        print!("{}", report.slopes_text());
    }
    println!("wrote {}", out.display());
    Ok(output.pass())
}
