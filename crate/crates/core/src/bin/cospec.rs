use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cospec::pipeline::{cmd_networks, cmd_panel, cmd_report, cmd_validate, cmd_zscores, RunConfig};
use cospec::{Error, Result};

/// Co-specialization networks, null-model z-scores and panel regressions.
#[derive(Debug, Parser)]
#[command(name = "cospec", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "cospec.toml")]
    config: PathBuf,
    /// Override the ensemble seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the number of ensemble samples.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Override the year range, e.g. 2000-2014.
    #[arg(long, global = true, value_parser = parse_years)]
    years: Option<(i32, i32)>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (outputs do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the input panel and write a validation report.
    Validate,
    /// Write RCA matrices, binary networks and motif counts per year.
    Networks,
    /// Fit the null model per year and write motif z-scores.
    Zscores,
    /// Estimate the fixed-effect regression models.
    Panel,
    /// Write plot data for every figure plus a manifest.
    Report,
}

fn parse_years(s: &str) -> std::result::Result<(i32, i32), String> {
    let (a, b) = s
        .split_once(['-', ':'])
        .ok_or_else(|| format!("expected FIRST-LAST, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<i32>().map_err(|_| format!("bad year {v:?}"));
    Ok((parse(a)?, parse(b)?))
}

fn run(cli: Cli) -> Result<()> {
    let mut config = RunConfig::load(&cli.config).map_err(|e| match e {
        Error::Io { path, source } => Error::Config(format!("cannot read config {}: {source}", path.display())),
        other => other,
    })?;
    if let Some(seed) = cli.seed {
        config.ensemble.seed = seed;
    }
    if let Some(samples) = cli.samples {
        config.ensemble.samples = samples;
    }
    if let Some((first, last)) = cli.years {
        config.analysis.first_year = first;
        config.analysis.last_year = last;
    }
    if let Some(out) = cli.out {
        // command-line paths are relative to the working directory
        config.output = std::env::current_dir().map_err(|e| Error::io(".", e))?.join(out);
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    config.check()?;
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }

    match cli.command {
        Command::Validate => {
            let report = cmd_validate(&config)?;
            print!("{report}");
        }
        Command::Networks => {
            let paths = cmd_networks(&config)?;
            println!("wrote {} network files", paths.len());
        }
        Command::Zscores => {
            let z = cmd_zscores(&config)?;
            let degenerate = z.iter().filter(|r| r.degenerate()).count();
            println!("{} z-scores ({degenerate} degenerate)", z.len());
        }
        Command::Panel => {
            for r in cmd_panel(&config)? {
                println!(
                    "{}: {} observations, {} groups, {} dropped rows, within R2 {:.3}",
                    r.model, r.observations, r.groups, r.dropped_rows, r.r2_within
                );
            }
        }
        Command::Report => {
            let manifest = cmd_report(&config)?;
            println!("manifest: {}", manifest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
