//! `sbo` — sweep driver for the spin-1 lattice-boson SBO solver.
//!
//! `sbo run <config.toml>` executes one sweep scenario and writes a
//! results table, a run-metadata document and (optionally) a plot
//! script. `sbo dump-basis` writes the nonzero annihilation matrix
//! elements of the on-site basis for cross-checks against independent
//! implementations.

mod config;
mod output;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{MethodChoice, RunConfig};
use spinor_sbo::SiteBasis;

#[derive(Parser)]
#[command(name = "sbo", version, about = "Spin-1 Bose-Hubbard SBO phase-diagram sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a sweep described by a TOML config file.
    Run {
        /// Path to the run configuration.
        config: PathBuf,
        /// Directory for all output files (created if missing).
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        /// Worker threads for sweep points and zone sums (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Override the boundary method from the config file.
        #[arg(long, value_parser = parse_method)]
        method: Option<MethodChoice>,
        /// Seed recorded in the metadata (consumed only by randomized
        /// property-test drivers).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dump the nonzero on-site annihilation matrix elements.
    DumpBasis {
        /// Largest boson number per site.
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> Result<MethodChoice, String> {
    match s {
        "analytic" => Ok(MethodChoice::Analytic),
        "self-consistent" => Ok(MethodChoice::SelfConsistent),
        other => Err(format!("unknown method '{other}' (use analytic|self-consistent)")),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, output_dir, workers, method, seed } => {
            run(config, output_dir, workers, method, seed)
        }
        Command::DumpBasis { n_max, out } => dump_basis(n_max, out),
    }
}

fn run(
    config_path: PathBuf,
    output_dir: PathBuf,
    workers: usize,
    method_override: Option<MethodChoice>,
    seed: Option<u64>,
) -> ExitCode {
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(1);
        }
    };
    let config = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid config {}: {e}", config_path.display());
            return ExitCode::from(1);
        }
    };

    #[cfg(feature = "parallel")]
    let effective_workers = {
        if workers > 0 {
            // A failed build means a pool already exists; keep going.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
        }
        rayon::current_num_threads()
    };
    #[cfg(not(feature = "parallel"))]
    let effective_workers = {
        let _ = workers;
        1
    };

    let method = config.method(method_override);
    let result = match scenarios::run_scenario(&config, method) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    if let Err(e) = std::fs::create_dir_all(&output_dir) {
        eprintln!("error: cannot create {}: {e}", output_dir.display());
        return ExitCode::from(1);
    }
    let results_path = output_dir.join(&config.output.results);
    if let Err(e) = output::write_results(&results_path, &result) {
        eprintln!("error: cannot write {}: {e}", results_path.display());
        return ExitCode::from(1);
    }
    let metadata_path = output_dir.join(&config.output.metadata);
    if let Err(e) = output::write_metadata(
        &metadata_path,
        &config,
        &method.to_string(),
        effective_workers,
        seed,
        &result,
    ) {
        eprintln!("error: cannot write {}: {e}", metadata_path.display());
        return ExitCode::from(1);
    }
    if let Some(script_name) = &config.output.plot_script {
        let script = match output::plot_script(config.scenario, &config.output.results) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        };
        let script_path = output_dir.join(script_name);
        if let Err(e) = std::fs::write(&script_path, script) {
            eprintln!("error: cannot write {}: {e}", script_path.display());
            return ExitCode::from(1);
        }
    }

    println!(
        "wrote {} ({} rows, {} failed points)",
        results_path.display(),
        result.rows.len(),
        result.failed_points
    );
    if result.failed_points > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn dump_basis(n_max: u32, out: Option<PathBuf>) -> ExitCode {
    let basis = SiteBasis::build(n_max);
    let result = match out {
        Some(path) => std::fs::File::create(&path)
            .map(|mut f| basis.write_annihilation_table(&mut f))
            .and_then(|r| r),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            basis.write_annihilation_table(&mut lock)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
