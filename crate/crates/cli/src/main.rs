//! Batch frontend for the waveguide transverse-spectrum library. Every
//! subcommand reads its full configuration from flags, writes machine
//! readable artifacts (JSON for structured results, CSV for sweeps) and
//! exits 0 on success, 1 on numerical failure, 2 on usage errors.

mod commands;
mod json;

use clap::Parser;

use commands::Failure;

#[derive(Parser)]
#[command(
    name = "guide-spectra",
    version,
    about = "Transverse spectra of a boundary-coupled dissipative waveguide"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Subcommand)]
enum Cmd {
    /// Eigenvalue table with multiplicities, strip labels and gap certificate
    Spectrum(commands::spectrum::Args),
    /// Counting function N(r) against its two-sided bounds
    Weyl(commands::weyl::Args),
    /// Exceptional coupling pairs with double-zero certificates
    Theta(commands::theta::Args),
    /// Mode-family conditioning: Gram extremes and member table
    Riesz(commands::riesz::Args),
    /// Crank-Nicolson energy trace with decay-rate fit
    Evolve(commands::evolve::Args),
    /// Resolvent norm estimates over a zeta grid
    Resolvent(commands::resolvent::Args),
    /// Three-way zero-count agreement over random parameter draws
    Crosscheck(commands::crosscheck::Args),
}

fn configure_threads() -> Result<(), Failure> {
    let raw = match std::env::var("GUIDE_SPECTRA_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(Failure::Usage(format!("GUIDE_SPECTRA_THREADS: {e}"))),
        Ok(raw) => raw,
    };
    let n: usize = raw.parse().unwrap_or(0);
    if n == 0 {
        return Err(Failure::Usage(format!(
            "GUIDE_SPECTRA_THREADS must be a positive integer, got {raw:?}"
        )));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numerical(format!("thread pool: {e}")))
}

fn dispatch(cmd: &Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Spectrum(args) => commands::spectrum::run(args),
        Cmd::Weyl(args) => commands::weyl::run(args),
        Cmd::Theta(args) => commands::theta::run(args),
        Cmd::Riesz(args) => commands::riesz::run(args),
        Cmd::Evolve(args) => commands::evolve::run(args),
        Cmd::Resolvent(args) => commands::resolvent::run(args),
        Cmd::Crosscheck(args) => commands::crosscheck::run(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(f) = configure_threads().and_then(|()| dispatch(&cli.command)) {
        match f {
            Failure::Usage(msg) => {
                eprintln!("guide-spectra: {msg}");
                std::process::exit(2);
            }
            Failure::Numerical(msg) => {
                eprintln!("guide-spectra: {msg}");
                std::process::exit(1);
            }
        }
    }
}
