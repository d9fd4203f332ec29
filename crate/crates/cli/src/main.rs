//! `gjms`: reproducible reports for GJMS operators on round spheres.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{emit, Format, Outcome};

#[derive(Parser, Debug)]
#[command(name = "gjms", version, about = "GJMS operators, conformal functionals and their stability on round spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Output file; defaults to <out-dir>/<subcommand>.<ext> or stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, env = "GJMS_OUT_DIR", global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact multipliers p_2m(α) for α = 0..=L.
    MultiplierTable(commands::TableArgs),
    /// I_2m(1) in closed form and floating point, with the stated constants.
    Constants(commands::NmArgs),
    /// E, the negative-power norm and I for a random positive function or an input file.
    Energy(commands::EnergyArgs),
    /// I(u_φ) against I(u) for random axis dilations.
    InvarianceCheck(commands::InvarianceArgs),
    /// Exact second-variation eigenvalues at u ≡ 1.
    Hessian(commands::TableArgs),
    /// Preconditioned descent on I_2m.
    Minimize(commands::MinimizeArgs),
    /// Green's function reproduction and closed-form/series ratio.
    GreenCheck(commands::GreenArgs),
    /// Sphere versus flat energies on S^1 and the conjugated operator.
    FlatIdentityCheck(commands::FlatArgs),
    /// Exact polynomial identities for Δ^k((1+|x|²)/2·u).
    PolyIdentity(commands::PolyArgs),
    /// The order-4 functional on S^1 at u = sin θ.
    CounterexampleSin(commands::SinArgs),
}

/// Exit codes: 0 ok, 2 invalid configuration, 3 numerical non-convergence.
fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::MultiplierTable(a) => commands::multiplier_table(a).map(|r| (r, &a.output)),
        Command::Constants(a) => commands::constants(a).map(|r| (r, &a.output)),
        Command::Energy(a) => commands::energy(a).map(|r| (r, &a.output)),
        Command::InvarianceCheck(a) => commands::invariance_check(a).map(|r| (r, &a.output)),
        Command::Hessian(a) => commands::hessian(a).map(|r| (r, &a.output)),
        Command::Minimize(a) => commands::minimize(a).map(|r| (r, &a.output)),
        Command::GreenCheck(a) => commands::green_check(a).map(|r| (r, &a.output)),
        Command::FlatIdentityCheck(a) => commands::flat_identity_check(a).map(|r| (r, &a.output)),
        Command::PolyIdentity(a) => commands::poly_identity(a).map(|r| (r, &a.output)),
        Command::CounterexampleSin(a) => commands::counterexample_sin(a).map(|r| (r, &a.output)),
    };
    let (report, out) = match result {
        Ok(x) => x,
        Err(e) => {
            eprintln!("gjms: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if let Err(e) = emit(&report, out.format, out.out.as_deref(), out.out_dir.as_deref()) {
        eprintln!("gjms: cannot write report: {e}");
        return ExitCode::from(2);
    }
    match report.outcome {
        Outcome::Ok => ExitCode::SUCCESS,
        Outcome::NonConvergence => {
            eprintln!("gjms: {}", report.note.as_deref().unwrap_or("numerical target not reached"));
            ExitCode::from(3)
        }
    }
}
