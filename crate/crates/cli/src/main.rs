//! `nc-stokes`: mesh, solve, convergence, inf-sup and element reports from a JSON config.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nc_stokes::error::{ConfigError, Error};
use nc_stokes::solver::SolverKind;

#[derive(Parser, Debug)]
#[command(name = "nc-stokes", version, about)]
struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Omit the timestamp from VTK files so repeated runs are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Overrides the config's solver.
    #[arg(long, global = true)]
    solver: Option<SolverKind>,
    /// Overrides the config's relative residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Also write the assembled system as MatrixMarket files (solve only).
    #[arg(long, global = true)]
    dump_system: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Build the fitted mesh; writes mesh.vtk and mesh_stats.json.
    Mesh,
    /// Solve one level; writes solution.vtk and errors.json.
    Solve,
    /// Run the level sweep; writes convergence.csv, .dat and .json.
    Convergence,
    /// Estimate the discrete inf-sup constant; writes infsup.csv and .json.
    Infsup,
    /// Reference-element data for the cut ratios (s, t); writes element.json.
    Element,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Assembly(_) => 2,
        Error::Mesh(_) | Error::Geometry(_) | Error::Element(_) => 3,
        Error::Solve(_) => 4,
        Error::Io(_) => 1,
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(path) => nc_stokes::config::RunConfig::from_file(path).map_err(|e| match e {
            Error::Io(io) => ConfigError::Parse(format!("{}: {io}", path.display())).into(),
            other => other,
        })?,
        None => nc_stokes::config::RunConfig::default(),
    };
    if let Some(kind) = cli.solver {
        cfg.solver = kind;
    }
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cli.out)?;
    let opts = commands::Options {
        out: cli.out.clone(),
        deterministic: cli.deterministic,
        dump_system: cli.dump_system,
    };
    match cli.command {
        Command::Mesh => commands::mesh(&cfg, &opts),
        Command::Solve => commands::solve(&cfg, &opts),
        Command::Convergence => commands::convergence(&cfg, &opts),
        Command::Infsup => commands::infsup(&cfg, &opts),
        Command::Element => commands::element(&cfg, &opts),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // sequential factorizations keep every output bit-reproducible
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
