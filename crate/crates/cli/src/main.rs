mod args;
mod commands;
mod config;
mod source;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Study};
use config::StudyConfig;

fn run(mut cli: Cli) -> anyhow::Result<()> {
    if let Some(path) = cli.config.clone() {
        StudyConfig::load(&path)?.apply(&mut cli)?;
    }
    let out = cli.out.clone();
    match &cli.command {
        Command::Agglomerate { mesh, no_vtk } => commands::cmd_agglomerate(mesh, *no_vtk, &out),
        Command::Metrics { mesh, level } => commands::cmd_metrics(mesh, level, &out),
        Command::Solve {
            mesh,
            level,
            disc,
            p,
            solver,
        } => commands::cmd_solve(mesh, level, disc, *p, solver, &out),
        Command::Study(Study::PConvergence {
            mesh,
            level,
            disc,
            degrees,
        }) => commands::study_p_convergence(mesh, level, disc, degrees, &out),
        Command::Study(Study::HConvergence {
            gen,
            refinements,
            cells_per_agglomerate,
            order,
            disc,
            degrees,
        }) => commands::study_h_convergence(gen, *refinements, *cells_per_agglomerate, *order, disc, degrees, &out),
        Command::Study(Study::MgLevels {
            mesh,
            disc,
            p,
            levels,
            plain_cg,
        }) => commands::study_mg_levels(mesh, disc, *p, levels, *plain_cg, &out),
        Command::Study(Study::Timing { mesh, repeat }) => commands::study_timing(mesh, *repeat, &out),
    }
}

/// 1 for numerical failures, 2 for usage and I/O errors.
fn exit_code(err: &anyhow::Error) -> u8 {
    use polyagglo::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::NoConvergence { .. } | Error::Breakdown { .. } | Error::NotPositiveDefinite { .. }) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
