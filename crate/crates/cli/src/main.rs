mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use output::{emit, Report, Status};

fn run(cli: &Cli) -> anyhow::Result<Report> {
    match &cli.command {
        Command::Pf(a) => commands::pf(a),
        Command::Solvability(a) => commands::solvability(a),
        Command::Disks(a) => commands::disks(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Certify(a) => commands::certify_cmd(a),
        Command::MinEps(a) => commands::min_eps(a),
        Command::CompareApprox(a) => commands::compare_approx(a),
        Command::SweepCase(a) => commands::sweep_case(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Err(msg) = cli.validate() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = run(&cli).and_then(|report| {
        emit(&report.render(cli.format)?, cli.output.as_deref())?;
        Ok(report.status)
    });
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
