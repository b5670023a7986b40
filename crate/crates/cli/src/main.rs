use std::process::ExitCode;

use clap::Parser;

use gbc_cli::{exit_status, run, Cli, Suite, SuiteConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match SuiteConfig::try_from(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("gbc: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = run(&config);
    let status = exit_status(&outcome);
    match &outcome {
        Ok(report) => {
            let written = if config.suite == Suite::Convergence {
                report.write_csv(config.out.as_deref())
            } else {
                report.write_json(config.out.as_deref())
            };
            if let Err(e) = written {
                eprintln!("gbc: cannot write report: {e}");
                return ExitCode::from(3);
            }
            for case in report.cases.iter().filter(|c| !c.pass) {
                eprintln!("gbc: FAIL {} (residual {:e}, tolerance {:e})", case.id, case.residual, case.tolerance);
            }
        }
        Err(e) => eprintln!("gbc: {e}"),
    }
    ExitCode::from(status as u8)
}
