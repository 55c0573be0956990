use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sovchain_cli::checks::BasisChoice;
use sovchain_cli::{load_config, run, Command, Report};

#[derive(Parser)]
#[command(name = "sovchain", version, about = "Numerical SoV checks for higher-spin quasi-periodic Y(gl2) chains")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the library residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Number of random sample points per check.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Precision::Double)]
    precision: Precision,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    Double,
    Extended,
}

#[derive(Subcommand)]
enum Cmd {
    VerifyAlgebra,
    VerifyFusion,
    Basis {
        #[arg(value_enum)]
        kind: Kind,
    },
    Spectrum,
    Baxter,
    Qop,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sklyanin,
    Sov1,
    Sov2,
    Q,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn print_summary(report: &Report) {
    for c in &report.checks {
        let value = c.residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
        let status = if c.pass { "pass" } else { "FAIL" };
        let extra = c.error.as_deref().map(|e| format!("  ({e})")).unwrap_or_default();
        println!("{status}  {:<12} {:<44} {value:>10} < {:.0e}{extra}", c.suite, c.name, c.tolerance);
    }
    if let Some(rows) = &report.spectrum {
        for r in rows {
            let x: Vec<String> = r.x.iter().map(|z| format!("{:+.6}{:+.6}i", z[0], z[1])).collect();
            println!("state {:>3}  x = [{}]  residual {:.2e}", r.index, x.join(", "), r.discrete_residual);
        }
    }
    println!("{} / {} checks passed", report.summary.passed, report.summary.total);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Precision::Extended = cli.precision {
        return usage("extended precision is not available in this build");
    }
    let Some(path) = cli.config else { return usage("--config is required") };
    let mut config = match load_config(&path) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    if let Some(seed) = cli.seed {
        config.chain.seed = seed;
    }
    if let Some(tol) = cli.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return usage("--tol must be positive");
        }
        config.chain.tolerances.residual = tol;
    }
    if let Some(samples) = cli.samples {
        if samples == 0 {
            return usage("--samples must be at least 1");
        }
        config.samples = samples;
    }
    let out = cli.out.or_else(|| config.out.clone().map(|p| path.parent().map(|b| b.join(&p)).unwrap_or(p)));
    let command = match cli.command {
        Cmd::VerifyAlgebra => Command::VerifyAlgebra,
        Cmd::VerifyFusion => Command::VerifyFusion,
        Cmd::Basis { kind } => Command::Basis(match kind {
            Kind::Sklyanin => BasisChoice::Sklyanin,
            Kind::Sov1 => BasisChoice::Sov1,
            Kind::Sov2 => BasisChoice::Sov2,
            Kind::Q => BasisChoice::Q,
        }),
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Baxter => Command::Baxter,
        Cmd::Qop => Command::Qop,
        Cmd::All => Command::All,
    };
    // silence the default hook; library panics are reported as failed checks
    std::panic::set_hook(Box::new(|_| {}));
    let report = match run(command, &config) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    let json = report.to_json();
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, json + "\n") {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
            print_summary(&report);
        }
        None => println!("{json}"),
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
