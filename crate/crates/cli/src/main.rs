use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qe_verify::{commands, InputError, Overrides, ProblemFile, Verdict, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};

#[derive(Parser)]
#[command(name = "qe-verify", version, about = "Check, classify and construct quasi-Einstein problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quasi-Einstein residual, lambda, identities and conformal flatness.
    Check(Args),
    /// Classification branch with its indicator residuals.
    Classify(Args),
    /// Integrate the linearised potential ODE from the "ode" section.
    Ode(Args),
    /// Expand a "construct" section into an explicit problem file.
    Construct(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Problem file (JSON).
    file: PathBuf,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampling tolerance and quasi-Einstein threshold.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Sampling seed; overrides the file.
    #[arg(long, env = "QE_VERIFY_SEED")]
    seed: Option<u64>,
    /// Number of sample points.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), InputError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| InputError::new("", format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, InputError> {
    let (cmd, args) = match &cli.command {
        Command::Check(a) => ("check", a),
        Command::Classify(a) => ("classify", a),
        Command::Ode(a) => ("ode", a),
        Command::Construct(a) => ("construct", a),
    };
    let problem = ProblemFile::load(&args.file)?;
    if cmd == "construct" {
        emit(&commands::construct(&problem)?, &args.out)?;
        return Ok(EXIT_PASS);
    }
    let overrides = Overrides { seed: args.seed, samples: args.samples, tolerance: args.tolerance };
    let resolved = problem.resolve(overrides)?;
    let report = match cmd {
        "check" => commands::check(&resolved)?,
        "classify" => commands::classify(&resolved)?,
        _ => commands::ode(&resolved)?,
    };
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    emit(&text, &args.out)?;
    Ok(if report.verdict == Verdict::Pass { EXIT_PASS } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
