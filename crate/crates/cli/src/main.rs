use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mlz_cli::{
    diagnostic, parse_config, run, Command, ConfigError, RunError, EXIT_COMPUTE, EXIT_CONFIG,
    EXIT_OK,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mlz", version, about = "Multistate Landau-Zener toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Io {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Sub {
    /// Propagate U(T, -T) and write amplitudes and probabilities.
    Simulate(Io),
    /// Evaluate closed-form transition probabilities.
    Analytic(Io),
    /// Check scattering-matrix constraints; fails unless all pass.
    Verify(Io),
    /// Factor a closed-form scattering matrix into Stokes matrices.
    Stokes(Io),
    /// Bosonic dual scattering and condensate populations.
    Dual(Io),
    /// Sweep one coupling and search for simultaneous cyclic-reality zeros.
    Scan(Io),
}

fn emit(level: &str, kind: &str, fields: serde_json::Value) {
    eprintln!("{}", diagnostic(level, kind, fields));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            emit(
                "error",
                "usage",
                json!({ "message": e.to_string().trim_end() }),
            );
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let (command, io) = match cli.command {
        Sub::Simulate(io) => (Command::Simulate, io),
        Sub::Analytic(io) => (Command::Analytic, io),
        Sub::Verify(io) => (Command::Verify, io),
        Sub::Stokes(io) => (Command::Stokes, io),
        Sub::Dual(io) => (Command::Dual, io),
        Sub::Scan(io) => (Command::Scan, io),
    };
    ExitCode::from(execute(command, &io))
}

fn execute(command: Command, io: &Io) -> u8 {
    let text = match std::fs::read_to_string(&io.config) {
        Ok(t) => t,
        Err(e) => {
            let path = io.config.display().to_string();
            emit(
                "error",
                "io",
                json!({ "path": path, "message": e.to_string() }),
            );
            return EXIT_CONFIG;
        }
    };
    let cfg = match parse_config(&text, command) {
        Ok(cfg) => cfg,
        Err(ConfigError::Parse(message)) => {
            emit("error", "parse_error", json!({ "message": message }));
            return EXIT_CONFIG;
        }
        Err(ConfigError::Schema(violations)) => {
            for v in violations {
                emit(
                    "error",
                    "schema_error",
                    json!({ "pointer": v.pointer, "message": v.message }),
                );
            }
            return EXIT_CONFIG;
        }
    };
    match run(&cfg, &io.out) {
        Ok(outcome) => {
            for f in &outcome.files {
                emit("info", "wrote", json!({ "path": f.display().to_string() }));
            }
            if outcome.success {
                EXIT_OK
            } else {
                emit(
                    "error",
                    "verification_failed",
                    json!({ "message": "at least one constraint check failed" }),
                );
                EXIT_COMPUTE
            }
        }
        Err(RunError::Config(v)) => {
            emit(
                "error",
                "config_error",
                json!({ "pointer": v.pointer, "message": v.message }),
            );
            EXIT_CONFIG
        }
        Err(RunError::Compute(e)) => {
            emit(
                "error",
                "computation_error",
                json!({ "message": e.to_string() }),
            );
            EXIT_COMPUTE
        }
        Err(e @ RunError::Io(..)) => {
            emit("error", "io", json!({ "message": e.to_string() }));
            EXIT_COMPUTE
        }
    }
}
