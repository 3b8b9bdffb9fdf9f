use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lindep::runner::prepare;
use lindep::{execute, CliError, Config};
use lindep_core::Registry;

/// Identify ODE parameters and initial states from output trajectories.
#[derive(Debug, Parser)]
#[command(name = "lindep", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// List the registered models.
    #[arg(long)]
    models: bool,
    /// Check a config file without running it.
    #[arg(long, value_name = "CONFIG")]
    validate: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the identification described by a config file.
    Run { config: PathBuf },
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn list_models() {
    let reg = Registry::with_builtin();
    for name in reg.names() {
        let m = reg.get(name).expect("listed model exists");
        emit(&format!(
            "{name}\tstates {}\tparameters {}\toutputs {}\tq {}",
            m.spec.state_dim, m.spec.param_dim, m.spec.output_dim, m.pmap.q
        ));
    }
    emit("linparam\tconfigured through [model] a, n, rho, u");
}

fn validate(path: &Path) -> Result<(), CliError> {
    let cfg = Config::load(path)?;
    let p = prepare(&cfg, &base_dir(path))?;
    emit(&serde_json::json!({ "valid": true, "model": p.model.name, "q": p.model.pmap.q }).to_string());
    Ok(())
}

fn run(path: &Path) -> Result<(), CliError> {
    let cfg = Config::load(path)?;
    let report = execute(&cfg, &base_dir(path))?;
    let json = report.to_json();
    match &cfg.output {
        Some(out) => {
            let target = if out.path.is_absolute() { out.path.clone() } else { base_dir(path).join(&out.path) };
            std::fs::write(&target, json + "\n").map_err(|e| CliError::io(&target, e))?;
        }
        None => emit(&json),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match (cli.command, cli.models, cli.validate) {
        (None, true, None) => {
            list_models();
            Ok(())
        }
        (None, false, Some(path)) => validate(&path),
        (Some(Command::Run { config }), false, None) => run(&config),
        (None, false, None) => Err(CliError::Usage("nothing to do; see --help".into())),
        _ => Err(CliError::Usage("use exactly one of run, --models, --validate".into())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            let err = CliError::Usage(first.to_string());
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(err.exit_code());
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code())
        }
    }
}
