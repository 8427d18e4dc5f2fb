use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tame_cli::config::{load_config_with, Format, RunConfig};
use tame_cli::registry::Registry;
use tame_cli::report::{emit_report, hex_digest, to_json_lines};
use tame_cli::{run, Selection};

/// Exit codes: 0 every task met its contract, 1 some task failed,
/// 2 configuration or IO error.
#[derive(Parser)]
#[command(name = "tame", version, about = "Tameness certification and palette checks on graded spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `output.dir` or `tame-out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Replaces the config's top-level seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replaces `tolerances.bracket`.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build and checksum the configured models and operators.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Tameness certification and divergence scans.
    Tame {
        #[command(subcommand)]
        action: TameAction,
    },
    /// Run the `norm` tasks.
    Norm,
    /// Run the `metric` tasks.
    Metric,
    /// Palette axiom and strongness checks.
    Palette {
        #[command(subcommand)]
        action: PaletteAction,
    },
    /// Run the witness tasks with the given name.
    Witness { name: String },
    /// Run every task.
    Report,
}

#[derive(Subcommand)]
enum ModelAction {
    Build,
}

#[derive(Subcommand)]
enum TameAction {
    Certify,
    Scan,
}

#[derive(Subcommand)]
enum PaletteAction {
    Check,
}

fn load(global: &Global) -> Result<RunConfig, ExitCode> {
    let Some(path) = &global.config else {
        eprintln!("error: --config PATH is required");
        return Err(ExitCode::from(2));
    };
    let mut cfg = load_config_with(path, global.seed).map_err(|errs| {
        for e in &errs.0 {
            eprintln!("config error: {e}");
        }
        ExitCode::from(2)
    })?;
    if let Some(t) = global.tolerance {
        if !(t.is_finite() && t >= 0.0) {
            eprintln!("config error: --tolerance must be a nonnegative real");
            return Err(ExitCode::from(2));
        }
        cfg.tolerances.bracket = t;
    }
    Ok(cfg)
}

fn model_build(cfg: &RunConfig, out: &PathBuf) -> ExitCode {
    let reg = match Registry::build(cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let order: Vec<String> = cfg.operators.iter().map(|o| o.id.clone()).collect();
    let mut lines = to_json_lines(&reg.model_summaries()).unwrap_or_default();
    lines.extend(to_json_lines(&reg.operator_summaries(&order)).unwrap_or_default());
    let path = out.join("models.jsonl");
    if let Err(e) = std::fs::create_dir_all(out).and_then(|_| std::fs::write(&path, &lines)) {
        eprintln!("error: {}: {e}", path.display());
        return ExitCode::from(2);
    }
    eprintln!("wrote {} sha256={}", path.display(), hex_digest(&lines));
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli.global) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let out = cli.global.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("tame-out"));
    let format = cli.global.format.unwrap_or(cfg.output.format);
    let selection = match &cli.command {
        Command::Model { action: ModelAction::Build } => return model_build(&cfg, &out),
        Command::Tame { action: TameAction::Certify } => Selection::Kind("certify"),
        Command::Tame { action: TameAction::Scan } => Selection::Kind("scan"),
        Command::Norm => Selection::Kind("norm"),
        Command::Metric => Selection::Kind("metric"),
        Command::Palette { action: PaletteAction::Check } => Selection::Kind("palette"),
        Command::Witness { name } => Selection::Witness(name.clone()),
        Command::Report => Selection::All,
    };
    let result = run(&cfg, &selection);
    for (r, t) in result.reports.iter().zip(&result.wall_times) {
        let status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        match &r.error {
            Some(e) => eprintln!("{:<24} {status:<18} {t:>8.3}s  {e}", r.task),
            None => eprintln!("{:<24} {status:<18} {t:>8.3}s", r.task),
        }
    }
    match emit_report(&result.reports, format, &out) {
        Ok(files) => {
            for (path, digest) in files {
                eprintln!("wrote {} sha256={digest}", path.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    if result.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
