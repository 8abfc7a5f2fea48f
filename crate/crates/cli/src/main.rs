//! `genlab` command-line driver.

mod commands;
mod config;
mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{ExperimentConfig, Format};

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            msg: msg.into(),
        }
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERIC,
            msg: msg.into(),
        }
    }
}

impl From<genlab::Error> for CliError {
    fn from(e: genlab::Error) -> Self {
        use genlab::Error::*;
        let code = match e {
            Degenerate(_) => EXIT_NUMERIC,
            Guard(_) => EXIT_GUARD,
            Config(_) | Input(_) | Dimension { .. } | Unsupported(_) => EXIT_CONFIG,
        };
        CliError { code, msg: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "genlab", version, about = "Statistical learning theory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; falls back to the config, then GENLAB_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "genlab-out")]
    out: PathBuf,
    /// Comma-separated output formats: csv, json, svg.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Empirical Rademacher complexity of a class on a sample.
    Rad,
    /// Bias/variance/noise decomposition along a λ grid.
    Bv,
    /// Cross-validated error along a λ grid.
    Cv,
    /// Generalization bound evaluation or coverage check.
    Bound,
    /// Random-label experiments; exits 0 only if the conclusion fires.
    Randomization,
    /// VC dimension by shattering search.
    Vc,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Rad => "rad",
            Command::Bv => "bv",
            Command::Cv => "cv",
            Command::Bound => "bound",
            Command::Randomization => "randomization",
            Command::Vc => "vc",
        }
    }
}

fn run_with<P, F>(cli: &Cli, body: F) -> Result<i32, CliError>
where
    P: Serialize + DeserializeOwned + Default,
    F: FnOnce(&P, u64) -> Result<commands::Output, CliError>,
{
    let name = cli.command.name();
    let mut cfg: ExperimentConfig<P> = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("--config {}: {e}", path.display())))?;
            config::parse_config(&text, name)?
        }
        None => config::parse_config("{}", name)?,
    };
    let mut sources = BTreeMap::new();
    let env_seed = match std::env::var("GENLAB_SEED") {
        Ok(v) => Some(
            v.trim()
                .parse::<u64>()
                .map_err(|_| CliError::config(format!("GENLAB_SEED `{v}` is not a u64")))?,
        ),
        Err(_) => None,
    };
    let seed = if let Some(s) = cli.seed {
        sources.insert("seed".into(), "flag".into());
        s
    } else if let Some(s) = cfg.seed {
        sources.insert("seed".into(), "file".into());
        s
    } else if let Some(s) = env_seed {
        sources.insert("seed".into(), "env".into());
        s
    } else {
        sources.insert("seed".into(), "default".into());
        0
    };
    let formats = if let Some(f) = &cli.format {
        sources.insert("formats".into(), "flag".into());
        Format::parse_list(f)?
    } else if let Some(f) = cfg.formats.clone() {
        sources.insert("formats".into(), "file".into());
        f
    } else {
        sources.insert("formats".into(), "default".into());
        vec![Format::Csv, Format::Json, Format::Svg]
    };
    sources.insert(
        "params".into(),
        if cli.config.is_some() { "file" } else { "default" }.into(),
    );
    cfg.command = Some(name.to_string());
    cfg.seed = Some(seed);
    cfg.formats = Some(formats.clone());
    cfg.sources = sources;

    let out = body(&cfg.params, seed)?;
    write_outputs(&cli.out, &cfg, &formats, &out)?;
    println!("{}", out.summary);
    Ok(out.exit_code)
}

fn write_outputs<P: Serialize>(
    dir: &Path,
    cfg: &ExperimentConfig<P>,
    formats: &[Format],
    out: &commands::Output,
) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::config(format!("--out {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut manifest = serde_json::to_string_pretty(cfg).map_err(|e| CliError::numeric(e.to_string()))?;
    manifest.push('\n');
    std::fs::write(dir.join("manifest.json"), manifest).map_err(io)?;
    for (name, body) in &out.files {
        if Format::of_file(name).is_some_and(|f| formats.contains(&f)) {
            std::fs::write(dir.join(name), body).map_err(io)?;
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Rad => run_with(cli, commands::rad),
        Command::Bv => run_with(cli, commands::bv),
        Command::Cv => run_with(cli, commands::cv),
        Command::Bound => run_with(cli, commands::bound),
        Command::Randomization => run_with(cli, commands::randomization),
        Command::Vc => run_with(cli, commands::vc),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code as u8)
        }
    }
}
