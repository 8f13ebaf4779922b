//! Command-line driver for the jump-telegraph short-rate library.

pub mod commands;
pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use commands::{cmd_convexity, cmd_price, cmd_simulate, cmd_table, TableMethod};
use config::{OutputFormat, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or model parameters.
    Usage(String),
    /// Computed table entries outside the reference tolerances.
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Tolerance(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Tolerance(m) => f.write_str(m),
        }
    }
}

impl From<jtrates_core::Error> for CliError {
    fn from(e: jtrates_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Usage(format!("config error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "jtrates",
    version,
    about = "Bond pricing under jump-telegraph short-rate models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TableMethodArg {
    Expectation,
    Pde,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConvexityArg {
    Pde,
    Mc,
}

/// Config file plus overrides. Any config key can also be passed as a
/// trailing `--key value` or `--key=value` flag.
#[derive(Debug, clap::Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override a config entry; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
    pub flags: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recompute one of the four reference tables.
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        number: u8,
        #[arg(long, value_enum, default_value = "all")]
        method: TableMethodArg,
        #[arg(long, value_enum, default_value = "markdown")]
        format: FormatArg,
    },
    /// Price zero-coupon bonds by one or all methods.
    Price {
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Write simulated short-rate paths as CSV.
    Simulate {
        #[arg(long)]
        paths: u64,
        /// Defaults to the config's `horizon`, else its last maturity.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Write a convexity-adjustment report as CSV.
    Convexity {
        #[arg(long, value_enum, default_value = "pde")]
        method: ConvexityArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        args: ConfigArgs,
    },
}

/// Turns trailing `--key value` / `--key=value` flags into `key=value` overrides.
fn flags_to_overrides(flags: &[String]) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    let mut it = flags.iter();
    while let Some(f) = it.next() {
        let Some(body) = f.strip_prefix("--") else {
            return Err(CliError::Usage(format!("unexpected argument '{f}'")));
        };
        if body.contains('=') {
            out.push(body.to_string());
        } else {
            let v = it
                .next()
                .ok_or_else(|| CliError::Usage(format!("flag --{body} needs a value")))?;
            out.push(format!("{body}={v}"));
        }
    }
    Ok(out)
}

fn load(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let mut overrides = args.overrides.clone();
    overrides.extend(flags_to_overrides(&args.flags)?);
    Ok(RunConfig::parse_with_overrides(&text, &overrides)?)
}

pub fn parse_env_seed(value: Option<&str>) -> Result<Option<u64>, CliError> {
    value
        .map(|v| {
            v.trim().parse::<u64>().map_err(|_| {
                CliError::Usage(format!(
                    "JTRATES_SEED must be an unsigned integer, got '{v}'"
                ))
            })
        })
        .transpose()
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
    }
}

/// Runs a parsed command. `env_seed` is the raw `JTRATES_SEED` value.
pub fn run(
    cli: &Cli,
    env_seed: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let seed = parse_env_seed(env_seed)?;
    match &cli.command {
        Command::Table {
            number,
            method,
            format,
        } => {
            let method = match method {
                TableMethodArg::Expectation => TableMethod::Expectation,
                TableMethodArg::Pde => TableMethod::Pde,
                TableMethodArg::All => TableMethod::All,
            };
            let format = match format {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Markdown => OutputFormat::Markdown,
            };
            let t = cmd_table(*number, method, format)?;
            emit(out, None, &t.text)?;
            let _ = err.write_all(t.summary.as_bytes());
            if !t.within_tolerance {
                return Err(CliError::Tolerance(format!(
                    "table {number} is outside the reference tolerances"
                )));
            }
            Ok(())
        }
        Command::Price { args } => {
            let cfg = load(args)?;
            emit(out, None, &cmd_price(&cfg, seed)?)
        }
        Command::Simulate {
            paths,
            horizon,
            out: path,
            args,
        } => {
            let cfg = load(args)?;
            let horizon = horizon
                .or(cfg.horizon)
                .unwrap_or_else(|| cfg.maturities.iter().cloned().fold(0.0, f64::max));
            emit(
                out,
                path.as_deref(),
                &cmd_simulate(&cfg, *paths, horizon, seed)?,
            )
        }
        Command::Convexity {
            method,
            out: path,
            args,
        } => {
            let cfg = load(args)?;
            let csv = cmd_convexity(&cfg, matches!(method, ConvexityArg::Mc), seed)?;
            emit(out, path.as_deref(), &csv)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_flags_become_overrides() {
        let flags: Vec<String> = ["--r0", "0.1", "--mu0=0.2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            flags_to_overrides(&flags).unwrap(),
            vec!["r0=0.1", "mu0=0.2"]
        );
        assert!(flags_to_overrides(&["--r0".to_string()]).is_err());
        assert!(flags_to_overrides(&["r0".to_string()]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Tolerance("x".into()).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }

    #[test]
    fn env_seed_parsing() {
        assert_eq!(parse_env_seed(None).unwrap(), None);
        assert_eq!(parse_env_seed(Some("17")).unwrap(), Some(17));
        assert!(parse_env_seed(Some("x")).is_err());
    }
}
