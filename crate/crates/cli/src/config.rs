use crate::args::{Cli, Command};
use crate::commands;
use crate::output::{CliError, CliResult, Sink};
use clap::Parser;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::PathBuf;

/// A job file: one command with its options. Keys of `args` are option
/// names (underscores or dashes); arrays become comma lists, and arrays of
/// arrays repeat the option.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct JobConfig {
    command: String,
    #[serde(default)]
    args: serde_json::Map<String, Value>,
    output: Option<PathBuf>,
    jobs: Option<usize>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    if let Command::Run { config } = &cli.command {
        let bytes = std::fs::read(config).map_err(|e| CliError::input(format!("{}: {e}", config.display())))?;
        let job: JobConfig =
            serde_json::from_slice(&bytes).map_err(|e| CliError::input(format!("{}: {e}", config.display())))?;
        let inner = job_to_cli(&job)?;
        let out = job.output.or(cli.out);
        let jobs = job.jobs.or(cli.jobs);
        return execute(inner.command, Sink { out, config_sha256: sha256_hex(&bytes) }, jobs);
    }
    let hash = sha256_hex(format!("{:?}", cli.command).as_bytes());
    execute(cli.command, Sink { out: cli.out, config_sha256: hash }, cli.jobs)
}

fn job_to_cli(job: &JobConfig) -> CliResult<Cli> {
    if job.command == "run" {
        return Err(CliError::input("a job config cannot itself run a config"));
    }
    let scalar = |v: &Value| -> CliResult<String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            Value::Bool(b) => Ok(b.to_string()),
            other => Err(CliError::input(format!("unsupported option value {other}"))),
        }
    };
    let mut argv = vec!["symflow".to_string(), job.command.clone()];
    for (key, v) in &job.args {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Array(items) if items.iter().any(Value::is_array) => {
                for item in items {
                    let parts = item.as_array().ok_or_else(|| CliError::input(format!("{key}: mixed array")))?;
                    let joined: CliResult<Vec<String>> = parts.iter().map(scalar).collect();
                    argv.push(flag.clone());
                    argv.push(joined?.join(","));
                }
            }
            Value::Array(items) => {
                let joined: CliResult<Vec<String>> = items.iter().map(scalar).collect();
                argv.push(flag);
                argv.push(joined?.join(","));
            }
            v => {
                argv.push(flag);
                argv.push(scalar(v)?);
            }
        }
    }
    Cli::try_parse_from(&argv).map_err(|e| CliError::usage(e.to_string()))
}

fn execute(command: Command, sink: Sink, jobs: Option<usize>) -> CliResult<()> {
    let threads = jobs.unwrap_or(1);
    if threads == 0 {
        return Err(CliError::input("--jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::input(format!("thread pool: {e}")))?;
    pool.install(|| commands::run(command, &sink))
}
