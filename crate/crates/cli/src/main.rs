use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mcvd_cli::config::{ConfigError, ExperimentConfig};
use mcvd_cli::output::write_artifacts;
use mcvd_cli::recipes::{self, RunError};
use serde_json::{json, Value};

/// Environment variable holding the worker-thread count.
const THREADS_ENV: &str = "MCVD_THREADS";

#[derive(Parser)]
#[command(name = "mcvd", version, about = "Two-link diffusive molecular communication experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a figure recipe and write <prefix>.csv and <prefix>.json.
    Run {
        /// Configuration file; the recipe's defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        recipe: Option<String>,
        /// Master seed, required by stochastic recipes.
        #[arg(long)]
        seed: Option<u64>,
        /// Output prefix; overrides the configuration's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available recipes.
    ListRecipes {
        /// Print the catalog with default parameter sets as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Check a configuration file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

struct Failure {
    kind: &'static str,
    message: String,
    detail: Option<Value>,
    code: u8,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let detail = serde_json::to_value(&e).ok();
        Failure { kind: "invalid_config", message: e.to_string(), detail, code: 2 }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => c.into(),
            RunError::Compute(_) => Failure { kind: e.kind(), message: e.to_string(), detail: None, code: 1 },
            _ => Failure { kind: e.kind(), message: e.to_string(), detail: None, code: 2 },
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { kind: "usage", message: message.into(), detail: None, code: 2 }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("cannot configure thread pool: {e}")))
}

fn run(config: Option<PathBuf>, recipe: Option<String>, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut cfg = match (&config, &recipe) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => {
            recipes::default_config(name).ok_or_else(|| Failure::from(RunError::UnknownRecipe(name.clone())))?
        }
        (None, None) => return Err(usage("run needs --recipe or --config")),
    };
    if let Some(name) = recipe {
        if config.is_some() && name != cfg.recipe {
            return Err(usage(format!(
                "--recipe {name} disagrees with the configuration's recipe '{}'",
                cfg.recipe
            )));
        }
    }
    if let Some(prefix) = &out {
        cfg.output = prefix.to_string_lossy().into_owned();
    }
    let table = recipes::run(&cfg, seed)?;
    let stochastic = recipes::find(&cfg.recipe).is_some_and(|r| r.stochastic);
    let seed = if stochastic { seed } else { None };
    let (csv, json_path) = write_artifacts(&PathBuf::from(&cfg.output), &table, &cfg, seed)
        .map_err(|e| Failure { kind: "io", message: e.to_string(), detail: None, code: 1 })?;
    println!(
        "{}",
        json!({"status": "ok", "recipe": cfg.recipe, "rows": table.rows.len(), "csv": csv, "json": json_path})
    );
    Ok(())
}

fn list(as_json: bool) {
    if as_json {
        println!("{}", serde_json::to_string_pretty(&recipes::catalog_json()).unwrap());
        return;
    }
    for r in &recipes::RECIPES {
        let sweeps: Vec<&str> = r.sweeps.iter().map(|v| v.name()).collect();
        let tag = if r.stochastic { " [needs --seed]" } else { "" };
        println!("{:<6} {} (sweeps: {}){tag}", r.name, r.description, sweeps.join(", "));
    }
}

fn validate(path: PathBuf) -> Result<(), Failure> {
    let cfg = ExperimentConfig::load(&path)?;
    if recipes::find(&cfg.recipe).is_none() {
        return Err(RunError::UnknownRecipe(cfg.recipe.clone()).into());
    }
    let report = cfg.warnings();
    println!(
        "{}",
        json!({"status": "ok", "warnings": report.messages, "report": report, "config": cfg})
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(usage(e.to_string().lines().next().unwrap_or("invalid arguments").to_string())),
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Run { config, recipe, seed, out } => run(config, recipe, seed, out),
        Command::ListRecipes { json } => {
            list(json);
            Ok(())
        }
        Command::Validate { config } => validate(config),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    let mut v = json!({"error": f.kind, "message": f.message});
    if let Some(d) = f.detail {
        v["detail"] = d;
    }
    eprintln!("{v}");
    ExitCode::from(f.code)
}
