use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use wextrap::experiment::{apply_overrides, preset, presets, run, ExperimentConfig, RunOutput};
use wextrap::Error;

#[derive(Parser)]
#[command(name = "wextrap", version, about = "Weighted extrapolation and compactness experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a preset.
    Run {
        #[arg(conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// `key=value` with a dotted key path; the value is parsed as JSON when possible.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Directory for relative output paths.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// List the built-in presets.
    Presets,
    /// Check a config without running it.
    Validate { config: PathBuf },
}

const CONFIG_ERROR: u8 = 2;
const COMPUTE_ERROR: u8 = 3;

fn load(path: &Path) -> Result<Value, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn resolve(config: Option<PathBuf>, preset_name: Option<String>, overrides: &[String]) -> Result<ExperimentConfig, Error> {
    let doc = match (config, preset_name) {
        (Some(path), _) => load(&path)?,
        (None, Some(name)) => {
            let p = preset(&name).ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?;
            serde_json::to_value(&p.config)?
        }
        (None, None) => return Err(Error::Config("either a config path or --preset is required".into())),
    };
    ExperimentConfig::from_value(apply_overrides(doc, overrides)?)
}

/// Write every artifact to a temp file first, then rename, so a failure leaves no partial outputs.
fn write_outputs(cfg: &ExperimentConfig, out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut pending = Vec::new();
    if let Some(p) = &cfg.output.json {
        pending.push((dir.join(p), out.json.as_str()));
    }
    if let (Some(p), Some(csv)) = (&cfg.output.csv, &out.csv) {
        pending.push((dir.join(p), csv.as_str()));
    }
    let mut staged = Vec::new();
    for (path, body) in &pending {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut tmp = path.clone().into_os_string();
        tmp.push(".partial");
        let tmp = PathBuf::from(tmp);
        if let Err(e) = std::fs::write(&tmp, body) {
            for (t, _) in &staged {
                let _ = std::fs::remove_file(t);
            }
            return Err(e.into());
        }
        staged.push((tmp, path.clone()));
    }
    for (tmp, path) in &staged {
        std::fs::rename(tmp, path)?;
    }
    Ok(staged.into_iter().map(|(_, p)| p).collect())
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Json(_) => CONFIG_ERROR,
        _ => COMPUTE_ERROR,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_for(&e))
}

fn configure_threads() {
    if let Some(n) = std::env::var("WEXTRAP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    match Cli::parse().command {
        Command::Presets => {
            for p in presets() {
                println!("{:<26} {:<22} {}", p.name, p.config.experiment.tag(), p.description);
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match resolve(Some(config), None, &[]) {
            Ok(cfg) => {
                println!("ok: {}", cfg.experiment.tag());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Run { config, preset, overrides, out_dir } => {
            let cfg = match resolve(config, preset, &overrides) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let out = match run(&cfg) {
                Ok(o) => o,
                Err(e) => return fail(e),
            };
            match write_outputs(&cfg, &out, &out_dir) {
                Ok(paths) => {
                    if paths.is_empty() {
                        print!("{}", out.json);
                    }
                    for p in paths {
                        eprintln!("wrote {}", p.display());
                    }
                }
                Err(e) => return fail(e),
            }
            eprintln!("status: {:?}", out.status);
            ExitCode::from(out.status.exit_code() as u8)
        }
    }
}
