use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use critlab_cli::config::{emit_config, load_config, ExperimentConfig};
use critlab_cli::demos::{demo, DEMOS};
use critlab_cli::{emit_outputs, run_experiment, Formats};
use critlab_core::MapDescriptor;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERDICT: u8 = 3;

#[derive(Parser)]
#[command(name = "critlab", version, about = "Experiments on random compositions of interval maps")]
struct Cli {
    /// Directory for result files.
    #[arg(long, global = true, default_value = "results")]
    out_dir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replaces the seed of the configuration.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Comma separated subset of csv, json, svg.
    #[arg(long, global = true, default_value = "csv,json,svg")]
    formats: Formats,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the experiment described by a config file.
    Run { config: PathBuf },
    /// Parses and checks a config file without running it.
    Validate { config: PathBuf },
    /// Lists the builtin maps.
    ListMaps,
    /// Runs a bundled example configuration.
    Demo {
        /// Name of the demo; omit to list them.
        name: Option<String>,
        /// Print the configuration instead of running it.
        #[arg(long)]
        print: bool,
    },
}

fn read_config(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    parse_text(&text, &path.display().to_string())
}

fn parse_text(text: &str, origin: &str) -> Result<ExperimentConfig, ExitCode> {
    load_config(text).map_err(|e| {
        eprintln!("config error: {origin}: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn execute(cli: &Cli, mut config: ExperimentConfig) -> ExitCode {
    if let Some(seed) = cli.seed_override {
        config.system.seed = seed;
    }
    let bundle = run_experiment(&config);
    let files = match emit_outputs(&bundle, cli.formats, &cli.out_dir) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    for f in &files {
        println!("wrote {}", f.display());
    }
    for v in &bundle.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    println!("{:.2}s", bundle.meta.wall_clock_seconds);
    if let Some(e) = &bundle.error {
        eprintln!("experiment error: {e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    if bundle.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERDICT)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }
    match &cli.command {
        Command::Run { config } => match read_config(config) {
            Ok(c) => execute(&cli, c),
            Err(code) => code,
        },
        Command::Validate { config } => match read_config(config) {
            Ok(c) => {
                println!("ok: {} experiment, {} maps", c.experiment.kind(), c.system.maps.len());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::ListMaps => {
            println!("{:<10} {:<5} {:>6} {:>5}  family", "name", "kind", "order", "c");
            for m in MapDescriptor::builtin_catalog() {
                println!(
                    "{:<10} {:<5} {:>6} {:>5}  {}",
                    m.name,
                    format!("{:?}", m.kind).to_lowercase(),
                    m.order,
                    m.c,
                    serde_json::to_string(&m.family).unwrap()
                );
            }
            ExitCode::SUCCESS
        }
        Command::Demo { name: None, .. } => {
            for (name, _) in DEMOS {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Demo { name: Some(name), print } => {
            let Some(text) = demo(name) else {
                eprintln!("unknown demo `{name}`");
                return ExitCode::from(EXIT_CONFIG);
            };
            match parse_text(text, name) {
                Ok(c) if *print => {
                    print!("{}", emit_config(&c));
                    ExitCode::SUCCESS
                }
                Ok(c) => execute(&cli, c),
                Err(code) => code,
            }
        }
    }
}
