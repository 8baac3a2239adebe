use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use blaschke_lab::presets::{describe, list_presets};
use blaschke_lab::report::{write_report, RunInfo};
use blaschke_lab::{
    execute_with_threads, ExperimentConfig, Preset, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_PASS, EXIT_RUNTIME, OUT_ENV,
};

#[derive(Parser)]
#[command(
    name = "blaschke-lab",
    version,
    about = "Run boundary-orbit experiments for compositions of Blaschke products"
)]
struct Cli {
    /// Output root; the report goes to <out>/<preset>/.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (changes speed only, never results).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Print every preset with the claim it reproduces.
    ListPresets,
    /// Print a preset's parameters as a config file with defaults.
    Describe { preset: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::ListPresets => {
            print!("{}", list_presets());
            EXIT_PASS
        }
        Command::Describe { preset } => match Preset::from_name(preset) {
            Some(p) => {
                print!("{}", describe(p));
                EXIT_PASS
            }
            None => {
                eprintln!("error: unknown preset `{preset}`; see list-presets");
                EXIT_CONFIG
            }
        },
        Command::Run { config } => run(&cli, config),
    };
    ExitCode::from(code as u8)
}

fn output_root(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(out) = &cli.out {
        return out.clone();
    }
    if let Some(dir) = cfg.output_dir() {
        return PathBuf::from(dir);
    }
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("lab-out"), PathBuf::from)
}

fn run(cli: &Cli, path: &Path) -> i32 {
    let mut cfg = match ExperimentConfig::from_file(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = cli.seed {
        if let Err(e) = cfg.set("seed", seed.to_string()) {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let report = match execute_with_threads(&cfg, threads) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return e.exit_code();
        }
    };
    let info = RunInfo {
        preset: cfg.preset.name().to_owned(),
        claim: cfg.preset.claim().to_owned(),
        config: cfg.resolved(),
        threads,
        started_unix: started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    };
    let dir = output_root(cli, &cfg).join(cfg.preset.name());
    let manifest = match write_report(&report, &info, &dir) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: writing {}: {e}", dir.display());
            return EXIT_RUNTIME;
        }
    };
    for (name, value) in &report.measurements {
        println!("{name} = {value}");
    }
    for c in &report.checks {
        println!(
            "{} {}: {} (required {})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.requirement
        );
    }
    println!("manifest: {}", manifest.display());
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}
