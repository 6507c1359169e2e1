use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rislab::harness::{
    load_scenario, placement_sweep, preset, run_with_threads, write_csv, write_placement_csv, BoundConfig, BoundMode,
    PlacementSpec, PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "rislab", version, about = "RIS-assisted interference network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML scenario file and write the result CSV.
    Run {
        /// Preset name or path of a scenario file.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (capped by RIS_LAB_THREADS).
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Minimum number of surface elements for a symmetric network.
    Bound {
        #[arg(long, value_enum)]
        mode: Mode,
        /// TOML bound configuration; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Linear SINR (centralized) or score (distributed) target.
        #[arg(long)]
        target: Option<f64>,
        /// CSV of the bound over the trade-off grid.
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in presets.
    Presets,
    /// Required element count versus surface position.
    SweepPlacement {
        #[arg(long, default_value = "fig-placement")]
        preset: String,
        /// Mean sum-rate to reach.
        #[arg(long, default_value_t = 4.0)]
        target: f64,
        /// Surface abscissas, comma separated.
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<f64>>,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallel: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Centralized,
    Distributed,
}

impl From<Mode> for BoundMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Centralized => BoundMode::Centralized,
            Mode::Distributed => BoundMode::Distributed,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { scenario, trials, seed, out, parallel } => {
            let mut s = load_scenario(&scenario)?;
            if let Some(t) = trials {
                s.trials = t;
            }
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let rows = run_with_threads(&s, parallel)?;
            match out {
                Some(path) => {
                    let mut w = create(&path)?;
                    write_csv(&rows, &mut w)?;
                    w.flush()?;
                }
                None => {
                    let mut w = BufWriter::new(io::stdout().lock());
                    write_csv(&rows, &mut w)?;
                    w.flush()?;
                }
            }
        }
        Command::Bound { mode, config, target, out } => {
            let cfg = match config {
                Some(path) => {
                    let text =
                        std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
                    BoundConfig::from_toml(&text)?
                }
                None => BoundConfig::default(),
            };
            let result = cfg.solve(mode.into(), target)?;
            let mut w = create(&out)?;
            result.write_csv(&mut w)?;
            w.flush()?;
            if result.feasible {
                println!(
                    "m_min = {} (a* = {:.4}, bound = {:.4}{})",
                    result.m_min,
                    result.a_star,
                    result.bound_value,
                    if result.clamped { ", clamped" } else { "" }
                );
            } else {
                println!("infeasible: the bound is undefined for every trade-off value");
            }
        }
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}\t{}", preset(name)?.description);
            }
        }
        Command::SweepPlacement { preset: name, target, x, m_max, trials, seed, parallel, out } => {
            let mut s = load_scenario(&name)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let mut spec = PlacementSpec { target, trials, threads: parallel, ..PlacementSpec::default() };
            if let Some(x) = x {
                if x.is_empty() {
                    bail!("--x needs at least one value");
                }
                spec.x_values = x;
            }
            if let Some(m) = m_max {
                spec.m_max = m;
            }
            let points = placement_sweep(&s, &spec)?;
            let mut w = create(&out)?;
            write_placement_csv(&points, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
