//! `covrage`: plan trajectory-covering receive beams and evaluate them from
//! scenario files.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use covrage_core::harness::{self, compare, gain_map, run_scenario};
use covrage_core::scenario::ScenarioFile;
use covrage_core::{Scenario, Strategy};

use crate::output::Manifest;

const EXIT_CONFIG: u8 = 2;
const EXIT_DOMAIN: u8 = 3;

#[derive(Parser)]
#[command(name = "covrage", version, about = "Trajectory-covering receive beamforming for mmWave VR headsets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan the beam and dump the antenna weights.
    Plan(Common),
    /// Gain, noise penalty and MCS along the trajectory.
    Sweep(Common),
    /// Directional gain over the whole front hemisphere.
    Gainmap(Common),
    /// All strategies and ablations on one scenario.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files.
    #[arg(long, env = "COVRAGE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Override run.strategy.
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    /// Planner ablation; may be given twice.
    #[arg(long, value_enum)]
    ablation: Vec<AblationFlag>,
    /// Gain-map cells per axis.
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Override run.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AblationFlag {
    NoSync,
    DelayedFirst,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: covrage_core::Error| e.to_string())
}

fn load(common: &Common) -> anyhow::Result<Scenario> {
    let mut file = ScenarioFile::load(&common.config)?;
    if let Some(seed) = common.seed {
        file.run.seed = seed;
    }
    if let Some(strategy) = common.strategy {
        file.run.strategy = strategy;
    }
    for a in &common.ablation {
        match a {
            AblationFlag::NoSync => file.run.no_sync = true,
            AblationFlag::DelayedFirst => file.run.delayed_first = true,
        }
    }
    let base = common.config.parent().unwrap_or_else(|| Path::new("."));
    Ok(file.resolve(base)?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (name, common) = match &cli.command {
        Command::Plan(c) => ("plan", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Gainmap(c) => ("gainmap", c),
        Command::Compare(c) => ("compare", c),
    };
    let scenario = load(common)?;
    if matches!(cli.command, Command::Gainmap(_)) && common.resolution < 16 {
        return Err(covrage_core::Error::Config(format!(
            "--resolution must be at least 16, got {}",
            common.resolution
        ))
        .into());
    }
    let out = &common.out_dir;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Manifest {
        command: name,
        config: &common.config,
        out_dir: out,
        resolution: common.resolution,
        scenario: &scenario,
    }
    .write(out)?;

    match cli.command {
        Command::Plan(_) => {
            let run = run_scenario(&scenario)?;
            print!("{}", output::plan_summary(&run));
            output::write(out, "plan.json", &output::plan_json(&scenario, &run)?)?;
            output::write(out, "awv.csv", &output::awv_csv(&run.beam.awv))?;
        }
        Command::Sweep(_) => {
            let run = run_scenario(&scenario)?;
            let s = &run.sweep.summary;
            println!(
                "{}: {} samples, gain {:.2} to {:.2} dBi (range {:.2} dB), min rate {} Mbps",
                scenario.strategy,
                run.sweep.samples.len(),
                s.min_gain_dbi,
                s.max_gain_dbi,
                s.range_db,
                s.min_rate_mbps
            );
            output::write(out, "sweep.csv", &output::sweep_csv(&run.sweep))?;
            output::write(out, "summary.json", &output::summary_json(&scenario, &run)?)?;
        }
        Command::Gainmap(_) => {
            let run = run_scenario(&scenario)?;
            let map = gain_map(&run.beam.awv, scenario.array.spacing_wavelengths, common.resolution)?;
            let (i, j, g) = map.peak();
            let p = map.point(i, j);
            println!(
                "{}x{} cells, peak {:.2} dBi at u={:.4} v={:.4}",
                map.resolution, map.resolution, g, p.u, p.v
            );
            output::write(out, "gainmap.csv", &output::gainmap_csv(&map, harness::DISPLAY_CLAMP_DBI))?;
        }
        Command::Compare(_) => {
            let rows = compare(&scenario)?;
            print!("{}", output::compare_table(&rows));
            output::write(out, "compare.csv", &output::compare_csv(&rows))?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<covrage_core::Error>() {
        Some(e) if e.is_domain() => EXIT_DOMAIN,
        Some(_) => EXIT_CONFIG,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        let domain: anyhow::Error = covrage_core::Error::BehindArray { phi_deg: 100.0 }.into();
        assert_eq!(exit_code(&domain), EXIT_DOMAIN);
        let config: anyhow::Error = covrage_core::Error::Config("x".into()).into();
        assert_eq!(exit_code(&config), EXIT_CONFIG);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 1);
    }

    #[test]
    fn ablation_flags_accumulate() {
        let cli = Cli::try_parse_from([
            "covrage", "sweep", "--config", "x.toml", "--ablation", "no-sync", "--ablation", "delayed-first",
        ])
        .unwrap();
        let Command::Sweep(c) = cli.command else { panic!() };
        assert_eq!(c.ablation, vec![AblationFlag::NoSync, AblationFlag::DelayedFirst]);
    }
}
