//! `neelgen` — config-driven experiments on measurement-induced symmetry
//! breaking in spin-1/2 antiferromagnets.
//!
//! Exit codes: 0 success, 2 invalid config/arguments, 3 verify-mode
//! tolerance failure, 1 unexpected runtime error.

mod config;
mod error;
mod output;
mod scenarios;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CouplingEntry, ExperimentConfig, LatticeSection, RunSection, ScenarioSection,
             StateSection, VerifySection};
use error::{validation, CliError};

#[derive(Parser)]
#[command(name = "neelgen", version, about = "Spin-1/2 antiferromagnet measurement simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// RNG seed; overrides `run.seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for trajectory fan-out (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Artifact directory; overrides `run.out` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Re-run a config's physics against built-in oracles; one PASS/FAIL
    /// line per check.
    Verify {
        config: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Magnon dispersion on a nearest-neighbour chain (shortcut).
    Dispersion {
        /// Chain length (even).
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Spread of a single-site disturbance: analytic kernel and/or exact
    /// small-chain evolution (shortcut).
    DecoherenceWave {
        /// Chain length (even); defaults to 64 analytic, 12 exact.
        #[arg(long)]
        n: Option<usize>,
        /// Evaluate the closed-form magnon kernel.
        #[arg(long)]
        analytic: bool,
        /// Evaluate the brute-force propagator on a small chain.
        #[arg(long)]
        exact: bool,
        /// Snapshot times, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [4.0, 8.0, 12.0, 16.0])]
        times: Vec<f64>,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Sequential random measurements on a staggered chain state (shortcut).
    Cascade {
        /// Chain length (even).
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        trajectories: usize,
        /// random | roundrobin | explicit:<comma-separated sites>
        #[arg(long, default_value = "random")]
        schedule: String,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Run { config, flags } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            run(&mut cfg, flags)
        }
        Cmd::Verify { config, flags } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply_overrides(flags.seed, flags.threads, flags.out);
            init_threads(cfg.run.threads)?;
            let kind = cfg.validate()?;
            verify::run_verify(&cfg, kind)
        }
        Cmd::Dispersion { n, flags } => {
            let mut cfg = shortcut_config(n, ScenarioSection {
                kind: "dispersion".into(),
                ..empty_scenario()
            });
            run(&mut cfg, flags)
        }
        Cmd::DecoherenceWave {
            n,
            analytic,
            exact,
            times,
            flags,
        } => {
            let mode = match (analytic, exact) {
                (true, true) => "both",
                (false, true) => "exact",
                _ => "analytic",
            };
            let n = n.unwrap_or(if exact { 12 } else { 64 });
            let mut cfg = shortcut_config(n, ScenarioSection {
                kind: "decoherence_wave".into(),
                mode: Some(mode.into()),
                times: Some(times),
                ..empty_scenario()
            });
            run(&mut cfg, flags)
        }
        Cmd::Cascade {
            n,
            steps,
            trajectories,
            schedule,
            flags,
        } => {
            let (schedule, sites) = parse_schedule_flag(&schedule)?;
            let mut cfg = shortcut_config(n, ScenarioSection {
                kind: "cascade".into(),
                steps: Some(steps),
                trajectories: Some(trajectories),
                schedule: Some(schedule),
                sites,
                ..empty_scenario()
            });
            // A fixed default keeps the shortcut reproducible without a flag.
            cfg.run.seed = Some(1);
            run(&mut cfg, flags)
        }
    }
}

fn run(cfg: &mut ExperimentConfig, flags: CommonFlags) -> Result<(), CliError> {
    cfg.apply_overrides(flags.seed, flags.threads, flags.out);
    init_threads(cfg.run.threads)?;
    let kind = cfg.validate()?;
    let (dir, outputs) = scenarios::execute(cfg, kind)?;
    for name in outputs.keys() {
        println!("wrote {}", dir.join(name).display());
    }
    println!("wrote {}", dir.join("manifest.json").display());
    Ok(())
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(validation("run.threads: must be >= 1"));
        }
        // Ignore the error if a pool already exists (e.g. repeated calls in
        // tests); rayon keeps the first configuration.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

fn empty_scenario() -> ScenarioSection {
    ScenarioSection {
        kind: String::new(),
        site: 0,
        outcome: None,
        steps: None,
        trajectories: None,
        schedule: None,
        sites: None,
        components: None,
        mode: None,
        times: None,
        delta_z: None,
        source: None,
    }
}

fn shortcut_config(n: usize, scenario: ScenarioSection) -> ExperimentConfig {
    ExperimentConfig {
        lattice: LatticeSection {
            geometry: "chain".into(),
            sizes: vec![n],
            couplings: Vec::<CouplingEntry>::new(),
        },
        state: StateSection::default(),
        scenario,
        run: RunSection::default(),
        verify: VerifySection::default(),
    }
}

/// `random`, `roundrobin`, or `explicit:0,3,5`.
fn parse_schedule_flag(s: &str) -> Result<(String, Option<Vec<usize>>), CliError> {
    if let Some(list) = s.strip_prefix("explicit:") {
        let sites = list
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| validation(format!("--schedule: bad site \"{tok}\"")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(("explicit".into(), Some(sites)))
    } else {
        Ok((s.to_string(), None))
    }
}
