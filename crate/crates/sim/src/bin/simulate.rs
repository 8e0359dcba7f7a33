use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use cfsr_sim::output::{self, RunReport};
use cfsr_sim::{convergence, error_power, region, topology, SimConfig, SimError};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    All,
    /// Estimation-error-plus-noise power against the pilot split.
    Fig2,
    /// SCA convergence traces.
    Fig34,
    /// Averaged rate regions.
    Fig56,
    Topology,
}

/// Cell-free symbiotic radio experiments.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Cli {
    /// Flat TOML configuration; missing keys take the default scenario.
    config: Option<PathBuf>,
    /// Output directory, created if needed.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides `rng_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `mc_trials` (rate-region draws).
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = Experiment::All)]
    experiment: Experiment,
}

fn run(cli: Cli) -> Result<(), SimError> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.system.rng_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.system.mc_trials = trials;
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    std::fs::create_dir_all(&cli.out).map_err(|e| SimError::io(&cli.out, e))?;
    let seed = cfg.system.rng_seed;
    let wants = |e: Experiment| cli.experiment == Experiment::All || cli.experiment == e;
    let mut timings = Vec::new();

    if wants(Experiment::Topology) {
        output::write_topology(&cli.out.join("topology.csv"), &topology::topology_rows(&cfg.system)?)?;
    }
    let fig2 = if wants(Experiment::Fig2) {
        let t = Instant::now();
        let sweep = error_power::run_error_power_sweep(&cfg.system, &cfg.params)?;
        output::write_fig2(&cli.out.join("fig2.csv"), &sweep)?;
        timings.push(("fig2", t.elapsed().as_secs_f64()));
        Some(sweep)
    } else {
        None
    };
    let fig34 = if wants(Experiment::Fig34) {
        let t = Instant::now();
        let res = pool.install(|| convergence::run_sca_convergence(&cfg.system, &cfg.params, seed))?;
        output::write_fig34(&cli.out.join("fig34.csv"), &res)?;
        timings.push(("fig34", t.elapsed().as_secs_f64()));
        eprintln!("fig34: {} runs", res.runs.len());
        Some(res)
    } else {
        None
    };
    let fig56 = if wants(Experiment::Fig56) {
        let t = Instant::now();
        let trials = cfg.system.mc_trials;
        let res = pool.install(|| region::run_rate_region(&cfg.system, &cfg.params, seed, trials))?;
        output::write_fig56(&cli.out.join("fig56.csv"), &res)?;
        timings.push(("fig56", t.elapsed().as_secs_f64()));
        eprintln!("fig56: {trials} trials x {} modes", res.curves.len());
        Some(res)
    } else {
        None
    };

    let report = RunReport {
        error_power: fig2.as_ref(),
        convergence: fig34.as_ref(),
        region: fig56.as_ref().map(|r| (r, cfg.system.mc_trials)),
        threads: pool.current_num_threads(),
        timings,
    };
    let text = output::summary(&cfg, seed, &report);
    let path = cli.out.join("summary.txt");
    std::fs::write(&path, &text).map_err(|e| SimError::io(&path, e))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simulate: {e}");
            ExitCode::FAILURE
        }
    }
}
