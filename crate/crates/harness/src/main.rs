use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rescon::config::parse_acceptance;
use rescon::{
    emit_outputs, run_hindsight_comparison, run_random_edge_comparison, run_scenario,
    ExperimentConfig, ExperimentResults, HarnessError, Result,
};
use rescon_core::confgen::{configuration_for, generate_with_escalation};
use rescon_core::formation::{grid_formation, synthesize};
use rescon_core::geometry::NeighborDistanceMatrix;
use rescon_core::{Configuration, Formation64, ResourceMatrix, Topology};

#[derive(Parser)]
#[command(
    name = "rescon",
    version,
    about = "Resilient multi-robot reconfiguration experiments"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration file (key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Trials per setting (graphs per p_r, or sequences per team size).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Density bins for the random-edge comparison.
    #[arg(long, global = true)]
    bins: Option<usize>,
    /// Annealing iterations.
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    max_restarts: Option<usize>,
    /// `metropolis` or `temperature_product`.
    #[arg(long, global = true)]
    acceptance: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Choose a new topology and edge weights after a resource failure.
    Reconfigure {
        /// Current topology as a 1-indexed edge list.
        #[arg(long)]
        topology: PathBuf,
        /// Resource matrix after the failure ("rows cols" header, then rows).
        #[arg(long)]
        resources: PathBuf,
        #[arg(long, default_value_t = 1)]
        threshold: usize,
    },
    /// Place robots in 3-D to match a neighborhood distance matrix.
    Synthesize {
        #[arg(long)]
        topology: PathBuf,
        /// Distance matrix; `inf` marks non-neighbors.
        #[arg(long)]
        distances: PathBuf,
        /// Starting formation, one `x y z` line per robot. Defaults to a grid.
        #[arg(long)]
        initial: Option<PathBuf>,
    },
    /// Failure sequence on a line-graph team with formation synthesis.
    Scenario,
    /// Δ_V against the random-edge strategy, binned by edge density.
    CompareRandom,
    /// Hindsight inefficacy against the hindsight-optimized strategy.
    CompareHindsight,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &g.out {
        cfg.out_dir.clone_from(out);
    }
    if let Some(trials) = g.trials {
        match cli.command {
            Command::CompareHindsight => cfg.hindsight_trials = trials,
            _ => cfg.random_trials = trials,
        }
    }
    if let Some(bins) = g.bins {
        cfg.bins = bins;
    }
    if let Some(steps) = g.steps {
        cfg.anneal.steps = steps;
    }
    if let Some(r) = g.max_restarts {
        cfg.anneal.max_restarts = r;
    }
    if let Some(rule) = &g.acceptance {
        cfg.anneal.acceptance = parse_acceptance(rule)?;
    }
    cfg.anneal.seed = cfg.seed;
    cfg.validate()?;
    Ok(cfg)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Reconfigure {
            topology,
            resources,
            threshold,
        } => {
            let gamma = rescon_core::Matrix::<u8>::from_text(&read(resources)?)?;
            let resources = ResourceMatrix::new(gamma, *threshold)?;
            let topo = Topology::from_edge_list(&read(topology)?, Some(resources.robots()))?;
            let prev = configuration_for(&topo, &resources, &cfg.geometry)?;
            let (out, escalations) =
                generate_with_escalation(&prev, &resources, &cfg.geometry, &cfg.limits)?;
            fs::create_dir_all(&cfg.out_dir)?;
            let c = &out.configuration;
            fs::write(cfg.out_dir.join("topology.txt"), c.topology.to_edge_list())?;
            fs::write(cfg.out_dir.join("distances.txt"), c.distances.to_text())?;
            fs::write(
                cfg.out_dir.join("laplacian.txt"),
                out.laplacian.matrix().to_text(),
            )?;
            fs::write(
                cfg.out_dir.join("reconfigure.json"),
                serde_json::to_string_pretty(&out)? + "\n",
            )?;
            println!(
                "toggled {:?}; inefficacy {} -> {}; trace {}; budget {} ({} escalations)",
                out.toggled_edges
                    .iter()
                    .map(|(i, j)| (i + 1, j + 1))
                    .collect::<Vec<_>>(),
                out.inefficacy_before,
                out.inefficacy_after,
                out.trace,
                out.budget,
                escalations
            );
        }
        Command::Synthesize {
            topology,
            distances,
            initial,
        } => {
            let d = NeighborDistanceMatrix::<f64>::from_text(&read(distances)?)?;
            let n = d.n();
            let topo = Topology::from_edge_list(&read(topology)?, Some(n))?;
            // synthesis ignores resources
            let config = Configuration::new(topo, d, ResourceMatrix::full(n, 1, 1))?;
            let start = match initial {
                Some(p) => Formation64::from_text(&read(p)?)?,
                None => grid_formation(config.n(), &cfg.geometry)?,
            };
            let out = synthesize(&start, &config, &cfg.geometry, &cfg.anneal)?;
            fs::create_dir_all(&cfg.out_dir)?;
            fs::write(cfg.out_dir.join("formation.txt"), out.formation.to_text())?;
            fs::write(
                cfg.out_dir.join("synthesis.json"),
                serde_json::to_string_pretty(&out.report)? + "\n",
            )?;
            println!(
                "feasible after {} restarts; stress {}; worst margin {}",
                out.restarts,
                out.stress,
                out.report.worst_margin()
            );
        }
        Command::Scenario => {
            let result = run_scenario(&cfg)?;
            report(&emit_outputs(
                &ExperimentResults::Scenario(&result),
                &cfg.out_dir,
            )?);
            println!(
                "{} failures, {} synthesis failures",
                result.trace.steps.len(),
                result.synthesis_failures()
            );
            if let Some(f) = result.formations.iter().find(|f| !f.feasible) {
                return Err(rescon_core::Error::SynthesisFailed {
                    attempts: cfg.anneal.max_restarts + 1,
                    best: Box::new(f.report.clone()),
                }
                .into());
            }
        }
        Command::CompareRandom => {
            let result = run_random_edge_comparison(&cfg)?;
            report(&emit_outputs(
                &ExperimentResults::RandomEdge(&result),
                &cfg.out_dir,
            )?);
            for s in &result.series {
                println!(
                    "p_r = {}: {:.0}% of occupied bins favor our strategy",
                    s.p_r,
                    100.0 * s.positive_fraction()
                );
            }
        }
        Command::CompareHindsight => {
            let result = run_hindsight_comparison(&cfg)?;
            report(&emit_outputs(
                &ExperimentResults::Hindsight(&result),
                &cfg.out_dir,
            )?);
            println!(
                "dominance held in {} of {} same-parent checks",
                result.dominance_checks() - result.dominance_violations(),
                result.dominance_checks()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
