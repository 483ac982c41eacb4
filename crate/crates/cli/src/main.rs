use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use kino_cbs::cbs::{solve, PlannerConfig, SolveError};
use kino_cbs::dynamics::{Bounds, MetricWeights};
use kino_cbs::primitives::{generate, PrimitiveSet};
use kino_cbs::scenario_io::{
    load_suite, parse_instance, read_solution, render_svg, run_benchmark, validate_solution, write_solution,
    TrajectorySet, ValidatorTolerances,
};
use kino_cbs::RobotType;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "kino-cbs", version, about = "Anytime multi-robot kinodynamic motion planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan for a scene and write the best solution found.
    Plan {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Planner configuration (YAML). Defaults are used for missing keys.
        #[arg(long)]
        cfg: Option<PathBuf>,
        /// Seconds; overrides the configuration.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check a solution file against a scene.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Generate a motion primitive file.
    GenPrimitives {
        #[arg(long, value_parser = parse_robot)]
        robot: RobotType,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long, default_value_t = 5)]
        min_steps: usize,
        #[arg(long, default_value_t = 15)]
        max_steps: usize,
    },
    /// Run seeded trials over every scene in a directory.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cfg: Option<PathBuf>,
        #[arg(long)]
        time_limit: Option<f64>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        parallelism: Option<usize>,
    },
}

fn parse_robot(s: &str) -> Result<RobotType, String> {
    RobotType::ALL
        .into_iter()
        .find(|rt| rt.name() == s)
        .ok_or_else(|| {
            let names: Vec<_> = RobotType::ALL.iter().map(|rt| rt.name()).collect();
            format!("unknown robot type `{s}`, expected one of {}", names.join(", "))
        })
}

/// Failure classes, mapped to exit codes 1 and 2.
enum Failure {
    Planner(anyhow::Error),
    Input(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<PlannerConfig> {
    let Some(path) = path else {
        return Ok(PlannerConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let cfg: PlannerConfig =
        serde_yaml::from_str(&text).with_context(|| format!("invalid configuration {}", path.display()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn plan(
    input: &Path,
    output: &Path,
    cfg: Option<&Path>,
    time_limit: Option<f64>,
    seed: Option<u64>,
    svg: Option<&Path>,
) -> Result<(), Failure> {
    let instance = parse_instance(input)?;
    let mut config = load_config(cfg)?;
    if let Some(t) = time_limit {
        config.time_limit = t;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    let result = solve(&instance, &config, |e| {
        tracing::info!(
            cost = e.cost,
            iteration = e.iteration,
            delta = e.delta,
            t = e.wall_time,
            "solution"
        );
        true
    });
    let report = match result {
        Ok(r) => r,
        Err(SolveError::NoSolution(r)) => {
            return Err(Failure::Planner(anyhow::anyhow!(
                "no solution within {:.1} s ({} iterations, {} expansions)",
                r.elapsed,
                r.iterations.len(),
                r.expansions()
            )))
        }
        Err(e @ SolveError::Instance(_)) | Err(e @ SolveError::Config(_)) | Err(e @ SolveError::Primitives(_)) => {
            return Err(Failure::Input(e.into()))
        }
    };
    let best = report.best().expect("successful solve has an emission");
    let ts = TrajectorySet::from_emission(best);
    write_solution(&ts, output)?;
    if let Some(svg) = svg {
        render_svg(&instance, Some(&ts), svg).with_context(|| format!("cannot write {}", svg.display()))?;
    }
    println!(
        "cost {:.3} s, first solution after {:.2} s, {} emissions",
        ts.cost,
        report.emissions[0].wall_time,
        report.emissions.len()
    );
    Ok(())
}

fn validate(input: &Path, solution: &Path) -> Result<(), Failure> {
    let instance = parse_instance(input)?;
    let ts = read_solution(solution)?;
    let outcome = validate_solution(&instance, &ts, &ValidatorTolerances::default());
    if outcome.passed() {
        println!(
            "valid: cost {:.3} s, max residual {:.2e}, min margin {:.4}",
            ts.cost, outcome.max_residual, outcome.min_margin
        );
        Ok(())
    } else {
        for f in &outcome.failures {
            println!("{f}");
        }
        Err(Failure::Planner(anyhow::anyhow!("solution is invalid")))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Plan {
            input,
            output,
            cfg,
            time_limit,
            seed,
            svg,
        } => plan(&input, &output, cfg.as_deref(), time_limit, seed, svg.as_deref()),
        Command::Validate { input, solution } => validate(&input, &solution),
        Command::GenPrimitives {
            robot,
            count,
            out,
            seed,
            dt,
            min_steps,
            max_steps,
        } => {
            let bounds = Bounds::default_for(robot);
            let prims = generate(robot, &bounds, dt, count, (min_steps, max_steps), seed)?;
            PrimitiveSet::new(robot, dt, MetricWeights::default_for(robot), prims).save(&out)?;
            println!("wrote {count} {} primitives to {}", robot.name(), out.display());
            Ok(())
        }
        Command::Bench {
            suite,
            trials,
            out,
            cfg,
            time_limit,
            parallelism,
        } => {
            let instances = load_suite(&suite)?;
            let mut config = load_config(cfg.as_deref())?;
            if let Some(t) = time_limit {
                config.time_limit = t;
            }
            config.validate()?;
            let threads = parallelism
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let report = run_benchmark(&instances, trials, &config, threads).map_err(anyhow::Error::msg)?;
            let file = fs::File::create(&out).with_context(|| format!("cannot write {}", out.display()))?;
            report.write_csv(file)?;
            for s in report.summaries() {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
                println!(
                    "{:<32} p={:.2} t={} J={}",
                    s.instance,
                    s.p,
                    fmt(s.median_t),
                    fmt(s.median_j)
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let filter = EnvFilter::try_from_env("KINO_CBS_LOG").unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Planner(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
