use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use fbm_ergodics::cli::{run_experiment, Experiment, ExperimentConfig, Overrides, RunReport};
use fbm_ergodics::fbm::FbmMethod;
use fbm_ergodics::paths::PathFormat;
use fbm_ergodics::verify::Suite;
use fbm_ergodics::Error;

#[derive(Parser)]
#[command(name = "fbmerg", version, about = "Ergodic toolkit for fBm-driven SDEs")]
struct Cli {
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for ensembles (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<PathFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// fBm sampling and conditional continuation.
    #[command(subcommand)]
    Fbm(FbmCmd),
    /// Pathwise SDE solves.
    #[command(subcommand)]
    Sde(SdeCmd),
    /// Ergodicity diagnostics.
    #[command(subcommand)]
    Ergo(ErgoCmd),
    /// Runs a TOML experiment config; flags override its `[run]` table.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pinned-seed acceptance suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
}

#[derive(Subcommand)]
enum FbmCmd {
    Sample {
        #[arg(long = "h", default_value_t = 0.7)]
        hurst: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long = "d", default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value = "circulant")]
        method: FbmMethod,
        #[command(flatten)]
        out: Out,
    },
    Continue {
        /// CSV window ending at t = 0; a stationary window is drawn when absent.
        #[arg(long)]
        past: Option<PathBuf>,
        #[arg(long = "t", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long = "h", default_value_t = 0.7)]
        hurst: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        dt: f64,
        #[arg(long, default_value_t = 16.0)]
        past_horizon: f64,
        #[arg(long = "d", default_value_t = 1)]
        dim: usize,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Subcommand)]
enum SdeCmd {
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        x0: Point,
        #[arg(long = "h", default_value_t = 0.7)]
        hurst: f64,
        #[arg(long = "t", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        jacobian: bool,
        #[arg(long)]
        inverse: bool,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Subcommand)]
enum ErgoCmd {
    Lyapunov {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "h", default_value_t = 0.7)]
        hurst: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Initial condition; repeat for several.
        #[arg(long = "x0", required = true, allow_hyphen_values = true)]
        x0s: Vec<Point>,
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        dt: f64,
        #[arg(long, default_value_t = 16.0)]
        past_horizon: f64,
    },
    Stationary {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "h", default_value_t = 0.7)]
        hurst: f64,
        #[arg(long, allow_hyphen_values = true)]
        x0: Point,
        #[arg(long = "burn", default_value_t = 50.0)]
        burn_in: f64,
        #[arg(long = "sample", default_value_t = 500.0)]
        sample_horizon: f64,
        #[arg(long, default_value_t = 1.0 / 16.0)]
        dt: f64,
        #[arg(long, default_value_t = 16.0)]
        past_horizon: f64,
        /// Second start: compare the two laws instead of running one chain.
        #[arg(long, allow_hyphen_values = true)]
        compare_with: Option<Point>,
        #[arg(long, default_value_t = 300)]
        replicas: usize,
    },
    StrongFeller {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "h", default_value_t = 0.7)]
        hurst: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: Point,
        #[arg(long, allow_hyphen_values = true)]
        y: Point,
        #[arg(long = "t", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 1.0 / 128.0)]
        dt: f64,
    },
    Bel {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "h", default_value_t = 0.7)]
        hurst: f64,
        /// constant[:c], endpoint[:j] or endpoint-clipped[:K]
        #[arg(long)]
        phi: String,
        #[arg(long, allow_hyphen_values = true)]
        x: Point,
        #[arg(long, allow_hyphen_values = true)]
        xi: Point,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long = "t", default_value_t = 2.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        dt: f64,
        #[arg(long)]
        cutoff: Option<f64>,
    },
    Steer {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        x0: Point,
        #[arg(long, allow_hyphen_values = true)]
        x1: Point,
        #[arg(long = "t", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
    },
    Subcoupling {
        #[arg(long = "h", default_value_t = 0.7)]
        hurst: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        u_center: Point,
        #[arg(long)]
        u_radius: f64,
        #[arg(long, allow_hyphen_values = true)]
        v_center: Point,
        #[arg(long)]
        v_radius: f64,
        #[arg(long, default_value_t = 4096)]
        nodes: usize,
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// scalar, planar, double-well, contraction
    #[arg(long)]
    model: String,
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args)]
struct Out {
    /// Main artifact file name inside the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Comma-separated coordinates, e.g. `1,0`.
#[derive(Clone, Debug)]
struct Point(Vec<f64>);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Point)
    }
}

fn experiment(cmd: Command) -> Result<(ExperimentConfig, Option<PathBuf>), Error> {
    let mut main_out = None;
    let exp = match cmd {
        Command::Run { config } => return Ok((ExperimentConfig::from_file(&config)?, None)),
        Command::Verify { suite } => Experiment::Verify { suite },
        Command::Fbm(FbmCmd::Sample { hurst, n, dt, dim, method, out }) => {
            main_out = out.out;
            Experiment::SampleFbm { hurst, n, dt, dim, method }
        }
        Command::Fbm(FbmCmd::Continue { past, horizon, hurst, dt, past_horizon, dim, out }) => {
            main_out = out.out;
            Experiment::Continue { hurst, past, past_horizon, dt, dim, horizon }
        }
        Command::Sde(SdeCmd::Solve { model, x0, hurst, horizon, dt, jacobian, inverse, out }) => {
            main_out = out.out;
            Experiment::Solve { model: model.model, dim: model.dim, x0: x0.0, hurst, horizon, dt, jacobian, inverse }
        }
        Command::Ergo(cmd) => match cmd {
            ErgoCmd::Lyapunov { model, hurst, p, t, x0s, n, dt, past_horizon } => Experiment::Lyapunov {
                model: model.model,
                dim: model.dim,
                hurst,
                p,
                t,
                x0s: x0s.into_iter().map(|p| p.0).collect(),
                n,
                dt,
                past_horizon,
            },
            ErgoCmd::Stationary {
                model,
                hurst,
                x0,
                burn_in,
                sample_horizon,
                dt,
                past_horizon,
                compare_with,
                replicas,
            } => Experiment::Stationary {
                model: model.model,
                dim: model.dim,
                hurst,
                x0: x0.0,
                burn_in,
                sample_horizon,
                dt,
                past_horizon,
                step: 1.0,
                compare_with: compare_with.map(|p| p.0),
                replicas,
            },
            ErgoCmd::StrongFeller { model, hurst, x, y, horizon, n, dt } => Experiment::StrongFeller {
                model: model.model,
                dim: model.dim,
                hurst,
                x: x.0,
                y: y.0,
                horizon,
                n,
                dt,
                past_horizon: 16.0,
            },
            ErgoCmd::Bel { model, hurst, phi, x, xi, n, horizon, dt, cutoff } => Experiment::Bel {
                model: model.model,
                dim: model.dim,
                hurst,
                phi,
                x: x.0,
                xi: xi.0,
                n,
                horizon,
                dt,
                past_horizon: 16.0,
                cutoff,
            },
            ErgoCmd::Steer { model, x0, x1, horizon, dt } => {
                Experiment::Steer { model: model.model, dim: model.dim, x0: x0.0, x1: x1.0, horizon, dt }
            }
            ErgoCmd::Subcoupling { hurst, s, u_center, u_radius, v_center, v_radius, nodes, epsilon } => {
                Experiment::Subcoupling {
                    hurst,
                    s,
                    u_center: u_center.0,
                    u_radius,
                    v_center: v_center.0,
                    v_radius,
                    nodes,
                    epsilon,
                    past_horizon: 8.0,
                    dt: 1.0 / 64.0,
                }
            }
        },
    };
    Ok((ExperimentConfig::new(exp), main_out))
}

fn print_report(report: &RunReport) {
    for c in &report.checks {
        println!(
            "{} {}: value {:.6e}, bound {:.6e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    for a in &report.artifacts {
        println!("wrote {}", a.display());
    }
    println!("{} checks, {} failed, {:.1}s", report.checks.len(), report.checks.iter().filter(|c| !c.pass).count(), report.timing.wall_seconds);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let overrides = Overrides { seed: cli.seed, out_dir: cli.out_dir, format: cli.format };
    let (mut config, main_out) = match experiment(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    config.apply(&overrides);
    if main_out.is_some() {
        config.run.out = main_out;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run_experiment(&config) {
        Ok(report) => {
            print_report(&report);
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
