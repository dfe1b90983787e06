//! Command-line front end: configuration, orchestration and reporting.
//!
//! Exit codes: 0 when every expected-pass check passed and every negative
//! control failed as designed, 2 for configuration/schema errors, 3 for
//! internal errors.

mod plot;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use run::{CheckGroup, RunConfig};
use stackel::flow::{default_initial, integrate, IntegrateOpts, SprayKind};
use stackel::systems::SystemKind;

#[derive(Parser)]
#[command(
    name = "stackel",
    version,
    about = "Exact verification of three integrable systems on the sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Sphere dimension n (the number of semi-axes is n + 1).
    #[arg(short = 'n', long)]
    n: usize,
    /// Comma-separated semi-axes as exact rationals, e.g. `1,2,4,7` or `1/2,3/2,5`.
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<String>>,
    /// Seed for every sampled point and test function.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Flow tolerance (also sets the conservation thresholds).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Sample count for pointwise exact checks.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Systems to verify (default: all three).
    #[arg(long, value_delimiter = ',')]
    systems: Option<Vec<String>>,
    /// Output directory for report.json / report.md.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification checks and write report.json / report.md.
    Verify {
        #[command(flatten)]
        config: ConfigArgs,
        /// Run every check group.
        #[arg(long)]
        all: bool,
        /// Subset of {classical, stackel, curvature, quantum, flow, projective}.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
    /// Integrate one geodesic flow and export a CSV trajectory.
    Simulate {
        /// `jacobi-moser` (g1 flow) or `dual-moser` (g2 flow).
        #[arg(long)]
        system: String,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<String>>,
        /// Integration horizon.
        #[arg(short = 'T', long = "duration", default_value_t = 10.0)]
        duration: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Number of CSV samples.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// CSV output path.
        #[arg(long)]
        csv: PathBuf,
    },
    /// Quantum-integrability verdicts only.
    Quantum {
        /// System to report on (default: all three).
        #[arg(long)]
        system: Option<String>,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<String>>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Chart points per verdict.
        #[arg(long, default_value_t = 10)]
        points: usize,
        /// Test functions per point.
        #[arg(long, default_value_t = 5)]
        testfns: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Render drift and trace images from a trajectory CSV.
    Plot {
        csv: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(run::CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(run::CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, run::CliError> {
    match cli.command {
        Command::Verify {
            config,
            all,
            checks,
        } => {
            let groups = match checks {
                None => CheckGroup::ALL.to_vec(),
                Some(_) if all => CheckGroup::ALL.to_vec(),
                Some(list) => list
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(run::CliError::Config)?,
            };
            let cfg = RunConfig::build(&config, groups)?;
            let report = run::execute(&cfg)?;
            run::write_reports(&cfg, &report)?;
            println!("{}", run::summary_line(&report));
            Ok(if report.all_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Simulate {
            system,
            n,
            a,
            duration,
            tol,
            samples,
            seed,
            csv,
        } => {
            let kind = match system.parse::<SystemKind>() {
                Ok(SystemKind::JacobiMoser) => SprayKind::G1,
                Ok(SystemKind::DualMoser) => SprayKind::G2,
                Ok(SystemKind::NeumannUhlenbeck) => {
                    return Err(run::CliError::Config(
                        "the Neumann-Uhlenbeck system has no geodesic flow here; choose jacobi-moser or dual-moser".into(),
                    ))
                }
                Err(e) => return Err(run::CliError::Config(e.to_string())),
            };
            let axes = run::parse_axes(n, a.as_deref())?;
            let af: Vec<f64> = axes
                .values()
                .iter()
                .map(stackel::scalar::rat_to_f64)
                .collect();
            let (q, d) = default_initial(n + 1, seed);
            let opts = IntegrateOpts {
                t_end: duration,
                tol,
                samples,
            };
            let traj = integrate(kind, &af, &q, &d, &opts)
                .map_err(|e| run::CliError::Internal(e.to_string()))?;
            traj.write_csv_file(&csv)
                .map_err(|e| run::CliError::Internal(e.to_string()))?;
            let drift = traj.relative_drift();
            println!("wrote {} samples to {}", traj.states.len(), csv.display());
            for (label, d) in traj.integral_labels().iter().zip(&drift) {
                println!("  {label:<4} relative drift {d:.3e}");
            }
            let worst = drift.iter().cloned().fold(0.0, f64::max);
            let threshold = (tol * 100.0).max(1e-8);
            println!("  max drift {worst:.3e} (threshold {threshold:.1e})");
            Ok(if worst <= threshold {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Quantum {
            system,
            n,
            a,
            seed,
            points,
            testfns,
            out,
        } => {
            let config = ConfigArgs {
                n,
                a,
                seed,
                tol: 1e-10,
                samples: points,
                systems: system.map(|s| vec![s]),
                out,
            };
            let mut cfg = RunConfig::build(&config, vec![CheckGroup::Quantum])?;
            cfg.testfns = testfns;
            let report = run::execute(&cfg)?;
            run::write_reports(&cfg, &report)?;
            println!("{}", run::summary_line(&report));
            Ok(if report.all_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Plot { csv, out_dir } => match plot::render(&csv, &out_dir) {
            Ok(paths) => {
                for p in paths {
                    println!("wrote {}", p.display());
                }
                Ok(ExitCode::SUCCESS)
            }
            Err(plot::PlotError::Malformed(msg)) => Err(run::CliError::Config(msg)),
            Err(plot::PlotError::Io(e)) => Err(run::CliError::Internal(e.to_string())),
        },
    }
}
