//! `ibfsi`: coefficient tables, geometry decks, simulation runs, sweeps and
//! swim analysis from the command line.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ibfsi_core::analysis::{average_speed, reynolds, timeseries, SwimRecord};
use ibfsi_core::engine::{read_manifest, read_trace, run};
use ibfsi_core::io::write_timeseries_csv;
use ibfsi_core::kinematics::CubicInterpolant;
use ibfsi_core::scenario::{preset, sweep, write_decks, SWEEPS};
use ibfsi_core::{load_config, ScenarioKind, SimConfig};

#[derive(Parser)]
#[command(
    name = "ibfsi",
    version,
    about = "Spline-driven immersed boundary simulations"
)]
struct Cli {
    /// Default root for generated decks and run directories.
    #[arg(long, global = true, env = "IBFSI_OUTPUT_ROOT", default_value = "runs")]
    output_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the piecewise cubic blend with mediary points p1 < p2.
    Coeffs {
        #[arg(long, allow_negative_numbers = true)]
        p1: f64,
        #[arg(long, allow_negative_numbers = true)]
        p2: f64,
        /// Also write (t, g, g', g'') samples to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Write the geometry and fiber decks of a scenario plus a matching config.
    Gen {
        #[arg(long)]
        scenario: String,
        /// Defaults to <output-root>/decks/<scenario>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one simulation.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// `section.key=value`, applied after the file; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Run directory; defaults to the config's output.dir under the output root.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every point of a named sweep, one directory each.
    Sweep {
        /// A sweep name or a single scenario preset.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Defaults to <output-root>/<scenario>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance and speed series of finished swimmer runs.
    Analyze {
        /// Run directory; repeat to tabulate several runs.
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let root = cli.output_root;
    match cli.command {
        Command::Coeffs {
            p1,
            p2,
            csv,
            samples,
        } => coeffs(p1, p2, csv.as_deref(), samples),
        Command::Gen { scenario, out } => {
            let kind: ScenarioKind = scenario.parse()?;
            let dir = out.unwrap_or_else(|| root.join("decks").join(kind.name()));
            for f in write_decks(&preset(kind), &dir)? {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Run {
            config,
            overrides,
            out,
        } => {
            if !config.is_file() {
                bail!("file not found: {}", config.display());
            }
            let mut cfg = load_config(&config)?;
            apply(&mut cfg, &overrides)?;
            cfg.output_dir = match out {
                Some(dir) => dir,
                None if cfg.output_dir.is_relative() => root.join(&cfg.output_dir),
                None => cfg.output_dir,
            };
            cfg.validate()?;
            let summary = run(&cfg)?;
            log::info!(
                "{} steps, {} dumps in {:.2?}",
                summary.steps,
                summary.dumps,
                summary.wall_time
            );
            println!("{}", summary.output_dir.display());
            Ok(())
        }
        Command::Sweep {
            scenario,
            jobs,
            overrides,
            out,
        } => run_sweep(
            &scenario,
            jobs,
            &overrides,
            out.unwrap_or_else(|| root.join(&scenario)),
        ),
        Command::Analyze { runs } => analyze(&runs),
    }
}

fn apply(cfg: &mut SimConfig, overrides: &[String]) -> Result<()> {
    for o in overrides {
        cfg.apply_override(o)?;
    }
    Ok(())
}

fn coeffs(p1: f64, p2: f64, csv: Option<&Path>, samples: usize) -> Result<()> {
    let g = CubicInterpolant::solve(p1, p2)?;
    let k = g.coefficients();
    let mut out = std::io::stdout().lock();
    writeln!(out, "p1 = {p1}, p2 = {p2}")?;
    writeln!(out, "{:>3} {:>14} {:>14} {:>14}", "j", "a_j", "b_j", "c_j")?;
    for j in 0..4 {
        writeln!(
            out,
            "{j:>3} {:>14.6} {:>14.6} {:>14.6}",
            k[j],
            k[4 + j],
            k[8 + j]
        )?;
    }
    if let Some(path) = csv {
        if samples < 2 {
            bail!("--samples must be at least 2");
        }
        let mut w = String::from("t,g,dg,ddg\n");
        for i in 0..samples {
            let t = i as f64 / (samples - 1) as f64;
            let (v, d, dd) = g.eval_derivs(t)?;
            w.push_str(&format!("{t},{v},{d},{dd}\n"));
        }
        fs::write(path, w).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_sweep(name: &str, jobs: usize, overrides: &[String], root: PathBuf) -> Result<()> {
    let mut points =
        sweep(name, &root).with_context(|| format!("known sweeps: {}", SWEEPS.join(", ")))?;
    for (_, cfg) in &mut points {
        apply(cfg, overrides)?;
        cfg.validate()?;
    }
    let next = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, points.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((label, cfg)) = points.get(i) else {
                    break;
                };
                log::info!("{label}: starting");
                match run(cfg) {
                    Ok(summary) => log::info!("{label}: done in {:.2?}", summary.wall_time),
                    Err(e) => failures.lock().unwrap().push(format!("{label}: {e}")),
                }
            });
        }
    });
    for (_, cfg) in &points {
        println!("{}", cfg.output_dir.display());
    }
    let failures = failures.into_inner().unwrap();
    if !failures.is_empty() {
        bail!(
            "{} sweep point(s) failed:\n{}",
            failures.len(),
            failures.join("\n")
        );
    }
    Ok(())
}

fn analyze(runs: &[PathBuf]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{:<40} {:>8} {:>10} {:>12} {:>12} {:>10}",
        "run", "strokes", "mu", "distance_bl", "avg_bl/str", "Re"
    )?;
    for dir in runs {
        let manifest =
            read_manifest(dir).with_context(|| format!("reading run {}", dir.display()))?;
        let cfg = &manifest.config;
        if cfg.scenario != ScenarioKind::Swimmer {
            bail!(
                "{} is a {} run; analysis needs a swimmer",
                dir.display(),
                cfg.scenario
            );
        }
        let (l, period) = (cfg.body_length, cfg.stroke_period);
        let records: Vec<SwimRecord> = read_trace(dir)?
            .into_iter()
            .map(|r| SwimRecord {
                time: r.time,
                head_x: r.head_x,
                head_y: r.head_y,
            })
            .collect();
        let series = timeseries(&records, l, period)?;
        write_timeseries_csv(dir.join("timeseries.csv"), &series)?;
        let last = series.last().expect("timeseries is never empty");
        let (avg, re) = match average_speed(&records, l, period) {
            Ok(v) => {
                let re = reynolds(cfg.rho, v.abs() * l / period, l, cfg.mu)?;
                (format!("{v:.5}"), format!("{re:.4}"))
            }
            Err(e) => {
                log::warn!("{}: {e}", dir.display());
                ("n/a".into(), "n/a".into())
            }
        };
        writeln!(
            out,
            "{:<40} {:>8.3} {:>10} {:>12.5} {:>12} {:>10}",
            dir.display(),
            last.stroke,
            cfg.mu,
            last.distance_bl,
            avg,
            re
        )?;
    }
    Ok(())
}
