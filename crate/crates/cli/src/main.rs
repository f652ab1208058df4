//! Command-line front end: layer-operator tables, full and effective
//! solves, eigenvalue and steady-state queries, thickness sweeps and
//! long-horizon comparisons.
//!
//! Exit codes: 0 on success, 2 on parameter or invariant problems, 3 on
//! numerical solver failures.

use clap::{Parser, Subcommand, ValueEnum};
use ebc_core::coated::CoatedSolver;
use ebc_core::config::RunConfig;
use ebc_core::dtn::{Depth, DtnOperator};
use ebc_core::effective::EffectiveSolver;
use ebc_core::eigen;
use ebc_core::field::{ModalField, Region};
use ebc_core::harness::{self, RegimeCell};
use ebc_core::steady::{self, SteadyState};
use ebc_core::surface::{SurfaceKind, SurfaceSpectrum};
use ebc_core::{Error, Trajectory};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

fn parse_cells(spec: &str) -> Result<Vec<&'static RegimeCell>, Error> {
    if spec.trim() == "all" {
        return Ok(harness::all_cells().iter().collect());
    }
    spec.split(',')
        .map(|id| harness::cell_by_id(id.trim()))
        .collect()
}

fn parse_deltas(spec: &str) -> Result<Vec<f64>, Error> {
    spec.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse thickness '{part}'")))
        })
        .collect()
}

#[derive(Parser)]
#[command(
    name = "ebc",
    version,
    about = "thin-coating effective boundary condition toolkit"
)]
struct Cli {
    /// JSON run configuration (defaults apply when omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for generated files
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads for concurrent runs (0 = automatic)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Coated,
    Effective,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the per-mode layer-operator multiplier table as CSV
    DtnTable {
        #[arg(long, value_enum, default_value = "sphere")]
        geometry: GeometryArg,
        #[arg(long = "R1", default_value_t = 1.0)]
        r1: f64,
        #[arg(long = "L", default_value_t = 32)]
        modes: i64,
        /// Layer depth: a positive number or "inf"
        #[arg(long = "h", default_value = "inf")]
        depth: String,
    },
    /// Solve the full coated problem from a config file
    SolveFull,
    /// Solve the effective problem from a config file
    SolveEffective,
    /// Principal eigenpair of the coated or effective operator
    Eigen {
        #[arg(long, value_enum)]
        problem: Problem,
    },
    /// Steady-state existence, profile and residual
    Steady {
        #[arg(long, value_enum)]
        problem: Problem,
    },
    /// Thickness sweep over regime cells
    Sweep {
        /// "all" or a comma-separated list of cell ids
        #[arg(long, default_value = "all")]
        cells: String,
        /// Comma-separated strictly decreasing thickness list
        #[arg(long, default_value = "0.1,0.05,0.025,0.0125")]
        deltas: String,
    },
    /// Long-horizon coated/effective comparison for one cell
    Lifespan {
        #[arg(long)]
        cell: String,
        #[arg(long, default_value_t = 0.0125)]
        delta: f64,
        #[arg(long = "t-long", default_value_t = 50.0)]
        t_long: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Sphere,
    Circle,
}

impl From<GeometryArg> for SurfaceKind {
    fn from(value: GeometryArg) -> Self {
        match value {
            GeometryArg::Sphere => SurfaceKind::Sphere,
            GeometryArg::Circle => SurfaceKind::Circle,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // ignore re-initialisation: the pool is process-global
        let _ = ebc_core::configure_threads(cli.threads);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    match &cli.config {
        Some(path) => RunConfig::from_path(path),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::DtnTable {
            geometry,
            r1,
            modes,
            depth,
        } => {
            if *modes < 0 {
                return Err(Error::InvalidParameter(format!(
                    "mode count must be nonnegative, got {modes}"
                )));
            }
            let spectrum = SurfaceSpectrum::build((*geometry).into(), *r1, *modes as usize)?;
            let depth: Depth = depth.parse()?;
            let op = DtnOperator::build(&spectrum, depth)?;
            let mut csv = String::from("mode,lambda,multiplier\n");
            for (n, (lambda, m)) in spectrum
                .eigenvalues()
                .iter()
                .zip(op.multipliers())
                .enumerate()
            {
                csv.push_str(&format!("{n},{lambda},{m}\n"));
            }
            write_artifact(&cli.out, "dtn_table.csv", &csv)?;
            Ok(())
        }
        Command::SolveFull => {
            let cfg = load_config(cli)?;
            let solver = build_coated(&cfg)?;
            let preset = cfg.parse_u0()?;
            let u0 = solver.state_from_samples(preset.sampler(solver.grid().outer_radius()))?;
            let samples = cfg.sample_grid()?;
            let traj = solver.solve(u0, cfg.dt, &samples, cfg.reaction)?;
            write_trajectory(&cli.out, &cfg, &traj, "full")
        }
        Command::SolveEffective => {
            let cfg = load_config(cli)?;
            let solver = build_effective(&cfg)?;
            let preset = cfg.parse_u0()?;
            let v0 = solver.state_from_samples(preset.sampler(solver.grid().r1()))?;
            let samples = cfg.sample_grid()?;
            let traj = solver.solve(v0, cfg.dt, &samples, cfg.reaction)?;
            write_trajectory(&cli.out, &cfg, &traj, "effective")
        }
        Command::Eigen { problem } => {
            let cfg = load_config(cli)?;
            let pair = match problem {
                Problem::Coated => eigen::principal_eigen_coated(&build_coated(&cfg)?)?,
                Problem::Effective => eigen::principal_eigen_effective(&build_effective(&cfg)?)?,
            };
            let summary = serde_json::json!({
                "lambda": pair.lambda,
                "residual": pair.residual,
                "mode": pair.mode,
                "iterations": pair.iterations,
            });
            println!("{summary}");
            write_profile(&cli.out, "eigenfunction.csv", &pair.field, pair.mode)?;
            let _ = write_artifact(
                &cli.out,
                "eigen.json",
                &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
            );
            Ok(())
        }
        Command::Steady { problem } => {
            let cfg = load_config(cli)?;
            let state = match problem {
                Problem::Coated => steady::steady_coated(&build_coated(&cfg)?)?,
                Problem::Effective => steady::steady_effective(&build_effective(&cfg)?)?,
            };
            let summary = steady_summary(&state);
            println!("{summary}");
            if let Some(profile) = &state.profile {
                write_profile(&cli.out, "steady_profile.csv", profile, 0)?;
            }
            let _ = write_artifact(
                &cli.out,
                "steady.json",
                &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
            );
            Ok(())
        }
        Command::Sweep { cells, deltas } => {
            let cfg = load_config(cli)?;
            let cells = parse_cells(cells)?;
            let deltas = parse_deltas(deltas)?;
            let outcomes = harness::sweep_cells(&cfg, &cells, &deltas);
            let mut records = Vec::new();
            let mut failure: Option<Error> = None;
            for outcome in outcomes {
                records.extend(outcome.records);
                if failure.is_none() {
                    failure = outcome.failure;
                }
            }
            if !records.is_empty() {
                let manifest = serde_json::json!({
                    "tool_version": env!("CARGO_PKG_VERSION"),
                    "config": cfg.to_json(),
                    "cells": cells.iter().map(|c| c.id).collect::<Vec<_>>(),
                    "deltas": deltas,
                    "records": records,
                });
                let (csv_path, manifest_path) =
                    harness::emit_report(&records, &manifest, &cli.out)?;
                println!(
                    "wrote {} and {}",
                    csv_path.display(),
                    manifest_path.display()
                );
            }
            match failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Lifespan {
            cell,
            delta,
            t_long,
        } => {
            let cfg = load_config(cli)?;
            let cell = harness::cell_by_id(cell)?;
            let record = harness::lifespan_run(&cfg, cell, *delta, *t_long)?;
            let manifest = serde_json::json!({
                "tool_version": env!("CARGO_PKG_VERSION"),
                "config": cfg.to_json(),
                "record": record,
            });
            let (csv_path, manifest_path) = harness::emit_report_as(
                std::slice::from_ref(&record.record),
                &manifest,
                &cli.out,
                "lifespan",
            )?;
            println!(
                "sup_error {} terminal_error {} steady_gap {} u_gap {} v_gap {}",
                record.record.sup_error,
                record.record.terminal_error,
                record.record.steady_gap,
                record.u_steady_gap,
                record.v_steady_gap
            );
            println!(
                "wrote {} and {}",
                csv_path.display(),
                manifest_path.display()
            );
            Ok(())
        }
    }
}

fn build_coated(cfg: &RunConfig) -> Result<CoatedSolver, Error> {
    CoatedSolver::new(
        cfg.build_spectrum()?,
        cfg.coating_spec()?,
        cfg.nb,
        cfg.nc,
        cfg.theta,
    )
}

fn build_effective(cfg: &RunConfig) -> Result<EffectiveSolver, Error> {
    EffectiveSolver::new(
        cfg.build_spectrum()?,
        cfg.parse_ebc()?,
        cfg.k,
        cfg.nb,
        cfg.theta,
    )
}

fn steady_summary(state: &SteadyState) -> serde_json::Value {
    serde_json::json!({
        "exists": match state.existence {
            steady::Existence::Exists => serde_json::json!(true),
            steady::Existence::Absent => serde_json::json!(false),
            steady::Existence::Indeterminate => serde_json::json!("indeterminate"),
        },
        "lambda1": state.lambda1,
        "residual": state.residual,
        "probe_norm": state.probe_norm,
    })
}

/// CSV rows (t, l, rho, value) for every sampled state plus a manifest
/// with the configuration and per-sample norms.
fn write_trajectory(
    out: &Path,
    cfg: &RunConfig,
    traj: &Trajectory,
    label: &str,
) -> Result<(), Error> {
    let mut csv = String::from("t,l,rho,value\n");
    for (state, &t) in traj.states.iter().zip(&traj.times) {
        let grid = state.grid();
        for l in 0..state.mode_len() {
            for j in 0..grid.len() {
                csv.push_str(&format!(
                    "{t},{l},{},{}\n",
                    grid.node(j),
                    state.amplitude(l, j)
                ));
            }
        }
    }
    let csv_name = format!("solution_{label}.csv");
    write_artifact(out, &csv_name, &csv)?;
    let norms: Vec<serde_json::Value> = traj
        .states
        .iter()
        .zip(&traj.times)
        .map(|(state, &t)| {
            serde_json::json!({
                "t": t,
                "l2_all": state.l2_norm(Region::All),
                "l2_bulk": state.l2_norm(Region::Bulk),
            })
        })
        .collect();
    let manifest = serde_json::json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "problem": label,
        "config": cfg.to_json(),
        "norms": norms,
    });
    write_artifact(
        out,
        &format!("manifest_{label}.json"),
        &format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()),
    )?;
    println!(
        "wrote {} and manifest_{label}.json in {}",
        csv_name,
        out.display()
    );
    Ok(())
}

/// Radial profile of one mode as CSV (rho, amplitude).
fn write_profile(out: &Path, name: &str, field: &ModalField, mode: usize) -> Result<(), Error> {
    let mut csv = String::from("rho,value\n");
    let grid = field.grid();
    for j in 0..grid.len() {
        csv.push_str(&format!("{},{}\n", grid.node(j), field.amplitude(mode, j)));
    }
    write_artifact(out, name, &csv)
}

fn write_artifact(out: &Path, name: &str, contents: &str) -> Result<(), Error> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(name), contents)?;
    Ok(())
}
