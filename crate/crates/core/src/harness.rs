//! Regime families of the coating limits, thickness sweeps comparing the
//! coated and effective solvers, long-horizon comparisons against the
//! steady states, and machine-readable reports.
//!
//! The nine regime cells are indexed by the limits of σ/δ (columns) and of
//! the conductivity product σμ (rows). Each cell fixes a concrete power-law
//! family σ = δ^p, μ = δ^q realising its limits, so the classification can
//! be verified by exponent arithmetic alone.

use crate::coated::{CoatedSolver, CoatingSpec};
use crate::config::{geometric_samples, RunConfig};
use crate::dtn::Depth;
use crate::effective::{EbcKind, EffectiveSolver};
use crate::field::{ModalField, Region};
use crate::march::{Marcher, PrincipleBounds, Reaction, Trajectory};
use crate::steady::{self, SteadyState};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Nominal limit values used by the power-law families.
pub const NOMINAL_ALPHA: f64 = 1.0;
pub const NOMINAL_GAMMA: f64 = 1.0;

/// Limit classification of a positive power-law quantity as δ → 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitClass {
    Zero,
    Finite,
    Infinite,
}

/// One cell of the regime table: a power-law family (σ, μ)(δ) together
/// with its classified limits.
#[derive(Debug, Clone, Copy)]
pub struct RegimeCell {
    pub id: &'static str,
    /// σ = δ^sigma_exponent
    pub sigma_exponent: f64,
    /// μ = δ^mu_exponent
    pub mu_exponent: f64,
    /// limit of σ/δ
    pub ratio: LimitClass,
    /// limit of σμ
    pub product: LimitClass,
}

/// The nine cells, grouped row-wise by the σμ limit.
// Exponent choices: the limits only constrain signs, so within each cell
// the family is picked to sit inside its asymptotic regime over the
// default thickness list 0.1..0.0125. On the pinned-value column the
// supremum is dominated by the early enforcement transient, which scales
// like δ^((1-p)/2) for σ = δ^p, so σ = δ^¼ rather than δ^½; the
// constant-trace column needs strongly diverging tangent conductivities
// for the analogous reason.
#[rustfmt::skip]
pub const CELLS: [RegimeCell; 9] = [
    RegimeCell { id: "a0-g0", sigma_exponent: 2.0, mu_exponent: 0.0, ratio: LimitClass::Zero, product: LimitClass::Zero },
    RegimeCell { id: "a1-g0", sigma_exponent: 1.0, mu_exponent: 1.0, ratio: LimitClass::Finite, product: LimitClass::Zero },
    RegimeCell { id: "ainf-g0", sigma_exponent: 0.25, mu_exponent: 1.0, ratio: LimitClass::Infinite, product: LimitClass::Zero },
    RegimeCell { id: "a0-g1", sigma_exponent: 2.0, mu_exponent: -2.0, ratio: LimitClass::Zero, product: LimitClass::Finite },
    RegimeCell { id: "a1-g1", sigma_exponent: 1.0, mu_exponent: -1.0, ratio: LimitClass::Finite, product: LimitClass::Finite },
    RegimeCell { id: "ainf-g1", sigma_exponent: 0.25, mu_exponent: -0.25, ratio: LimitClass::Infinite, product: LimitClass::Finite },
    RegimeCell { id: "a0-ginf", sigma_exponent: 2.0, mu_exponent: -3.0, ratio: LimitClass::Zero, product: LimitClass::Infinite },
    RegimeCell { id: "a1-ginf", sigma_exponent: 1.0, mu_exponent: -3.0, ratio: LimitClass::Finite, product: LimitClass::Infinite },
    RegimeCell { id: "ainf-ginf", sigma_exponent: 0.25, mu_exponent: -1.0, ratio: LimitClass::Infinite, product: LimitClass::Infinite },
];

pub fn all_cells() -> &'static [RegimeCell; 9] {
    &CELLS
}

pub fn cell_by_id(id: &str) -> Result<&'static RegimeCell> {
    CELLS
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown regime cell '{id}'")))
}

impl RegimeCell {
    /// The effective boundary condition this family converges to.
    pub fn target_ebc(&self) -> EbcKind {
        match (self.ratio, self.product) {
            (LimitClass::Infinite, _) => EbcKind::Dirichlet,
            (LimitClass::Zero, LimitClass::Zero) => EbcKind::Neumann,
            (LimitClass::Finite, LimitClass::Zero) => EbcKind::Robin {
                alpha: NOMINAL_ALPHA,
            },
            (LimitClass::Zero, LimitClass::Finite) => EbcKind::DtnRobin {
                gamma: NOMINAL_GAMMA,
                depth: Depth::Infinite,
            },
            (LimitClass::Finite, LimitClass::Finite) => EbcKind::DtnRobin {
                gamma: NOMINAL_GAMMA,
                depth: Depth::Finite(NOMINAL_GAMMA / NOMINAL_ALPHA),
            },
            (LimitClass::Zero, LimitClass::Infinite) => EbcKind::ConstTraceZeroFlux,
            (LimitClass::Finite, LimitClass::Infinite) => EbcKind::ConstTraceRobin {
                alpha: NOMINAL_ALPHA,
            },
        }
    }
}

/// Concrete family parameters at one thickness.
#[derive(Debug, Clone, Copy)]
pub struct RegimeParams {
    pub sigma: f64,
    pub mu: f64,
    pub ebc: EbcKind,
}

pub fn regime_family(cell: &RegimeCell, delta: f64) -> Result<RegimeParams> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "thickness must be positive, got {delta}"
        )));
    }
    Ok(RegimeParams {
        sigma: delta.powf(cell.sigma_exponent),
        mu: delta.powf(cell.mu_exponent),
        ebc: cell.target_ebc(),
    })
}

/// Rescaled layer depth h = δ √(μ/σ) of a coating family.
pub fn layer_depth(sigma: f64, mu: f64, delta: f64) -> f64 {
    delta * (mu / sigma).sqrt()
}

/// Outcome of one coated-vs-effective comparison run.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRecord {
    pub cell: String,
    pub delta: f64,
    pub sigma: f64,
    pub mu: f64,
    /// max over sample times of the bulk L² distance between the solvers
    pub sup_error: f64,
    /// bulk L² distance at the final sample time
    pub terminal_error: f64,
    /// ‖U - V‖ between the steady states (absent states count as zero)
    pub steady_gap: f64,
    pub wall_time: f64,
}

/// Long-horizon record: the sweep data plus the distances of both terminal
/// states from their steady states.
#[derive(Debug, Clone, Serialize)]
pub struct LifespanRecord {
    #[serde(flatten)]
    pub record: ConvergenceRecord,
    /// ‖u(T) - U‖ on the bulk
    pub u_steady_gap: f64,
    /// ‖v(T) - V‖
    pub v_steady_gap: f64,
    /// (t, bulk error) at every sample
    pub sample_errors: Vec<(f64, f64)>,
}

/// Coated/effective solver pair for a cell at one thickness.
pub fn build_pair(
    cfg: &RunConfig,
    cell: &RegimeCell,
    delta: f64,
) -> Result<(CoatedSolver, EffectiveSolver)> {
    let params = regime_family(cell, delta)?;
    let spectrum = cfg.build_spectrum()?;
    let spec = CoatingSpec {
        diffusivity: cfg.k,
        normal_conductivity: params.sigma,
        tangent_conductivity: params.mu,
        thickness: delta,
    };
    let coated = CoatedSolver::new(spectrum.clone(), spec, cfg.nb, cfg.nc, cfg.theta)?;
    let effective = EffectiveSolver::new(spectrum, params.ebc, cfg.k, cfg.nb, cfg.theta)?;
    Ok((coated, effective))
}

/// March both solvers in lockstep from shared initial data and record the
/// bulk L² distance at t = 0 and after every step up to `t_end`. Both
/// states are checked against their maximum-principle bounds at every
/// recorded time, so the sampled sup is the full discrete-time sup with
/// its first positive sample at t = dt.
pub fn compare_marches(
    coated: &CoatedSolver,
    effective: &EffectiveSolver,
    u0: ModalField,
    v0: ModalField,
    dt: f64,
    t_end: f64,
    reaction: Reaction,
) -> Result<Vec<(f64, f64)>> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time parameters must be positive, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let bounds_u = PrincipleBounds::from_initial(&u0, coated.spectrum(), reaction)?;
    let bounds_v = PrincipleBounds::from_initial(&v0, effective.spectrum(), reaction)?;
    let bulk_error = |u: &ModalField, v: &ModalField| -> Result<f64> {
        Ok(u.bulk_restriction().difference(v)?.l2_norm(Region::All))
    };
    let mut errors = Vec::new();
    errors.push((0.0, bulk_error(&u0, &v0)?));
    let mut u = u0;
    let mut v = v0;
    coated.pin(&mut u);
    effective.pin(&mut v);
    let marcher_u = Marcher::new(coated.spectrum(), coated.operators(), dt, coated.theta())?;
    let marcher_v = Marcher::new(
        effective.spectrum(),
        effective.operators(),
        dt,
        effective.theta(),
    )?;
    let steps = (t_end / dt).round() as usize;
    let mut scratch = Vec::new();
    for step in 1..=steps {
        let t = step as f64 * dt;
        marcher_u.advance(coated.operators(), &mut u, reaction, &mut scratch)?;
        marcher_v.advance(effective.operators(), &mut v, reaction, &mut scratch)?;
        bounds_u.check(&u, coated.spectrum(), t)?;
        bounds_v.check(&v, effective.spectrum(), t)?;
        errors.push((t, bulk_error(&u, &v)?));
    }
    Ok(errors)
}

/// Per-sample bulk L² distances between two trajectories on matching
/// sample grids.
pub fn trajectory_errors(coated: &Trajectory, effective: &Trajectory) -> Result<Vec<(f64, f64)>> {
    if coated.times.len() != effective.times.len() {
        return Err(Error::SizeMismatch {
            expected: coated.times.len(),
            got: effective.times.len(),
        });
    }
    coated
        .states
        .iter()
        .zip(&effective.states)
        .zip(&coated.times)
        .map(|((u, v), &t)| {
            let diff = u.bulk_restriction().difference(v)?;
            Ok((t, diff.l2_norm(Region::All)))
        })
        .collect()
}

fn sup_error(errors: &[(f64, f64)]) -> f64 {
    errors.iter().map(|(_, e)| *e).fold(0.0, f64::max)
}

/// Distance of a bulk state from an optional steady profile (absent
/// profiles count as zero).
fn distance_to_steady(state: &ModalField, steady: &SteadyState) -> Result<f64> {
    match &steady.profile {
        Some(profile) => {
            let diff = state.difference(&profile.bulk_restriction())?;
            Ok(diff.l2_norm(Region::All))
        }
        None => Ok(state.l2_norm(Region::All)),
    }
}

/// Run one (cell, δ) comparison with the configured initial preset and
/// reaction. The error is recorded after every step, so the sup is the
/// discrete-time supremum over [0, T].
pub fn run_cell_delta(cfg: &RunConfig, cell: &RegimeCell, delta: f64) -> Result<ConvergenceRecord> {
    let started = Instant::now();
    let (coated, effective) = build_pair(cfg, cell, delta)?;
    let params = regime_family(cell, delta)?;
    let preset = cfg.parse_u0()?;
    let u0 = coated.state_from_samples(preset.sampler(coated.grid().outer_radius()))?;
    let v0 = effective.restrict_initial(&u0)?;
    let errors = compare_marches(&coated, &effective, u0, v0, cfg.dt, cfg.t_end, cfg.reaction)?;
    let steady_u = steady::steady_coated(&coated)?;
    let steady_v = steady::steady_effective(&effective)?;
    let gap = steady::steady_gap(&steady_u, &steady_v)?;
    Ok(ConvergenceRecord {
        cell: cell.id.to_string(),
        delta,
        sigma: params.sigma,
        mu: params.mu,
        sup_error: sup_error(&errors),
        terminal_error: errors.last().map(|(_, e)| *e).unwrap_or(0.0),
        steady_gap: gap,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Sweep result with partial records preserved on failure.
#[derive(Debug)]
pub struct SweepOutcome {
    pub records: Vec<ConvergenceRecord>,
    pub failure: Option<Error>,
}

impl SweepOutcome {
    pub fn into_result(self) -> Result<Vec<ConvergenceRecord>> {
        match self.failure {
            None => Ok(self.records),
            Some(e) => Err(e),
        }
    }
}

/// Run one cell over a strictly decreasing thickness list. Runs execute
/// concurrently; records are kept in list order and truncated at the first
/// failing thickness.
pub fn sweep_delta(cfg: &RunConfig, cell: &RegimeCell, deltas: &[f64]) -> SweepOutcome {
    if deltas.is_empty() || deltas.windows(2).any(|p| p[1] >= p[0]) {
        return SweepOutcome {
            records: Vec::new(),
            failure: Some(Error::InvalidParameter(
                "thickness list must be nonempty and strictly decreasing".into(),
            )),
        };
    }
    let results: Vec<Result<ConvergenceRecord>> = deltas
        .par_iter()
        .map(|&delta| run_cell_delta(cfg, cell, delta))
        .collect();
    let mut records = Vec::with_capacity(results.len());
    for result in results {
        match result {
            Ok(record) => records.push(record),
            Err(e) => {
                return SweepOutcome {
                    records,
                    failure: Some(e),
                }
            }
        }
    }
    SweepOutcome {
        records,
        failure: None,
    }
}

/// Sweep several cells concurrently, preserving cell order.
pub fn sweep_cells(
    cfg: &RunConfig,
    cells: &[&'static RegimeCell],
    deltas: &[f64],
) -> Vec<SweepOutcome> {
    cells
        .par_iter()
        .map(|cell| sweep_delta(cfg, cell, deltas))
        .collect()
}

/// Long-horizon run: march both solvers to `t_long` on a geometric sample
/// grid and decompose the terminal error against the steady states.
pub fn lifespan_run(
    cfg: &RunConfig,
    cell: &RegimeCell,
    delta: f64,
    t_long: f64,
) -> Result<LifespanRecord> {
    if t_long < 20.0 {
        return Err(Error::InvalidParameter(format!(
            "long-horizon runs need t_long >= 20, got {t_long}"
        )));
    }
    let started = Instant::now();
    let (coated, effective) = build_pair(cfg, cell, delta)?;
    let params = regime_family(cell, delta)?;
    let preset = cfg.parse_u0()?;
    let u0 = coated.state_from_samples(preset.sampler(coated.grid().outer_radius()))?;
    let v0 = effective.restrict_initial(&u0)?;
    let samples = geometric_samples(t_long, cfg.dt, 20);
    let coated_traj = coated.solve(u0, cfg.dt, &samples, cfg.reaction)?;
    let effective_traj = effective.solve(v0, cfg.dt, &samples, cfg.reaction)?;
    let errors = trajectory_errors(&coated_traj, &effective_traj)?;

    let steady_u = steady::steady_coated(&coated)?;
    let steady_v = steady::steady_effective(&effective)?;
    let gap = steady::steady_gap(&steady_u, &steady_v)?;
    let u_steady_gap = distance_to_steady(&coated_traj.terminal().bulk_restriction(), &steady_u)?;
    let v_steady_gap = distance_to_steady(effective_traj.terminal(), &steady_v)?;

    Ok(LifespanRecord {
        record: ConvergenceRecord {
            cell: cell.id.to_string(),
            delta,
            sigma: params.sigma,
            mu: params.mu,
            sup_error: sup_error(&errors),
            terminal_error: errors.last().map(|(_, e)| *e).unwrap_or(0.0),
            steady_gap: gap,
            wall_time: started.elapsed().as_secs_f64(),
        },
        u_steady_gap,
        v_steady_gap,
        sample_errors: errors,
    })
}

/// Write the record CSV and a JSON manifest into `dir` under the given
/// file stem. The byte output is a deterministic function of the records
/// and manifest.
pub fn emit_report_as(
    records: &[ConvergenceRecord],
    manifest: &serde_json::Value,
    dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf)> {
    if records.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot emit a report without records".into(),
        ));
    }
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let manifest_path = dir.join(format!("{stem}_manifest.json"));
    std::fs::write(&csv_path, render_csv(records))?;
    let mut manifest_text =
        serde_json::to_string_pretty(manifest).map_err(|e| Error::Config(e.to_string()))?;
    manifest_text.push('\n');
    std::fs::write(&manifest_path, manifest_text)?;
    Ok((csv_path, manifest_path))
}

/// Sweep report with the default file stem.
pub fn emit_report(
    records: &[ConvergenceRecord],
    manifest: &serde_json::Value,
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    emit_report_as(records, manifest, dir, "sweep")
}

/// CSV body with a header row, '.' decimals and LF line endings.
pub fn render_csv(records: &[ConvergenceRecord]) -> String {
    let mut out =
        String::from("cell,delta,sigma,mu,sup_error,terminal_error,steady_gap,wall_time\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.cell,
            r.delta,
            r.sigma,
            r.mu,
            r.sup_error,
            r.terminal_error,
            r.steady_gap,
            r.wall_time
        ));
    }
    out
}
