//! Positive steady states of the coated and effective logistic problems.
//!
//! Existence is decided by the principal eigenvalue: a positive steady
//! state exists exactly when it lies below one. Near the threshold the
//! decision is flagged indeterminate instead of guessed. Profiles are
//! computed on the radial mode (positivity makes the steady state radial
//! here): a long implicit march from a constant start brings the state
//! into the Newton basin, and a Newton polish on the stationary radial
//! system drives the residual to roundoff. On the nonexistence side the
//! march runs until the solution norm has provably collapsed; the horizon
//! stretches like 1/(λ₁ - 1) so near-threshold decay is still resolved.

use crate::coated::CoatedSolver;
use crate::effective::EffectiveSolver;
use crate::eigen;
use crate::field::{ModalField, Region};
use crate::operator::{ModeOperator, RadialGrid, ThetaStepper, TridiagFactor};
use crate::surface::SurfaceSpectrum;
use crate::{Error, Result};

/// Existence decision half-width: |λ₁ - 1| below this is indeterminate.
pub const THRESHOLD_BAND: f64 = 1e-3;
/// Default march horizon and step.
pub const T_PROBE: f64 = 200.0;
pub const DT_MARCH: f64 = 1e-2;
/// Required stationary residual on existing profiles.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Required solution norm at the probe horizon on the nonexistence side.
pub const DECAY_TARGET: f64 = 1e-6;

const NEWTON_UPDATE_TOL: f64 = 1e-12;
const NEWTON_MAX_STEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Existence {
    Exists,
    Absent,
    Indeterminate,
}

/// Steady-state result: the profile when one exists, the probe norm when
/// none does, and the principal eigenvalue driving the decision.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub existence: Existence,
    pub profile: Option<ModalField>,
    pub residual: Option<f64>,
    pub lambda1: f64,
    /// L²(Ω) norm of the marched solution at the probe horizon
    /// (nonexistence branch only).
    pub probe_norm: Option<f64>,
}

impl SteadyState {
    pub fn exists(&self) -> bool {
        self.existence == Existence::Exists
    }
}

/// Radial logistic subsystem shared by both steady solvers.
struct RadialSystem<'a> {
    op: &'a ModeOperator,
    grid: &'a RadialGrid,
    spectrum: &'a SurfaceSpectrum,
    /// value of the constant surface mode, converting modal amplitudes to
    /// physical values
    e0: f64,
}

impl<'a> RadialSystem<'a> {
    fn active_nodes(&self) -> Vec<f64> {
        let first = self.op.first_active();
        (first..first + self.op.n_active())
            .map(|j| self.grid.node(j))
            .collect()
    }

    /// w profile of the spatially constant state u ≡ value.
    fn constant_state(&self, value: f64) -> Vec<f64> {
        self.active_nodes()
            .iter()
            .map(|&rho| value * rho / self.e0)
            .collect()
    }

    fn march(&self, w: &mut [f64], t_end: f64, dt: f64) -> Result<()> {
        let stepper = ThetaStepper::new(self.op, dt, 1.0)?;
        let growth = (0.5 * dt).exp();
        let rho = self.active_nodes();
        let steps = (t_end / dt).round() as usize;
        let mut scratch = Vec::new();
        for _ in 0..steps {
            self.logistic_half(w, &rho, growth)?;
            stepper.step(w, &mut scratch);
            self.logistic_half(w, &rho, growth)?;
        }
        Ok(())
    }

    fn logistic_half(&self, w: &mut [f64], rho: &[f64], growth: f64) -> Result<()> {
        for (x, &r) in w.iter_mut().zip(rho) {
            let u = *x * self.e0 / r;
            let next = u * growth / (1.0 - u + u * growth);
            if !next.is_finite() {
                return Err(Error::SolverFailure(
                    "logistic update produced a non-finite value".into(),
                ));
            }
            *x = next * r / self.e0;
        }
        Ok(())
    }

    /// Stationary residual F(w) = L w + w (1 - u), u the physical value.
    fn residual_vec(&self, w: &[f64], rho: &[f64]) -> Vec<f64> {
        let lw = self.op.apply(w);
        lw.iter()
            .zip(w)
            .zip(rho)
            .map(|((l, &x), &r)| l + x * (1.0 - x * self.e0 / r))
            .collect()
    }

    fn newton_polish(&self, w: &mut [f64]) -> Result<f64> {
        let rho = self.active_nodes();
        let (sub, diag, sup) = self.op.bands();
        for _ in 0..NEWTON_MAX_STEPS {
            let f = self.residual_vec(w, &rho);
            let jac_diag: Vec<f64> = diag
                .iter()
                .zip(w.iter())
                .zip(&rho)
                .map(|((d, &x), &r)| d + 1.0 - 2.0 * x * self.e0 / r)
                .collect();
            let factor = TridiagFactor::new(sub, &jac_diag, sup)?;
            let mut delta: Vec<f64> = f.iter().map(|v| -v).collect();
            factor.solve_in_place(&mut delta);
            for (x, d) in w.iter_mut().zip(&delta) {
                *x += d;
            }
            if self.op.m_norm(&delta) <= NEWTON_UPDATE_TOL {
                let f = self.residual_vec(w, &rho);
                return Ok(self.op.m_norm(&f));
            }
        }
        Err(Error::SolverFailure(format!(
            "stationary Newton polish did not converge within {NEWTON_MAX_STEPS} steps"
        )))
    }

    fn field_from(&self, w: &[f64]) -> ModalField {
        let mut field = ModalField::zeros(self.grid, self.spectrum);
        let first = self.op.first_active();
        field.mode_w_mut(0)[first..first + w.len()].copy_from_slice(w);
        field
    }
}

fn steady_core(system: &RadialSystem<'_>, lambda1: f64, start: f64) -> Result<SteadyState> {
    if (lambda1 - 1.0).abs() <= THRESHOLD_BAND {
        return Ok(SteadyState {
            existence: Existence::Indeterminate,
            profile: None,
            residual: None,
            lambda1,
            probe_norm: None,
        });
    }
    if lambda1 < 1.0 {
        let mut w = system.constant_state(start);
        system.march(&mut w, T_PROBE, DT_MARCH)?;
        let residual = system.newton_polish(&mut w)?;
        if residual > RESIDUAL_TOL {
            return Err(Error::SolverFailure(format!(
                "stationary residual {residual} above {RESIDUAL_TOL} after Newton polish"
            )));
        }
        let field = system.field_from(&w);
        Ok(SteadyState {
            existence: Existence::Exists,
            profile: Some(field),
            residual: Some(residual),
            lambda1,
            probe_norm: None,
        })
    } else {
        // the decay rate degenerates like λ₁ - 1, so stretch the horizon
        let horizon = T_PROBE.max(20.0 / (lambda1 - 1.0));
        let mut w = system.constant_state(start);
        system.march(&mut w, horizon, DT_MARCH)?;
        let norm = system.field_from(&w).l2_norm(Region::All);
        if norm > DECAY_TARGET {
            return Err(Error::InvariantViolation(format!(
                "marched norm {norm} above {DECAY_TARGET} at horizon {horizon} \
                 despite λ₁ = {lambda1} > 1"
            )));
        }
        Ok(SteadyState {
            existence: Existence::Absent,
            profile: None,
            residual: None,
            lambda1,
            probe_norm: Some(norm),
        })
    }
}

/// Steady state of the coated problem, marched from u ≡ 1.
pub fn steady_coated(solver: &CoatedSolver) -> Result<SteadyState> {
    steady_coated_from(solver, 1.0)
}

/// Same decision from an arbitrary constant start in (0, 1]; used for the
/// uniqueness cross-check.
pub fn steady_coated_from(solver: &CoatedSolver, start: f64) -> Result<SteadyState> {
    if !(start > 0.0 && start <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "march start must lie in (0, 1], got {start}"
        )));
    }
    let lambda1 = eigen::principal_eigen_coated(solver)?.lambda;
    let system = RadialSystem {
        op: solver.mode_operator(0),
        grid: solver.grid(),
        spectrum: solver.spectrum(),
        e0: solver.spectrum().basis_row(0)[0],
    };
    steady_core(&system, lambda1, start)
}

pub fn steady_effective(solver: &EffectiveSolver) -> Result<SteadyState> {
    steady_effective_from(solver, 1.0)
}

pub fn steady_effective_from(solver: &EffectiveSolver, start: f64) -> Result<SteadyState> {
    if !(start > 0.0 && start <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "march start must lie in (0, 1], got {start}"
        )));
    }
    let lambda1 = eigen::principal_eigen_effective(solver)?.lambda;
    let system = RadialSystem {
        op: solver.mode_operator(0),
        grid: solver.grid(),
        spectrum: solver.spectrum(),
        e0: solver.spectrum().basis_row(0)[0],
    };
    steady_core(&system, lambda1, start)
}

/// ‖U - V‖ in the volume-weighted bulk norm, with absent states treated as
/// zero. Indeterminate states cannot be compared.
pub fn steady_gap(coated: &SteadyState, effective: &SteadyState) -> Result<f64> {
    if coated.existence == Existence::Indeterminate
        || effective.existence == Existence::Indeterminate
    {
        return Err(Error::InvariantViolation(
            "steady gap undefined for indeterminate existence".into(),
        ));
    }
    match (&coated.profile, &effective.profile) {
        (None, None) => Ok(0.0),
        (Some(u), None) => Ok(u.bulk_restriction().l2_norm(Region::All)),
        (None, Some(v)) => Ok(v.l2_norm(Region::All)),
        (Some(u), Some(v)) => {
            let diff = u.bulk_restriction().difference(v)?;
            Ok(diff.l2_norm(Region::All))
        }
    }
}
