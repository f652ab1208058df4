//! Time-dependent solver for the full two-domain problem: isotropic bulk
//! diffusion on the ball, an optimally aligned anisotropic shell with
//! normal/tangent conductivities (σ, μ), value and flux transmission at the
//! interface, and a homogeneous Dirichlet condition on the outer shell
//! boundary.
//!
//! Time integration is Strang splitting: an exact pointwise logistic
//! half-step in physical space, a full implicit θ-scheme diffusion step per
//! angular mode (one tridiagonal solve each), and a second logistic
//! half-step. The logistic map u ↦ u e^s / (1 - u + u e^s) is the exact
//! flow of u' = u(1 - u), so the splitting is positivity-preserving and
//! carries no reaction-stability restriction on the step size.

use crate::field::ModalField;
use crate::march::{self, Marcher, Reaction, Trajectory};
use crate::operator::{assemble_coated_mode, ModeOperator, RadialGrid};
use crate::surface::{SurfaceKind, SurfaceSpectrum};
use crate::{Error, Result};

/// Bulk diffusivity and coating conductivities/thickness.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoatingSpec {
    /// Bulk diffusivity k.
    pub diffusivity: f64,
    /// Conductivity σ along the interface normal.
    pub normal_conductivity: f64,
    /// Conductivity μ along the interface tangents.
    pub tangent_conductivity: f64,
    /// Shell thickness δ.
    pub thickness: f64,
}

impl CoatingSpec {
    pub fn validate(&self, r1: f64) -> Result<()> {
        for (name, v) in [
            ("diffusivity", self.diffusivity),
            ("normal conductivity", self.normal_conductivity),
            ("tangent conductivity", self.tangent_conductivity),
            ("thickness", self.thickness),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        // uniqueness of the projection onto the interface
        if self.thickness >= 0.5 * r1 {
            return Err(Error::InvalidParameter(format!(
                "coating thickness {} must be below half the bulk radius {r1}",
                self.thickness
            )));
        }
        Ok(())
    }
}

pub struct CoatedSolver {
    spectrum: SurfaceSpectrum,
    grid: RadialGrid,
    spec: CoatingSpec,
    theta: f64,
    ops: Vec<ModeOperator>,
}

impl CoatedSolver {
    pub fn new(
        spectrum: SurfaceSpectrum,
        spec: CoatingSpec,
        bulk_intervals: usize,
        coating_intervals: usize,
        theta: f64,
    ) -> Result<Self> {
        if spectrum.kind() != SurfaceKind::Sphere {
            return Err(Error::InvalidParameter(
                "the radial solvers support the sphere geometry only".into(),
            ));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {theta}"
            )));
        }
        let r1 = spectrum.radius();
        spec.validate(r1)?;
        let grid = RadialGrid::coated(r1, spec.thickness, bulk_intervals, coating_intervals)?;
        let ops = spectrum
            .eigenvalues()
            .iter()
            .map(|&lambda| {
                assemble_coated_mode(
                    &grid,
                    spec.diffusivity,
                    spec.normal_conductivity,
                    spec.tangent_conductivity,
                    lambda * r1 * r1,
                )
            })
            .collect();
        Ok(Self {
            spectrum,
            grid,
            spec,
            theta,
            ops,
        })
    }

    pub fn spectrum(&self) -> &SurfaceSpectrum {
        &self.spectrum
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn spec(&self) -> &CoatingSpec {
        &self.spec
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mode_operator(&self, mode: usize) -> &ModeOperator {
        &self.ops[mode]
    }

    pub(crate) fn operators(&self) -> &[ModeOperator] {
        &self.ops
    }

    pub(crate) fn pin(&self, state: &mut ModalField) {
        self.enforce_pinned(state);
    }

    pub fn zero_state(&self) -> ModalField {
        ModalField::zeros(&self.grid, &self.spectrum)
    }

    pub fn state_from_samples(&self, f: impl Fn(f64, f64) -> f64) -> Result<ModalField> {
        ModalField::from_samples(&self.grid, &self.spectrum, f)
    }

    pub fn state_from_modal_profiles(
        &self,
        profiles: &[(usize, &dyn Fn(f64) -> f64)],
    ) -> Result<ModalField> {
        ModalField::from_modal_profiles(&self.grid, &self.spectrum, profiles)
    }

    /// Project a state onto the outer homogeneous Dirichlet condition.
    fn enforce_pinned(&self, state: &mut ModalField) {
        let last = self.grid.len() - 1;
        for l in 0..state.mode_len() {
            state.mode_w_mut(l)[last] = 0.0;
        }
    }

    fn check_state(&self, state: &ModalField) -> Result<()> {
        self.spectrum.check_key(state.key())?;
        if state.grid() != &self.grid {
            return Err(Error::InvalidParameter(
                "state grid does not match the solver grid".into(),
            ));
        }
        Ok(())
    }

    /// One Strang step. For repeated stepping at a fixed dt prefer
    /// [`CoatedSolver::solve`], which factors the implicit systems once.
    pub fn step(&self, state: &mut ModalField, dt: f64, reaction: Reaction) -> Result<()> {
        self.check_state(state)?;
        self.enforce_pinned(state);
        let marcher = Marcher::new(&self.spectrum, &self.ops, dt, self.theta)?;
        let mut scratch = Vec::new();
        marcher.advance(&self.ops, state, reaction, &mut scratch)
    }

    /// March from `u0` to the largest requested sample time, recording the
    /// state at every requested time (snapped to step boundaries). Every
    /// sampled state is checked against the maximum-principle bounds and a
    /// violation aborts the run. The t = 0 sample is the initial data
    /// itself; later samples satisfy the outer Dirichlet row.
    pub fn solve(
        &self,
        u0: ModalField,
        dt: f64,
        sample_times: &[f64],
        reaction: Reaction,
    ) -> Result<Trajectory> {
        self.check_state(&u0)?;
        march::run(
            &self.spectrum,
            &self.ops,
            self.theta,
            u0,
            dt,
            sample_times,
            reaction,
            |state| self.enforce_pinned(state),
        )
    }
}
