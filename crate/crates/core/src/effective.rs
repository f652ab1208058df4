//! Bulk-only solver under the effective boundary conditions that replace
//! the coating in the vanishing-thickness limit.
//!
//! The nine regime limits collapse to seven distinct closures: Neumann,
//! Robin, Dirichlet, the two Dirichlet-to-Neumann flux laws (finite depth
//! and the deep-layer fractional limit), and the two constant-trace
//! conditions. Every closure is diagonal in the surface eigenbasis, so each
//! mode keeps its single tridiagonal solve:
//!
//! * flux laws become per-mode Robin coefficients k û_ρ = B_l û with
//!   B_l = 0 (Neumann), -α (Robin) or γ m_l (Dirichlet-to-Neumann, m_l the
//!   layer multiplier);
//! * Dirichlet pins the boundary node;
//! * the constant-trace conditions split by mode: modes carrying angular
//!   variation get a Dirichlet row (their trace must vanish for the trace
//!   to be spatially constant), while the constant mode carries the
//!   integral flux law, which reduces to a scalar Neumann/Robin row since
//!   all other modes integrate to zero over the interface.

use crate::dtn::{Depth, DtnOperator};
use crate::field::ModalField;
use crate::march::{self, Marcher, Reaction, Trajectory};
use crate::operator::{assemble_bulk_mode, BoundaryRow, ModeOperator, RadialGrid};
use crate::surface::{SurfaceKind, SurfaceSpectrum};
use crate::{Error, Result};

/// One of the effective boundary conditions on the interface.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind")]
pub enum EbcKind {
    /// k ∂v/∂n = 0.
    Neumann,
    /// k ∂v/∂n = -α v.
    Robin { alpha: f64 },
    /// v = 0.
    Dirichlet,
    /// k ∂v/∂n = γ J[v] with the layer map at the given depth.
    DtnRobin { gamma: f64, depth: Depth },
    /// Spatially constant trace with zero total flux.
    ConstTraceZeroFlux,
    /// Spatially constant trace with ∫(k ∂v/∂n + α v) = 0.
    ConstTraceRobin { alpha: f64 },
}

impl EbcKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EbcKind::Robin { alpha } | EbcKind::ConstTraceRobin { alpha } => {
                if !(alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "Robin coefficient must be positive, got {alpha}"
                    )));
                }
            }
            EbcKind::DtnRobin { gamma, depth } => {
                if !(gamma > 0.0) || !gamma.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "flux-law coefficient must be positive, got {gamma}"
                    )));
                }
                if let Depth::Finite(h) = depth {
                    if !(h > 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "layer depth must be positive, got {h}"
                        )));
                    }
                }
            }
            EbcKind::Neumann | EbcKind::Dirichlet | EbcKind::ConstTraceZeroFlux => {}
        }
        Ok(())
    }

    fn needs_dtn(&self) -> bool {
        matches!(self, EbcKind::DtnRobin { .. })
    }
}

impl std::fmt::Display for EbcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EbcKind::Neumann => write!(f, "neumann"),
            EbcKind::Robin { alpha } => write!(f, "robin(alpha={alpha})"),
            EbcKind::Dirichlet => write!(f, "dirichlet"),
            EbcKind::DtnRobin { gamma, depth } => write!(f, "dtn(gamma={gamma}, h={depth})"),
            EbcKind::ConstTraceZeroFlux => write!(f, "ct-zeroflux"),
            EbcKind::ConstTraceRobin { alpha } => write!(f, "ct-robin(alpha={alpha})"),
        }
    }
}

/// Boundary row for one mode: the per-mode flux coefficient or a pinned
/// value. `dtn` must be supplied exactly when the condition is the
/// Dirichlet-to-Neumann flux law, and must match the requested depth.
pub fn boundary_closure(
    ebc: &EbcKind,
    spectrum: &SurfaceSpectrum,
    dtn: Option<&DtnOperator>,
    mode: usize,
) -> Result<BoundaryRow> {
    ebc.validate()?;
    if ebc.needs_dtn() != dtn.is_some() {
        return Err(Error::InvalidParameter(if ebc.needs_dtn() {
            "the Dirichlet-to-Neumann closure needs its layer operator".into()
        } else {
            "a layer operator was supplied for a local boundary condition".to_string()
        }));
    }
    if mode >= spectrum.mode_len() {
        return Err(Error::InvalidParameter(format!(
            "mode {mode} outside the retained range 0..{}",
            spectrum.mode_len()
        )));
    }
    Ok(match *ebc {
        EbcKind::Neumann => BoundaryRow::Flux { coefficient: 0.0 },
        EbcKind::Robin { alpha } => BoundaryRow::Flux {
            coefficient: -alpha,
        },
        EbcKind::Dirichlet => BoundaryRow::Fixed,
        EbcKind::DtnRobin { gamma, depth } => {
            let op = dtn.unwrap();
            spectrum.check_key(op.key())?;
            if op.depth() != depth {
                return Err(Error::InvalidParameter(format!(
                    "layer operator depth {} does not match the requested {depth}",
                    op.depth()
                )));
            }
            BoundaryRow::Flux {
                coefficient: gamma * op.multipliers()[mode],
            }
        }
        EbcKind::ConstTraceZeroFlux => {
            if mode == 0 {
                BoundaryRow::Flux { coefficient: 0.0 }
            } else {
                BoundaryRow::Fixed
            }
        }
        EbcKind::ConstTraceRobin { alpha } => {
            if mode == 0 {
                BoundaryRow::Flux {
                    coefficient: -alpha,
                }
            } else {
                BoundaryRow::Fixed
            }
        }
    })
}

pub struct EffectiveSolver {
    spectrum: SurfaceSpectrum,
    grid: RadialGrid,
    ebc: EbcKind,
    diffusivity: f64,
    theta: f64,
    ops: Vec<ModeOperator>,
}

impl EffectiveSolver {
    pub fn new(
        spectrum: SurfaceSpectrum,
        ebc: EbcKind,
        diffusivity: f64,
        bulk_intervals: usize,
        theta: f64,
    ) -> Result<Self> {
        if spectrum.kind() != SurfaceKind::Sphere {
            return Err(Error::InvalidParameter(
                "the radial solvers support the sphere geometry only".into(),
            ));
        }
        if !(diffusivity > 0.0) || !diffusivity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "diffusivity must be positive, got {diffusivity}"
            )));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {theta}"
            )));
        }
        ebc.validate()?;
        let dtn = if let EbcKind::DtnRobin { depth, .. } = ebc {
            Some(DtnOperator::build(&spectrum, depth)?)
        } else {
            None
        };
        let r1 = spectrum.radius();
        let grid = RadialGrid::bulk(r1, bulk_intervals)?;
        let ops = (0..spectrum.mode_len())
            .map(|l| {
                let row = boundary_closure(&ebc, &spectrum, dtn.as_ref(), l)?;
                Ok(assemble_bulk_mode(
                    &grid,
                    diffusivity,
                    spectrum.eigenvalues()[l] * r1 * r1,
                    row,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spectrum,
            grid,
            ebc,
            diffusivity,
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

    pub fn ebc(&self) -> &EbcKind {
        &self.ebc
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
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

    /// Accept a state from the coated solver's grid by bulk restriction.
    pub fn restrict_initial(&self, u0: &ModalField) -> Result<ModalField> {
        let state = u0.bulk_restriction();
        if state.grid() != &self.grid {
            return Err(Error::InvalidParameter(
                "bulk grids of the two solvers do not match".into(),
            ));
        }
        Ok(state)
    }

    /// Zero out nodes pinned by Dirichlet-type rows.
    fn enforce_pinned(&self, state: &mut ModalField) {
        let last = self.grid.len() - 1;
        for (l, op) in self.ops.iter().enumerate() {
            if op.first_active() + op.n_active() - 1 < last {
                state.mode_w_mut(l)[last] = 0.0;
            }
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

    pub fn step(&self, state: &mut ModalField, dt: f64, reaction: Reaction) -> Result<()> {
        self.check_state(state)?;
        self.enforce_pinned(state);
        let marcher = Marcher::new(&self.spectrum, &self.ops, dt, self.theta)?;
        let mut scratch = Vec::new();
        marcher.advance(&self.ops, state, reaction, &mut scratch)
    }

    /// March from `v0`; the t = 0 sample is the initial data itself, later
    /// samples satisfy the Dirichlet-type rows of the closure.
    pub fn solve(
        &self,
        v0: ModalField,
        dt: f64,
        sample_times: &[f64],
        reaction: Reaction,
    ) -> Result<Trajectory> {
        self.check_state(&v0)?;
        march::run(
            &self.spectrum,
            &self.ops,
            self.theta,
            v0,
            dt,
            sample_times,
            reaction,
            |state| self.enforce_pinned(state),
        )
    }
}
