//! Solvers and verification tooling for reaction-diffusion problems on a
//! ball wrapped in a thin, optimally aligned anisotropic coating, together
//! with the family of effective boundary conditions that replace the coating
//! in the vanishing-thickness limit.
//!
//! The crate is organised around the pipeline used by the verification
//! harness:
//!
//! * [`surface`] — interface geometry, its Laplace–Beltrami spectrum and
//!   quadrature-based modal transforms;
//! * [`dtn`] — the Dirichlet-to-Neumann layer operator and its
//!   fractional-Laplacian deep-layer limit;
//! * [`coated`] — the full two-domain solver (isotropic bulk plus
//!   anisotropic shell with transmission conditions);
//! * [`effective`] — the bulk-only solver under the nine effective boundary
//!   conditions;
//! * [`eigen`] / [`steady`] — principal eigenpairs and positive steady
//!   states of both problems;
//! * [`harness`] — regime families, thickness sweeps, long-horizon runs and
//!   machine-readable reports.

pub mod coated;
pub mod config;
pub mod dtn;
pub mod effective;
pub mod eigen;
mod error;
pub mod field;
pub mod harness;
mod march;
pub mod operator;
pub mod steady;
pub mod surface;

pub use error::{Error, Result};
pub use march::{Reaction, Trajectory, TOL_MAX_PRINCIPLE};

/// Configure the global thread pool used for concurrent harness runs.
///
/// Returns an error if a pool has already been installed; callers that do
/// not care (the pool is process-global) may ignore it.
pub fn configure_threads(threads: usize) -> std::result::Result<(), rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
}
