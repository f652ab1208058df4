//! Principal eigenpairs of the coated and effective elliptic operators,
//! Rayleigh quotients, and the linearised eigenvalue at a steady state.
//!
//! All eigen-solves are shifted inverse power iterations on the per-mode
//! tridiagonal operators. The per-mode matrices are symmetric in the
//! mass-weighted inner product, so Rayleigh quotients are monotone and the
//! iteration is stopped when successive quotients agree to relative
//! precision. The coated principal search runs on the radial mode only
//! (positivity forces a radial principal eigenfunction on these
//! geometries); the effective search scans every retained mode and checks
//! that the radial mode is the minimiser.

use crate::coated::CoatedSolver;
use crate::effective::EffectiveSolver;
use crate::field::{ModalField, Region};
use crate::operator::{ModeOperator, TridiagFactor};
use crate::surface::SurfaceSpectrum;
use crate::{Error, Result};

const RAYLEIGH_REL_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 10_000;

/// Required residual for a converged eigenpair.
fn residual_target(lambda: f64) -> f64 {
    1e-10 * lambda.abs() + 1e-12
}

/// Converged eigenpair with its residual ‖A e - λ e‖_M / ‖e‖_M.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    /// Angular mode carrying the eigenfunction.
    pub mode: usize,
    /// Single-mode eigenfunction, positive-signed, unit volume-weighted L²
    /// norm.
    pub field: ModalField,
    pub residual: f64,
    pub iterations: usize,
}

/// Symmetric positive-(semi)definite form A = -L of a mode operator, with
/// an optional extra diagonal potential.
struct SymTridiag {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    mass: Vec<f64>,
}

impl SymTridiag {
    fn from_operator(op: &ModeOperator) -> Self {
        let (sub, diag, sup) = op.bands();
        Self {
            sub: sub.iter().map(|v| -v).collect(),
            diag: diag.iter().map(|v| -v).collect(),
            sup: sup.iter().map(|v| -v).collect(),
            mass: op.mass().to_vec(),
        }
    }

    fn add_potential(&mut self, values: &[f64]) {
        for (d, v) in self.diag.iter_mut().zip(values) {
            *d += v;
        }
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        let n = w.len();
        let mut out = vec![0.0; n];
        for j in 0..n {
            let mut v = self.diag[j] * w[j];
            if j > 0 {
                v += self.sub[j] * w[j - 1];
            }
            if j + 1 < n {
                v += self.sup[j] * w[j + 1];
            }
            out[j] = v;
        }
        out
    }

    fn m_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.mass
            .iter()
            .zip(a)
            .zip(b)
            .map(|((m, x), y)| m * x * y)
            .sum()
    }

    fn rayleigh(&self, w: &[f64]) -> f64 {
        self.m_inner(&self.apply(w), w) / self.m_inner(w, w)
    }

    /// Smallest eigenvalue by inverse iteration on A + shift, optionally
    /// M-orthogonal to a previously found eigenvector. Iterates until the
    /// Rayleigh quotient has settled and the residual has reached its
    /// target (or its floating-point floor).
    fn smallest(&self, shift: f64, deflate: Option<&[f64]>) -> Result<(f64, Vec<f64>, f64, usize)> {
        let n = self.diag.len();
        let shifted: Vec<f64> = self.diag.iter().map(|d| d + shift).collect();
        let factor = TridiagFactor::new(&self.sub, &shifted, &self.sup)?;
        let mut v = vec![1.0; n];
        let orthogonalise = |v: &mut Vec<f64>| {
            if let Some(first) = deflate {
                let proj = self.m_inner(v, first) / self.m_inner(first, first);
                for (x, f) in v.iter_mut().zip(first) {
                    *x -= proj * f;
                }
            }
        };
        orthogonalise(&mut v);
        let norm = self.m_inner(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        // Rayleigh quotients cannot be resolved below the roundoff of the
        // quadratic form, which scales with the largest row magnitude.
        let noise_floor =
            4.0 * f64::EPSILON * self.diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
        let mut lambda = self.rayleigh(&v);
        let mut best: Option<(f64, Vec<f64>, f64)> = None;
        let mut stagnant = 0usize;
        for iteration in 1..=MAX_ITERATIONS {
            factor.solve_in_place(&mut v);
            orthogonalise(&mut v);
            let norm = self.m_inner(&v, &v).sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::SolverFailure(
                    "inverse iteration produced a degenerate vector".into(),
                ));
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let next = self.rayleigh(&v);
            let settled =
                (next - lambda).abs() <= (RAYLEIGH_REL_TOL * next.abs().max(1e-9)).max(noise_floor);
            lambda = next;
            let residual = self.residual(lambda, &v);
            if settled && residual <= residual_target(lambda) {
                return Ok((lambda, v, residual, iteration));
            }
            match &best {
                Some((_, _, r)) if residual >= 0.5 * r => stagnant += 1,
                _ => {
                    best = Some((lambda, v.clone(), residual));
                    stagnant = 0;
                }
            }
            // no halving of the residual for a long stretch: the iterate
            // has reached its floating-point floor
            if stagnant >= 200 {
                let (l, vec, r) = best.expect("stagnation implies a best iterate");
                return Ok((l, vec, r, iteration));
            }
        }
        Err(Error::NonConvergence {
            iterations: MAX_ITERATIONS,
            context: "inverse power iteration".into(),
        })
    }

    fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let av = self.apply(v);
        let r: Vec<f64> = av.iter().zip(v).map(|(a, x)| a - lambda * x).collect();
        (self.m_inner(&r, &r) / self.m_inner(v, v)).sqrt()
    }
}

/// Package an active-node eigenvector as a positive, unit-norm field.
fn eigen_field(
    spectrum: &SurfaceSpectrum,
    grid: &crate::operator::RadialGrid,
    op: &ModeOperator,
    mode: usize,
    mut v: Vec<f64>,
) -> Result<ModalField> {
    let mean: f64 = op.mass().iter().zip(&v).map(|(m, x)| m * x).sum();
    if mean < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let mut field = ModalField::zeros(grid, spectrum);
    let first = op.first_active();
    field.mode_w_mut(mode)[first..first + v.len()].copy_from_slice(&v);
    let norm = field.l2_norm(Region::All);
    if norm == 0.0 {
        return Err(Error::SolverFailure("zero eigenvector".into()));
    }
    let w = field.mode_w_mut(mode);
    w.iter_mut().for_each(|x| *x /= norm);
    Ok(field)
}

fn check_positive(field: &ModalField, mode: usize) -> Result<()> {
    let w = field.mode_w(mode);
    let interior_positive = w
        .iter()
        .enumerate()
        .filter(|(j, _)| *j > 0 && *j < w.len() - 1)
        .all(|(_, &x)| x > 0.0);
    if !interior_positive {
        return Err(Error::InvariantViolation(
            "principal eigenfunction is not strictly positive on the open domain".into(),
        ));
    }
    Ok(())
}

/// Principal eigenpair of the coated operator.
pub fn principal_eigen_coated(solver: &CoatedSolver) -> Result<EigenPair> {
    let op = solver.mode_operator(0);
    let sym = SymTridiag::from_operator(op);
    let (lambda, v, residual, iterations) = sym.smallest(0.0, None)?;
    let field = eigen_field(solver.spectrum(), solver.grid(), op, 0, v)?;
    check_positive(&field, 0)?;
    Ok(EigenPair {
        lambda,
        mode: 0,
        field,
        residual,
        iterations,
    })
}

/// Principal eigenpair of the effective operator; scans every retained
/// mode and verifies that the radial mode minimises.
pub fn principal_eigen_effective(solver: &EffectiveSolver) -> Result<EigenPair> {
    let mut best: Option<(usize, f64, Vec<f64>, f64, usize)> = None;
    for mode in 0..solver.spectrum().mode_len() {
        let sym = SymTridiag::from_operator(solver.mode_operator(mode));
        let (lambda, v, residual, iters) = sym.smallest(1.0, None)?;
        if best.as_ref().map_or(true, |(_, l, ..)| lambda < *l) {
            best = Some((mode, lambda, v, residual, iters));
        }
    }
    let (mode, lambda, v, residual, iterations) = best.expect("at least one mode");
    if mode != 0 {
        return Err(Error::InvariantViolation(format!(
            "principal eigenvalue found on mode {mode}, expected the radial mode"
        )));
    }
    let op = solver.mode_operator(0);
    let field = eigen_field(solver.spectrum(), solver.grid(), op, 0, v)?;
    check_positive(&field, 0)?;
    Ok(EigenPair {
        lambda,
        mode: 0,
        field,
        residual,
        iterations,
    })
}

/// Second-smallest eigenvalue of the effective operator, over all modes.
pub fn second_eigen_effective(solver: &EffectiveSolver) -> Result<(f64, usize)> {
    let radial = SymTridiag::from_operator(solver.mode_operator(0));
    let (_, first_vec, _, _) = radial.smallest(1.0, None)?;
    let (radial_second, ..) = radial.smallest(1.0, Some(&first_vec))?;
    let mut best = (radial_second, 0usize);
    for mode in 1..solver.spectrum().mode_len() {
        let sym = SymTridiag::from_operator(solver.mode_operator(mode));
        let (lambda, ..) = sym.smallest(1.0, None)?;
        if lambda < best.0 {
            best = (lambda, mode);
        }
    }
    Ok(best)
}

/// Discrete Rayleigh quotient of a multi-mode field over a set of per-mode
/// operators: Σ_l ⟨-L w_l, w_l⟩_M / Σ_l ⟨w_l, w_l⟩_M.
fn rayleigh_over(ops: &[&ModeOperator], field: &ModalField) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (mode, op) in ops.iter().enumerate() {
        let first = op.first_active();
        let w = &field.mode_w(mode)[first..first + op.n_active()];
        num += op.quadratic_form(w);
        den += op.m_inner(w, w);
    }
    if den == 0.0 {
        return Err(Error::InvalidParameter(
            "Rayleigh quotient of the zero field".into(),
        ));
    }
    Ok(num / den)
}

pub fn rayleigh_quotient_coated(solver: &CoatedSolver, field: &ModalField) -> Result<f64> {
    let ops: Vec<&ModeOperator> = (0..solver.spectrum().mode_len())
        .map(|l| solver.mode_operator(l))
        .collect();
    rayleigh_over(&ops, field)
}

pub fn rayleigh_quotient_effective(solver: &EffectiveSolver, field: &ModalField) -> Result<f64> {
    let ops: Vec<&ModeOperator> = (0..solver.spectrum().mode_len())
        .map(|l| solver.mode_operator(l))
        .collect();
    rayleigh_over(&ops, field)
}

/// Principal eigenvalue of the coated operator linearised at a steady
/// state: -∇·(A∇·) - (1 - U)·. For a genuine steady state the value is
/// zero with eigenfunction proportional to the state itself.
pub fn linearized_eigen_at_steady(solver: &CoatedSolver, steady: &ModalField) -> Result<EigenPair> {
    solver.spectrum().check_key(steady.key())?;
    if steady.grid() != solver.grid() {
        return Err(Error::InvalidParameter(
            "steady state grid does not match the solver grid".into(),
        ));
    }
    let op = solver.mode_operator(0);
    let first = op.first_active();
    let mut sym = SymTridiag::from_operator(op);
    // physical steady values: modal amplitude times the constant mode
    let e0 = solver.spectrum().basis_row(0)[0];
    let potential: Vec<f64> = (0..op.n_active())
        .map(|row| -(1.0 - e0 * steady.amplitude(0, first + row)))
        .collect();
    sym.add_potential(&potential);
    // the linearised eigenvalue is bounded below by -1, so this shift keeps
    // the matrix positive definite
    let (lambda, v, residual, iterations) = sym.smallest(2.0, None)?;
    let field = eigen_field(solver.spectrum(), solver.grid(), op, 0, v)?;
    Ok(EigenPair {
        lambda,
        mode: 0,
        field,
        residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coated::CoatingSpec;
    use crate::dtn::Depth;
    use crate::effective::EbcKind;
    use crate::surface::{SurfaceKind, SurfaceSpectrum};
    use std::f64::consts::PI;

    fn sphere(r1: f64, l_max: usize) -> SurfaceSpectrum {
        SurfaceSpectrum::build(SurfaceKind::Sphere, r1, l_max).unwrap()
    }

    fn iso_solver(r1: f64, delta: f64, nb: usize, nc: usize) -> CoatedSolver {
        let spec = CoatingSpec {
            diffusivity: 1.0,
            normal_conductivity: 1.0,
            tangent_conductivity: 1.0,
            thickness: delta,
        };
        CoatedSolver::new(sphere(r1, 2), spec, nb, nc, 1.0).unwrap()
    }

    #[test]
    fn isotropic_ball_reproduces_the_classical_eigenvalue() {
        // R1 + δ = 1: the slowest Dirichlet rate of the unit ball is π²
        let solver = iso_solver(0.9, 0.1, 256, 32);
        let pair = principal_eigen_coated(&solver).unwrap();
        assert!(
            (pair.lambda - PI * PI).abs() <= 5e-4 * PI * PI,
            "lambda {} vs {}",
            pair.lambda,
            PI * PI
        );
        assert!(pair.residual <= 1e-10 * pair.lambda.abs() + 1e-12);
        assert!((pair.field.l2_norm(Region::All) - 1.0).abs() <= 1e-12);
        let quotient = rayleigh_quotient_coated(&solver, &pair.field).unwrap();
        assert!((quotient - pair.lambda).abs() <= 1e-10 * pair.lambda);
    }

    #[test]
    fn neumann_effective_has_flat_zero_mode() {
        let solver = EffectiveSolver::new(sphere(1.0, 4), EbcKind::Neumann, 1.0, 128, 1.0).unwrap();
        let pair = principal_eigen_effective(&solver).unwrap();
        assert!(pair.lambda.abs() <= 1e-10, "lambda {}", pair.lambda);
        // physical eigenfunction is the normalised constant 1/√|Ω₁|
        let e0 = solver.spectrum().basis_row(0)[0];
        let expected = 1.0 / (4.0 * PI / 3.0f64).sqrt();
        for j in 1..solver.grid().len() {
            assert!((pair.field.amplitude(0, j) * e0 - expected).abs() <= 1e-10);
        }
    }

    #[test]
    fn flux_law_signs_follow_the_regime_table() {
        let s = sphere(1.0, 6);
        // deep layer: zero principal eigenvalue, positive second
        let deep = EffectiveSolver::new(
            s.clone(),
            EbcKind::DtnRobin {
                gamma: 1.0,
                depth: Depth::Infinite,
            },
            1.0,
            128,
            1.0,
        )
        .unwrap();
        let pair = principal_eigen_effective(&deep).unwrap();
        assert!(pair.lambda.abs() <= 1e-10);
        let (second, _) = second_eigen_effective(&deep).unwrap();
        assert!(second > 1e-3, "second eigenvalue {second}");

        // strictly positive principal eigenvalues for the absorbing laws
        for ebc in [
            EbcKind::Robin { alpha: 1.0 },
            EbcKind::DtnRobin {
                gamma: 1.0,
                depth: Depth::Finite(1.0),
            },
            EbcKind::ConstTraceRobin { alpha: 1.0 },
        ] {
            let solver = EffectiveSolver::new(s.clone(), ebc, 1.0, 128, 1.0).unwrap();
            let pair = principal_eigen_effective(&solver).unwrap();
            assert!(pair.lambda > 1e-3, "{ebc}: lambda {}", pair.lambda);
        }

        let zero_flux =
            EffectiveSolver::new(s, EbcKind::ConstTraceZeroFlux, 1.0, 128, 1.0).unwrap();
        let pair = principal_eigen_effective(&zero_flux).unwrap();
        assert!(pair.lambda.abs() <= 1e-10);
        let (second, _) = second_eigen_effective(&zero_flux).unwrap();
        assert!(second > 1e-3);
    }

    #[test]
    fn dirichlet_effective_matches_the_analytic_ball_rate() {
        let r1 = 2.0;
        let solver =
            EffectiveSolver::new(sphere(r1, 2), EbcKind::Dirichlet, 1.0, 256, 1.0).unwrap();
        let pair = principal_eigen_effective(&solver).unwrap();
        let expected = PI * PI / (r1 * r1);
        assert!((pair.lambda - expected).abs() <= 1e-3 * expected);
    }

    #[test]
    fn coated_eigenvalue_sits_below_the_dirichlet_bulk_value() {
        let spec = CoatingSpec {
            diffusivity: 1.0,
            normal_conductivity: 0.05,
            tangent_conductivity: 2.0,
            thickness: 0.1,
        };
        let coated = CoatedSolver::new(sphere(1.0, 2), spec, 128, 16, 1.0).unwrap();
        let effective =
            EffectiveSolver::new(sphere(1.0, 2), EbcKind::Dirichlet, 1.0, 128, 1.0).unwrap();
        let a = principal_eigen_coated(&coated).unwrap();
        let b = principal_eigen_effective(&effective).unwrap();
        assert!(a.lambda < b.lambda);
    }

    #[test]
    fn rayleigh_quotient_dominates_the_principal_eigenvalue() {
        let solver = iso_solver(1.0, 0.1, 96, 12);
        let pair = principal_eigen_coated(&solver).unwrap();
        for seed in 1..6u64 {
            let field = solver
                .state_from_samples(|rho, x| {
                    0.2 + (seed as f64) * 0.1 * rho * x + 0.05 * (rho * seed as f64).sin()
                })
                .unwrap();
            let q = rayleigh_quotient_coated(&solver, &field).unwrap();
            assert!(q >= pair.lambda - 1e-12 * pair.lambda.abs().max(1.0));
        }
    }

    #[test]
    fn rayleigh_quotient_boundary_term_matches_the_explicit_form() {
        // dual route: assemble the energy by hand, gradient term plus the
        // per-mode flux-law contribution -(B + k/R1) w(R1)² from the
        // substituted variable
        let r1 = 1.0;
        let k = 1.0;
        let gamma = 0.8;
        let s = sphere(r1, 5);
        let solver = EffectiveSolver::new(
            s.clone(),
            EbcKind::DtnRobin {
                gamma,
                depth: Depth::Finite(0.7),
            },
            k,
            64,
            1.0,
        )
        .unwrap();
        let dtn = crate::dtn::DtnOperator::build(&s, Depth::Finite(0.7)).unwrap();
        let field = solver
            .state_from_samples(|rho, x| 0.3 + 0.4 * rho * x + 0.1 * x * x)
            .unwrap();
        let grid = solver.grid();
        let h = grid.bulk_spacing();
        let mut num = 0.0;
        let mut den = 0.0;
        for mode in 0..s.mode_len() {
            let w = field.mode_w(mode);
            let ang = s.eigenvalues()[mode] * r1 * r1;
            let mut energy = 0.0;
            for cell in 0..grid.len() - 1 {
                let dw = w[cell + 1] - w[cell];
                energy += k * dw * dw / h;
            }
            for j in 1..grid.len() {
                let m = if j + 1 == grid.len() { 0.5 * h } else { h };
                let rho = grid.node(j);
                energy += k * ang / (rho * rho) * w[j] * w[j] * m;
            }
            let b = gamma * dtn.multipliers()[mode];
            let w_end = w[grid.len() - 1];
            energy -= (b + k / r1) * w_end * w_end;
            num += energy;
            let op = solver.mode_operator(mode);
            let first = op.first_active();
            den += op.m_inner(
                &w[first..first + op.n_active()],
                &w[first..first + op.n_active()],
            );
        }
        let manual = num / den;
        let quotient = rayleigh_quotient_effective(&solver, &field).unwrap();
        assert!(
            (quotient - manual).abs() <= 1e-10 * manual.abs().max(1.0),
            "matrix route {quotient} vs explicit route {manual}"
        );
    }

    #[test]
    fn linearised_operator_at_zero_state_shifts_by_one() {
        let solver = iso_solver(0.9, 0.1, 128, 16);
        let zero = solver.zero_state();
        let pair = linearized_eigen_at_steady(&solver, &zero).unwrap();
        let base = principal_eigen_coated(&solver).unwrap();
        assert!(
            (pair.lambda - (base.lambda - 1.0)).abs() <= 1e-9 * base.lambda.abs().max(1.0),
            "{} vs {}",
            pair.lambda,
            base.lambda - 1.0
        );
    }

    #[test]
    fn zero_field_rayleigh_quotient_is_rejected() {
        let solver = iso_solver(1.0, 0.1, 32, 4);
        assert!(rayleigh_quotient_coated(&solver, &solver.zero_state()).is_err());
    }
}
