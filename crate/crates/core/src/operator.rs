//! Radial grids and per-mode tridiagonal operators.
//!
//! Every radial problem is posed in the substituted variable w(ρ) = ρ û(ρ),
//! where û is the modal amplitude of an axisymmetric field on the ball.
//! The substitution removes the coordinate singularity at the origin for
//! every mode (w(0) = 0) and turns the bulk operator into
//!
//! ```text
//!   w_t = k w_ρρ - k a / ρ² · w,          a = l(l+1),
//! ```
//!
//! with the analogous form σ w_ρρ - μ a / ρ² · w inside the coating shell.
//! On a uniform grid the second difference of w is the standard three-point
//! stencil, so for the radial mode the discrete eigenvectors are exactly
//! sampled sine profiles.
//!
//! Rows are scaled to "velocity form" (ẇ = L w); the diagonal mass vector
//! returned with each operator makes L symmetric, ⟨L a, b⟩_M = ⟨a, L b⟩_M,
//! which the eigenvalue and energy routines rely on.
//!
//! The interface row couples the bulk and coating one-sided fluxes. It is
//! derived by eliminating the one-sided derivatives in the flux-continuity
//! condition k u_ρ(R1⁻) = σ u_ρ(R1⁺) with second-order Taylor corrections
//! taken from the PDE itself, which is equivalent to a conservative
//! finite-volume balance over the half-cells on both sides. With σ = μ = k
//! and equal spacings the row collapses to the interior stencil, so the
//! two-domain assembly reproduces the single-domain operator row by row.

use crate::{Error, Result};

/// Composite radial grid: a uniform bulk part on [0, R1] and, optionally,
/// a uniform shell part on [R1, R1 + δ] sharing the interface node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r1: f64,
    delta: f64,
    nb: usize,
    nc: usize,
    hb: f64,
    hc: f64,
    nodes: Vec<f64>,
}

impl RadialGrid {
    /// Bulk-only grid with `nb` intervals on [0, R1].
    pub fn bulk(r1: f64, nb: usize) -> Result<Self> {
        if !(r1 > 0.0) || !r1.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bulk radius must be positive, got {r1}"
            )));
        }
        if nb < 2 {
            return Err(Error::InvalidParameter(format!(
                "bulk grid needs at least 2 intervals, got {nb}"
            )));
        }
        let hb = r1 / nb as f64;
        let nodes = (0..=nb).map(|j| j as f64 * hb).collect();
        Ok(Self {
            r1,
            delta: 0.0,
            nb,
            nc: 0,
            hb,
            hc: 0.0,
            nodes,
        })
    }

    /// Two-domain grid: `nb` bulk intervals plus `nc` shell intervals.
    pub fn coated(r1: f64, delta: f64, nb: usize, nc: usize) -> Result<Self> {
        let mut grid = Self::bulk(r1, nb)?;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coating thickness must be positive, got {delta}"
            )));
        }
        if nc < 1 {
            return Err(Error::InvalidParameter(
                "coating grid needs at least 1 interval".into(),
            ));
        }
        let hc = delta / nc as f64;
        if hc <= f64::EPSILON * r1 {
            return Err(Error::InvalidParameter(
                "degenerate coating grid: repeated nodes".into(),
            ));
        }
        grid.delta = delta;
        grid.nc = nc;
        grid.hc = hc;
        grid.nodes.extend((1..=nc).map(|i| r1 + i as f64 * hc));
        Ok(grid)
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn outer_radius(&self) -> f64 {
        self.r1 + self.delta
    }

    pub fn bulk_intervals(&self) -> usize {
        self.nb
    }

    pub fn coating_intervals(&self) -> usize {
        self.nc
    }

    pub fn bulk_spacing(&self) -> f64 {
        self.hb
    }

    pub fn coating_spacing(&self) -> f64 {
        self.hc
    }

    pub fn has_coating(&self) -> bool {
        self.nc > 0
    }

    /// Index of the interface node ρ = R1.
    pub fn interface_index(&self) -> usize {
        self.nb
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    /// The bulk part as a standalone grid.
    pub fn bulk_part(&self) -> RadialGrid {
        RadialGrid::bulk(self.r1, self.nb).expect("bulk part of a valid grid")
    }
}

/// Boundary closure at the outer bulk node of a bulk-only operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryRow {
    /// Flux law k û_ρ(R1) = B û(R1); `coefficient` is B.
    Flux { coefficient: f64 },
    /// Homogeneous Dirichlet value at the node.
    Fixed,
}

/// Tridiagonal operator for one angular mode, acting on the active nodes
/// (nodes pinned to zero by Dirichlet rows are excluded).
///
/// Row j of `apply` computes sub[j] w[j-1] + diag[j] w[j] + sup[j] w[j+1],
/// with out-of-range neighbours treated as zero.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    mass: Vec<f64>,
    /// Grid index of the first active node (always 1: the origin is fixed).
    first: usize,
    /// Total number of grid nodes, including fixed ones.
    grid_len: usize,
}

impl ModeOperator {
    pub fn n_active(&self) -> usize {
        self.diag.len()
    }

    pub fn first_active(&self) -> usize {
        self.first
    }

    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn bands(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.sub, &self.diag, &self.sup)
    }

    /// L w on the active nodes.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let n = self.n_active();
        assert_eq!(w.len(), n);
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

    /// Mass-weighted inner product Σ m_j a_j b_j.
    pub fn m_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.mass
            .iter()
            .zip(a)
            .zip(b)
            .map(|((m, x), y)| m * x * y)
            .sum()
    }

    pub fn m_norm(&self, a: &[f64]) -> f64 {
        self.m_inner(a, a).sqrt()
    }

    /// Quadratic form ⟨-L w, w⟩_M (the discrete energy of the mode).
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        let lw = self.apply(w);
        -self.m_inner(&lw, w)
    }
}

/// Coated two-domain operator for one mode.
///
/// `angular` is the dimensionless angular factor λ_l R1² (l(l+1) on the
/// sphere). Unknowns run from the first interior node to the last shell
/// node before the outer Dirichlet boundary.
pub fn assemble_coated_mode(
    grid: &RadialGrid,
    k: f64,
    sigma: f64,
    mu: f64,
    angular: f64,
) -> ModeOperator {
    assert!(grid.has_coating(), "coated assembly needs a shell grid");
    let (hb, hc, r1) = (grid.hb, grid.hc, grid.r1);
    let last = grid.len() - 2; // outer node is fixed to zero
    let n = last; // active nodes 1..=last
    let mut op = ModeOperator {
        sub: vec![0.0; n],
        diag: vec![0.0; n],
        sup: vec![0.0; n],
        mass: vec![0.0; n],
        first: 1,
        grid_len: grid.len(),
    };
    for j in 1..=last {
        let row = j - 1;
        let rho = grid.node(j);
        if j < grid.nb {
            op.sub[row] = k / (hb * hb);
            op.sup[row] = k / (hb * hb);
            op.diag[row] = -2.0 * k / (hb * hb) - k * angular / (rho * rho);
            op.mass[row] = hb;
        } else if j == grid.nb {
            let span = hb + hc;
            op.sub[row] = 2.0 * k / (span * hb);
            op.sup[row] = 2.0 * sigma / (span * hc);
            op.diag[row] = -op.sub[row] - op.sup[row] + 2.0 * (k - sigma) / (span * r1)
                - angular * (hb * k + hc * mu) / (span * r1 * r1);
            op.mass[row] = 0.5 * span;
        } else {
            op.sub[row] = sigma / (hc * hc);
            op.sup[row] = sigma / (hc * hc);
            op.diag[row] = -2.0 * sigma / (hc * hc) - mu * angular / (rho * rho);
            op.mass[row] = hc;
        }
    }
    op
}

/// Bulk-only operator for one mode with the given closure at ρ = R1.
pub fn assemble_bulk_mode(
    grid: &RadialGrid,
    k: f64,
    angular: f64,
    boundary: BoundaryRow,
) -> ModeOperator {
    assert!(
        !grid.has_coating(),
        "bulk assembly expects a bulk-only grid"
    );
    let (hb, r1) = (grid.hb, grid.r1);
    let last = match boundary {
        BoundaryRow::Flux { .. } => grid.nb,
        BoundaryRow::Fixed => grid.nb - 1,
    };
    let n = last;
    let mut op = ModeOperator {
        sub: vec![0.0; n],
        diag: vec![0.0; n],
        sup: vec![0.0; n],
        mass: vec![0.0; n],
        first: 1,
        grid_len: grid.len(),
    };
    for j in 1..=last {
        let row = j - 1;
        let rho = grid.node(j);
        if j < grid.nb {
            op.sub[row] = k / (hb * hb);
            op.sup[row] = k / (hb * hb);
            op.diag[row] = -2.0 * k / (hb * hb) - k * angular / (rho * rho);
            op.mass[row] = hb;
        } else {
            // flux row: ghost elimination of k û_ρ = B û with the
            // second derivative taken from the PDE
            let b = match boundary {
                BoundaryRow::Flux { coefficient } => coefficient,
                BoundaryRow::Fixed => unreachable!(),
            };
            op.sub[row] = 2.0 * k / (hb * hb);
            op.diag[row] = -2.0 * k / (hb * hb) + 2.0 * (b + k / r1) / hb - k * angular / (r1 * r1);
            op.mass[row] = 0.5 * hb;
        }
    }
    op
}

/// Single-domain operator with conductivity `k` on an arbitrary composite
/// grid (general nonuniform three-point stencil, outer Dirichlet). Used as
/// the independent comparator for the isotropic-coating identity.
pub fn assemble_isotropic_mode(grid: &RadialGrid, k: f64, angular: f64) -> ModeOperator {
    let last = grid.len() - 2;
    let n = last;
    let mut op = ModeOperator {
        sub: vec![0.0; n],
        diag: vec![0.0; n],
        sup: vec![0.0; n],
        mass: vec![0.0; n],
        first: 1,
        grid_len: grid.len(),
    };
    for j in 1..=last {
        let row = j - 1;
        let rho = grid.node(j);
        let h_minus = grid.node(j) - grid.node(j - 1);
        let h_plus = grid.node(j + 1) - grid.node(j);
        let span = h_minus + h_plus;
        op.sub[row] = 2.0 * k / (span * h_minus);
        op.sup[row] = 2.0 * k / (span * h_plus);
        op.diag[row] = -op.sub[row] - op.sup[row] - k * angular / (rho * rho);
        op.mass[row] = 0.5 * span;
    }
    op
}

/// Prefactored tridiagonal system (Thomas algorithm).
#[derive(Debug, Clone)]
pub struct TridiagFactor {
    lower: Vec<f64>,
    pivot_inv: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagFactor {
    pub fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut lower = vec![0.0; n];
        let mut pivot_inv = vec![0.0; n];
        let upper = sup.to_vec();
        let mut pivot = diag[0];
        for j in 0..n {
            if j > 0 {
                let l = sub[j] * pivot_inv[j - 1];
                lower[j] = l;
                pivot = diag[j] - l * upper[j - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SolverFailure(format!(
                    "tridiagonal pivot breakdown at row {j} (pivot {pivot})"
                )));
            }
            pivot_inv[j] = 1.0 / pivot;
        }
        Ok(Self {
            lower,
            pivot_inv,
            upper,
        })
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        debug_assert_eq!(n, self.pivot_inv.len());
        for j in 1..n {
            rhs[j] -= self.lower[j] * rhs[j - 1];
        }
        rhs[n - 1] *= self.pivot_inv[n - 1];
        for j in (0..n - 1).rev() {
            rhs[j] = (rhs[j] - self.upper[j] * rhs[j + 1]) * self.pivot_inv[j];
        }
    }
}

/// θ-scheme stepper for one mode: (I - θ dt L) w⁺ = (I + (1-θ) dt L) w.
#[derive(Debug, Clone)]
pub struct ThetaStepper {
    factor: TridiagFactor,
    exp_sub: Vec<f64>,
    exp_diag: Vec<f64>,
    exp_sup: Vec<f64>,
}

impl ThetaStepper {
    pub fn new(op: &ModeOperator, dt: f64, theta: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {theta}"
            )));
        }
        let n = op.n_active();
        let (sub, diag, sup) = op.bands();
        let imp_sub: Vec<f64> = sub.iter().map(|s| -theta * dt * s).collect();
        let imp_diag: Vec<f64> = diag.iter().map(|d| 1.0 - theta * dt * d).collect();
        let imp_sup: Vec<f64> = sup.iter().map(|s| -theta * dt * s).collect();
        let factor = TridiagFactor::new(&imp_sub, &imp_diag, &imp_sup)?;
        let c = (1.0 - theta) * dt;
        let exp_sub = sub.iter().map(|s| c * s).collect();
        let exp_diag = diag.iter().map(|d| 1.0 + c * d).collect();
        let exp_sup = sup.iter().map(|s| c * s).collect();
        let _ = n;
        Ok(Self {
            factor,
            exp_sub,
            exp_diag,
            exp_sup,
        })
    }

    /// Advance the active slice one step in place, using `scratch` as the
    /// right-hand-side buffer.
    pub fn step(&self, w: &mut [f64], scratch: &mut Vec<f64>) {
        let n = w.len();
        scratch.clear();
        scratch.resize(n, 0.0);
        for j in 0..n {
            let mut v = self.exp_diag[j] * w[j];
            if j > 0 {
                v += self.exp_sub[j] * w[j - 1];
            }
            if j + 1 < n {
                v += self.exp_sup[j] * w[j + 1];
            }
            scratch[j] = v;
        }
        self.factor.solve_in_place(scratch);
        w.copy_from_slice(scratch);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }

    #[test]
    fn grid_constructors_reject_degenerate_input() {
        assert!(RadialGrid::bulk(0.0, 8).is_err());
        assert!(RadialGrid::bulk(1.0, 1).is_err());
        assert!(RadialGrid::coated(1.0, 0.0, 8, 4).is_err());
        assert!(RadialGrid::coated(1.0, 0.1, 8, 0).is_err());
        assert!(RadialGrid::coated(1.0, 1e-18, 8, 4).is_err());
    }

    #[test]
    fn coated_grid_shares_interface_node() {
        let g = RadialGrid::coated(1.0, 0.1, 10, 4).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.node(g.interface_index()), 1.0);
        assert!((g.node(g.len() - 1) - 1.1).abs() < 1e-14);
        assert_eq!(g.bulk_part().len(), 11);
    }

    #[test]
    fn constants_are_discretely_harmonic_for_the_radial_mode() {
        // û ≡ c means w = cρ, which must be annihilated by every row not
        // adjacent to the outer Dirichlet boundary, interface included.
        let g = RadialGrid::coated(1.0, 0.2, 16, 8).unwrap();
        let op = assemble_coated_mode(&g, 1.0, 0.35, 7.0, 0.0);
        let w: Vec<f64> = (1..g.len() - 1).map(|j| 2.5 * g.node(j)).collect();
        let lw = op.apply(&w);
        let interior = &lw[..lw.len() - 1];
        assert!(max_abs(interior) <= 1e-11, "residual {}", max_abs(interior));
    }

    #[test]
    fn solid_harmonic_is_annihilated_in_the_bulk() {
        // û = ρ for the first mode (a = 2) is harmonic, so bulk rows give 0.
        let g = RadialGrid::coated(1.0, 0.1, 32, 8).unwrap();
        let op = assemble_coated_mode(&g, 1.0, 3.0, 0.5, 2.0);
        let w: Vec<f64> = (1..g.len() - 1).map(|j| g.node(j) * g.node(j)).collect();
        let lw = op.apply(&w);
        let bulk_interior = &lw[..g.interface_index() - 1];
        assert!(max_abs(bulk_interior) <= 1e-10);
    }

    #[test]
    fn isotropic_coating_collapses_to_single_domain_rows() {
        for (nb, nc) in [(16, 16), (24, 7)] {
            let g = RadialGrid::coated(2.0, 0.5, nb, nc).unwrap();
            let k = 1.3;
            let coated = assemble_coated_mode(&g, k, k, k, 6.0);
            let single = assemble_isotropic_mode(&g, k, 6.0);
            let (cs, cd, cu) = coated.bands();
            let (ss, sd, su) = single.bands();
            for j in 0..coated.n_active() {
                assert!((cs[j] - ss[j]).abs() <= 1e-12 * ss[j].abs().max(1.0));
                assert!((cd[j] - sd[j]).abs() <= 1e-12 * sd[j].abs().max(1.0));
                assert!((cu[j] - su[j]).abs() <= 1e-12 * su[j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn operators_are_mass_symmetric() {
        let g = RadialGrid::coated(1.5, 0.3, 12, 5).unwrap();
        let op = assemble_coated_mode(&g, 1.0, 0.01, 40.0, 6.0);
        let n = op.n_active();
        let a: Vec<f64> = (0..n).map(|j| ((j * 7 + 3) % 11) as f64 - 5.0).collect();
        let b: Vec<f64> = (0..n).map(|j| ((j * 5 + 1) % 13) as f64 - 6.0).collect();
        let la = op.apply(&a);
        let lb = op.apply(&b);
        let x = op.m_inner(&la, &b);
        let y = op.m_inner(&a, &lb);
        assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));

        let bulk = RadialGrid::bulk(2.0, 20).unwrap();
        let op = assemble_bulk_mode(&bulk, 0.7, 2.0, BoundaryRow::Flux { coefficient: -0.4 });
        let n = op.n_active();
        let a: Vec<f64> = (0..n).map(|j| (j as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..n).map(|j| (j as f64 * 0.61).cos()).collect();
        let la = op.apply(&a);
        let lb = op.apply(&b);
        assert!((op.m_inner(&la, &b) - op.m_inner(&a, &lb)).abs() <= 1e-10);
    }

    #[test]
    fn neumann_row_keeps_constants_steady() {
        let bulk = RadialGrid::bulk(3.0, 24).unwrap();
        let op = assemble_bulk_mode(&bulk, 2.0, 0.0, BoundaryRow::Flux { coefficient: 0.0 });
        let w: Vec<f64> = (1..=bulk.bulk_intervals()).map(|j| bulk.node(j)).collect();
        assert!(max_abs(&op.apply(&w)) <= 1e-12);
    }

    #[test]
    fn thomas_solves_against_matrix_action() {
        let n = 40;
        let sub: Vec<f64> = (0..n)
            .map(|j| if j == 0 { 0.0 } else { 1.0 + 0.01 * j as f64 })
            .collect();
        let sup: Vec<f64> = (0..n)
            .map(|j| {
                if j + 1 == n {
                    0.0
                } else {
                    0.8 - 0.005 * j as f64
                }
            })
            .collect();
        let diag: Vec<f64> = (0..n).map(|j| 4.0 + (j as f64 * 0.7).sin()).collect();
        let factor = TridiagFactor::new(&sub, &diag, &sup).unwrap();
        let x_true: Vec<f64> = (0..n).map(|j| (j as f64 * 0.3).cos()).collect();
        let mut rhs = vec![0.0; n];
        for j in 0..n {
            rhs[j] = diag[j] * x_true[j]
                + if j > 0 { sub[j] * x_true[j - 1] } else { 0.0 }
                + if j + 1 < n {
                    sup[j] * x_true[j + 1]
                } else {
                    0.0
                };
        }
        factor.solve_in_place(&mut rhs);
        let err = rhs
            .iter()
            .zip(&x_true)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12);
    }

    #[test]
    fn theta_stepper_validates_parameters() {
        let g = RadialGrid::bulk(1.0, 8).unwrap();
        let op = assemble_bulk_mode(&g, 1.0, 0.0, BoundaryRow::Fixed);
        assert!(ThetaStepper::new(&op, 0.0, 1.0).is_err());
        assert!(ThetaStepper::new(&op, 1e-2, 1.5).is_err());
        assert!(ThetaStepper::new(&op, 1e-2, 1.0).is_ok());
    }
}
