//! Radial-grid × modal-coefficient representation of axisymmetric fields.
//!
//! A field u(ρ, s) = Σ_l û_l(ρ) e_l(s) is stored per mode through the
//! substituted radial profile w_l = ρ û_l (see [`crate::operator`]). Norms
//! are volume-weighted: the squared L² norm integrates û² against ρ² dρ ds,
//! evaluated exactly for the piecewise-linear-in-û reconstruction, so norm
//! identities on polynomial data hold to machine precision.

use crate::operator::RadialGrid;
use crate::surface::{SpectrumKey, SurfaceKind, SurfaceSpectrum};
use crate::{Error, Result};

/// Norm/restriction region of the composite domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Bulk,
    Coating,
    All,
}

#[derive(Debug, Clone)]
pub struct ModalField {
    grid: RadialGrid,
    key: SpectrumKey,
    pub time: f64,
    /// data[mode][node] = w = ρ û, including pinned boundary nodes.
    data: Vec<Vec<f64>>,
}

impl ModalField {
    pub fn zeros(grid: &RadialGrid, spectrum: &SurfaceSpectrum) -> Self {
        Self {
            grid: grid.clone(),
            key: spectrum.key(),
            time: 0.0,
            data: vec![vec![0.0; grid.len()]; spectrum.mode_len()],
        }
    }

    /// Build a field from point samples u(ρ_j, x_q) on the tensor grid of
    /// radial nodes and surface quadrature nodes.
    pub fn from_samples(
        grid: &RadialGrid,
        spectrum: &SurfaceSpectrum,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut field = Self::zeros(grid, spectrum);
        let mut samples = vec![0.0; spectrum.node_len()];
        for j in 1..grid.len() {
            let rho = grid.node(j);
            for (s, &x) in samples.iter_mut().zip(spectrum.nodes()) {
                *s = f(rho, x);
            }
            let coeffs = spectrum.forward_transform(&samples)?;
            for (l, &g) in coeffs.values().iter().enumerate() {
                field.data[l][j] = rho * g;
            }
        }
        Ok(field)
    }

    /// Build a field from per-mode radial amplitude profiles û_l(ρ).
    pub fn from_modal_profiles(
        grid: &RadialGrid,
        spectrum: &SurfaceSpectrum,
        profiles: &[(usize, &dyn Fn(f64) -> f64)],
    ) -> Result<Self> {
        let mut field = Self::zeros(grid, spectrum);
        for &(mode, f) in profiles {
            if mode >= spectrum.mode_len() {
                return Err(Error::InvalidParameter(format!(
                    "mode {mode} outside the retained range 0..{}",
                    spectrum.mode_len()
                )));
            }
            for j in 0..grid.len() {
                let rho = grid.node(j);
                field.data[mode][j] = rho * f(rho);
            }
        }
        Ok(field)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn key(&self) -> SpectrumKey {
        self.key
    }

    pub fn mode_len(&self) -> usize {
        self.data.len()
    }

    pub fn mode_w(&self, mode: usize) -> &[f64] {
        &self.data[mode]
    }

    pub fn mode_w_mut(&mut self, mode: usize) -> &mut [f64] {
        &mut self.data[mode]
    }

    /// Modal amplitude û_l at node j; the origin value is the w/ρ limit.
    pub fn amplitude(&self, mode: usize, j: usize) -> f64 {
        if j == 0 {
            if mode == 0 && self.grid.len() > 1 {
                self.data[0][1] / self.grid.node(1)
            } else {
                0.0
            }
        } else {
            self.data[mode][j] / self.grid.node(j)
        }
    }

    /// Per-node amplitudes of one mode.
    pub fn amplitudes(&self, mode: usize) -> Vec<f64> {
        (0..self.grid.len())
            .map(|j| self.amplitude(mode, j))
            .collect()
    }

    /// Drop the coating nodes; comparisons against bulk-only fields happen
    /// through this restriction.
    pub fn bulk_restriction(&self) -> ModalField {
        if !self.grid.has_coating() {
            return self.clone();
        }
        let nb = self.grid.interface_index();
        ModalField {
            grid: self.grid.bulk_part(),
            key: self.key,
            time: self.time,
            data: self.data.iter().map(|row| row[..=nb].to_vec()).collect(),
        }
    }

    /// Nodewise difference of two fields on the same grid and spectrum.
    pub fn difference(&self, other: &ModalField) -> Result<ModalField> {
        if self.key != other.key {
            return Err(Error::SpectrumMismatch(
                "fields built on different spectra".into(),
            ));
        }
        if self.grid != other.grid {
            return Err(Error::InvalidParameter(
                "fields live on different radial grids".into(),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(ModalField {
            grid: self.grid.clone(),
            key: self.key,
            time: self.time,
            data,
        })
    }

    /// Volume-weighted L² norm over the requested region.
    pub fn l2_norm(&self, region: Region) -> f64 {
        let (c0, c1) = self.region_cells(region);
        let power = match self.key.kind {
            SurfaceKind::Sphere => 2,
            SurfaceKind::Circle => 1,
        };
        let r1 = self.grid.r1();
        let weight = match self.key.kind {
            SurfaceKind::Sphere => 1.0 / (r1 * r1),
            SurfaceKind::Circle => 1.0 / r1,
        };
        let mut total = 0.0;
        for mode in 0..self.mode_len() {
            for cell in c0..c1 {
                let a = self.grid.node(cell);
                let b = self.grid.node(cell + 1);
                let ua = self.amplitude(mode, cell);
                let ub = self.amplitude(mode, cell + 1);
                total += cell_integral(a, b, ua, ub, power);
            }
        }
        (weight * total).sqrt()
    }

    fn region_cells(&self, region: Region) -> (usize, usize) {
        let nb = if self.grid.has_coating() {
            self.grid.interface_index()
        } else {
            self.grid.len() - 1
        };
        match region {
            Region::Bulk => (0, nb),
            Region::Coating => (nb, self.grid.len() - 1),
            Region::All => (0, self.grid.len() - 1),
        }
    }

    /// Apply a pointwise map to the physical values on the tensor grid of
    /// active radial nodes × surface quadrature nodes, then project back
    /// onto the retained modes.
    pub fn apply_pointwise(
        &mut self,
        spectrum: &SurfaceSpectrum,
        first_node: usize,
        last_node: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<()> {
        spectrum.check_key(self.key)?;
        let n_modes = self.mode_len();
        let n_q = spectrum.node_len();
        let mut values = vec![0.0; n_q];
        let mut coeffs = vec![0.0; n_modes];
        for j in first_node..=last_node {
            let rho = self.grid.node(j);
            values.iter_mut().for_each(|v| *v = 0.0);
            for l in 0..n_modes {
                let amp = self.data[l][j] / rho;
                if amp != 0.0 {
                    for (v, e) in values.iter_mut().zip(spectrum.basis_row(l)) {
                        *v += amp * e;
                    }
                }
            }
            for v in values.iter_mut() {
                *v = f(*v);
                if !v.is_finite() {
                    return Err(Error::SolverFailure(format!(
                        "pointwise update produced a non-finite value at ρ = {rho}"
                    )));
                }
            }
            for (l, c) in coeffs.iter_mut().enumerate() {
                *c = spectrum
                    .basis_row(l)
                    .iter()
                    .zip(&values)
                    .zip(spectrum.weights())
                    .map(|((e, v), w)| w * e * v)
                    .sum();
            }
            for l in 0..n_modes {
                self.data[l][j] = rho * coeffs[l];
            }
        }
        Ok(())
    }

    /// Extremes of the reconstructed physical values over the sample grid.
    /// Returns NaN bounds if any value is not finite.
    pub fn value_range(&self, spectrum: &SurfaceSpectrum) -> Result<(f64, f64)> {
        spectrum.check_key(self.key)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut finite = true;
        for j in 0..self.grid.len() {
            for q in 0..spectrum.node_len() {
                let mut v = 0.0;
                for l in 0..self.mode_len() {
                    v += self.amplitude(l, j) * spectrum.basis_row(l)[q];
                }
                if !v.is_finite() {
                    finite = false;
                }
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !finite {
            return Ok((f64::NAN, f64::NAN));
        }
        Ok((lo, hi))
    }

    /// Largest |w| over modes `from_mode..` — used to confirm that radial
    /// data stays radial.
    pub fn higher_mode_magnitude(&self, from_mode: usize) -> f64 {
        self.data[from_mode.min(self.mode_len())..]
            .iter()
            .flat_map(|row| row.iter())
            .fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }
}

/// ∫_a^b û(ρ)² ρ^power dρ for û linear on the cell (3-point Gauss rule,
/// exact through degree 5).
fn cell_integral(a: f64, b: f64, ua: f64, ub: f64, power: i32) -> f64 {
    // ±√(3/5) with weights 5/9, 8/9, 5/9
    const NODES: [f64; 3] = [-0.7745966692414834, 0.0, 0.7745966692414834];
    const WEIGHTS: [f64; 3] = [0.5555555555555556, 0.8888888888888889, 0.5555555555555556];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS) {
        let rho = mid + half * x;
        let s = 0.5 * (x + 1.0);
        let u = ua + s * (ub - ua);
        sum += w * u * u * rho.powi(power);
    }
    half * sum
}
