//! Interface geometry and its surface-Laplacian spectrum.
//!
//! Two geometries with analytically known spectra are supported: the sphere
//! of radius `R1` restricted to axisymmetric fields (Legendre modes in
//! cos φ, eigenvalues l(l+1)/R1²) and the circle of radius `R1` as a
//! dimension-reduced analogue (Fourier modes, eigenvalues (n/R1)²).
//!
//! All modal transforms go through surface quadrature: Gauss–Legendre in
//! cos φ on the sphere (exact for polynomial products up to the retained
//! degree), the uniform trapezoid rule on the circle (exact for the retained
//! trigonometric band). Quadrature weights carry the full surface measure,
//! so `forward_transform` returns genuine surface inner products.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Supported interface geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SurfaceKind {
    /// Sphere of radius `R1`, axisymmetric fields only.
    #[serde(rename = "sphere")]
    Sphere,
    /// Circle of radius `R1` (2-d cross-check analogue).
    #[serde(rename = "circle")]
    Circle,
}

impl std::fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SurfaceKind::Sphere => write!(f, "sphere"),
            SurfaceKind::Circle => write!(f, "circle"),
        }
    }
}

/// Cheap identity tag used to detect mixing of objects built on different
/// surfaces (the eigenbasis is only compatible with itself).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectrumKey {
    pub kind: SurfaceKind,
    radius_bits: u64,
    pub mode_count: usize,
}

impl SpectrumKey {
    pub fn radius(&self) -> f64 {
        f64::from_bits(self.radius_bits)
    }
}

/// Interface geometry with eigenpairs, quadrature and curvature data.
///
/// `mode_count` is the highest retained harmonic index; the sphere carries
/// `mode_count + 1` modes, the circle `2 * mode_count + 1` (paired sin/cos).
#[derive(Debug, Clone)]
pub struct SurfaceSpectrum {
    kind: SurfaceKind,
    radius: f64,
    mode_count: usize,
    eigenvalues: Vec<f64>,
    /// Quadrature parameter per node: cos φ on the sphere, θ on the circle.
    nodes: Vec<f64>,
    /// Surface-measure quadrature weights (they include the 2π factor and
    /// the radius powers of the surface element).
    weights: Vec<f64>,
    /// basis[n][q] = e_n evaluated at node q, orthonormal in L²(Γ).
    basis: Vec<Vec<f64>>,
    area: f64,
    mean_curvature: f64,
    gaussian_curvature: f64,
}

/// Modal coefficients of a surface field, g_n = ∫_Γ e_n g ds.
#[derive(Debug, Clone)]
pub struct ModalCoeffs {
    values: Vec<f64>,
    key: SpectrumKey,
}

impl ModalCoeffs {
    pub fn new(values: Vec<f64>, spectrum: &SurfaceSpectrum) -> Result<Self> {
        if values.len() != spectrum.mode_len() {
            return Err(Error::SizeMismatch {
                expected: spectrum.mode_len(),
                got: values.len(),
            });
        }
        Ok(Self {
            values,
            key: spectrum.key(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn key(&self) -> SpectrumKey {
        self.key
    }

    /// Modal mass Σ g_n², equal to the squared L²(Γ) norm by Parseval.
    pub fn squared_mass(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum()
    }
}

impl SurfaceSpectrum {
    /// Build the spectrum for `kind` with radius `radius` and highest
    /// retained harmonic `mode_count`.
    pub fn build(kind: SurfaceKind, radius: f64, mode_count: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "surface radius must be positive and finite, got {radius}"
            )));
        }
        match kind {
            SurfaceKind::Sphere => Self::build_sphere(radius, mode_count),
            SurfaceKind::Circle => Self::build_circle(radius, mode_count),
        }
    }

    fn build_sphere(radius: f64, l_max: usize) -> Result<Self> {
        let n_nodes = l_max + 1;
        let (gl_nodes, gl_weights) = gauss_legendre(n_nodes);
        let area = 4.0 * PI * radius * radius;
        // ds = R1² dω, axisymmetric: ∫ ds = 2π R1² ∫ dx over x = cos φ.
        let weights: Vec<f64> = gl_weights
            .iter()
            .map(|w| w * 2.0 * PI * radius * radius)
            .collect();
        let eigenvalues: Vec<f64> = (0..=l_max)
            .map(|l| (l * (l + 1)) as f64 / (radius * radius))
            .collect();
        let mut basis = Vec::with_capacity(l_max + 1);
        for l in 0..=l_max {
            let norm = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt() / radius;
            basis.push(
                gl_nodes
                    .iter()
                    .map(|&x| norm * legendre(l, x))
                    .collect::<Vec<f64>>(),
            );
        }
        Ok(Self {
            kind: SurfaceKind::Sphere,
            radius,
            mode_count: l_max,
            eigenvalues,
            nodes: gl_nodes,
            weights,
            basis,
            area,
            mean_curvature: 1.0 / radius,
            gaussian_curvature: 1.0 / (radius * radius),
        })
    }

    fn build_circle(radius: f64, n_max: usize) -> Result<Self> {
        // Uniform rule with 2n_max + 1 points integrates the trigonometric
        // band of degree 2n_max exactly, which covers all basis products,
        // and makes the analysis/synthesis pair square and invertible.
        let n_nodes = 2 * n_max + 1;
        let nodes: Vec<f64> = (0..n_nodes)
            .map(|q| 2.0 * PI * q as f64 / n_nodes as f64)
            .collect();
        let weights = vec![2.0 * PI * radius / n_nodes as f64; n_nodes];
        let area = 2.0 * PI * radius;
        let mut eigenvalues = vec![0.0];
        let mut basis = vec![vec![1.0 / area.sqrt(); n_nodes]];
        let pair_norm = 1.0 / (PI * radius).sqrt();
        for n in 1..=n_max {
            let lambda = (n as f64 / radius).powi(2);
            eigenvalues.push(lambda);
            eigenvalues.push(lambda);
            basis.push(
                nodes
                    .iter()
                    .map(|&t| pair_norm * (n as f64 * t).cos())
                    .collect(),
            );
            basis.push(
                nodes
                    .iter()
                    .map(|&t| pair_norm * (n as f64 * t).sin())
                    .collect(),
            );
        }
        Ok(Self {
            kind: SurfaceKind::Circle,
            radius,
            mode_count: n_max,
            eigenvalues,
            nodes,
            weights,
            basis,
            area,
            // Half the curve curvature, so 1 + 2Hr + κr² reduces to the
            // 2-d shell Jacobian 1 + r/R1.
            mean_curvature: 0.5 / radius,
            gaussian_curvature: 0.0,
        })
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Highest retained harmonic index.
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    /// Number of retained modes (sphere: L+1, circle: 2L+1).
    pub fn mode_len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn node_len(&self) -> usize {
        self.nodes.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// e_n evaluated on the quadrature nodes.
    pub fn basis_row(&self, mode: usize) -> &[f64] {
        &self.basis[mode]
    }

    /// e_n at an arbitrary angular parameter (cos φ on the sphere, θ on the
    /// circle); used for dense evaluation off the quadrature grid.
    pub fn basis_value(&self, mode: usize, param: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => {
                let norm = ((2 * mode + 1) as f64 / (4.0 * PI)).sqrt() / self.radius;
                norm * legendre(mode, param)
            }
            SurfaceKind::Circle => {
                if mode == 0 {
                    1.0 / self.area.sqrt()
                } else {
                    let n = mode.div_ceil(2) as f64;
                    let norm = 1.0 / (PI * self.radius).sqrt();
                    if mode % 2 == 1 {
                        norm * (n * param).cos()
                    } else {
                        norm * (n * param).sin()
                    }
                }
            }
        }
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn mean_curvature(&self) -> f64 {
        self.mean_curvature
    }

    pub fn gaussian_curvature(&self) -> f64 {
        self.gaussian_curvature
    }

    pub fn key(&self) -> SpectrumKey {
        SpectrumKey {
            kind: self.kind,
            radius_bits: self.radius.to_bits(),
            mode_count: self.mode_count,
        }
    }

    /// Modal analysis of samples given on the quadrature nodes:
    /// g_n = Σ_q w_q e_n(x_q) g(x_q).
    pub fn forward_transform(&self, samples: &[f64]) -> Result<ModalCoeffs> {
        if samples.len() != self.node_len() {
            return Err(Error::SizeMismatch {
                expected: self.node_len(),
                got: samples.len(),
            });
        }
        let values = self
            .basis
            .iter()
            .map(|row| {
                row.iter()
                    .zip(samples)
                    .zip(&self.weights)
                    .map(|((e, g), w)| w * e * g)
                    .sum()
            })
            .collect();
        Ok(ModalCoeffs {
            values,
            key: self.key(),
        })
    }

    /// Pointwise synthesis Σ_n g_n e_n on the quadrature nodes.
    pub fn inverse_transform(&self, coeffs: &ModalCoeffs) -> Result<Vec<f64>> {
        self.check_key(coeffs.key)?;
        let mut samples = vec![0.0; self.node_len()];
        for (g, row) in coeffs.values.iter().zip(&self.basis) {
            for (s, e) in samples.iter_mut().zip(row) {
                *s += g * e;
            }
        }
        Ok(samples)
    }

    /// Shell volume element factor 1 + 2Hr + κr² at signed distance `r`
    /// from the interface.
    pub fn volume_factor(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "shell offset must be nonnegative, got {r}"
            )));
        }
        Ok(1.0 + 2.0 * self.mean_curvature * r + self.gaussian_curvature * r * r)
    }

    pub fn check_key(&self, key: SpectrumKey) -> Result<()> {
        if key != self.key() {
            return Err(Error::SpectrumMismatch(format!(
                "object built on {} R={} modes={}, spectrum is {} R={} modes={}",
                key.kind,
                key.radius(),
                key.mode_count,
                self.kind,
                self.radius,
                self.mode_count
            )));
        }
        Ok(())
    }
}

/// Legendre polynomial P_l(x) by the three-term recurrence.
pub fn legendre(l: usize, x: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => x,
        _ => {
            let mut p_prev = 1.0;
            let mut p = x;
            for k in 2..=l {
                let kf = k as f64;
                let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
                p_prev = p;
                p = p_next;
            }
            p
        }
    }
}

/// P_l(x) together with its derivative, for the Newton root refinement.
fn legendre_with_derivative(l: usize, x: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=l {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // P'_l from the lower-degree pair.
    let dp = l as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let step = p / dp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
