//! Dirichlet-to-Neumann map of the rescaled coating layer.
//!
//! For boundary data g on Γ and layer depth h, the harmonic layer profile
//! Ψ solves Ψ_RR + Δ_Γ Ψ = 0 on Γ × (0, h) with Ψ(·, 0) = g, Ψ(·, h) = 0,
//! and the map sends g to Ψ_R(·, 0). In the surface eigenbasis it is
//! diagonal with multipliers
//!
//! ```text
//!   m_n = -√λ_n · coth(√λ_n h)      (λ_n > 0, h finite)
//!   m_0 = -1/h                       (constant mode, λ → 0 limit)
//!   m_n = -√λ_n,  m_0 = 0            (h = ∞: square root of -Δ_Γ, negated)
//! ```
//!
//! The deep-layer limit is therefore the negated fractional surface
//! Laplacian of order 1/2. Multipliers are evaluated through
//! coth(x) = (1 + e^{-2x}) / (1 - e^{-2x}), which neither overflows at
//! large √λ h nor loses the limit multiplier -√λ.

use crate::surface::{ModalCoeffs, SpectrumKey, SurfaceSpectrum};
use crate::{Error, Result};

/// Layer depth: finite, or the deep-layer limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Depth {
    Finite(f64),
    Infinite,
}

impl Depth {
    pub fn is_finite(&self) -> bool {
        matches!(self, Depth::Finite(_))
    }

    fn validated(self) -> Result<Self> {
        if let Depth::Finite(h) = self {
            if !(h > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "layer depth must be positive, got {h}"
                )));
            }
            if !h.is_finite() {
                return Ok(Depth::Infinite);
            }
        }
        Ok(self)
    }
}

impl std::str::FromStr for Depth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "infinite" => Ok(Depth::Infinite),
            other => {
                let h: f64 = other.parse().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse depth '{other}'"))
                })?;
                Depth::Finite(h).validated()
            }
        }
    }
}

impl std::fmt::Display for Depth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Depth::Finite(h) => write!(f, "{h}"),
            Depth::Infinite => write!(f, "inf"),
        }
    }
}

impl serde::Serialize for Depth {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Depth::Finite(h) => serializer.serialize_f64(*h),
            Depth::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Depth {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::Number(n) => {
                let h = n
                    .as_f64()
                    .ok_or_else(|| D::Error::custom("depth must be a number or \"inf\""))?;
                Depth::Finite(h)
                    .validated()
                    .map_err(|e| D::Error::custom(e.to_string()))
            }
            serde_json::Value::String(s) => s
                .parse()
                .map_err(|e: crate::Error| D::Error::custom(e.to_string())),
            _ => Err(D::Error::custom("depth must be a number or \"inf\"")),
        }
    }
}

/// Per-mode multiplier for eigenvalue `lambda` at depth `depth`.
pub fn multiplier(lambda: f64, depth: Depth) -> f64 {
    let root = lambda.sqrt();
    match depth {
        Depth::Infinite => -root,
        Depth::Finite(h) => {
            if lambda == 0.0 {
                -1.0 / h
            } else {
                let decay = (-2.0 * root * h).exp();
                -root * (1.0 + decay) / (1.0 - decay)
            }
        }
    }
}

/// Diagonal Dirichlet-to-Neumann operator on a fixed surface spectrum.
#[derive(Debug, Clone)]
pub struct DtnOperator {
    depth: Depth,
    key: SpectrumKey,
    multipliers: Vec<f64>,
}

impl DtnOperator {
    pub fn build(spectrum: &SurfaceSpectrum, depth: Depth) -> Result<Self> {
        let depth = depth.validated()?;
        let multipliers = spectrum
            .eigenvalues()
            .iter()
            .map(|&lambda| multiplier(lambda, depth))
            .collect();
        Ok(Self {
            depth,
            key: spectrum.key(),
            multipliers,
        })
    }

    pub fn depth(&self) -> Depth {
        self.depth
    }

    pub fn key(&self) -> SpectrumKey {
        self.key
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    /// Apply the map mode by mode: output_n = m_n g_n.
    pub fn apply(&self, g: &ModalCoeffs) -> Result<ModalCoeffs> {
        if g.key() != self.key {
            return Err(Error::SpectrumMismatch(
                "coefficients do not belong to the operator's spectrum".into(),
            ));
        }
        let mut out = g.clone();
        for (v, m) in out.values_mut().iter_mut().zip(&self.multipliers) {
            *v *= m;
        }
        Ok(out)
    }

    /// ⟨J[g₁], g₂⟩ on Γ, evaluated in modal space.
    pub fn boundary_form(&self, g1: &ModalCoeffs, g2: &ModalCoeffs) -> Result<f64> {
        if g1.key() != self.key || g2.key() != self.key {
            return Err(Error::SpectrumMismatch(
                "coefficients do not belong to the operator's spectrum".into(),
            ));
        }
        Ok(self
            .multipliers
            .iter()
            .zip(g1.values())
            .zip(g2.values())
            .map(|((m, a), b)| m * a * b)
            .sum())
    }
}

/// L²(Γ) distance between the maps at two depths applied to `g`:
/// ‖J^a[g] - J^b[g]‖.
pub fn dtn_deviation(
    spectrum: &SurfaceSpectrum,
    a: Depth,
    b: Depth,
    g: &ModalCoeffs,
) -> Result<f64> {
    spectrum.check_key(g.key())?;
    let a = a.validated()?;
    let b = b.validated()?;
    let sum: f64 = spectrum
        .eigenvalues()
        .iter()
        .zip(g.values())
        .map(|(&lambda, &gn)| {
            let diff = (multiplier(lambda, a) - multiplier(lambda, b)) * gn;
            diff * diff
        })
        .sum();
    Ok(sum.sqrt())
}

/// Separated-variables layer profile for boundary data `g` at depth `h`,
/// stored per mode on a depth grid.
#[derive(Debug, Clone)]
pub struct LayerProfile {
    depth: Depth,
    key: SpectrumKey,
    grid: Vec<f64>,
    /// values[n][j] = Ψ_n(grid[j])
    values: Vec<Vec<f64>>,
}

impl LayerProfile {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn depth(&self) -> Depth {
        self.depth
    }

    pub fn mode_profile(&self, mode: usize) -> &[f64] {
        &self.values[mode]
    }

    /// Physical values on the surface quadrature nodes at depth index `j`.
    pub fn synthesize_at(&self, spectrum: &SurfaceSpectrum, j: usize) -> Result<Vec<f64>> {
        spectrum.check_key(self.key)?;
        let coeffs = ModalCoeffs::new(self.values.iter().map(|row| row[j]).collect(), spectrum)?;
        spectrum.inverse_transform(&coeffs)
    }
}

/// Solve the layer problem for data `g`: per mode,
/// Ψ_n(R) = g_n sinh(√λ_n (h - R)) / sinh(√λ_n h), with the linear profile
/// g_n (1 - R/h) for the constant mode; at infinite depth the bounded
/// solution g_n e^{-√λ_n R}.
pub fn solve_layer_profile(
    spectrum: &SurfaceSpectrum,
    g: &ModalCoeffs,
    depth: Depth,
    grid: &[f64],
) -> Result<LayerProfile> {
    spectrum.check_key(g.key())?;
    let depth = depth.validated()?;
    let h = match depth {
        Depth::Finite(h) => h,
        Depth::Infinite => f64::INFINITY,
    };
    for &r in grid {
        if !(0.0..=h).contains(&r) {
            return Err(Error::InvalidParameter(format!(
                "profile grid point {r} outside the layer [0, {h}]"
            )));
        }
    }
    let values = spectrum
        .eigenvalues()
        .iter()
        .zip(g.values())
        .map(|(&lambda, &gn)| {
            grid.iter()
                .map(|&r| gn * profile_shape(lambda, depth, r))
                .collect()
        })
        .collect();
    Ok(LayerProfile {
        depth,
        key: spectrum.key(),
        grid: grid.to_vec(),
        values,
    })
}

/// sinh(√λ(h-R))/sinh(√λh) in exponential form to stay finite for large
/// √λ h; reduces to 1 - R/h as λ → 0 and e^{-√λ R} as h → ∞.
fn profile_shape(lambda: f64, depth: Depth, r: f64) -> f64 {
    let root = lambda.sqrt();
    match depth {
        Depth::Infinite => {
            if lambda == 0.0 {
                1.0
            } else {
                (-root * r).exp()
            }
        }
        Depth::Finite(h) => {
            if lambda == 0.0 {
                1.0 - r / h
            } else {
                (-root * r).exp() * (1.0 - (-2.0 * root * (h - r)).exp())
                    / (1.0 - (-2.0 * root * h).exp())
            }
        }
    }
}
