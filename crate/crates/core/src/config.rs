//! Run configuration shared by the command-line front end and the
//! verification harness. Configurations are plain JSON with the field
//! names used throughout the tooling (`R1`, `L`, `Nb`, `Nc`, `T`, ...).

use crate::coated::CoatingSpec;
use crate::dtn::Depth;
use crate::effective::EbcKind;
use crate::march::Reaction;
use crate::surface::{SurfaceKind, SurfaceSpectrum};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_geometry")]
    pub geometry: SurfaceKind,
    #[serde(rename = "R1", default = "default_r1")]
    pub r1: f64,
    /// Highest retained surface harmonic.
    #[serde(rename = "L", default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(rename = "Nb", default = "default_nb")]
    pub nb: usize,
    #[serde(rename = "Nc", default = "default_nc")]
    pub nc: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(rename = "T", default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_reaction")]
    pub reaction: Reaction,
    /// Initial state preset: `constant:<c>`, `bump`, or `mode1:<a>,<b>`
    /// meaning a + b ρ cos φ.
    #[serde(default = "default_u0")]
    pub u0: String,
    /// Explicit sample times (must be multiples of dt); when absent a
    /// uniform grid of `samples` points over [0, T] is used.
    #[serde(default)]
    pub sample_times: Option<Vec<f64>>,
    #[serde(default)]
    pub samples: Option<usize>,
    /// Effective boundary condition key: neumann, robin, dirichlet,
    /// dtn-inf, dtn-finite, ct-zeroflux, ct-robin.
    #[serde(default)]
    pub ebc: Option<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
}

fn default_geometry() -> SurfaceKind {
    SurfaceKind::Sphere
}
fn default_r1() -> f64 {
    4.0
}
fn default_modes() -> usize {
    16
}
fn default_k() -> f64 {
    1.0
}
fn default_nb() -> usize {
    256
}
fn default_nc() -> usize {
    32
}
fn default_dt() -> f64 {
    1e-3
}
fn default_t_end() -> f64 {
    1.0
}
fn default_theta() -> f64 {
    1.0
}
fn default_reaction() -> Reaction {
    Reaction::Logistic
}
fn default_u0() -> String {
    "mode1:0.5,0.1".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserialises")
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialises")
    }

    pub fn build_spectrum(&self) -> Result<SurfaceSpectrum> {
        SurfaceSpectrum::build(self.geometry, self.r1, self.modes)
    }

    /// Coating parameters; requires sigma, mu and delta to be present.
    pub fn coating_spec(&self) -> Result<CoatingSpec> {
        let require = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::Config(format!("missing required key '{name}'")))
        };
        Ok(CoatingSpec {
            diffusivity: self.k,
            normal_conductivity: require("sigma", self.sigma)?,
            tangent_conductivity: require("mu", self.mu)?,
            thickness: require("delta", self.delta)?,
        })
    }

    pub fn parse_u0(&self) -> Result<InitialPreset> {
        self.u0.parse()
    }

    /// Effective boundary condition from the `ebc`/`alpha`/`gamma` keys.
    pub fn parse_ebc(&self) -> Result<EbcKind> {
        let key = self
            .ebc
            .as_deref()
            .ok_or_else(|| Error::Config("missing required key 'ebc'".into()))?;
        let alpha = || {
            self.alpha
                .ok_or_else(|| Error::Config(format!("ebc '{key}' needs 'alpha'")))
        };
        let gamma = || {
            self.gamma
                .ok_or_else(|| Error::Config(format!("ebc '{key}' needs 'gamma'")))
        };
        let ebc = match key {
            "neumann" => EbcKind::Neumann,
            "robin" => EbcKind::Robin { alpha: alpha()? },
            "dirichlet" => EbcKind::Dirichlet,
            "dtn-inf" => EbcKind::DtnRobin {
                gamma: gamma()?,
                depth: Depth::Infinite,
            },
            // the finite depth is the exact parameter ratio γ/α
            "dtn-finite" => EbcKind::DtnRobin {
                gamma: gamma()?,
                depth: Depth::Finite(gamma()? / alpha()?),
            },
            "ct-zeroflux" => EbcKind::ConstTraceZeroFlux,
            "ct-robin" => EbcKind::ConstTraceRobin { alpha: alpha()? },
            other => {
                return Err(Error::Config(format!(
                    "unknown ebc '{other}' (expected neumann, robin, dirichlet, \
                     dtn-inf, dtn-finite, ct-zeroflux or ct-robin)"
                )))
            }
        };
        ebc.validate()?;
        Ok(ebc)
    }

    /// Sample times for a run: the explicit list when given, otherwise a
    /// uniform grid including t = 0 and t = T, snapped to step boundaries.
    /// The default density resolves the early error transient well enough
    /// that doubling it moves sampled suprema by well under a percent.
    pub fn sample_grid(&self) -> Result<Vec<f64>> {
        if let Some(times) = &self.sample_times {
            return Ok(times.clone());
        }
        let count = self.samples.unwrap_or(41).max(2);
        Ok(uniform_samples(self.t_end, self.dt, count))
    }
}

/// Uniform sample grid over [0, t_end] with `count` points, snapped to
/// multiples of dt and deduplicated.
pub fn uniform_samples(t_end: f64, dt: f64, count: usize) -> Vec<f64> {
    let mut times: Vec<f64> = (0..count)
        .map(|i| {
            let t = t_end * i as f64 / (count - 1) as f64;
            (t / dt).round() * dt
        })
        .collect();
    times.dedup_by(|a, b| (*a - *b).abs() < 0.5 * dt);
    times
}

/// Geometric sample grid for long-horizon runs: t = 0, the first step, and
/// `per_decade` points per decade up to t_end.
pub fn geometric_samples(t_end: f64, dt: f64, per_decade: usize) -> Vec<f64> {
    let mut raw = vec![0.0, dt];
    let mut k = 0usize;
    loop {
        let t = dt * 10f64.powf(k as f64 / per_decade as f64);
        if t >= t_end {
            break;
        }
        raw.push(t);
        k += 1;
    }
    raw.push(t_end);
    let mut snapped: Vec<f64> = raw.into_iter().map(|t| (t / dt).round() * dt).collect();
    snapped.sort_by(|a, b| a.partial_cmp(b).unwrap());
    snapped.dedup_by(|a, b| (*a - *b).abs() < 0.5 * dt);
    snapped
}

/// Initial-state preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPreset {
    Constant(f64),
    /// Radial Gaussian bump centred at the origin.
    Bump,
    /// a + b ρ cos φ: constant plus the first solid harmonic.
    ModeOne {
        base: f64,
        slope: f64,
    },
}

impl std::str::FromStr for InitialPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "bump" {
            return Ok(InitialPreset::Bump);
        }
        if let Some(rest) = s.strip_prefix("constant:") {
            let c: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad constant preset '{s}'")))?;
            return Ok(InitialPreset::Constant(c));
        }
        if let Some(rest) = s.strip_prefix("mode1:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() == 2 {
                let base = parts[0]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad mode1 preset '{s}'")))?;
                let slope = parts[1]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad mode1 preset '{s}'")))?;
                return Ok(InitialPreset::ModeOne { base, slope });
            }
        }
        Err(Error::Config(format!(
            "unknown initial preset '{s}' (expected constant:<c>, bump or mode1:<a>,<b>)"
        )))
    }
}

impl InitialPreset {
    /// Point sampler u₀(ρ, cos φ); `r_max` scales the bump support.
    pub fn sampler(&self, r_max: f64) -> impl Fn(f64, f64) -> f64 {
        let preset = *self;
        move |rho: f64, x: f64| match preset {
            InitialPreset::Constant(c) => c,
            InitialPreset::Bump => 0.8 * (-8.0 * (rho / r_max) * (rho / r_max)).exp(),
            InitialPreset::ModeOne { base, slope } => base + slope * rho * x,
        }
    }
}
