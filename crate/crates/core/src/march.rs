//! Shared time-marching machinery for the coated and effective solvers:
//! Strang splitting with the exact logistic half-step, per-mode θ-scheme
//! diffusion, sample-time bookkeeping and maximum-principle enforcement.

use crate::field::ModalField;
use crate::operator::{ModeOperator, ThetaStepper};
use crate::surface::SurfaceSpectrum;
use crate::{Error, Result};

/// Absolute slack allowed on the maximum-principle bounds; the splitting
/// with θ = 1 preserves the bounds up to roundoff and angular truncation.
pub const TOL_MAX_PRINCIPLE: f64 = 1e-8;

/// Reaction term toggle. `Logistic` is f(u) = u(1 - u).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Reaction {
    #[serde(rename = "logistic")]
    Logistic,
    #[serde(rename = "off")]
    Off,
}

/// Sampled states of a time-dependent run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModalField>,
}

impl Trajectory {
    pub fn terminal(&self) -> &ModalField {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }
}

/// Prefactored Strang stepper over a set of per-mode operators.
pub(crate) struct Marcher<'a> {
    spectrum: &'a SurfaceSpectrum,
    steppers: Vec<ThetaStepper>,
    /// grid index of the last node any mode evolves; the pointwise
    /// reaction update runs over 1..=pointwise_last
    pointwise_last: usize,
    half_growth: f64,
}

impl<'a> Marcher<'a> {
    pub fn new(
        spectrum: &'a SurfaceSpectrum,
        ops: &'a [ModeOperator],
        dt: f64,
        theta: f64,
    ) -> Result<Self> {
        let steppers = ops
            .iter()
            .map(|op| ThetaStepper::new(op, dt, theta))
            .collect::<Result<Vec<_>>>()?;
        let pointwise_last = ops
            .iter()
            .map(|op| op.first_active() + op.n_active() - 1)
            .max()
            .expect("at least one mode");
        Ok(Self {
            spectrum,
            steppers,
            pointwise_last,
            half_growth: (0.5 * dt).exp(),
        })
    }

    pub fn advance(
        &self,
        ops: &[ModeOperator],
        state: &mut ModalField,
        reaction: Reaction,
        scratch: &mut Vec<f64>,
    ) -> Result<()> {
        if reaction == Reaction::Logistic {
            self.logistic_half_step(state)?;
        }
        for ((op, stepper), l) in ops.iter().zip(&self.steppers).zip(0..) {
            let first = op.first_active();
            let last = first + op.n_active() - 1;
            let w = state.mode_w_mut(l);
            stepper.step(&mut w[first..=last], scratch);
        }
        if reaction == Reaction::Logistic {
            self.logistic_half_step(state)?;
        }
        Ok(())
    }

    /// Exact logistic flow over a half step: u ↦ u g / (1 - u + u g) with
    /// g = e^{dt/2}.
    fn logistic_half_step(&self, state: &mut ModalField) -> Result<()> {
        let g = self.half_growth;
        state.apply_pointwise(self.spectrum, 1, self.pointwise_last, |u| {
            u * g / (1.0 - u + u * g)
        })
    }
}

/// March `state` to the largest requested sample time, recording snapped
/// samples and enforcing the maximum-principle bounds on each of them.
///
/// The t = 0 sample is recorded as given — the initial data are shared
/// between problems and do not satisfy the boundary rows yet. `pin`
/// projects the state onto the Dirichlet-type rows before stepping starts.
pub(crate) fn run(
    spectrum: &SurfaceSpectrum,
    ops: &[ModeOperator],
    theta: f64,
    mut state: ModalField,
    dt: f64,
    sample_times: &[f64],
    reaction: Reaction,
    pin: impl Fn(&mut ModalField),
) -> Result<Trajectory> {
    let plan = SamplePlan::new(dt, sample_times)?;
    let bounds = PrincipleBounds::from_initial(&state, spectrum, reaction)?;
    let marcher = Marcher::new(spectrum, ops, dt, theta)?;

    let mut trajectory = Trajectory {
        times: Vec::with_capacity(plan.indices.len()),
        states: Vec::with_capacity(plan.indices.len()),
    };
    let mut next_sample = 0;
    if plan.indices.first() == Some(&0) {
        bounds.check(&state, spectrum, 0.0)?;
        trajectory.times.push(0.0);
        trajectory.states.push(state.clone());
        next_sample = 1;
    }
    pin(&mut state);
    let mut scratch = Vec::new();
    for step in 1..=plan.last_step {
        marcher.advance(ops, &mut state, reaction, &mut scratch)?;
        state.time = step as f64 * dt;
        if next_sample < plan.indices.len() && plan.indices[next_sample] == step {
            bounds.check(&state, spectrum, state.time)?;
            trajectory.times.push(state.time);
            trajectory.states.push(state.clone());
            next_sample += 1;
        }
    }
    Ok(trajectory)
}

/// Maximum-principle bounds derived from the initial data: nonnegative data
/// with the logistic reaction stays in [0, max(1, sup u₀)]; without a
/// reaction the linear flow stays between the initial extremes and zero.
pub(crate) struct PrincipleBounds {
    lo: f64,
    hi: f64,
}

impl PrincipleBounds {
    pub fn from_initial(
        u0: &ModalField,
        spectrum: &SurfaceSpectrum,
        reaction: Reaction,
    ) -> Result<Self> {
        let (lo0, hi0) = u0.value_range(spectrum)?;
        if !lo0.is_finite() || !hi0.is_finite() {
            return Err(Error::InvalidParameter(
                "initial data contains non-finite values".into(),
            ));
        }
        match reaction {
            Reaction::Logistic => {
                if lo0 < -TOL_MAX_PRINCIPLE {
                    return Err(Error::InvalidParameter(format!(
                        "logistic runs need nonnegative initial data, found min {lo0}"
                    )));
                }
                Ok(Self {
                    lo: -TOL_MAX_PRINCIPLE,
                    hi: hi0.max(1.0) + TOL_MAX_PRINCIPLE,
                })
            }
            Reaction::Off => Ok(Self {
                lo: lo0.min(0.0) - TOL_MAX_PRINCIPLE,
                hi: hi0.max(0.0) + TOL_MAX_PRINCIPLE,
            }),
        }
    }

    pub fn check(&self, state: &ModalField, spectrum: &SurfaceSpectrum, t: f64) -> Result<()> {
        let (lo, hi) = state.value_range(spectrum)?;
        if !(lo >= self.lo && hi <= self.hi) {
            return Err(Error::InvariantViolation(format!(
                "maximum principle violated at t = {t}: values in [{lo}, {hi}] \
                 exceed the admissible [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Snap requested sample times onto step boundaries.
pub(crate) struct SamplePlan {
    pub indices: Vec<usize>,
    pub last_step: usize,
}

impl SamplePlan {
    pub fn new(dt: f64, sample_times: &[f64]) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if sample_times.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one sample time is required".into(),
            ));
        }
        let mut indices: Vec<usize> = Vec::with_capacity(sample_times.len());
        for &t in sample_times {
            if t < 0.0 || !t.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "sample time {t} is not admissible"
                )));
            }
            let idx = (t / dt).round() as usize;
            if (idx as f64 * dt - t).abs() > dt * 1e-6 + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "sample time {t} is not a multiple of dt = {dt}"
                )));
            }
            indices.push(idx);
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != indices {
            return Err(Error::InvalidParameter(
                "sample times must be strictly increasing".into(),
            ));
        }
        let last_step = *indices.last().unwrap();
        Ok(Self { indices, last_step })
    }
}
