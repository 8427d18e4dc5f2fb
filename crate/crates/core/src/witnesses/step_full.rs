use serde::{Deserialize, Serialize};

use super::models::{ModelKind, ModelSpace};
use crate::error::{Error, Result};
use crate::graded_space::GradedVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketLevel {
    pub level: usize,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFullReport {
    pub s: f64,
    pub multiplier: f64,
    pub frequency: usize,
    /// `s^i < ‖v‖_i < M (4s)^i` for `i ≥ 1`; level 0 records `‖v‖_0 ≤ 1`.
    pub levels: Vec<BracketLevel>,
    pub holds: bool,
}

fn trig_modes(model: &ModelSpace) -> Result<usize> {
    match model.kind() {
        ModelKind::Trig { modes, .. } => Ok(*modes),
        _ => Err(Error::Unsupported(format!("model `{}` is not trigonometric", model.id()))),
    }
}

/// `v = sin(2s·)` with its step-full bracket. `2s` must be a positive
/// integer no larger than half the mode count.
pub fn step_full_witness(model: &ModelSpace, s: f64) -> Result<(GradedVector, StepFullReport)> {
    let modes = trig_modes(model)?;
    let freq = 2.0 * s;
    if !(freq >= 1.0) || freq.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("2s = {freq} must be a positive integer")));
    }
    let freq = freq as usize;
    if 2 * freq > modes {
        return Err(Error::TruncationTooSmall(format!("frequency {freq} needs at least {} modes, model has {modes}", 2 * freq)));
    }
    let v = model.trig_sin(freq)?;
    let profile = model.metric().profile(&v.coords);
    let multiplier = 1.0;
    let levels: Vec<BracketLevel> = profile
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let lower = s.powi(i as i32);
            let upper = multiplier * (4.0 * s).powi(i as i32);
            let holds = if i == 0 { value <= 1.0 } else { lower < value && value < upper };
            BracketLevel { level: i, lower, value, upper, holds }
        })
        .collect();
    let holds = levels.iter().all(|l| l.holds);
    Ok((v, StepFullReport { s, multiplier, frequency: freq, levels, holds }))
}

/// `‖∂ sin(N·)‖_0 / ‖sin(N·)‖_0`.
pub fn sin_n_ratio(model: &ModelSpace, n: usize) -> Result<f64> {
    let modes = trig_modes(model)?;
    if n == 0 || 2 * n > modes {
        return Err(Error::TruncationTooSmall(format!("frequency {n} aliases on {modes} modes")));
    }
    let v = model.trig_sin(n)?;
    let dv = model.differentiation_matrix()? * &v.coords;
    Ok(model.metric().seminorm(&dv, 0) / model.metric().seminorm(&v.coords, 0))
}
