use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graded_space::{FrechetMetric, GradedVector};
use crate::rng::{self, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeForm {
    /// `‖f(a) − f(u)‖_n ≤ C_n (1 + ‖a − u‖_{n+r})`.
    AdditiveOne,
    /// `‖f(a) − f(u)‖_n ≤ C_n ‖a − u‖_{n+r}`.
    Homogeneous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub seed: u64,
    /// Shell radii `10^0, 10^{-1}, …`.
    pub shells: usize,
    pub samples_per_shell: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { seed: 0, shells: 8, samples_per_shell: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub form: ProbeForm,
    /// Smallest constants consistent with the samples, per target level.
    pub constants: Vec<f64>,
    /// `(radius, largest ratio over levels)` per shell.
    pub shells: Vec<(f64, f64)>,
    /// Growth of the shell maxima against `log(1/radius)`.
    pub slope: f64,
    pub diverging: bool,
    /// `(radius, level, ratio)` of the largest ratio found.
    pub witness: Option<(f64, usize, f64)>,
}

/// Fits tame constants of a black-box map `f` near `u` from samples on
/// shrinking shells around `u`.
pub fn nonlinear_tameness_probe<F>(
    f: F,
    source: &FrechetMetric,
    target: &FrechetMetric,
    u: &GradedVector,
    r: usize,
    form: ProbeForm,
    opts: &ProbeOptions,
) -> Result<ProbeResult>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    source.check(u)?;
    let fu = f(&u.coords).map_err(|e| e.context("evaluating at the base point"))?;
    let top = target.n_max().min(source.n_max().saturating_sub(r));
    let mut constants = vec![0.0f64; top + 1];
    let mut shells = Vec::with_capacity(opts.shells);
    let mut witness: Option<(f64, usize, f64)> = None;
    let mut rg = rng::stream_rng(opts.seed, stream::PROBE);
    for k in 0..opts.shells {
        let radius = 10f64.powi(-(k as i32));
        let mut shell_max = 0.0f64;
        for i in 0..opts.samples_per_shell {
            let mut dir = rng::mixed_decay(&mut rg, source.dim(), i % 4);
            dir /= dir.norm().max(f64::MIN_POSITIVE);
            let step = dir * radius;
            let a = &u.coords + &step;
            let fa = f(&a).map_err(|e| e.context(format!("evaluating on shell {radius:e}")))?;
            let diff = fa - &fu;
            let ds = source.profile(&step);
            let dt = target.profile(&diff);
            for n in 0..=top {
                let den = match form {
                    ProbeForm::AdditiveOne => 1.0 + ds[n + r],
                    ProbeForm::Homogeneous => ds[n + r],
                };
                let q = if dt[n] == 0.0 { 0.0 } else if den == 0.0 { f64::INFINITY } else { dt[n] / den };
                constants[n] = constants[n].max(q);
                shell_max = shell_max.max(q);
                if witness.map_or(q > 0.0, |w| q > w.2) {
                    witness = Some((radius, n, q));
                }
            }
        }
        shells.push((radius, shell_max));
    }
    let slope = shell_slope(&shells);
    Ok(ProbeResult { form, constants, shells, slope, diverging: slope > super::DIVERGENCE_SLOPE, witness })
}

fn shell_slope(shells: &[(f64, f64)]) -> f64 {
    if shells.iter().any(|s| s.1.is_infinite()) {
        return f64::INFINITY;
    }
    let pts: Vec<(f64, f64)> = shells.iter().filter(|s| s.1 > 0.0).map(|s| (-s.0.ln(), s.1.ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
