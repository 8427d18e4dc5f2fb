use serde::{Deserialize, Serialize};

use super::{Backend, GradedOperator, NormOptions, NormVariant};
use crate::error::{Error, Result};

/// Slope of `log K` against `log N` above which a ladder counts as
/// diverging. A heuristic cut, not a proof of non-tameness.
pub const DIVERGENCE_SLOPE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BoundedFit,
    DivergingFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub truncation: usize,
    pub constant: f64,
    pub backend: Backend,
    pub witness: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEvidence {
    pub r: usize,
    pub level: usize,
    pub points: Vec<ScanPoint>,
    pub slope: f64,
    pub verdict: Verdict,
    pub seed: u64,
}

/// Hamilton constants `K_level^{(N)} = ‖A_N‖_{level+r, level}` along a ladder
/// of truncations, with a least-squares growth fit.
pub fn nontameness_scan<F>(mut builder: F, r: usize, level: usize, ladder: &[usize], opts: &NormOptions) -> Result<DivergenceEvidence>
where
    F: FnMut(usize) -> Result<GradedOperator>,
{
    if ladder.len() < 3 {
        return Err(Error::InvalidParameter("a scan needs at least three truncations".into()));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] == 0 {
        return Err(Error::InvalidParameter("ladder must be positive and strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let a = builder(n).map_err(|e| e.context(format!("building operator at truncation {n}")))?;
        let v = a
            .op_norm(level + r, level, NormVariant::Hamilton, opts)
            .map_err(|e| e.context(format!("norm at truncation {n}")))?;
        points.push(ScanPoint {
            truncation: n,
            constant: v.value.value,
            backend: v.backend,
            witness: v.witness.map(|w| w.iter().copied().collect()).unwrap_or_default(),
        });
    }
    let slope = log_log_slope(&points);
    let verdict = if slope > DIVERGENCE_SLOPE { Verdict::DivergingFit } else { Verdict::BoundedFit };
    Ok(DivergenceEvidence { r, level, points, slope, verdict, seed: opts.seed })
}

fn log_log_slope(points: &[ScanPoint]) -> f64 {
    if points.iter().any(|p| p.constant.is_infinite()) {
        return f64::INFINITY;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.truncation as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.constant.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
