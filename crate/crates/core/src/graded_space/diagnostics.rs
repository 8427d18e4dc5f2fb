//! Radial diagnostics: strictness estimates, the scalar bound and ray
//! profiles `s ↦ d(s v, 0)`.

use serde::{Deserialize, Serialize};

use super::metric::{FrechetMetric, GradedVector, MetricMode};
use crate::error::{Error, Result};

/// Tolerance used by [`FrechetMetric::scalar_bound_check`].
pub const SCALAR_BOUND_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictnessReport {
    /// `max_r d(r v, 0) / r` over the grid; a lower bound for `S(v)`.
    pub value: f64,
    pub argmax: f64,
    /// `(r, d(r v, 0)/r)` for the smallest radii of the grid, ascending in `r`.
    pub tail: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarBound {
    pub holds: bool,
    /// `⌈s⌉ d(v, 0) − d(s v, 0)`
    pub margin: f64,
    pub multiplier: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayPoint {
    pub s: f64,
    pub value: f64,
    /// Forward difference to the next grid point (backward at the last one).
    pub slope: f64,
}

/// `count` log-spaced radii from `10^lo_exp` to `10^hi_exp`, ascending.
pub fn log_grid(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![10f64.powf(lo_exp)];
    }
    (0..count)
        .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (count - 1) as f64))
        .collect()
}

impl FrechetMetric {
    pub fn strictness(&self, v: &GradedVector, r_grid: &[f64]) -> Result<StrictnessReport> {
        self.check(v)?;
        if r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidParameter("radius grid must be nonempty and positive".into()));
        }
        let profile = self.profile(&v.coords);
        if self.mode() == MetricMode::SumForm && profile.iter().all(|p| *p == 0.0) {
            return Ok(StrictnessReport { value: 0.0, argmax: r_grid[0], tail: Vec::new() });
        }
        let ratio = |r: f64| -> f64 {
            match self.mode() {
                MetricMode::SqrtScalar => (r * v.coords[0].abs()).sqrt() / r,
                MetricMode::SumForm => self.norm_from_profile(&profile, r) / r,
            }
        };
        let mut sorted: Vec<f64> = r_grid.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let (mut value, mut argmax) = (0.0f64, sorted[0]);
        for &r in &sorted {
            let q = ratio(r);
            if q > value {
                value = q;
                argmax = r;
            }
        }
        let tail = sorted.iter().take(5).map(|&r| (r, ratio(r))).collect();
        Ok(StrictnessReport { value, argmax, tail })
    }

    /// Checks `d(s v, 0) ≤ ⌈s⌉ d(v, 0)`.
    pub fn scalar_bound_check(&self, v: &GradedVector, s: f64) -> Result<ScalarBound> {
        self.check(v)?;
        if !(s > 0.0) {
            return Err(Error::InvalidParameter("scalar must be positive".into()));
        }
        let multiplier = s.ceil();
        let lhs = self.norm(&(&v.coords * s));
        let rhs = multiplier * self.norm(&v.coords);
        Ok(ScalarBound { holds: lhs <= rhs + SCALAR_BOUND_TOL, margin: rhs - lhs, multiplier })
    }

    pub fn ray_profile(&self, v: &GradedVector, grid: &[f64]) -> Result<Vec<RayPoint>> {
        self.check(v)?;
        if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidParameter("ray grid must be positive and strictly increasing".into()));
        }
        let values: Vec<f64> = grid.iter().map(|s| self.norm(&(&v.coords * *s))).collect();
        let n = grid.len();
        Ok((0..n)
            .map(|i| {
                let slope = if n < 2 {
                    0.0
                } else if i + 1 < n {
                    (values[i + 1] - values[i]) / (grid[i + 1] - grid[i])
                } else {
                    (values[i] - values[i - 1]) / (grid[i] - grid[i - 1])
                };
                RayPoint { s: grid[i], value: values[i], slope }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witnesses::{build_scalar_model, build_scalar_sqrt_model, build_sequence_model};
    use nalgebra::dvector;

    #[test]
    fn grid_is_log_spaced() {
        let g = log_grid(-2.0, 2.0, 5);
        assert_eq!(g.len(), 5);
        for (x, e) in g.iter().zip([0.01, 0.1, 1.0, 10.0, 100.0]) {
            assert!((x - e).abs() <= 1e-12 * e);
        }
    }

    #[test]
    fn geometric_profile_strictness_tends_to_the_weighted_sum() {
        for n_max in [4usize, 6, 8] {
            let weights = (0..=n_max).map(|n| vec![4f64.powi(n as i32)]).collect();
            let m = build_sequence_model("s", 1, weights).unwrap();
            let v = m.vector(dvector![1.0]).unwrap();
            let rep = m.metric().strictness(&v, &log_grid(-8.0, 4.0, 49)).unwrap();
            // d(rv)/r → Σ 2^{-n} 4^n as r → 0.
            let oracle: f64 = (0..=n_max).map(|n| 0.5f64.powi(n as i32) * 4f64.powi(n as i32)).sum();
            assert!((rep.value - oracle).abs() <= 0.05 * oracle, "N = {n_max}: {} vs {oracle}", rep.value);
            assert_eq!(rep.argmax, 1e-8);
        }
    }

    #[test]
    fn sqrt_metric_strictness_blows_up() {
        let m = build_scalar_sqrt_model("sq").unwrap();
        let v = m.vector(dvector![1.0]).unwrap();
        let rep = m.metric().strictness(&v, &[1e-6]).unwrap();
        assert!((rep.value - 1e3).abs() <= 1e-9);
        let wide = m.metric().strictness(&v, &log_grid(-8.0, 0.0, 9)).unwrap();
        assert!(wide.value >= 1e3);
    }

    #[test]
    fn zero_vector_has_zero_strictness() {
        let m = build_scalar_model("r", 3).unwrap();
        let rep = m.metric().strictness(&m.zero(), &log_grid(-3.0, 0.0, 4)).unwrap();
        assert_eq!(rep.value, 0.0);
    }

    #[test]
    fn scalar_bound_on_a_grid() {
        let m = build_scalar_model("r", 4).unwrap();
        let v = m.vector(dvector![0.7]).unwrap();
        for s in [0.1, 0.5, 1.0, 1.5, 2.0, 7.3, 10.0] {
            assert!(m.metric().scalar_bound_check(&v, s).unwrap().holds);
        }
        assert!(m.metric().scalar_bound_check(&v, 0.0).is_err());
    }

    #[test]
    fn ray_profile_is_increasing() {
        let m = build_scalar_model("r", 2).unwrap();
        let v = m.vector(dvector![1.0]).unwrap();
        let pts = m.metric().ray_profile(&v, &log_grid(-2.0, 2.0, 9)).unwrap();
        assert!(pts.windows(2).all(|w| w[1].value > w[0].value));
        assert!(pts.iter().all(|p| p.slope > 0.0));
        assert!(m.metric().ray_profile(&v, &[1.0, 1.0]).is_err());
    }
}
