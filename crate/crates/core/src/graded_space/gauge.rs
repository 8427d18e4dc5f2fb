//! Minkowski gauges of the dyadic hulls `c(n) = conv(B_{2^{-n}}(0))`.
//!
//! Point gauges are reported as brackets:
//!
//! * the lower end comes from an outer body. On a monotone tower every
//!   `x ∈ B_ε` satisfies `W_k φ(‖x‖_k) < ε`, `W_k = Σ_{j≥k} w_j`, so
//!   `c(n)` sits inside `∩_k {‖x‖_k ≤ φ^{-1}(ε/W_k)}` and the gauge of that
//!   slab body bounds `μ_n` from below;
//! * the upper end is the star gauge from ray bisection (`B ⊂ conv B`),
//!   optionally tightened by the gauge of the symmetric hull of sampled
//!   ball points, computed by linear programming.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::metric::{FrechetMetric, GradedVector, MetricMode};
use crate::error::{Error, Result};
use crate::lp;
use crate::rng::{self, stream};

pub const EXACT_REL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Exact,
    Upper,
    Lower,
    Bracket,
}

/// A gauge or norm value together with what is actually known about it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeValue {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub kind: BoundKind,
    pub tolerance: f64,
}

impl GaugeValue {
    pub fn exact(value: f64) -> Self {
        Self { value, lower: value, upper: value, kind: BoundKind::Exact, tolerance: 0.0 }
    }

    pub fn lower_only(value: f64) -> Self {
        Self { value, lower: value, upper: f64::INFINITY, kind: BoundKind::Lower, tolerance: 0.0 }
    }

    /// Bracket `[lower, upper]`, collapsed to `Exact` when the ends agree to
    /// relative tolerance.
    pub fn bracket(lower: f64, upper: f64) -> Self {
        let lower = lower.min(upper);
        let width = upper - lower;
        if upper.is_finite() && width <= EXACT_REL_TOL * upper.abs().max(f64::MIN_POSITIVE) {
            Self { value: upper, lower, upper, kind: BoundKind::Exact, tolerance: width }
        } else {
            Self { value: upper, lower, upper, kind: BoundKind::Bracket, tolerance: width }
        }
    }

    pub fn scaled(self, s: f64) -> Self {
        let s = s.abs();
        Self {
            value: self.value * s,
            lower: self.lower * s,
            upper: self.upper * s,
            kind: self.kind,
            tolerance: self.tolerance * s,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeOptions {
    /// Tighten the upper end with the sampled symmetric-hull LP.
    pub hull_lp: bool,
    pub seed: u64,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        Self { hull_lp: true, seed: 0 }
    }
}

impl FrechetMetric {
    fn check_dyadic(&self, n: usize) -> Result<()> {
        if n > self.dyadic_top() {
            return Err(Error::LevelOutOfRange { level: n, top: self.dyadic_top() });
        }
        Ok(())
    }

    /// Radii of the slab body containing `c(n)`: `ρ_k = φ^{-1}(ε / W_k)`.
    pub fn slab_radii(&self, n: usize) -> Vec<f64> {
        let eps = 0.5f64.powi(n as i32);
        let cfg = self.config();
        let monotone = self.tower().monotonized();
        (0..=cfg.n_max)
            .map(|k| {
                let w = if monotone { cfg.tail_weight(k) } else { cfg.weights[k] };
                cfg.phi.inverse(eps / w)
            })
            .collect()
    }

    /// `(lower, upper)` bounds of `μ_n(y)` from the seminorm profile of `y`,
    /// without the hull LP.
    pub fn gauge_bounds_from_profile(&self, y: &DVector<f64>, profile: &[f64], n: usize) -> (f64, f64) {
        let eps = 0.5f64.powi(n as i32);
        if self.mode() == MetricMode::SqrtScalar {
            let g = y[0].abs() / (eps * eps);
            return (g, g);
        }
        if profile.iter().all(|p| *p == 0.0) {
            return (0.0, 0.0);
        }
        let radii = self.slab_radii(n);
        let lower = profile
            .iter()
            .zip(&radii)
            .filter(|(_, r)| r.is_finite())
            .fold(0.0f64, |m, (p, r)| m.max(p / r));
        let s = self.ray_radius(y, profile, eps);
        let upper = if s.is_infinite() { 0.0 } else if s == 0.0 { f64::INFINITY } else { 1.0 / s };
        if self.dim() == 1 {
            // Balls in one dimension are symmetric intervals: star gauge = hull gauge.
            return (upper, upper);
        }
        (lower.min(upper), upper)
    }

    /// Gauge bracket of `c(n)` at a single point.
    pub fn point_gauge(&self, target: &GradedVector, n: usize, opts: &GaugeOptions) -> Result<GaugeValue> {
        self.check(target)?;
        self.check_dyadic(n)?;
        self.point_gauge_raw(&target.coords, n, opts)
    }

    pub(crate) fn point_gauge_raw(&self, y: &DVector<f64>, n: usize, opts: &GaugeOptions) -> Result<GaugeValue> {
        let profile = self.profile(y);
        let (lower, mut upper) = self.gauge_bounds_from_profile(y, &profile, n);
        if upper == 0.0 {
            return Ok(GaugeValue::exact(0.0));
        }
        if opts.hull_lp && self.dim() > 1 && upper > lower * (1.0 + EXACT_REL_TOL) {
            let mut points = self.ball_samples(n, opts.seed);
            if upper.is_finite() {
                points.push(y / upper);
            }
            let lp_gauge = lp::symmetric_hull_gauge(&points, y)?;
            upper = upper.min(lp_gauge.max(lower));
        }
        Ok(GaugeValue::bracket(lower, upper))
    }

    /// `2·D·(n+4)` boundary points of `B_{2^{-n}}` along seeded random rays.
    pub fn ball_samples(&self, n: usize, seed: u64) -> Vec<DVector<f64>> {
        let dim = self.dim();
        let eps = 0.5f64.powi(n as i32);
        let count = 2 * dim * (n + 4);
        let mut r = rng::stream_rng(seed ^ (n as u64) << 32, stream::HULL_SAMPLES);
        let mut out = Vec::with_capacity(count + 2 * dim);
        for k in 0..dim {
            let mut e = DVector::zeros(dim);
            e[k] = 1.0;
            let p = self.profile(&e);
            let s = self.ray_radius(&e, &p, eps);
            if s.is_finite() && s > 0.0 {
                out.push(e * s);
            }
        }
        for _ in 0..count {
            let u = rng::unit_direction(&mut r, dim);
            let p = self.profile(&u);
            let s = self.ray_radius(&u, &p, eps);
            if s.is_finite() && s > 0.0 {
                out.push(u * s);
            }
        }
        out
    }

    /// `μ_n(S) = max_{x ∈ S} μ_n(x)`; empty sets have gauge 0.
    pub fn set_gauge(&self, set: &[GradedVector], n: usize, opts: &GaugeOptions) -> Result<GaugeValue> {
        self.check_dyadic(n)?;
        let mut acc: Option<GaugeValue> = None;
        for x in set {
            let g = self.point_gauge(x, n, opts)?;
            acc = Some(match acc {
                None => g,
                Some(a) => {
                    let lower = a.lower.max(g.lower);
                    let upper = a.upper.max(g.upper);
                    if a.kind == BoundKind::Exact && g.kind == BoundKind::Exact {
                        GaugeValue::exact(upper)
                    } else {
                        GaugeValue::bracket(lower, upper)
                    }
                }
            });
        }
        Ok(acc.unwrap_or_else(|| GaugeValue::exact(0.0)))
    }
}
