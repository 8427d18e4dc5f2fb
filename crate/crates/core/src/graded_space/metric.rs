use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::phi::Phi;
use super::seminorm::SeminormFamily;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelId(pub String);

impl ModelId {
    pub fn new(s: impl Into<String>) -> Self {
        ModelId(s.into())
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A coordinate vector tagged with the model it lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedVector {
    pub coords: DVector<f64>,
    pub model_id: ModelId,
}

impl GradedVector {
    pub fn new(coords: DVector<f64>, model_id: ModelId) -> Result<Self> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("vector entries must be finite".into()));
        }
        Ok(Self { coords, model_id })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coords: &self.coords * s, model_id: self.model_id.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradingConfig {
    pub n_max: usize,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub phi: Phi,
}

impl GradingConfig {
    /// `w_n = 2^{-n}` for `n = 0..=n_max`.
    pub fn dyadic(n_max: usize, phi: Phi) -> Self {
        Self { n_max, weights: (0..=n_max).map(|n| 0.5f64.powi(n as i32)).collect(), phi }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.n_max + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} weights, got {}",
                self.n_max + 1,
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter("weights must be positive and finite".into()));
        }
        Ok(())
    }

    /// `Σ_{k ≥ n} w_k`.
    pub fn tail_weight(&self, n: usize) -> f64 {
        self.weights[n..].iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    /// `d(x, 0) = Σ w_n φ(‖x‖_n)`
    SumForm,
    /// `d(x, y) = sqrt|x − y|` on a one-dimensional model.
    SqrtScalar,
}

/// Translation-invariant metric built from a seminorm tower. Distances are
/// computed from `u − v` only.
#[derive(Clone, Debug)]
pub struct FrechetMetric {
    id: ModelId,
    tower: Arc<SeminormFamily>,
    config: GradingConfig,
    mode: MetricMode,
    dyadic_top: usize,
}

impl FrechetMetric {
    pub fn new(id: ModelId, tower: SeminormFamily, config: GradingConfig, mode: MetricMode) -> Result<Self> {
        config.validate()?;
        if tower.top() < config.n_max {
            return Err(Error::InvalidParameter(format!(
                "tower has {} levels but n_max is {}",
                tower.top() + 1,
                config.n_max
            )));
        }
        if mode == MetricMode::SqrtScalar && tower.dim() != 1 {
            return Err(Error::InvalidParameter("sqrt_scalar metric needs a one-dimensional model".into()));
        }
        let dyadic_top = config.n_max;
        Ok(Self { id, tower: Arc::new(tower), config, mode, dyadic_top })
    }

    /// Allows dyadic balls `B_{2^{-n}}` beyond the top grading level, as in
    /// single-level (normed) models where every radius is meaningful.
    pub fn with_dyadic_top(mut self, top: usize) -> Self {
        self.dyadic_top = top.max(self.config.n_max);
        self
    }

    /// Largest `n` for which dyadic gauges `μ_n` are offered.
    pub fn dyadic_top(&self) -> usize {
        self.dyadic_top
    }

    pub fn id(&self) -> &ModelId {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.tower.dim()
    }

    pub fn n_max(&self) -> usize {
        self.config.n_max
    }

    pub fn tower(&self) -> &SeminormFamily {
        &self.tower
    }

    pub fn config(&self) -> &GradingConfig {
        &self.config
    }

    pub fn mode(&self) -> MetricMode {
        self.mode
    }

    pub fn phi(&self) -> Phi {
        self.config.phi
    }

    pub fn seminorm(&self, v: &DVector<f64>, n: usize) -> f64 {
        self.tower.eval(v, n)
    }

    /// `‖v‖_0..=‖v‖_{n_max}`.
    pub fn profile(&self, v: &DVector<f64>) -> Vec<f64> {
        let mut p = self.tower.profile(v);
        p.truncate(self.config.n_max + 1);
        p
    }

    /// `d(x, 0)` from a precomputed seminorm profile of `x`, scaled by `s`.
    pub fn norm_from_profile(&self, profile: &[f64], s: f64) -> f64 {
        let phi = self.config.phi;
        self.config
            .weights
            .iter()
            .zip(profile)
            .map(|(w, p)| if *p == 0.0 { 0.0 } else { w * phi.eval(s.abs() * p) })
            .sum()
    }

    /// `d(x, 0)`.
    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        match self.mode {
            MetricMode::SqrtScalar => x[0].abs().sqrt(),
            MetricMode::SumForm => self.norm_from_profile(&self.profile(x), 1.0),
        }
    }

    pub fn check(&self, v: &GradedVector) -> Result<()> {
        if v.model_id != self.id {
            return Err(Error::ModelMismatch { left: self.id.0.clone(), right: v.model_id.0.clone() });
        }
        if v.coords.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: v.coords.len() });
        }
        Ok(())
    }

    /// `d(u, v)`.
    pub fn distance(&self, u: &GradedVector, v: &GradedVector) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.norm(&(&u.coords - &v.coords)))
    }

    /// Supremum of `d(s v, 0)` over `s > 0`.
    pub fn ray_limit(&self, profile: &[f64]) -> f64 {
        match self.mode {
            MetricMode::SqrtScalar => {
                if profile.iter().any(|p| *p > 0.0) {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            MetricMode::SumForm => self
                .config
                .weights
                .iter()
                .zip(profile)
                .filter(|(_, p)| **p > 0.0)
                .map(|(w, _)| w)
                .sum(),
        }
    }

    /// Largest `s ≥ 0` (up to bisection tolerance, always on the inside) with
    /// `d(s v, 0) ≤ eps`, given the profile of `v`. `+∞` when the whole ray
    /// stays inside.
    pub fn ray_radius(&self, v: &DVector<f64>, profile: &[f64], eps: f64) -> f64 {
        if self.mode == MetricMode::SqrtScalar {
            let a = v[0].abs();
            return if a == 0.0 { f64::INFINITY } else { eps * eps / a };
        }
        if self.ray_limit(profile) <= eps {
            return f64::INFINITY;
        }
        let f = |s: f64| self.norm_from_profile(profile, s);
        let mut hi = 1.0;
        let mut guard = 0;
        while f(hi) <= eps && guard < 2100 {
            hi *= 2.0;
            guard += 1;
        }
        let mut lo = hi / 2.0;
        guard = 0;
        while f(lo) > eps && guard < 2100 {
            hi = lo;
            lo /= 2.0;
            guard += 1;
        }
        if f(lo) > eps {
            return 0.0;
        }
        for _ in 0..RAY_BISECTION_CAP {
            if hi - lo <= RAY_BISECTION_TOL * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if f(mid) <= eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

pub const RAY_BISECTION_TOL: f64 = 1e-10;
pub const RAY_BISECTION_CAP: usize = 60;
