//! Bodies in a truncated graded space and the geometric primitives the
//! palette oracles are built from: seminorm suprema, metric radii,
//! recession directions, sampling and containment.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded_space::{FrechetMetric, MetricMode, ModelId};
use crate::lp;
use crate::operators::{GradedOperator, NormOptions};
use crate::rng::{self, stream};

/// Residual below which a point counts as inside a polytope.
pub const HULL_TOL: f64 = 1e-9;
/// Tolerance for `hull_residual`, relative to the point so that tiny scaled
/// copies are not absorbed by rounding.
pub fn hull_tol(point: &DVector<f64>, vertices: &[DVector<f64>]) -> f64 {
    let a = point.amax();
    if a > 0.0 {
        HULL_TOL * a
    } else {
        HULL_TOL * 1e-3 * vertices.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }
}

/// Ray length used when sampling along directions that never leave a body.
pub const RAY_CAP: f64 = 1e6;
/// Random directions tried when searching for recession directions.
const RECESSION_SAMPLES: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodyKind {
    /// Closed convex hull of the vertices.
    VPolytope { vertices: Vec<Vec<f64>> },
    /// A finite point set (compact, not convex).
    PointSet { points: Vec<Vec<f64>> },
    /// Open ball `{x : d(x, center) < radius}`.
    MetricBall { center: Vec<f64>, radius: f64 },
    /// Open sublevel `{x : ‖x‖_level < bound}`.
    GaugeSublevel { level: usize, bound: f64 },
    /// Open box `{x : ‖x‖_{first_level + k} < bounds[k] for all k}`.
    SeminormBox { first_level: usize, bounds: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexBody {
    #[serde(flatten)]
    pub kind: BodyKind,
    pub model_id: ModelId,
}

fn check_finite(v: &[f64], dim: usize, what: &str) -> Result<()> {
    if v.len() != dim {
        return Err(Error::Dimension { expected: dim, got: v.len() });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} entries must be finite")));
    }
    Ok(())
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidParameter(format!("{what} must be positive and finite, got {x}")));
    }
    Ok(())
}

impl ConvexBody {
    pub fn polytope(metric: &FrechetMetric, vertices: Vec<DVector<f64>>) -> Result<Self> {
        let body = Self {
            kind: BodyKind::VPolytope { vertices: vertices.iter().map(|v| v.iter().copied().collect()).collect() },
            model_id: metric.id().clone(),
        };
        body.validate(metric)?;
        Ok(body)
    }

    pub fn point_set(metric: &FrechetMetric, points: Vec<DVector<f64>>) -> Result<Self> {
        let body = Self {
            kind: BodyKind::PointSet { points: points.iter().map(|v| v.iter().copied().collect()).collect() },
            model_id: metric.id().clone(),
        };
        body.validate(metric)?;
        Ok(body)
    }

    pub fn ball(metric: &FrechetMetric, center: DVector<f64>, radius: f64) -> Result<Self> {
        let body = Self {
            kind: BodyKind::MetricBall { center: center.iter().copied().collect(), radius },
            model_id: metric.id().clone(),
        };
        body.validate(metric)?;
        Ok(body)
    }

    pub fn sublevel(metric: &FrechetMetric, level: usize, bound: f64) -> Result<Self> {
        let body = Self { kind: BodyKind::GaugeSublevel { level, bound }, model_id: metric.id().clone() };
        body.validate(metric)?;
        Ok(body)
    }

    pub fn seminorm_box(metric: &FrechetMetric, first_level: usize, bounds: Vec<f64>) -> Result<Self> {
        let body = Self { kind: BodyKind::SeminormBox { first_level, bounds }, model_id: metric.id().clone() };
        body.validate(metric)?;
        Ok(body)
    }

    /// Symmetric segment `conv{−v, v}`.
    pub fn segment(metric: &FrechetMetric, v: DVector<f64>) -> Result<Self> {
        let neg = -&v;
        Self::polytope(metric, vec![v, neg])
    }

    pub fn validate(&self, metric: &FrechetMetric) -> Result<()> {
        if &self.model_id != metric.id() {
            return Err(Error::ModelMismatch { left: metric.id().0.clone(), right: self.model_id.0.clone() });
        }
        let dim = metric.dim();
        match &self.kind {
            BodyKind::VPolytope { vertices: pts } | BodyKind::PointSet { points: pts } => {
                if pts.is_empty() {
                    return Err(Error::InvalidParameter("vertex list must be nonempty".into()));
                }
                for p in pts {
                    check_finite(p, dim, "vertex")?;
                }
            }
            BodyKind::MetricBall { center, radius } => {
                check_finite(center, dim, "center")?;
                check_positive(*radius, "radius")?;
            }
            BodyKind::GaugeSublevel { level, bound } => {
                if *level > metric.n_max() {
                    return Err(Error::LevelOutOfRange { level: *level, top: metric.n_max() });
                }
                check_positive(*bound, "bound")?;
            }
            BodyKind::SeminormBox { first_level, bounds } => {
                if bounds.is_empty() {
                    return Err(Error::InvalidParameter("box needs at least one bound".into()));
                }
                let last = first_level + bounds.len() - 1;
                if last > metric.n_max() {
                    return Err(Error::LevelOutOfRange { level: last, top: metric.n_max() });
                }
                for b in bounds {
                    check_positive(*b, "bound")?;
                }
            }
        }
        Ok(())
    }

    /// Vertex or point list for the finite kinds.
    pub fn finite_points(&self) -> Option<Vec<DVector<f64>>> {
        match &self.kind {
            BodyKind::VPolytope { vertices: pts } | BodyKind::PointSet { points: pts } => {
                Some(pts.iter().map(|p| DVector::from_column_slice(p)).collect())
            }
            _ => None,
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(self.kind, BodyKind::VPolytope { .. } | BodyKind::GaugeSublevel { .. } | BodyKind::SeminormBox { .. })
    }

    pub fn is_open(&self) -> bool {
        matches!(self.kind, BodyKind::MetricBall { .. } | BodyKind::GaugeSublevel { .. } | BodyKind::SeminormBox { .. })
    }

    /// Levels and bounds of a convex open body, as `(level, bound)` pairs.
    fn gauge_levels(&self) -> Option<Vec<(usize, f64)>> {
        match &self.kind {
            BodyKind::GaugeSublevel { level, bound } => Some(vec![(*level, *bound)]),
            BodyKind::SeminormBox { first_level, bounds } => {
                Some(bounds.iter().enumerate().map(|(k, b)| (first_level + k, *b)).collect())
            }
            _ => None,
        }
    }
}

/// A set derived from bodies by unions, scalings and adjoining points:
/// `⋃ scale·body ∪ points`, or its convex hull when `hull` is set.
#[derive(Clone, Debug)]
pub struct BodySet {
    pub parts: Vec<(ConvexBody, f64)>,
    pub points: Vec<DVector<f64>>,
    pub hull: bool,
}

impl BodySet {
    pub fn of(body: &ConvexBody) -> Self {
        Self { parts: vec![(body.clone(), 1.0)], points: Vec::new(), hull: false }
    }

    pub fn union(&self, other: &BodySet) -> Self {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Self { parts, points, hull: self.hull || other.hull }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            parts: self.parts.iter().map(|(b, t)| (b.clone(), t * s)).collect(),
            points: self.points.iter().map(|p| p * s).collect(),
            hull: self.hull,
        }
    }

    pub fn with_hull(mut self) -> Self {
        self.hull = true;
        self
    }

    /// `conv(self ∪ {v})`.
    pub fn hull_with_point(&self, v: &DVector<f64>) -> Self {
        let mut out = self.clone();
        out.points.push(v.clone());
        out.hull = true;
        out
    }

    /// All scaled vertices and points when every part is finite.
    pub fn finite_points(&self) -> Option<Vec<DVector<f64>>> {
        let mut out = self.points.clone();
        for (b, s) in &self.parts {
            out.extend(b.finite_points()?.into_iter().map(|p| p * *s));
        }
        Some(out)
    }

    pub fn is_finite(&self) -> bool {
        self.parts.iter().all(|(b, _)| b.finite_points().is_some())
    }
}

/// A metric together with the identity lift constants
/// `L[l][m] ≈ sup_{x ≠ 0} ‖x‖_m / ‖x‖_l`, used to bound one seminorm on a body
/// described by another.
#[derive(Clone, Debug)]
pub struct Geometry {
    metric: Arc<FrechetMetric>,
    lift: Vec<Vec<f64>>,
    lift_exact: bool,
    seed: u64,
}

impl Geometry {
    pub fn new(metric: Arc<FrechetMetric>, seed: u64) -> Result<Self> {
        let top = metric.n_max();
        let monotone = metric.tower().monotonized();
        let pairs: Vec<(usize, usize)> = (0..=top)
            .flat_map(|l| (0..=top).map(move |m| (l, m)))
            .filter(|(l, m)| l < m || (!monotone && l != m))
            .collect();
        let mut lift = vec![vec![1.0; top + 1]; top + 1];
        let mut lift_exact = true;
        if !pairs.is_empty() {
            let id = GradedOperator::identity(metric.clone());
            let norms = id.hamilton_norms(&pairs, &NormOptions::with_seed(seed))?;
            for (&(l, m), nrm) in pairs.iter().zip(&norms) {
                lift[l][m] = nrm.bound().max(1.0);
                lift_exact &= nrm.backend.is_exact();
            }
        }
        Ok(Self { metric, lift, lift_exact, seed })
    }

    pub fn metric(&self) -> &Arc<FrechetMetric> {
        &self.metric
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Whether the lift constants come from exact backends.
    pub fn lift_exact(&self) -> bool {
        self.lift_exact
    }

    pub fn lift(&self, l: usize, m: usize) -> f64 {
        self.lift[l][m]
    }

    fn levels(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.metric.n_max()
    }

    fn weight_at(&self, l: usize) -> f64 {
        let cfg = self.metric.config();
        if self.metric.tower().monotonized() {
            cfg.tail_weight(l)
        } else {
            cfg.weights[l]
        }
    }

    /// Upper bound of `‖x‖_m` over the ball `{d(x, 0) < radius}`.
    fn ball_sup(&self, radius: f64, m: usize) -> f64 {
        if self.metric.mode() == MetricMode::SqrtScalar {
            return radius * radius;
        }
        let phi = self.metric.phi();
        self.levels()
            .filter_map(|l| {
                let r = phi.inverse(radius / self.weight_at(l));
                r.is_finite().then(|| r * self.lift(l, m))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Upper bound of `sup_{x ∈ body} ‖x‖_m`; `+∞` when no bound is available.
    pub fn seminorm_sup(&self, body: &ConvexBody, m: usize) -> f64 {
        match &body.kind {
            BodyKind::VPolytope { vertices: pts } | BodyKind::PointSet { points: pts } => pts
                .iter()
                .map(|p| self.metric.seminorm(&DVector::from_column_slice(p), m))
                .fold(0.0, f64::max),
            BodyKind::MetricBall { center, radius } => {
                self.metric.seminorm(&DVector::from_column_slice(center), m) + self.ball_sup(*radius, m)
            }
            _ => body
                .gauge_levels()
                .unwrap_or_default()
                .iter()
                .map(|(l, b)| b * self.lift(*l, m))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Upper bound of `sup_{x ∈ set} ‖x − c‖_m`; convexity of seminorms makes
    /// the bound valid for the hull as well.
    pub fn shifted_sup(&self, set: &BodySet, c: &DVector<f64>, m: usize) -> f64 {
        let cm = self.metric.seminorm(c, m);
        let mut best = set.points.iter().map(|p| self.metric.seminorm(&(p - c), m)).fold(0.0, f64::max);
        for (b, s) in &set.parts {
            let v = match b.finite_points() {
                Some(pts) => pts.iter().map(|p| self.metric.seminorm(&(p * *s - c), m)).fold(0.0, f64::max),
                None => cm + s.abs() * self.seminorm_sup(b, m),
            };
            best = best.max(v);
        }
        best
    }

    fn metric_from_sups(&self, sups: &[f64]) -> f64 {
        if self.metric.mode() == MetricMode::SqrtScalar {
            return sups[0].sqrt();
        }
        let phi = self.metric.phi();
        self.metric
            .config()
            .weights
            .iter()
            .zip(sups)
            .map(|(w, s)| match s {
                s if *s == 0.0 => 0.0,
                s if s.is_infinite() => *w,
                s => w * phi.eval(*s),
            })
            .sum()
    }

    /// Upper bound of `sup_{x ∈ set} d(x, c)`.
    pub fn metric_sup(&self, set: &BodySet, c: &DVector<f64>) -> f64 {
        let joint = |s: &BodySet| {
            let sups: Vec<f64> = self.levels().map(|m| self.shifted_sup(s, c, m)).collect();
            self.metric_from_sups(&sups)
        };
        if set.hull {
            return joint(set);
        }
        let mut best = set.points.iter().map(|p| self.metric.norm(&(p - c))).fold(0.0, f64::max);
        for (b, s) in &set.parts {
            let single = BodySet { parts: vec![(b.clone(), *s)], points: Vec::new(), hull: false };
            let mut v = joint(&single);
            if let BodyKind::MetricBall { center, radius } = &b.kind {
                if *s == 1.0 {
                    let cc = DVector::from_column_slice(center);
                    v = v.min(self.metric.norm(&(cc - c)) + radius);
                }
            }
            best = best.max(v);
        }
        best
    }

    /// Upper bound of the metric diameter of `set`.
    pub fn diameter_bound(&self, set: &BodySet) -> f64 {
        let zero = DVector::zeros(self.metric.dim());
        let sups: Vec<f64> = self.levels().map(|m| 2.0 * self.shifted_sup(set, &zero, m)).collect();
        let mut bound = self.metric_from_sups(&sups);
        let balls: Option<Vec<(DVector<f64>, f64)>> = (!set.hull && set.points.is_empty())
            .then(|| {
                set.parts
                    .iter()
                    .map(|(b, s)| match &b.kind {
                        BodyKind::MetricBall { center, radius } if *s == 1.0 => {
                            Some((DVector::from_column_slice(center), *radius))
                        }
                        _ => None,
                    })
                    .collect()
            })
            .flatten();
        if let Some(balls) = balls {
            let mut pairwise = 0.0f64;
            for (i, (ci, ri)) in balls.iter().enumerate() {
                for (cj, rj) in &balls[i..] {
                    pairwise = pairwise.max(ri + rj + self.metric.norm(&(ci - cj)));
                }
            }
            bound = bound.min(pairwise);
        }
        if self.metric.mode() == MetricMode::SumForm {
            bound = bound.min(self.metric.config().weights.iter().sum());
        }
        bound
    }

    fn candidate_directions(&self) -> Vec<DVector<f64>> {
        let dim = self.metric.dim();
        let mut out: Vec<DVector<f64>> = (0..dim)
            .map(|k| {
                let mut e = DVector::zeros(dim);
                e[k] = 1.0;
                e
            })
            .collect();
        let mut r = rng::stream_rng(self.seed, stream::PALETTE);
        out.extend((0..RECESSION_SAMPLES).map(|_| rng::unit_direction(&mut r, dim)));
        out
    }

    /// Directions `u` found among basis vectors and random directions such
    /// that the whole line `x + t·u` stays inside the body.
    pub fn recession_directions(&self, body: &ConvexBody) -> Vec<DVector<f64>> {
        let inside = |u: &DVector<f64>| -> bool {
            let prof = self.metric.profile(u);
            match &body.kind {
                BodyKind::VPolytope { .. } | BodyKind::PointSet { .. } => false,
                BodyKind::MetricBall { radius, .. } => {
                    self.metric.mode() == MetricMode::SumForm && self.metric.ray_limit(&prof) <= *radius
                }
                _ => body.gauge_levels().unwrap_or_default().iter().all(|(l, _)| prof[*l] == 0.0),
            }
        };
        self.candidate_directions().into_iter().filter(|u| inside(u)).collect()
    }

    /// Largest `t` with `t·u` inside the body centred at its own centre, or
    /// `+∞` along recession directions.
    fn reach(&self, body: &ConvexBody, u: &DVector<f64>) -> f64 {
        let prof = self.metric.profile(u);
        match &body.kind {
            BodyKind::MetricBall { radius, .. } => self.metric.ray_radius(u, &prof, *radius),
            _ => body
                .gauge_levels()
                .unwrap_or_default()
                .iter()
                .map(|(l, b)| if prof[*l] == 0.0 { f64::INFINITY } else { b / prof[*l] })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Points of the body: vertices and random convex combinations for
    /// polytopes, radial samples strictly inside for open bodies.
    pub fn sample_points<R: Rng + ?Sized>(&self, body: &ConvexBody, count: usize, r: &mut R) -> Vec<DVector<f64>> {
        let dim = self.metric.dim();
        match (&body.kind, body.finite_points()) {
            (BodyKind::PointSet { .. }, Some(pts)) => pts,
            (_, Some(verts)) => {
                let mut out = verts.clone();
                for _ in 0..count {
                    let w: Vec<f64> = verts.iter().map(|_| -(1.0 - r.gen::<f64>()).ln()).collect();
                    let total: f64 = w.iter().sum();
                    let mut p = DVector::zeros(dim);
                    for (v, wi) in verts.iter().zip(&w) {
                        p += v * (wi / total);
                    }
                    out.push(p);
                }
                out
            }
            (kind, None) => {
                let center = match kind {
                    BodyKind::MetricBall { center, .. } => DVector::from_column_slice(center),
                    _ => DVector::zeros(dim),
                };
                let mut dirs = self.candidate_directions();
                dirs.extend((0..count).map(|_| rng::mixed_decay(r, dim, 1)));
                dirs.into_iter()
                    .enumerate()
                    .map(|(i, u)| {
                        let reach = self.reach(body, &u).min(RAY_CAP);
                        let t = if i % 2 == 0 { 1.0 - 1e-9 } else { r.gen::<f64>() };
                        let sign = if i % 4 < 2 { 1.0 } else { -1.0 };
                        &center + u * (sign * t * reach)
                    })
                    .collect()
            }
        }
    }

    pub fn contains_point(&self, body: &ConvexBody, x: &DVector<f64>) -> Result<bool> {
        Ok(match &body.kind {
            BodyKind::VPolytope { .. } => {
                let verts = body.finite_points().unwrap_or_default();
                lp::hull_residual(&verts, x)? <= hull_tol(x, &verts)
            }
            BodyKind::PointSet { .. } => body
                .finite_points()
                .unwrap_or_default()
                .iter()
                .any(|p| (p - x).amax() <= HULL_TOL * (1.0 + x.amax())),
            BodyKind::MetricBall { center, radius } => {
                self.metric.norm(&(x - DVector::from_column_slice(center))) < *radius
            }
            _ => body
                .gauge_levels()
                .unwrap_or_default()
                .iter()
                .all(|(l, b)| self.metric.seminorm(x, *l) < *b),
        })
    }

    /// `max_k ‖y‖_{l_k} / b_k` for sublevels and boxes.
    pub fn convex_gauge(&self, body: &ConvexBody, y: &DVector<f64>) -> Option<f64> {
        body.gauge_levels()
            .map(|lv| lv.iter().map(|(l, b)| self.metric.seminorm(y, *l) / b).fold(0.0, f64::max))
    }

    /// Whether `set ⊂ scale·outer`. Returns `(inside, exact)`; `exact` is
    /// false when the answer rests on sampling or on sampled lift constants.
    /// A `false` answer means containment could not be established.
    pub fn covers(&self, outer: &ConvexBody, scale: f64, set: &BodySet) -> Result<(bool, bool)> {
        let inner = set.scaled(1.0 / scale);
        match &outer.kind {
            BodyKind::VPolytope { .. } => {
                // Scale the container rather than the contents: the LP has
                // absolute tolerances, so tiny points would always fit.
                let verts: Vec<DVector<f64>> = outer.finite_points().unwrap_or_default().into_iter().map(|v| v * scale).collect();
                let inner = set;
                let mut exact = true;
                let mut pts = inner.points.clone();
                for (b, s) in &inner.parts {
                    match b.finite_points() {
                        Some(p) => pts.extend(p.into_iter().map(|x| x * *s)),
                        None => {
                            if !self.recession_directions(b).is_empty() {
                                return Ok((false, true));
                            }
                            let mut r = rng::stream_rng(self.seed, stream::PALETTE);
                            pts.extend(self.sample_points(b, 64, &mut r).into_iter().map(|x| x * *s));
                            exact = false;
                        }
                    }
                }
                for p in &pts {
                    if lp::hull_residual(&verts, p)? > hull_tol(p, &verts) {
                        return Ok((false, exact));
                    }
                }
                Ok((true, exact))
            }
            BodyKind::PointSet { .. } => {
                if inner.hull && inner.finite_points().map_or(true, |p| p.len() > 1) {
                    return Ok((false, true));
                }
                let Some(pts) = inner.finite_points() else { return Ok((false, true)) };
                for p in &pts {
                    if !self.contains_point(outer, p)? {
                        return Ok((false, true));
                    }
                }
                Ok((true, true))
            }
            BodyKind::MetricBall { center, radius } => {
                let c = DVector::from_column_slice(center);
                let bound = self.metric_sup(&inner, &c);
                let all_open = inner.points.is_empty() && inner.parts.iter().all(|(b, _)| b.is_open());
                let inside = if all_open { bound <= *radius } else { bound < *radius };
                let uses_lift = !inner.is_finite();
                Ok((inside, !uses_lift || self.lift_exact))
            }
            _ => {
                if let Some(pts) = inner.finite_points() {
                    let worst = pts.iter().filter_map(|p| self.convex_gauge(outer, p)).fold(0.0, f64::max);
                    return Ok((worst < 1.0, true));
                }
                let mut finite_pts = inner.points.clone();
                for (b, s) in &inner.parts {
                    if let Some(p) = b.finite_points() {
                        finite_pts.extend(p.into_iter().map(|x| x * *s));
                    }
                }
                let finite_ok = finite_pts.iter().all(|p| self.convex_gauge(outer, p).is_some_and(|g| g < 1.0));
                // Open parts only need the non-strict comparison of suprema.
                let open_ok = outer.gauge_levels().unwrap_or_default().iter().all(|(l, bound)| {
                    inner
                        .parts
                        .iter()
                        .filter(|(b, _)| b.finite_points().is_none())
                        .all(|(b, s)| s.abs() * self.seminorm_sup(b, *l) <= *bound)
                });
                Ok((finite_ok && open_ok, self.lift_exact))
            }
        }
    }

    /// Bounds of `sup_{x ∈ body} ‖A x‖_n` for every target level, together
    /// with a recession direction whose image is nonzero, when one exists.
    pub fn image_sups(&self, a: &GradedOperator, body: &ConvexBody, samples: usize) -> Result<ImageSups> {
        let target = a.target();
        let tgt_levels = 0..=target.n_max();
        if let Some(pts) = body.finite_points() {
            let sups: Vec<f64> = tgt_levels
                .map(|n| pts.iter().map(|p| target.seminorm(&a.apply(p), n)).fold(0.0, f64::max))
                .collect();
            return Ok(ImageSups { sampled: sups.clone(), sups, exact: true, unbounded_direction: None });
        }
        for u in self.recession_directions(body) {
            let au = a.apply(&u);
            if target.profile(&au).iter().any(|p| *p > 1e-12 * (1.0 + au.amax())) {
                let sups: Vec<f64> =
                    tgt_levels.map(|n| if target.seminorm(&au, n) > 0.0 { f64::INFINITY } else { 0.0 }).collect();
                return Ok(ImageSups {
                    sampled: sups.clone(),
                    sups,
                    exact: true,
                    unbounded_direction: Some(u.iter().copied().collect()),
                });
            }
        }
        let src_top = self.metric.n_max();
        let pairs: Vec<(usize, usize)> = (0..=src_top).flat_map(|l| tgt_levels.clone().map(move |n| (l, n))).collect();
        let norms = a.hamilton_norms(&pairs, &NormOptions::with_seed(self.seed))?;
        let body_sups: Vec<f64> = (0..=src_top).map(|l| self.seminorm_sup(body, l)).collect();
        let mut sups = vec![f64::INFINITY; target.n_max() + 1];
        let mut exact = true;
        for (&(l, n), nrm) in pairs.iter().zip(&norms) {
            let k = nrm.bound();
            let v = if k == 0.0 { 0.0 } else { k * body_sups[l] };
            if v < sups[n] {
                sups[n] = v;
                exact = exact && nrm.backend.is_exact();
            }
        }
        let mut sampled = vec![0.0f64; target.n_max() + 1];
        let mut r = rng::stream_rng(self.seed, stream::PALETTE);
        for p in self.sample_points(body, samples, &mut r) {
            let ap = a.apply(&p);
            for (n, s) in sampled.iter_mut().enumerate() {
                *s = s.max(target.seminorm(&ap, n));
            }
        }
        Ok(ImageSups { sups, sampled, exact, unbounded_direction: None })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageSups {
    /// Upper bounds per target level; `+∞` when no finite bound is known.
    pub sups: Vec<f64>,
    /// Largest image seminorms seen on sampled points of the body.
    pub sampled: Vec<f64>,
    pub exact: bool,
    pub unbounded_direction: Option<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witnesses::{build_normed_model, build_sequence_model, build_trig_model, product_weights};
    use nalgebra::dvector;

    #[test]
    fn polytope_validation() {
        let m = build_normed_model("n", 2, true).unwrap();
        assert!(ConvexBody::polytope(m.metric(), vec![]).is_err());
        assert!(ConvexBody::polytope(m.metric(), vec![dvector![f64::NAN, 0.0]]).is_err());
        assert!(ConvexBody::ball(m.metric(), dvector![0.0, 0.0], 0.0).is_err());
        assert!(ConvexBody::sublevel(m.metric(), 5, 1.0).is_err());
    }

    #[test]
    fn normed_ball_sup_is_the_closed_form() {
        // d = φ(‖x‖) on a normed model, so B_r = {‖x‖ < r/(1−r)}.
        let m = build_normed_model("n", 3, true).unwrap();
        let g = Geometry::new(m.metric().clone(), 0).unwrap();
        let b = ConvexBody::ball(m.metric(), DVector::zeros(3), 0.25).unwrap();
        assert!((g.seminorm_sup(&b, 0) - 0.25 / 0.75).abs() < 1e-12);
    }

    #[test]
    fn product_ball_has_recession_directions() {
        let m = build_sequence_model("p", 5, product_weights(5, 2)).unwrap();
        let g = Geometry::new(m.metric().clone(), 0).unwrap();
        // Coordinates beyond the top level are invisible to every seminorm.
        let b = ConvexBody::ball(m.metric(), DVector::zeros(5), 0.3).unwrap();
        let rec = g.recession_directions(&b);
        assert!(rec.iter().any(|u| u[4].abs() == 1.0));
    }

    #[test]
    fn polytope_containment_via_hull() {
        let m = build_normed_model("n", 2, false).unwrap();
        let g = Geometry::new(m.metric().clone(), 0).unwrap();
        let square = ConvexBody::polytope(
            m.metric(),
            vec![dvector![1.0, 1.0], dvector![1.0, -1.0], dvector![-1.0, 1.0], dvector![-1.0, -1.0]],
        )
        .unwrap();
        let seg = ConvexBody::segment(m.metric(), dvector![0.9, 0.0]).unwrap();
        assert_eq!(g.covers(&square, 1.0, &BodySet::of(&seg)).unwrap(), (true, true));
        assert_eq!(g.covers(&square, 0.5, &BodySet::of(&seg)).unwrap(), (false, true));
    }

    #[test]
    fn sampled_ball_points_are_inside() {
        let m = build_trig_model("t", 4, 3, 64).unwrap();
        let g = Geometry::new(m.metric().clone(), 3).unwrap();
        let b = ConvexBody::ball(m.metric(), DVector::zeros(m.dim()), 0.4).unwrap();
        let mut r = rng::stream_rng(1, stream::PALETTE);
        for p in g.sample_points(&b, 40, &mut r) {
            assert!(g.contains_point(&b, &p).unwrap());
        }
    }

    #[test]
    fn metric_sup_bounds_polytope_points() {
        let m = build_trig_model("t", 3, 3, 64).unwrap();
        let g = Geometry::new(m.metric().clone(), 0).unwrap();
        let mut r = rng::stream_rng(2, stream::PALETTE);
        let verts: Vec<_> = (0..4).map(|_| rng::gaussian_vector(&mut r, m.dim()) * 0.1).collect();
        let p = ConvexBody::polytope(m.metric(), verts).unwrap();
        let bound = g.metric_sup(&BodySet::of(&p), &DVector::zeros(m.dim()));
        for x in g.sample_points(&p, 50, &mut r) {
            assert!(m.metric().norm(&x) <= bound + 1e-12);
        }
    }
}
