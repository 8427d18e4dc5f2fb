//! Subbasis membership, tame sets, Arzela-Ascoli boxes and absorption.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::body::{hull_tol, BodyKind, BodySet, ConvexBody, Geometry};
use super::family::PaletteFamily;
use crate::error::{Error, Result};
use crate::graded_space::{FrechetMetric, GaugeOptions, GradedVector};
use crate::operators::GradedOperator;
use crate::rng::{self, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapsIntoMethod {
    /// Decided on vertices through convexity.
    Vertices,
    /// Rigorous metric bound over the image polytope.
    MetricBound,
    /// Sampled points; only a `false` answer is certain.
    Sampled,
    /// A recession direction of the source body with nonzero image.
    Recession,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapsInto {
    pub inside: bool,
    pub method: MapsIntoMethod,
    /// Largest convex gauge of an image point, or largest `d(Ax, c)/radius`
    /// for balls.
    pub worst: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapsIntoOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MapsIntoOptions {
    fn default() -> Self {
        Self { samples: 256, seed: 0 }
    }
}

/// Whether `A(P) ⊂ O`, i.e. whether `A` lies in the subbasis set `(P, O)`.
pub fn maps_into(a: &GradedOperator, p: &ConvexBody, o: &ConvexBody, opts: &MapsIntoOptions) -> Result<MapsInto> {
    let (src, tgt) = (a.source(), a.target());
    p.validate(src)?;
    o.validate(tgt)?;
    if !o.is_open() {
        return Err(Error::Unsupported("target body must be an open ball, sublevel or box".into()));
    }
    let src_geo = Geometry::new(src.clone(), opts.seed)?;
    if let Some(verts) = p.finite_points() {
        let images: Vec<DVector<f64>> = verts.iter().map(|v| a.apply(v)).collect();
        return image_polytope_inside(tgt, &images, o, matches!(p.kind, BodyKind::PointSet { .. }), opts);
    }
    for u in src_geo.recession_directions(p) {
        let au = a.apply(&u);
        if au.amax() > 0.0 && !o_contains_line(tgt, o, &au) {
            return Ok(MapsInto { inside: false, method: MapsIntoMethod::Recession, worst: f64::INFINITY, samples: 0 });
        }
    }
    let mut r = rng::stream_rng(opts.seed, stream::PALETTE);
    let pts = src_geo.sample_points(p, opts.samples, &mut r);
    let images: Vec<DVector<f64>> = pts.iter().map(|x| a.apply(x)).collect();
    let worst = images.iter().map(|y| target_ratio(tgt, o, y)).fold(0.0, f64::max);
    Ok(MapsInto { inside: worst < 1.0, method: MapsIntoMethod::Sampled, worst, samples: images.len() })
}

/// Whether the whole line `y + t·u` stays in the open target body.
fn o_contains_line(tgt: &FrechetMetric, o: &ConvexBody, u: &DVector<f64>) -> bool {
    let prof = tgt.profile(u);
    match &o.kind {
        BodyKind::MetricBall { radius, .. } => tgt.ray_limit(&prof) < *radius * 0.5,
        BodyKind::GaugeSublevel { level, .. } => prof[*level] == 0.0,
        BodyKind::SeminormBox { first_level, bounds } => (0..bounds.len()).all(|k| prof[first_level + k] == 0.0),
        _ => false,
    }
}

/// Convex gauge for sublevels and boxes, `d(y, c)/radius` for balls.
fn target_ratio(tgt: &FrechetMetric, o: &ConvexBody, y: &DVector<f64>) -> f64 {
    match &o.kind {
        BodyKind::MetricBall { center, radius } => tgt.norm(&(y - DVector::from_column_slice(center))) / radius,
        BodyKind::GaugeSublevel { level, bound } => tgt.seminorm(y, *level) / bound,
        BodyKind::SeminormBox { first_level, bounds } => bounds
            .iter()
            .enumerate()
            .map(|(k, b)| tgt.seminorm(y, first_level + k) / b)
            .fold(0.0, f64::max),
        _ => f64::INFINITY,
    }
}

fn image_polytope_inside(
    tgt: &Arc<FrechetMetric>,
    images: &[DVector<f64>],
    o: &ConvexBody,
    points_only: bool,
    opts: &MapsIntoOptions,
) -> Result<MapsInto> {
    let vertex_worst = images.iter().map(|y| target_ratio(tgt, o, y)).fold(0.0, f64::max);
    if o.is_convex() || points_only {
        return Ok(MapsInto { inside: vertex_worst < 1.0, method: MapsIntoMethod::Vertices, worst: vertex_worst, samples: images.len() });
    }
    // Balls are not convex: first try the rigorous seminorm bound over the
    // image hull, then look for a counterexample among convex combinations.
    let geo = Geometry::new(tgt.clone(), opts.seed)?;
    let hull = ConvexBody::polytope(tgt, images.to_vec())?;
    if let BodyKind::MetricBall { center, radius } = &o.kind {
        let c = DVector::from_column_slice(center);
        let bound = geo.metric_sup(&BodySet::of(&hull), &c);
        if bound < *radius {
            return Ok(MapsInto { inside: true, method: MapsIntoMethod::MetricBound, worst: bound / radius, samples: 0 });
        }
    }
    let mut r = rng::stream_rng(opts.seed, stream::PALETTE);
    let pts = geo.sample_points(&hull, opts.samples, &mut r);
    let worst = pts.iter().map(|y| target_ratio(tgt, o, y)).fold(0.0, f64::max);
    Ok(MapsInto { inside: worst < 1.0, method: MapsIntoMethod::Sampled, worst, samples: pts.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TameKind {
    /// Dyadic-ball gauges `μ_n(S)` (upper end of the bracket).
    #[default]
    Dyadic,
    /// Grading seminorms `max_{x ∈ S} ‖x‖_n`.
    Grading,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TameReport {
    pub tame: bool,
    pub kind: TameKind,
    pub first_failure: Option<usize>,
    /// Gauge (or seminorm) profile of the set, `n = 0..=N`.
    pub profile: Vec<f64>,
    pub thresholds: Vec<f64>,
}

/// Whether `S` satisfies `profile_n(S) < D·α^n` for all `n ≤ N`.
pub fn is_tame_set(metric: &FrechetMetric, set: &[GradedVector], alpha: f64, d: f64, kind: TameKind) -> Result<TameReport> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    for v in set {
        metric.check(v)?;
    }
    let top = metric.n_max();
    let profile: Vec<f64> = (0..=top)
        .map(|n| match kind {
            TameKind::Dyadic => metric.set_gauge(set, n, &GaugeOptions::default()).map(|g| g.upper),
            TameKind::Grading => Ok(set.iter().map(|v| metric.seminorm(&v.coords, n)).fold(0.0, f64::max)),
        })
        .collect::<Result<_>>()?;
    let thresholds: Vec<f64> = (0..=top).map(|n| d * alpha.powi(n as i32)).collect();
    let first_failure = profile.iter().zip(&thresholds).position(|(p, t)| p >= t);
    Ok(TameReport { tame: first_failure.is_none(), kind, first_failure, profile, thresholds })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxReport {
    /// Levels `1..=L` constrained by the box.
    pub levels: usize,
    /// Sequence entries beyond the top grading level, which are ignored.
    pub ignored: usize,
    /// Upper bounds of every seminorm on the box.
    pub seminorm_sups: Vec<f64>,
    /// Basis directions the constrained seminorms do not see.
    pub recession_directions: usize,
    /// Closed and bounded at truncation, hence compact.
    pub bounded: bool,
    pub diameter_bound: f64,
}

/// The box `{v : ‖v‖_i < a_i, i = 1..=L}` with `a = (a_1, …, a_L)`.
pub fn aa_box(metric: &Arc<FrechetMetric>, a: &[f64]) -> Result<(ConvexBody, BoxReport)> {
    if a.is_empty() {
        return Err(Error::InvalidParameter("box needs at least one bound".into()));
    }
    let top = metric.n_max();
    if top == 0 {
        return Err(Error::TruncationTooSmall("box levels start at 1".into()));
    }
    let used = a.len().min(top);
    let body = ConvexBody::seminorm_box(metric, 1, a[..used].to_vec())?;
    let geo = Geometry::new(metric.clone(), 0)?;
    let sups: Vec<f64> = (0..=top).map(|m| geo.seminorm_sup(&body, m)).collect();
    let dim = metric.dim();
    let recession = (0..dim)
        .filter(|&k| {
            let mut e = DVector::zeros(dim);
            e[k] = 1.0;
            (1..=used).all(|l| metric.seminorm(&e, l) == 0.0)
        })
        .count();
    let diameter_bound = geo.diameter_bound(&BodySet::of(&body));
    let bounded = recession == 0 && geo.recession_directions(&body).is_empty() && sups.iter().all(|s| s.is_finite());
    let report = BoxReport { levels: used, ignored: a.len() - used, seminorm_sups: sups, recession_directions: recession, bounded, diameter_bound };
    Ok((body, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionReport {
    /// Minimal 1-based index whose chain element absorbs every generator.
    pub index: Option<usize>,
    /// Doubling exponent used per generator at that index.
    pub exponents: Vec<u32>,
    /// First generator the last chain element fails to absorb.
    pub unabsorbed: Option<usize>,
}

/// Doublings tried when testing `G ⊂ λ·S_i`.
pub const MAX_DOUBLINGS: u32 = 40;

/// Minimal `i` such that every generator `G` satisfies `G ⊂ 2^k·S_i` for
/// some `k ≤ 40`.
pub fn absorption_index(chain: &[ConvexBody], family: &PaletteFamily) -> Result<AbsorptionReport> {
    if chain.is_empty() {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    let geo = family.geometry();
    for b in chain {
        b.validate(geo.metric())?;
    }
    for i in 0..chain.len() - 1 {
        if !geo.covers(&chain[i + 1], 1.0, &BodySet::of(&chain[i]))?.0 {
            return Err(Error::InvalidParameter(format!("chain is not ascending at position {}", i + 1)));
        }
    }
    let mut unabsorbed = None;
    for (i, s) in chain.iter().enumerate() {
        let mut exponents = Vec::with_capacity(family.generators.len());
        for (gi, g) in family.generators.iter().enumerate() {
            let set = BodySet::of(g);
            let mut hit = None;
            for k in 0..=MAX_DOUBLINGS {
                if geo.covers(s, 2f64.powi(k as i32), &set)?.0 {
                    hit = Some(k);
                    break;
                }
            }
            match hit {
                Some(k) => exponents.push(k),
                None => {
                    unabsorbed = Some(gi);
                    break;
                }
            }
        }
        if exponents.len() == family.generators.len() {
            return Ok(AbsorptionReport { index: Some(i + 1), exponents, unabsorbed: None });
        }
    }
    Ok(AbsorptionReport { index: None, exponents: Vec::new(), unabsorbed })
}

/// Whether a point lies in a polytope up to the hull tolerance.
pub fn polytope_contains(vertices: &[DVector<f64>], x: &DVector<f64>) -> Result<bool> {
    Ok(crate::lp::hull_residual(vertices, x)? <= hull_tol(x, vertices))
}
