use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::models::{build_scalar_model, ModelKind, ModelSpace};
use crate::error::{Error, Result};
use crate::graded_space::FrechetMetric;
use crate::operators::{GradedOperator, NormOptions, NormVariant};
use crate::rng::{self, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub terms: usize,
    /// Largest `|F(x)|` over the sampled points of `B_ε` and the built vectors.
    pub sup_on_ball: f64,
    /// Hamilton norm of the partial sum from the top level to `ℝ`.
    pub continuity_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnboundedFunctional {
    pub eps: f64,
    pub functional: Vec<f64>,
    pub partial_sums: Vec<Vec<f64>>,
    /// The vectors `v_n ∈ B_ε` with `F_n(v_n) ≥ 2^n`.
    pub vectors: Vec<Vec<f64>>,
    /// Whether the whole line through `v_n` stays inside `B_ε`.
    pub line_inside_ball: Vec<bool>,
    pub ladder: Vec<LadderRung>,
}

/// Vectors and functionals `(v, ℓ)` with `v ∈ B_ε` and `ℓ(v) ≠ 0`.
fn building_blocks(model: &ModelSpace, eps: f64, terms: usize) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
    let metric = model.metric();
    match model.kind() {
        ModelKind::Sequence { dim, .. } => {
            // Coordinates whose whole axis fits in B_ε.
            let coords: Vec<usize> = (0..*dim)
                .filter(|&k| {
                    let e = model.basis_vector(k).coords;
                    metric.ray_limit(&metric.profile(&e)) <= eps
                })
                .take(terms)
                .collect();
            if coords.len() < terms {
                return Err(Error::TruncationTooSmall(format!(
                    "only {} coordinates have their axis inside B_{eps}, {terms} needed",
                    coords.len()
                )));
            }
            coords
                .into_iter()
                .enumerate()
                .map(|(n, k)| Ok((model.basis_vector(k).coords * 2f64.powi(n as i32 + 1), model.coordinate_functional(k)?)))
                .collect()
        }
        ModelKind::Trig { modes, .. } => {
            if terms > *modes {
                return Err(Error::TruncationTooSmall(format!("{terms} terms need {terms} modes, model has {modes}")));
            }
            let ell = model.point_evaluation(0.0, 1)?;
            (1..=terms)
                .map(|w| {
                    let s = model.trig_sin(w)?.coords;
                    let radius = metric.ray_radius(&s, &metric.profile(&s), eps / 2.0);
                    Ok((s * radius.min(1e12), ell.clone()))
                })
                .collect()
        }
        _ => Err(Error::Unsupported(format!("model `{}` hosts no unbounded functional", model.id()))),
    }
}

fn ball_samples(metric: &FrechetMetric, eps: f64, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut r = rng::stream_rng(seed, stream::WITNESS);
    (0..count)
        .map(|i| {
            let mut u = rng::mixed_decay(&mut r, metric.dim(), i % 4);
            u /= u.norm().max(f64::MIN_POSITIVE);
            let s = metric.ray_radius(&u, &metric.profile(&u), eps);
            let t: f64 = r.gen_range(0.0..1.0);
            if s.is_infinite() { u * (1e6 * t) } else { u * (s * t) }
        })
        .collect()
}

/// Partial sums `F_k = Σ_{n≤k} f^{(n)}` with `f^{(n)}(v_n) = 2^n` on vectors
/// `v_n ∈ B_ε`; signs of the `v_n` are chosen so that `F_k(v_k) ≥ 2^k`.
pub fn unbounded_functional(model: &ModelSpace, eps: f64, terms: usize, seed: u64) -> Result<UnboundedFunctional> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("ε = {eps} must lie in (0, 1)")));
    }
    let metric = model.metric();
    let blocks = building_blocks(model, eps, terms)?;
    let mut f = DVector::zeros(model.dim());
    let mut partial_sums = vec![f.iter().copied().collect::<Vec<f64>>()];
    let mut vectors = Vec::with_capacity(terms);
    for (n, (v, ell)) in blocks.into_iter().enumerate() {
        let v = if f.dot(&v) < 0.0 { -v } else { v };
        let scale = 2f64.powi(n as i32 + 1) / ell.dot(&v);
        f += ell * scale;
        vectors.push(v);
        partial_sums.push(f.iter().copied().collect());
    }
    let line = build_scalar_model(format!("{}:line", model.id()), 0)?;
    let samples = ball_samples(metric, eps, 2000, seed);
    let mut ladder = Vec::with_capacity(terms + 1);
    for (k, fk) in partial_sums.iter().enumerate() {
        let fk = DVector::from_column_slice(fk);
        let sup_on_ball = samples.iter().chain(&vectors).map(|x| fk.dot(x).abs()).fold(0.0, f64::max);
        let op = GradedOperator::new(DMatrix::from_row_slice(1, fk.len(), fk.as_slice()), metric.clone(), line.metric().clone())?;
        let continuity_norm = op.op_norm(metric.n_max(), 0, NormVariant::Hamilton, &NormOptions::with_seed(seed))?.value.value;
        ladder.push(LadderRung { terms: k, sup_on_ball, continuity_norm });
    }
    let line_inside_ball = vectors
        .iter()
        .map(|v| metric.ray_radius(v, &metric.profile(v), eps).is_infinite())
        .collect();
    Ok(UnboundedFunctional {
        eps,
        functional: f.iter().copied().collect(),
        partial_sums,
        vectors: vectors.iter().map(|v| v.iter().copied().collect()).collect(),
        line_inside_ball,
        ladder,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetRung {
    pub index: usize,
    pub distance: f64,
    pub radius: f64,
    pub bump_at_center: f64,
    pub value: f64,
}

/// Points `w_n → 0`, bumps `ψ_n = β(d(·, w_n) / ρ_n)` with disjoint supports
/// and functionals `f_n` with `f_n(w_n) = n + 1`; `E(v) = Σ ψ_n(v) f_n(v)`.
#[derive(Clone, Debug)]
pub struct DiscontinuityGadget {
    metric: Arc<FrechetMetric>,
    centers: Vec<DVector<f64>>,
    radii: Vec<f64>,
    functionals: Vec<DVector<f64>>,
    pub rungs: Vec<GadgetRung>,
    pub disjoint: bool,
}

/// `(1 − t²)²` on `[0, 1)`, zero beyond.
fn bump_profile(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        s * s
    }
}

impl DiscontinuityGadget {
    pub fn bump(&self, k: usize, v: &DVector<f64>) -> f64 {
        bump_profile(self.metric.norm(&(v - &self.centers[k])) / self.radii[k])
    }

    pub fn evaluate(&self, v: &DVector<f64>) -> f64 {
        (0..self.centers.len())
            .map(|k| {
                let b = self.bump(k, v);
                if b == 0.0 {
                    0.0
                } else {
                    b * self.functionals[k].dot(v)
                }
            })
            .sum()
    }

    pub fn centers(&self) -> &[DVector<f64>] {
        &self.centers
    }
}

/// Builds the ladder at indices `n = 4, 8, …, 4·length`.
pub fn eval_discontinuity_gadget(model: &ModelSpace, length: usize) -> Result<DiscontinuityGadget> {
    let metric = model.metric().clone();
    if length == 0 || length > 60 {
        return Err(Error::InvalidParameter(format!("ladder length {length} outside 1..=60")));
    }
    let dim = model.dim();
    let (u, limit) = (0..dim)
        .map(|k| {
            let e = model.basis_vector(k).coords;
            let l = metric.ray_limit(&metric.profile(&e));
            (e, l)
        })
        .fold(None::<(DVector<f64>, f64)>, |acc, (e, l)| match acc {
            Some((_, best)) if best >= l => acc,
            _ => Some((e, l)),
        })
        .ok_or_else(|| Error::TruncationTooSmall("empty model".into()))?;
    if limit <= 0.5f64.powi(4) {
        return Err(Error::TruncationTooSmall("no basis ray leaves B_{1/16}".into()));
    }
    let profile = metric.profile(&u);
    let mut centers = Vec::with_capacity(length);
    let mut radii = Vec::with_capacity(length);
    let mut functionals = Vec::with_capacity(length);
    for k in 1..=length {
        let n = 4 * k;
        let target = 0.75 * 0.5f64.powi(n as i32);
        let t = metric.ray_radius(&u, &profile, target);
        let w = &u * t;
        let d = metric.norm(&w);
        if !(d >= 0.5f64.powi(n as i32 + 1)) {
            return Err(Error::TruncationTooSmall(format!("cannot place w_{n} in the required shell")));
        }
        functionals.push(&u * ((n + 1) as f64 / u.dot(&w)));
        centers.push(w);
        radii.push(0.5f64.powi(n as i32 + 2));
    }
    let mut disjoint = true;
    for i in 0..length {
        for j in i + 1..length {
            if metric.norm(&(&centers[i] - &centers[j])) <= radii[i] + radii[j] {
                disjoint = false;
            }
        }
    }
    let mut gadget = DiscontinuityGadget { metric, centers, radii, functionals, rungs: Vec::new(), disjoint };
    gadget.rungs = (0..length)
        .map(|k| {
            let w = &gadget.centers[k];
            GadgetRung {
                index: 4 * (k + 1),
                distance: gadget.metric.norm(w),
                radius: gadget.radii[k],
                bump_at_center: gadget.bump(k, w),
                value: gadget.evaluate(w),
            }
        })
        .collect();
    Ok(gadget)
}
