use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded_space::{FrechetMetric, GradedVector};
use crate::lp;
use crate::rng::{self, stream};

/// `p(v) = Σ scale · ‖v‖_level`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sublinear {
    pub terms: Vec<(usize, f64)>,
}

impl Sublinear {
    pub fn level(n: usize) -> Self {
        Self { terms: vec![(n, 1.0)] }
    }

    pub fn scaled(n: usize, scale: f64) -> Self {
        Self { terms: vec![(n, scale)] }
    }

    pub fn eval(&self, metric: &FrechetMetric, v: &DVector<f64>) -> f64 {
        self.terms.iter().map(|&(n, s)| s * metric.seminorm(v, n)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionRoute {
    Zero,
    ClosedForm,
    LinearProgram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub functional: Vec<f64>,
    pub route: ExtensionRoute,
    pub value_at_w: f64,
    pub p_at_w: f64,
    /// Points on which `f ≤ p` was checked, and the largest `f(v) − p(v)`.
    pub checked: usize,
    pub max_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionOptions {
    pub seed: u64,
    pub samples: usize,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        Self { seed: 0, samples: 10_000 }
    }
}

fn single_euclidean(metric: &FrechetMetric, p: &Sublinear) -> Option<(DMatrix<f64>, f64)> {
    if p.terms.len() != 1 {
        return None;
    }
    let (n, s) = p.terms[0];
    metric.tower().effective_euclidean(n).map(|q| (q, s))
}

/// A linear functional `f` with `f(w) = c` and `f ≤ p`, by the closed form on
/// Euclidean levels or a feasibility LP over the dual atoms otherwise.
pub fn dominated_extension(
    metric: &FrechetMetric,
    w: &GradedVector,
    c: f64,
    p: &Sublinear,
    opts: &ExtensionOptions,
) -> Result<Extension> {
    metric.check(w)?;
    for &(n, s) in &p.terms {
        if n > metric.n_max() {
            return Err(Error::LevelOutOfRange { level: n, top: metric.n_max() });
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter("sublinear scales must be finite and ≥ 0".into()));
        }
    }
    let dim = metric.dim();
    let pw = p.eval(metric, &w.coords);
    if c.abs() > pw * (1.0 + 1e-12) {
        return Err(Error::Infeasible(format!("|c| = {} exceeds p(w) = {pw}", c.abs())));
    }
    let (f, route) = if c == 0.0 {
        (DVector::zeros(dim), ExtensionRoute::Zero)
    } else if let Some((q, s)) = single_euclidean(metric, p) {
        let qw = &q * &w.coords;
        let norm2 = w.coords.dot(&qw);
        debug_assert!(s > 0.0);
        (qw * (c / norm2), ExtensionRoute::ClosedForm)
    } else {
        let mut atoms: Vec<DVector<f64>> = Vec::new();
        let mut groups = Vec::new();
        for &(n, s) in &p.terms {
            let level_atoms = metric.tower().dual_atoms(n).ok_or_else(|| {
                Error::Unsupported("Euclidean levels are only supported as a single term".into())
            })?;
            let start = atoms.len();
            atoms.extend(level_atoms.into_iter().map(|a| a * s));
            groups.push(start..atoms.len());
        }
        let coeffs: Vec<f64> = atoms.iter().map(|a| a.dot(&w.coords)).collect();
        let lambda = lp::grouped_l1_feasibility(&coeffs, &groups, c)?
            .ok_or_else(|| Error::Infeasible(format!("no functional with f(w) = {c} below p at this truncation")))?;
        let mut f = DVector::zeros(dim);
        for (a, l) in atoms.iter().zip(&lambda) {
            f += a * *l;
        }
        (f, ExtensionRoute::LinearProgram)
    };
    let mut points = vertex_set(metric, p);
    let mut r = rng::stream_rng(opts.seed, stream::WITNESS);
    points.extend((0..opts.samples).map(|i| rng::mixed_decay(&mut r, dim, i % 4)));
    points.push(w.coords.clone());
    let mut max_excess = f64::NEG_INFINITY;
    for v in &points {
        let pv = p.eval(metric, v);
        let excess = f.dot(v) - pv;
        max_excess = max_excess.max(excess);
        if excess > 1e-9 * pv.max(1.0) {
            return Err(Error::Evaluation(format!("f exceeds p by {excess:e} at a check point")));
        }
    }
    Ok(Extension {
        value_at_w: f.dot(&w.coords),
        functional: f.iter().copied().collect(),
        route,
        p_at_w: pw,
        checked: points.len(),
        max_excess,
    })
}

/// Vertices of the unit ball of a single weighted-max term in low dimension.
fn vertex_set(metric: &FrechetMetric, p: &Sublinear) -> Vec<DVector<f64>> {
    if p.terms.len() != 1 || metric.dim() > 12 {
        return Vec::new();
    }
    let Some(weights) = metric.tower().effective_weighted_max(p.terms[0].0) else { return Vec::new() };
    if weights.iter().any(|w| *w == 0.0) {
        return Vec::new();
    }
    let d = weights.len();
    (0..1u32 << d)
        .map(|mask| DVector::from_fn(d, |k, _| if mask >> k & 1 == 1 { 1.0 } else { -1.0 } / weights[k]))
        .collect()
}
