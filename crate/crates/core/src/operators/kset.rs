use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::norm::{dyadic_directions, dyadic_table_with, DyadicTable};
use super::{GradedOperator, NormOptions};
use crate::error::{Error, Result};
use crate::graded_space::log_grid;

/// Thresholds `a_{i,j}` of the operator sets `K^a_{i,j} = {A : ‖A‖_{i,j} < a_{i,j}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Thresholds {
    /// `a_{i,j} = base^{-i}`.
    Geometric { base: f64 },
    /// `a_{i,j} = i^{-j}`.
    PowerLaw,
    /// `values[i - 1][j]`.
    Custom { values: Vec<Vec<f64>> },
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::Geometric { base: 2.0 }
    }
}

impl Thresholds {
    pub fn value(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 {
            return Err(Error::InvalidParameter("K-set indices start at 1".into()));
        }
        match self {
            Thresholds::Geometric { base } => Ok(base.powi(-(i as i32))),
            Thresholds::PowerLaw => Ok((i as f64).powi(-(j as i32))),
            Thresholds::Custom { values } => values
                .get(i - 1)
                .and_then(|row| row.get(j))
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("no threshold for ({i}, {j})"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSetSpec {
    pub thresholds: Thresholds,
    pub j: usize,
}

impl KSetSpec {
    pub fn geometric(j: usize) -> Self {
        Self { thresholds: Thresholds::default(), j }
    }

    pub fn validate(&self, top: usize) -> Result<()> {
        for i in 1..=top {
            let a = self.thresholds.value(i, self.j)?;
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidParameter(format!("threshold a_({i},{}) must be positive", self.j)));
            }
        }
        Ok(())
    }

    /// `a_{i+1,j} ≥ a_{i,j} / 2` for `i < top`, which makes `K^a_j` an
    /// ascending union of convex sets.
    pub fn is_ascending(&self, top: usize) -> Result<bool> {
        for i in 1..top {
            if self.thresholds.value(i + 1, self.j)? < 0.5 * self.thresholds.value(i, self.j)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMembership {
    pub member: bool,
    /// Smallest `i` with `‖A‖_{i,j} < a_{i,j}`.
    pub witness: Option<usize>,
    /// The star estimate is also below the threshold at the witness.
    pub confirmed: bool,
    /// `(i, lower, upper, a_{i,j})` for every index searched.
    pub norms: Vec<(usize, f64, f64, f64)>,
}

fn membership_from_table(t: &DyadicTable, spec: &KSetSpec) -> Result<KMembership> {
    let mut norms = Vec::with_capacity(t.source_levels.len());
    let mut witness = None;
    let mut confirmed = false;
    for (k, &i) in t.source_levels.iter().enumerate() {
        let a = spec.thresholds.value(i, spec.j)?;
        let (lo, up) = (t.lower[k][0], t.upper[k][0]);
        norms.push((i, lo, up, a));
        if witness.is_none() && lo < a {
            witness = Some(i);
            confirmed = up < a;
        }
    }
    Ok(KMembership { member: witness.is_some(), witness, confirmed, norms })
}

fn search_levels(a: &GradedOperator, spec: &KSetSpec) -> Result<Vec<usize>> {
    let top = a.source().dyadic_top();
    if top == 0 {
        return Err(Error::InvalidParameter("source model has no dyadic level above 0".into()));
    }
    if spec.j > a.target().dyadic_top() {
        return Err(Error::LevelOutOfRange { level: spec.j, top: a.target().dyadic_top() });
    }
    spec.validate(top)?;
    Ok((1..=top).collect())
}

/// Membership of `A` in `K^a_j = ∪_i K^a_{i,j}` at truncation, decided on the
/// rigorous lower dyadic norms: a negative answer is exact.
pub fn kj_membership(a: &GradedOperator, spec: &KSetSpec, opts: &NormOptions) -> Result<KMembership> {
    let levels = search_levels(a, spec)?;
    let dirs = dyadic_directions(a.source().dim(), opts)?;
    let t = dyadic_table_with(a, &levels, &[spec.j], dirs)?;
    membership_from_table(&t, spec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffWitness {
    pub j: usize,
    pub n_scale: u64,
    /// Source vector whose image leaves the hull at level `j`.
    pub vector: Vec<f64>,
    /// Strictness estimate of `vector` and the resulting scale `⌊S⌋ + 1`.
    pub strictness: f64,
    pub recipe_scale: u64,
}

/// A level `j` and an integer `N` with `N·A ∉ K^a_j`, separating `A` from 0.
pub fn hausdorff_witness(a: &GradedOperator, thresholds: &Thresholds, opts: &NormOptions) -> Result<HausdorffWitness> {
    if a.is_zero() {
        return Err(Error::NoWitness("the zero operator lies in every K-set".into()));
    }
    let (src, tgt) = (a.source(), a.target());
    let mat = a.matrix();
    let mut columns: Vec<usize> = (0..mat.ncols()).collect();
    columns.sort_by(|&x, &y| mat.column(y).norm().total_cmp(&mat.column(x).norm()).then(x.cmp(&y)));
    // Pick v with A v visible to some target level, scaled so that the outer
    // bound on its gauge is 2: then A v ∉ c(I).
    let mut found = None;
    'outer: for &c in &columns {
        let mut v = DVector::zeros(mat.ncols());
        v[c] = 1.0;
        let w = a.apply(&v);
        let q = tgt.profile(&w);
        for level in 0..=tgt.dyadic_top() {
            let (lo, _) = tgt.gauge_bounds_from_profile(&w, &q, level);
            if lo > 0.0 {
                found = Some((v * (2.0 / lo), level));
                break 'outer;
            }
        }
    }
    let (v, level) = found.ok_or_else(|| Error::NoWitness("image is invisible to every target level".into()))?;
    let vector = crate::graded_space::GradedVector { coords: v.clone(), model_id: src.id().clone() };
    let strictness = src.strictness(&vector, &log_grid(-8.0, 4.0, 49))?.value;
    let mut extra = opts.clone();
    extra.extra_directions.push(v.iter().copied().collect());
    let levels: Vec<usize> = (1..=src.dyadic_top()).collect();
    if levels.is_empty() {
        return Err(Error::NoWitness("source model has no dyadic level above 0".into()));
    }
    for j in level.max(1)..=tgt.dyadic_top() {
        let spec = KSetSpec { thresholds: thresholds.clone(), j };
        spec.validate(src.dyadic_top())?;
        let dirs = dyadic_directions(src.dim(), &extra)?;
        let t = dyadic_table_with(a, &levels, &[j], dirs)?;
        if t.lower.iter().any(|row| row[0] == 0.0) {
            continue;
        }
        let mut need = 0.0f64;
        for (k, &i) in levels.iter().enumerate() {
            need = need.max(thresholds.value(i, j)? / t.lower[k][0]);
        }
        let mut n_scale = need.ceil().max(1.0) as u64;
        for _ in 0..4 {
            if !kj_membership(&a.scaled(n_scale as f64), &spec, &extra)?.member {
                return Ok(HausdorffWitness {
                    j,
                    n_scale,
                    vector: v.iter().copied().collect(),
                    strictness,
                    recipe_scale: strictness.floor() as u64 + 1,
                });
            }
            n_scale += 1;
        }
    }
    Err(Error::NoWitness("no separating level at this truncation".into()))
}
