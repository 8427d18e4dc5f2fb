use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Backend, GradedOperator, NormOptions};
use crate::error::{Error, Result};
use crate::graded_space::{FrechetMetric, GaugeValue};
use crate::rng::{self, stream};

/// An operator norm value with the backend that produced it and, when
/// available, a vector attaining (or approaching) it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpNorm {
    pub value: GaugeValue,
    pub backend: Backend,
    #[serde(skip)]
    pub witness: Option<DVector<f64>>,
}

impl OpNorm {
    /// Best available upper bound: the upper end when finite, else the value.
    pub fn bound(&self) -> f64 {
        if self.value.upper.is_finite() {
            self.value.upper
        } else {
            self.value.value
        }
    }
}

fn check_level(level: usize, top: usize) -> Result<()> {
    if level > top {
        return Err(Error::LevelOutOfRange { level, top });
    }
    Ok(())
}

/// `‖A v‖_n / ‖v‖_m`, with `0/0 = 0` and `x/0 = ∞`.
pub fn hamilton_ratio(a: &GradedOperator, v: &DVector<f64>, m: usize, n: usize) -> f64 {
    ratio_from(a.source().seminorm(v, m), a.target().seminorm(&a.apply(v), n))
}

fn ratio_from(den: f64, num: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn extra_directions(dim: usize, opts: &NormOptions) -> Result<Vec<DVector<f64>>> {
    opts.extra_directions
        .iter()
        .map(|d| {
            if d.len() != dim {
                Err(Error::Dimension { expected: dim, got: d.len() })
            } else {
                Ok(DVector::from_column_slice(d))
            }
        })
        .collect()
}

pub(crate) fn hamilton(a: &GradedOperator, pairs: &[(usize, usize)], opts: &NormOptions) -> Result<Vec<OpNorm>> {
    let (src, tgt) = (a.source(), a.target());
    for &(m, n) in pairs {
        check_level(m, src.n_max())?;
        check_level(n, tgt.n_max())?;
    }
    if a.is_zero() {
        return Ok(pairs
            .iter()
            .map(|_| OpNorm { value: GaugeValue::exact(0.0), backend: Backend::ExactWeightedMax, witness: None })
            .collect());
    }
    let mut cache: Option<Candidates> = None;
    let mut out = Vec::with_capacity(pairs.len());
    for &(m, n) in pairs {
        if let Some(v) = exact_weighted_max(a, m, n) {
            out.push(v);
        } else if let Some(v) = exact_euclidean(a, m, n) {
            out.push(v);
        } else {
            if cache.is_none() {
                cache = Some(Candidates::build(a, opts)?);
            }
            out.push(sampled(a, m, n, cache.as_ref().unwrap(), opts));
        }
    }
    Ok(out)
}

fn exact_weighted_max(a: &GradedOperator, m: usize, n: usize) -> Option<OpNorm> {
    let s = a.source().tower().effective_weighted_max(m)?;
    let t = a.target().tower().effective_weighted_max(n)?;
    let mat = a.matrix();
    let mut best = (0.0f64, None::<usize>);
    for i in 0..mat.nrows() {
        if t[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for k in 0..mat.ncols() {
            let x = mat[(i, k)];
            if x == 0.0 {
                continue;
            }
            row += if s[k] == 0.0 { f64::INFINITY } else { x.abs() / s[k] };
        }
        let row = t[i] * row;
        if row > best.0 {
            best = (row, Some(i));
        }
    }
    let witness = best.1.map(|i| {
        DVector::from_fn(mat.ncols(), |k, _| {
            let x = mat[(i, k)];
            if s[k] == 0.0 {
                if x != 0.0 { x.signum() } else { 0.0 }
            } else {
                x.signum() / s[k]
            }
        })
    });
    let value = if best.0.is_infinite() { GaugeValue::lower_only(f64::INFINITY) } else { GaugeValue::exact(best.0) };
    Some(OpNorm { value, backend: Backend::ExactWeightedMax, witness })
}

fn exact_euclidean(a: &GradedOperator, m: usize, n: usize) -> Option<OpNorm> {
    let q = a.source().tower().effective_euclidean(m)?;
    let p = a.target().tower().effective_euclidean(n)?;
    let mat = a.matrix();
    let image_form = mat.transpose() * &p * mat;
    let eig = SymmetricEigen::new(q);
    let top = eig.eigenvalues.amax();
    let tol = 1e-12 * top.max(f64::MIN_POSITIVE);
    let scale = image_form.amax().max(f64::MIN_POSITIVE);
    let mut kept = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let u = eig.eigenvectors.column(i).into_owned();
        if lam > tol {
            kept.push((lam, u));
        } else if (u.transpose() * &image_form * &u)[0] > 1e-12 * scale {
            return Some(OpNorm { value: GaugeValue::lower_only(f64::INFINITY), backend: Backend::ExactEuclidean, witness: Some(u) });
        }
    }
    if kept.is_empty() {
        return Some(OpNorm { value: GaugeValue::exact(0.0), backend: Backend::ExactEuclidean, witness: None });
    }
    let basis = DMatrix::from_fn(mat.ncols(), kept.len(), |r, c| kept[c].1[r] / kept[c].0.sqrt());
    let reduced = basis.transpose() * &image_form * &basis;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let inner = SymmetricEigen::new(reduced);
    let (imax, lmax) = inner
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc });
    let witness = &basis * inner.eigenvectors.column(imax);
    Some(OpNorm { value: GaugeValue::exact(lmax.max(0.0).sqrt()), backend: Backend::ExactEuclidean, witness: Some(witness) })
}

struct Candidates {
    vectors: Vec<DVector<f64>>,
    source_profiles: Vec<Vec<f64>>,
    target_profiles: Vec<Vec<f64>>,
}

impl Candidates {
    fn build(a: &GradedOperator, opts: &NormOptions) -> Result<Self> {
        let dim = a.source().dim();
        let mut vectors: Vec<DVector<f64>> = (0..dim)
            .map(|k| {
                let mut e = DVector::zeros(dim);
                e[k] = 1.0;
                e
            })
            .collect();
        let mut r = rng::stream_rng(opts.seed, stream::HAMILTON);
        for i in 0..opts.samples {
            vectors.push(rng::mixed_decay(&mut r, dim, i % 4));
        }
        vectors.extend(extra_directions(dim, opts)?);
        let source_profiles = vectors.iter().map(|v| a.source().profile(v)).collect();
        let target_profiles = vectors.iter().map(|v| a.target().profile(&a.apply(v))).collect();
        Ok(Self { vectors, source_profiles, target_profiles })
    }
}

fn sampled(a: &GradedOperator, m: usize, n: usize, cand: &Candidates, opts: &NormOptions) -> OpNorm {
    let mut scored: Vec<(f64, usize)> = (0..cand.vectors.len())
        .map(|i| (ratio_from(cand.source_profiles[i][m], cand.target_profiles[i][n]), i))
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let (mut best, mut best_v) = (scored[0].0, cand.vectors[scored[0].1].clone());
    if best.is_finite() {
        let mut r = rng::stream_rng(opts.seed ^ ((m as u64) << 40 | (n as u64) << 20), stream::HAMILTON);
        for &(_, i) in scored.iter().take(opts.ascent_starts) {
            let (val, v) = ascend(a, m, n, cand.vectors[i].clone(), opts.ascent_steps, &mut r);
            if val > best {
                best = val;
                best_v = v;
            }
            if best.is_infinite() {
                break;
            }
        }
    }
    OpNorm { value: GaugeValue::lower_only(best), backend: Backend::Sampled, witness: Some(best_v) }
}

/// Stochastic hill climbing on `‖Av‖_n / ‖v‖_m`.
fn ascend<R: Rng + ?Sized>(a: &GradedOperator, m: usize, n: usize, start: DVector<f64>, steps: usize, r: &mut R) -> (f64, DVector<f64>) {
    let dim = start.len();
    let mut v = start;
    let mut val = hamilton_ratio(a, &v, m, n);
    let mut step = 0.5;
    for s in 0..steps {
        let dir = if s % 2 == 0 {
            rng::unit_direction(r, dim)
        } else {
            let mut e = DVector::zeros(dim);
            e[r.gen_range(0..dim)] = if r.gen::<bool>() { 1.0 } else { -1.0 };
            e
        };
        let cand = &v + dir * (step * v.norm());
        let cv = hamilton_ratio(a, &cand, m, n);
        if cv > val {
            v = cand;
            val = cv;
            step = (step * 1.5).min(4.0);
            if val.is_infinite() {
                break;
            }
        } else {
            step *= 0.6;
            if step < 1e-6 {
                step = 0.5;
            }
        }
    }
    let nv = v.norm().max(f64::MIN_POSITIVE);
    (val, v / nv)
}

/// Dyadic norms `‖A‖_{m,n}` over a grid of levels, all computed from one
/// shared direction set so that relations between levels are preserved.
///
/// `lower` is rigorous: each direction contributes a point of `B_{2^{-m}}`
/// and an outer-body bound on the target gauge. `upper` is the star-gauge
/// estimate over the same directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicTable {
    pub source_levels: Vec<usize>,
    pub target_levels: Vec<usize>,
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
    pub directions: usize,
    #[serde(skip)]
    argmax: Vec<Vec<usize>>,
    #[serde(skip)]
    direction_set: Vec<DVector<f64>>,
}

impl DyadicTable {
    fn index(levels: &[usize], l: usize) -> Result<usize> {
        levels
            .iter()
            .position(|x| *x == l)
            .ok_or_else(|| Error::InvalidParameter(format!("level {l} not in table")))
    }

    pub fn get(&self, m: usize, n: usize) -> Result<GaugeValue> {
        let (i, j) = (Self::index(&self.source_levels, m)?, Self::index(&self.target_levels, n)?);
        Ok(GaugeValue::bracket(self.lower[i][j], self.upper[i][j]))
    }

    pub fn lower_at(&self, m: usize, n: usize) -> Result<f64> {
        let (i, j) = (Self::index(&self.source_levels, m)?, Self::index(&self.target_levels, n)?);
        Ok(self.lower[i][j])
    }

    /// Point of `B_{2^{-m}}` direction (unit Euclidean) attaining the lower end.
    pub fn witness(&self, m: usize, n: usize) -> Result<DVector<f64>> {
        let (i, j) = (Self::index(&self.source_levels, m)?, Self::index(&self.target_levels, n)?);
        Ok(self.direction_set[self.argmax[i][j]].clone())
    }
}

pub(crate) fn dyadic_directions(dim: usize, opts: &NormOptions) -> Result<Vec<DVector<f64>>> {
    let mut dirs: Vec<DVector<f64>> = (0..dim)
        .map(|k| {
            let mut e = DVector::zeros(dim);
            e[k] = 1.0;
            e
        })
        .collect();
    let mut r = rng::stream_rng(opts.seed, stream::DYADIC_DIRECTIONS);
    for i in 0..opts.directions {
        let v = rng::mixed_decay(&mut r, dim, i % 4);
        let nv = v.norm();
        if nv > 0.0 {
            dirs.push(v / nv);
        }
    }
    dirs.extend(extra_directions(dim, opts)?);
    Ok(dirs)
}

pub fn dyadic_table(a: &GradedOperator, source_levels: &[usize], target_levels: &[usize], opts: &NormOptions) -> Result<DyadicTable> {
    let dirs = dyadic_directions(a.source().dim(), opts)?;
    dyadic_table_with(a, source_levels, target_levels, dirs)
}

pub(crate) fn dyadic_table_with(
    a: &GradedOperator,
    source_levels: &[usize],
    target_levels: &[usize],
    dirs: Vec<DVector<f64>>,
) -> Result<DyadicTable> {
    let (src, tgt): (&FrechetMetric, &FrechetMetric) = (a.source(), a.target());
    for &m in source_levels {
        check_level(m, src.dyadic_top())?;
    }
    for &n in target_levels {
        check_level(n, tgt.dyadic_top())?;
    }
    let (nm, nn) = (source_levels.len(), target_levels.len());
    let mut lower = vec![vec![0.0f64; nn]; nm];
    let mut upper = vec![vec![0.0f64; nn]; nm];
    let mut argmax = vec![vec![0usize; nn]; nm];
    for (d, u) in dirs.iter().enumerate() {
        let y = a.apply(u);
        let q = tgt.profile(&y);
        let bounds: Vec<(f64, f64)> = target_levels.iter().map(|&n| tgt.gauge_bounds_from_profile(&y, &q, n)).collect();
        if bounds.iter().all(|b| b.1 == 0.0) {
            continue;
        }
        let p = src.profile(u);
        for (i, &m) in source_levels.iter().enumerate() {
            let r = src.ray_radius(u, &p, 0.5f64.powi(m as i32));
            for (j, &(lo, up)) in bounds.iter().enumerate() {
                let (l, h) = (scale(r, lo), scale(r, up));
                if l > lower[i][j] {
                    lower[i][j] = l;
                    argmax[i][j] = d;
                }
                upper[i][j] = upper[i][j].max(h);
            }
        }
    }
    Ok(DyadicTable {
        source_levels: source_levels.to_vec(),
        target_levels: target_levels.to_vec(),
        lower,
        upper,
        directions: dirs.len(),
        argmax,
        direction_set: dirs,
    })
}

fn scale(r: f64, g: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        r * g
    }
}

pub(crate) fn dyadic_single(a: &GradedOperator, m: usize, n: usize, opts: &NormOptions) -> Result<OpNorm> {
    let t = dyadic_table(a, &[m], &[n], opts)?;
    let exact = a.source().dim() == 1 && a.target().dim() == 1;
    let value = if exact { GaugeValue::exact(t.upper[0][0]) } else { t.get(m, n)? };
    Ok(OpNorm { value, backend: if exact { Backend::ExactWeightedMax } else { Backend::Sampled }, witness: t.witness(m, n).ok() })
}
