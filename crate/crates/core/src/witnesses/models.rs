use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded_space::{
    FrechetMetric, GradedVector, GradingConfig, MetricMode, ModelId, Phi, Seminorm, SeminormFamily, TrigBasis,
};
use crate::operators::GradedOperator;

/// Dyadic radii offered on normed (single-level) models.
pub const NORMED_DYADIC_TOP: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Trig { modes: usize, levels: usize, grid: usize },
    Sequence { dim: usize, level_weights: Vec<Vec<f64>>, euclidean: bool },
    Scalar { levels: usize },
    ScalarSqrt,
}

/// A concrete model space: coordinates, grading tower and metric.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    kind: ModelKind,
    metric: Arc<FrechetMetric>,
    trig: Option<Arc<TrigBasis>>,
}

impl ModelSpace {
    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn id(&self) -> &ModelId {
        self.metric.id()
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn metric(&self) -> &Arc<FrechetMetric> {
        &self.metric
    }

    pub fn trig(&self) -> Option<&Arc<TrigBasis>> {
        self.trig.as_ref()
    }

    pub fn vector(&self, coords: DVector<f64>) -> Result<GradedVector> {
        let v = GradedVector::new(coords, self.id().clone())?;
        self.metric.check(&v)?;
        Ok(v)
    }

    pub fn zero(&self) -> GradedVector {
        GradedVector { coords: DVector::zeros(self.dim()), model_id: self.id().clone() }
    }

    pub fn basis_vector(&self, k: usize) -> GradedVector {
        let mut c = DVector::zeros(self.dim());
        c[k] = 1.0;
        GradedVector { coords: c, model_id: self.id().clone() }
    }

    fn require_trig(&self) -> Result<&Arc<TrigBasis>> {
        self.trig.as_ref().ok_or_else(|| Error::Unsupported(format!("model `{}` is not trigonometric", self.id())))
    }

    pub fn differentiation_matrix(&self) -> Result<DMatrix<f64>> {
        Ok(self.require_trig()?.differentiation_matrix())
    }

    /// `f ↦ f^{(order)}(t)` as a row functional.
    pub fn point_evaluation(&self, t: f64, order: usize) -> Result<DVector<f64>> {
        let basis = self.require_trig()?;
        let dm = basis.differentiation_matrix();
        let mut row = basis.evaluation_functional(t);
        for _ in 0..order {
            row = dm.transpose() * row;
        }
        Ok(row)
    }

    /// The coordinate functional `d_n(a) = a_n`.
    pub fn coordinate_functional(&self, n: usize) -> Result<DVector<f64>> {
        if n >= self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: n + 1 });
        }
        let mut row = DVector::zeros(self.dim());
        row[n] = 1.0;
        Ok(row)
    }

    pub fn trig_sin(&self, k: usize) -> Result<GradedVector> {
        let basis = self.require_trig()?;
        if k == 0 || k > basis.modes() {
            return Err(Error::InvalidParameter(format!("mode {k} outside 1..={}", basis.modes())));
        }
        self.vector(basis.pure_sin(k))
    }

    /// `∂_t` as an operator from this trig model to itself.
    pub fn derivative(&self, order: usize) -> Result<GradedOperator> {
        let dm = self.differentiation_matrix()?;
        let mut m = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..order {
            m = &dm * m;
        }
        GradedOperator::new(m, self.metric.clone(), self.metric.clone())
    }

    pub fn identity(&self) -> GradedOperator {
        GradedOperator::identity(self.metric.clone())
    }
}

/// Trigonometric truncation of `C^∞([0,1])` with the cumulative grading
/// `‖f‖_k = max_{j≤k} sup |f^{(j)}|`, `k = 0..=levels`.
pub fn build_trig_model(id: impl Into<String>, modes: usize, levels: usize, grid: usize) -> Result<ModelSpace> {
    let basis = Arc::new(TrigBasis::new(modes, grid)?);
    let tower = SeminormFamily::new(
        (0..=levels).map(|order| Seminorm::SupDerivative { basis: basis.clone(), order }).collect(),
        true,
    )?;
    let metric = FrechetMetric::new(
        ModelId::new(id),
        tower,
        GradingConfig::dyadic(levels, Phi::Rational),
        MetricMode::SumForm,
    )?;
    Ok(ModelSpace {
        kind: ModelKind::Trig { modes, levels, grid },
        metric: Arc::new(metric),
        trig: Some(basis),
    })
}

/// Sequence truncation of `ℝ^ℕ` with `‖v‖_n = max_k w_{n,k} |v_k|`.
/// `level_weights[n][k]` holds `w_{n,k}`.
pub fn build_sequence_model(id: impl Into<String>, dim: usize, level_weights: Vec<Vec<f64>>) -> Result<ModelSpace> {
    build_sequence(id.into(), dim, level_weights, false)
}

/// As [`build_sequence_model`] but with `‖v‖_n² = Σ_k w_{n,k}² v_k²`, which
/// keeps every level Euclidean and so admits exact operator norms.
pub fn build_euclidean_sequence_model(
    id: impl Into<String>,
    dim: usize,
    level_weights: Vec<Vec<f64>>,
) -> Result<ModelSpace> {
    build_sequence(id.into(), dim, level_weights, true)
}

fn build_sequence(id: String, dim: usize, level_weights: Vec<Vec<f64>>, euclidean: bool) -> Result<ModelSpace> {
    if level_weights.is_empty() {
        return Err(Error::InvalidParameter("need at least one level".into()));
    }
    let mut levels = Vec::with_capacity(level_weights.len());
    for (n, row) in level_weights.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Dimension { expected: dim, got: row.len() });
        }
        if row.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("level {n}: weights must be finite and ≥ 0")));
        }
        let w = DVector::from_column_slice(row);
        levels.push(if euclidean {
            Seminorm::WeightedEuclidean { form: DMatrix::from_diagonal(&w.map(|x| x * x)) }
        } else {
            Seminorm::WeightedMax { weights: w }
        });
    }
    let top = levels.len() - 1;
    let tower = SeminormFamily::new(levels, true)?;
    let metric = FrechetMetric::new(ModelId::new(id), tower, GradingConfig::dyadic(top, Phi::Rational), MetricMode::SumForm)?;
    Ok(ModelSpace {
        kind: ModelKind::Sequence { dim, level_weights, euclidean },
        metric: Arc::new(metric),
        trig: None,
    })
}

/// `w_{n,k} = (k+1)^n`.
pub fn polynomial_weights(dim: usize, top: usize) -> Vec<Vec<f64>> {
    (0..=top).map(|n| (0..dim).map(|k| ((k + 1) as f64).powi(n as i32)).collect()).collect()
}

/// The product-topology seminorms `‖v‖_n = max_{k≤n} |v_k|`.
pub fn product_weights(dim: usize, top: usize) -> Vec<Vec<f64>> {
    (0..=top).map(|n| (0..dim).map(|k| if k <= n { 1.0 } else { 0.0 }).collect()).collect()
}

/// Level-blind grading: every level is `max_k |v_k|`.
pub fn level_blind_weights(dim: usize, top: usize) -> Vec<Vec<f64>> {
    vec![vec![1.0; dim]; top + 1]
}

/// `ℝ` with `|x|` at every level and the sum-form metric.
pub fn build_scalar_model(id: impl Into<String>, levels: usize) -> Result<ModelSpace> {
    let tower = SeminormFamily::level_blind(DVector::from_element(1, 1.0), levels)?;
    let metric = FrechetMetric::new(ModelId::new(id), tower, GradingConfig::dyadic(levels, Phi::Rational), MetricMode::SumForm)?
        .with_dyadic_top(NORMED_DYADIC_TOP);
    Ok(ModelSpace { kind: ModelKind::Scalar { levels }, metric: Arc::new(metric), trig: None })
}

/// `ℝ` with `d(x, y) = sqrt|x − y|`, the standard non-strict line.
pub fn build_scalar_sqrt_model(id: impl Into<String>) -> Result<ModelSpace> {
    let tower = SeminormFamily::level_blind(DVector::from_element(1, 1.0), 0)?;
    let metric = FrechetMetric::new(ModelId::new(id), tower, GradingConfig::dyadic(0, Phi::Rational), MetricMode::SqrtScalar)?
        .with_dyadic_top(NORMED_DYADIC_TOP);
    Ok(ModelSpace { kind: ModelKind::ScalarSqrt, metric: Arc::new(metric), trig: None })
}

/// A single-level normed model `(ℝ^dim, ‖·‖)` where `‖·‖` is Euclidean
/// (`euclidean = true`) or the max norm.
pub fn build_normed_model(id: impl Into<String>, dim: usize, euclidean: bool) -> Result<ModelSpace> {
    let level = if euclidean {
        Seminorm::WeightedEuclidean { form: DMatrix::identity(dim, dim) }
    } else {
        Seminorm::WeightedMax { weights: DVector::from_element(dim, 1.0) }
    };
    let tower = SeminormFamily::new(vec![level], true)?;
    let metric = FrechetMetric::new(ModelId::new(id), tower, GradingConfig::dyadic(0, Phi::Rational), MetricMode::SumForm)?
        .with_dyadic_top(NORMED_DYADIC_TOP);
    Ok(ModelSpace {
        kind: ModelKind::Sequence { dim, level_weights: vec![vec![1.0; dim]], euclidean },
        metric: Arc::new(metric),
        trig: None,
    })
}

/// Multiplication by the trig polynomial `g` (coefficients on a model with
/// `g_modes` modes), from `source` into a freshly built model with
/// `modes + g_modes` modes so that no product term is dropped.
pub fn multiplication_operator(source: &ModelSpace, g: &DVector<f64>, target_id: impl Into<String>) -> Result<(GradedOperator, ModelSpace)> {
    let basis = source.require_trig()?;
    let ModelKind::Trig { modes, levels, .. } = *source.kind() else { unreachable!() };
    if g.len() % 2 == 0 {
        return Err(Error::InvalidParameter("trig coefficient vector must have odd length".into()));
    }
    let g_modes = (g.len() - 1) / 2;
    let out_modes = modes + g_modes;
    let target = build_trig_model(target_id, out_modes, levels, 4 * out_modes.max(1))?;
    let mut m = DMatrix::zeros(2 * out_modes + 1, basis.dim());
    // Product of basis functions, expressed in the target basis.
    let add = |m: &mut DMatrix<f64>, row_freq: i64, is_sin: bool, sign: f64, col: usize, coef: f64| {
        let f = row_freq.unsigned_abs() as usize;
        if f == 0 {
            if !is_sin {
                m[(0, col)] += sign * coef;
            }
            return;
        }
        if is_sin {
            // sin(−f t) = −sin(f t)
            let s = if row_freq < 0 { -1.0 } else { 1.0 };
            m[(TrigBasis::sin_index(f), col)] += s * sign * coef;
        } else {
            m[(TrigBasis::cos_index(f), col)] += sign * coef;
        }
    };
    for gi in 0..g.len() {
        let gc = g[gi];
        if gc == 0.0 {
            continue;
        }
        let (a, a_sin) = (TrigBasis::frequency(gi) as i64, gi != 0 && gi % 2 == 0);
        for col in 0..basis.dim() {
            let (b, b_sin) = (TrigBasis::frequency(col) as i64, col != 0 && col % 2 == 0);
            match (a_sin, b_sin) {
                // cos a cos b = ½[cos(a−b) + cos(a+b)]
                (false, false) => {
                    if a == 0 || b == 0 {
                        add(&mut m, a + b, false, 1.0, col, gc);
                    } else {
                        add(&mut m, a - b, false, 0.5, col, gc);
                        add(&mut m, a + b, false, 0.5, col, gc);
                    }
                }
                // sin a cos b = ½[sin(a+b) + sin(a−b)]
                (true, false) | (false, true) => {
                    let (s, c) = if a_sin { (a, b) } else { (b, a) };
                    if c == 0 {
                        add(&mut m, s, true, 1.0, col, gc);
                    } else {
                        add(&mut m, s + c, true, 0.5, col, gc);
                        add(&mut m, s - c, true, 0.5, col, gc);
                    }
                }
                // sin a sin b = ½[cos(a−b) − cos(a+b)]
                (true, true) => {
                    add(&mut m, a - b, false, 0.5, col, gc);
                    add(&mut m, a + b, false, -0.5, col, gc);
                }
            }
        }
    }
    let op = GradedOperator::new(m, source.metric.clone(), target.metric.clone())?;
    Ok((op, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_model_grading_on_constants_and_modes() {
        let model = build_trig_model("trig", 16, 4, 64).unwrap();
        let c = model.vector(DVector::from_fn(model.dim(), |i, _| if i == 0 { -2.5 } else { 0.0 })).unwrap();
        assert_eq!(model.metric().profile(&c.coords), vec![2.5; 5]);
        // sup over [0,1] of sin(t) is sin(1); its derivatives peak at 1.
        let s = model.trig_sin(1).unwrap();
        let p = model.metric().profile(&s.coords);
        let dense = (0..=100_000).map(|i| (i as f64 / 100_000.0).sin().abs()).fold(0.0, f64::max);
        assert!((p[0] - dense).abs() < 1e-9);
        assert!((p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequence_model_coordinates() {
        let model = build_sequence_model("seq", 5, polynomial_weights(5, 3)).unwrap();
        for k in 0..5 {
            let e = model.basis_vector(k);
            let p = model.metric().profile(&e.coords);
            for (n, pn) in p.iter().enumerate() {
                assert_eq!(*pn, ((k + 1) as f64).powi(n as i32));
            }
            for n in 0..5 {
                let d = model.coordinate_functional(n).unwrap();
                assert_eq!(d.dot(&e.coords), if n == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn point_evaluation_is_exact_on_basis_functions() {
        let model = build_trig_model("trig", 8, 3, 32).unwrap();
        let t = 0.3;
        for k in 1..=4 {
            let s = model.trig_sin(k).unwrap();
            let kf = k as f64;
            let e1 = model.point_evaluation(t, 1).unwrap().dot(&s.coords);
            assert!((e1 - kf * (kf * t).cos()).abs() < 1e-10);
            let e2 = model.point_evaluation(t, 2).unwrap().dot(&s.coords);
            assert!((e2 + kf * kf * (kf * t).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn multiplication_matches_pointwise_product() {
        let model = build_trig_model("trig", 4, 2, 16).unwrap();
        let mut g = DVector::zeros(5);
        g[0] = 1.0;
        g[TrigBasis::cos_index(1)] = 0.5;
        g[TrigBasis::sin_index(2)] = -0.25;
        let (op, target) = multiplication_operator(&model, &g, "trig_out").unwrap();
        let gb = TrigBasis::new(2, 8).unwrap();
        let fb = model.trig().unwrap();
        let tb = target.trig().unwrap();
        let f = DVector::from_fn(model.dim(), |i, _| 0.3 * (i as f64 + 1.0).cos());
        let prod = op.apply(&f);
        for t in [0.0, 0.17, 0.5, 0.93] {
            let expected = gb.eval(&g, t) * fb.eval(&f, t);
            assert!((tb.eval(&prod, t) - expected).abs() < 1e-12);
        }
    }
}
