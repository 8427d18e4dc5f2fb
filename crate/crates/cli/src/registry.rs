//! Builds the models and operators named in a config.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use sha2::{Digest, Sha256};
use tame_core::operators::GradedOperator;
use tame_core::witnesses::{
    build_euclidean_sequence_model, build_normed_model, build_scalar_model, build_scalar_sqrt_model, build_sequence_model,
    build_trig_model, level_blind_weights, multiplication_operator, polynomial_weights, product_weights, ModelSpace,
};
use tame_core::{Error, Result};

use crate::config::{ModelKindSpec, OperatorExpr, RunConfig, WeightFamily};

pub struct Registry {
    pub models: BTreeMap<String, ModelSpace>,
    pub operators: BTreeMap<String, GradedOperator>,
    /// Model ids in definition order, including multiplication targets.
    pub model_order: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelSummary {
    pub id: String,
    pub dim: usize,
    pub levels: usize,
    pub dyadic_top: usize,
    /// Hex SHA-256 of the grid (trig models) and of the level descriptions.
    pub checksum: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorSummary {
    pub id: String,
    pub source: String,
    pub target: String,
    pub rows: usize,
    pub cols: usize,
    /// Hex SHA-256 of the row-major matrix entries.
    pub checksum: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn matrix_checksum(m: &DMatrix<f64>) -> String {
    let mut h = Sha256::new();
    h.update((m.nrows() as u64).to_le_bytes());
    h.update((m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            h.update(m[(i, j)].to_le_bytes());
        }
    }
    hex(&h.finalize())
}

fn model_checksum(model: &ModelSpace) -> String {
    let mut h = Sha256::new();
    h.update(model.id().0.as_bytes());
    if let Some(basis) = model.trig() {
        for t in basis.grid() {
            h.update(t.to_le_bytes());
        }
    }
    let kind = serde_json::to_vec(model.kind()).unwrap_or_default();
    h.update(&kind);
    hex(&h.finalize())
}

fn build_model(id: &str, kind: &ModelKindSpec) -> Result<ModelSpace> {
    match *kind {
        ModelKindSpec::Trig { modes, levels, grid } => build_trig_model(id, modes, levels, grid),
        ModelKindSpec::Sequence { dim, levels, weights, euclidean } => {
            let w = match weights {
                WeightFamily::Polynomial => polynomial_weights(dim, levels),
                WeightFamily::Product => product_weights(dim, levels),
                WeightFamily::LevelBlind => level_blind_weights(dim, levels),
            };
            if euclidean {
                build_euclidean_sequence_model(id, dim, w)
            } else {
                build_sequence_model(id, dim, w)
            }
        }
        ModelKindSpec::Scalar { levels } => build_scalar_model(id, levels),
        ModelKindSpec::ScalarSqrt => build_scalar_sqrt_model(id),
        ModelKindSpec::Normed { dim, euclidean } => build_normed_model(id, dim, euclidean),
    }
}

impl Registry {
    /// Builds every model, then every operator in order.
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        let mut reg = Registry { models: BTreeMap::new(), operators: BTreeMap::new(), model_order: Vec::new() };
        for m in &cfg.models {
            let model = build_model(&m.id, &m.kind).map_err(|e| e.context(format!("model `{}`", m.id)))?;
            reg.models.insert(m.id.clone(), model);
            reg.model_order.push(m.id.clone());
        }
        for op in &cfg.operators {
            let built = reg.build_operator(&op.expr).map_err(|e| e.context(format!("operator `{}`", op.id)))?;
            reg.operators.insert(op.id.clone(), built);
        }
        Ok(reg)
    }

    pub fn model(&self, id: &str) -> Result<&ModelSpace> {
        self.models.get(id).ok_or_else(|| Error::InvalidParameter(format!("undefined model `{id}`")))
    }

    pub fn operator(&self, id: &str) -> Result<&GradedOperator> {
        self.operators.get(id).ok_or_else(|| Error::InvalidParameter(format!("undefined operator `{id}`")))
    }

    fn build_operator(&mut self, expr: &OperatorExpr) -> Result<GradedOperator> {
        match expr {
            OperatorExpr::Derivative { model, order } => self.model(model)?.derivative(*order),
            OperatorExpr::Identity { model } => Ok(self.model(model)?.identity()),
            OperatorExpr::Zero { source, target } => {
                Ok(GradedOperator::zero(self.model(source)?.metric().clone(), self.model(target)?.metric().clone()))
            }
            OperatorExpr::Diagonal { model, entries } => {
                let m = self.model(model)?;
                if entries.len() != m.dim() {
                    return Err(Error::Dimension { expected: m.dim(), got: entries.len() });
                }
                let d = DMatrix::from_diagonal(&DVector::from_column_slice(entries));
                GradedOperator::new(d, m.metric().clone(), m.metric().clone())
            }
            OperatorExpr::Matrix { source, target, rows } => {
                let (s, t) = (self.model(source)?, self.model(target)?);
                if rows.len() != t.dim() {
                    return Err(Error::Dimension { expected: t.dim(), got: rows.len() });
                }
                if let Some(bad) = rows.iter().find(|r| r.len() != s.dim()) {
                    return Err(Error::Dimension { expected: s.dim(), got: bad.len() });
                }
                let m = DMatrix::from_fn(t.dim(), s.dim(), |i, j| rows[i][j]);
                GradedOperator::new(m, s.metric().clone(), t.metric().clone())
            }
            OperatorExpr::Multiply { model, coefficients, target } => {
                let g = DVector::from_column_slice(coefficients);
                let (op, space) = multiplication_operator(self.model(model)?, &g, target.clone())?;
                self.models.insert(target.clone(), space);
                self.model_order.push(target.clone());
                Ok(op)
            }
            OperatorExpr::Scale { of, factor } => Ok(self.operator(of)?.scaled(*factor)),
            OperatorExpr::Sum { of } => {
                let mut acc = self.operator(&of[0])?.clone();
                for id in &of[1..] {
                    acc = acc.add(self.operator(id)?)?;
                }
                Ok(acc)
            }
            OperatorExpr::Compose { of } => {
                let mut acc = self.operator(&of[0])?.clone();
                for id in &of[1..] {
                    acc = acc.then(self.operator(id)?)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn model_summaries(&self) -> Vec<ModelSummary> {
        self.model_order
            .iter()
            .map(|id| {
                let m = &self.models[id];
                ModelSummary {
                    id: id.clone(),
                    dim: m.dim(),
                    levels: m.metric().n_max() + 1,
                    dyadic_top: m.metric().dyadic_top(),
                    checksum: model_checksum(m),
                }
            })
            .collect()
    }

    pub fn operator_summaries(&self, order: &[String]) -> Vec<OperatorSummary> {
        order
            .iter()
            .filter_map(|id| self.operators.get(id).map(|op| (id, op)))
            .map(|(id, op)| OperatorSummary {
                id: id.clone(),
                source: op.source().id().0.clone(),
                target: op.target().id().0.clone(),
                rows: op.matrix().nrows(),
                cols: op.matrix().ncols(),
                checksum: matrix_checksum(op.matrix()),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn algebra_builds_and_composes() {
        let cfg = parse_config(
            r#"
version = 1
seed = 1
[[models]]
id = "t"
kind = "trig"
modes = 3
levels = 2
[[operators]]
id = "d"
op = "derivative"
model = "t"
[[operators]]
id = "dd"
op = "compose"
of = ["d", "d"]
[[operators]]
id = "g"
op = "multiply"
model = "t"
coefficients = [1.0, 0.5, 0.0]
target = "t2"
[[operators]]
id = "s"
op = "sum"
of = ["d", "dd"]
"#,
        )
        .unwrap();
        let reg = Registry::build(&cfg).unwrap();
        let d = reg.operator("d").unwrap().matrix().clone();
        assert!((reg.operator("dd").unwrap().matrix() - &d * &d).amax() < 1e-12);
        assert_eq!(reg.model("t2").unwrap().dim(), 2 * 4 + 1);
        assert!((reg.operator("s").unwrap().matrix() - (&d + &d * &d)).amax() < 1e-12);
        assert_eq!(reg.model_summaries().len(), 2);
        assert_eq!(reg.model_summaries()[0].checksum, Registry::build(&cfg).unwrap().model_summaries()[0].checksum);
    }

    #[test]
    fn matrix_shape_is_checked() {
        let cfg = parse_config(
            r#"
version = 1
seed = 1
[[models]]
id = "n"
kind = "normed"
dim = 2
[[operators]]
id = "a"
op = "matrix"
source = "n"
target = "n"
rows = [[1.0, 2.0]]
"#,
        )
        .unwrap();
        assert!(Registry::build(&cfg).is_err());
    }
}
