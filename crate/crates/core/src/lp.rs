//! Small linear programs used by the gauge, containment and extension code.
//!
//! The simplex itself comes from `minilp`; this module only phrases the
//! handful of problem shapes the crate needs.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DVector;

use crate::error::{Error, Result};

/// Gauge of the symmetric polytope `conv(±points)` at `target`:
/// `min Σ|λ_i|` subject to `Σ λ_i x_i = target`. Returns `+∞` when `target`
/// lies outside the span of the points.
pub fn symmetric_hull_gauge(points: &[DVector<f64>], target: &DVector<f64>) -> Result<f64> {
    if points.is_empty() {
        return Ok(if target.iter().all(|x| *x == 0.0) { 0.0 } else { f64::INFINITY });
    }
    let dim = target.len();
    let mut pb = Problem::new(OptimizationDirection::Minimize);
    let mut vars = Vec::with_capacity(points.len());
    for _ in points {
        let plus = pb.add_var(1.0, (0.0, f64::INFINITY));
        let minus = pb.add_var(1.0, (0.0, f64::INFINITY));
        vars.push((plus, minus));
    }
    for c in 0..dim {
        let mut row = Vec::with_capacity(2 * points.len());
        for (p, (plus, minus)) in points.iter().zip(&vars) {
            if p[c] != 0.0 {
                row.push((*plus, p[c]));
                row.push((*minus, -p[c]));
            }
        }
        if row.is_empty() {
            if target[c].abs() > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        pb.add_constraint(row.as_slice(), ComparisonOp::Eq, target[c]);
    }
    match pb.solve() {
        Ok(sol) => Ok(sol.objective()),
        Err(minilp::Error::Infeasible) => Ok(f64::INFINITY),
        Err(e) => Err(Error::LinearProgram(e.to_string())),
    }
}

/// L1 distance from `point` to `conv(vertices)`: `min Σ|s|` with
/// `Σ λ_i x_i + s = point`, `λ ≥ 0`, `Σ λ_i = 1`.
pub fn hull_residual(vertices: &[DVector<f64>], point: &DVector<f64>) -> Result<f64> {
    if vertices.is_empty() {
        return Ok(f64::INFINITY);
    }
    let dim = point.len();
    let mut pb = Problem::new(OptimizationDirection::Minimize);
    let lambdas: Vec<_> = vertices.iter().map(|_| pb.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let slacks: Vec<_> = (0..dim)
        .map(|_| (pb.add_var(1.0, (0.0, f64::INFINITY)), pb.add_var(1.0, (0.0, f64::INFINITY))))
        .collect();
    let sum_row: Vec<_> = lambdas.iter().map(|l| (*l, 1.0)).collect();
    pb.add_constraint(sum_row.as_slice(), ComparisonOp::Eq, 1.0);
    for c in 0..dim {
        let mut row: Vec<_> = vertices
            .iter()
            .zip(&lambdas)
            .filter(|(v, _)| v[c] != 0.0)
            .map(|(v, l)| (*l, v[c]))
            .collect();
        row.push((slacks[c].0, 1.0));
        row.push((slacks[c].1, -1.0));
        pb.add_constraint(row.as_slice(), ComparisonOp::Eq, point[c]);
    }
    match pb.solve() {
        Ok(sol) => Ok(sol.objective()),
        Err(e) => Err(Error::LinearProgram(e.to_string())),
    }
}

/// Feasibility LP over a box of free variables: finds `x` with
/// `Σ_k coeffs[k]·x_k = rhs` and `Σ_k |x_k| ≤ 1` inside each group.
/// Groups partition the variables; returns `None` when infeasible.
pub fn grouped_l1_feasibility(
    coeffs: &[f64],
    groups: &[std::ops::Range<usize>],
    rhs: f64,
) -> Result<Option<Vec<f64>>> {
    let mut pb = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = coeffs
        .iter()
        .map(|_| (pb.add_var(1e-9, (0.0, f64::INFINITY)), pb.add_var(1e-9, (0.0, f64::INFINITY))))
        .collect();
    let mut eq = Vec::new();
    for (k, c) in coeffs.iter().enumerate() {
        if *c != 0.0 {
            eq.push((vars[k].0, *c));
            eq.push((vars[k].1, -*c));
        }
    }
    if eq.is_empty() {
        return Ok(if rhs == 0.0 { Some(vec![0.0; coeffs.len()]) } else { None });
    }
    pb.add_constraint(eq.as_slice(), ComparisonOp::Eq, rhs);
    for g in groups {
        let row: Vec<_> = g.clone().flat_map(|k| [(vars[k].0, 1.0), (vars[k].1, 1.0)]).collect();
        if !row.is_empty() {
            pb.add_constraint(row.as_slice(), ComparisonOp::Le, 1.0);
        }
    }
    match pb.solve() {
        Ok(sol) => Ok(Some(vars.iter().map(|(p, m)| sol[*p] - sol[*m]).collect())),
        Err(minilp::Error::Infeasible) => Ok(None),
        Err(e) => Err(Error::LinearProgram(e.to_string())),
    }
}
